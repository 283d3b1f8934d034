pub mod ctoq;
pub mod error;
pub mod haarhp;
pub mod linop;
pub mod par;
pub mod ppgm;
pub mod qcore;
pub mod random;
pub mod suites;
pub mod tol;

pub use error::{Error, Result};
pub use linop::{Operator, C64};
pub use tol::Tolerances;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
