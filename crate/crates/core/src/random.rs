//! Random instances: Ginibre matrices, Haar unitaries, states, channels, POVMs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linop::{self, orthonormal_columns, Mat, Operator, C64};
use crate::qcore::{Channel, OrthoBasis, Povm};
use crate::tol::Tolerances;

pub type Rng64 = ChaCha8Rng;

/// Generator for stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Matrix with i.i.d. standard complex Gaussian entries (E|z|² = 1).
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal phases absorbed.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    Operator::from_mat(orthonormal_columns(&ginibre(d, d, rng)))
}

/// Haar-random isometry din → dout (first din columns of a Haar unitary).
pub fn random_isometry<R: Rng + ?Sized>(din: usize, dout: usize, rng: &mut R) -> Result<Mat> {
    if din > dout {
        return Err(Error::Dim(format!("no isometry from {din} into {dout} dimensions")));
    }
    Ok(orthonormal_columns(&ginibre(dout, din, rng)))
}

pub fn random_basis<R: Rng + ?Sized>(d: usize, rng: &mut R) -> OrthoBasis {
    OrthoBasis::new(orthonormal_columns(&ginibre(d, d, rng)), &Tolerances::default())
        .expect("QR output is orthonormal")
}

/// Density operator G G†/tr(G G†) with G of size d × rank.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Operator {
    let g = ginibre(d, rank.max(1), rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    Operator::from_mat(rho * C64::new(1.0 / tr, 0.0)).hermitian_part()
}

/// Random channel din → dout with `n_kraus` Kraus operators sliced from a random isometry.
pub fn random_channel<R: Rng + ?Sized>(din: usize, dout: usize, n_kraus: usize, rng: &mut R) -> Result<Channel> {
    let n = n_kraus.max(1);
    if n * dout < din {
        return Err(Error::Dim(format!("{n} Kraus operators of size {dout}x{din} cannot be trace preserving")));
    }
    let v = random_isometry(din, n * dout, rng)?;
    let kraus = (0..n)
        .map(|k| Operator::from_mat(v.rows(k * dout, dout).into_owned()))
        .collect();
    Channel::new(kraus, &Tolerances::default())
}

/// Random POVM: M_j = S^{-1/2} G_j S^{-1/2} with G_j = A_j A_j† Ginibre and S = Σ G_j.
pub fn random_povm<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<Povm> {
    let tol = Tolerances::default();
    let gs: Vec<Mat> = (0..m)
        .map(|_| {
            let a = ginibre(d, d, rng);
            &a * a.adjoint()
        })
        .collect();
    let s = gs.iter().fold(Mat::zeros(d, d), |acc, g| acc + g);
    let s_inv_half = linop::func_on_support(&Operator::from_mat(s), |x| x.powf(-0.5), tol.rank_tol(d), &tol)?;
    let elements = gs
        .iter()
        .map(|g| Operator::from_mat(s_inv_half.data() * g * s_inv_half.data()).hermitian_part())
        .collect();
    Povm::new(elements, &tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_unitary() {
        let mut rng = stream_rng(7, 0);
        for d in [1, 2, 16] {
            let u = haar_unitary(d, &mut rng);
            let g = u.data().adjoint() * u.data();
            let defect = (g - Mat::identity(d, d)).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
            assert!(defect < 1e-10);
        }
        let u = haar_unitary(1, &mut rng);
        assert!((u.data()[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn streams_differ_and_repeat() {
        let a = ginibre(2, 2, &mut stream_rng(1, 0));
        let b = ginibre(2, 2, &mut stream_rng(1, 1));
        let c = ginibre(2, 2, &mut stream_rng(1, 0));
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn random_objects_are_valid() {
        let mut rng = stream_rng(3, 0);
        let ch = random_channel(3, 4, 2, &mut rng).unwrap();
        assert!(ch.tp_defect() < 1e-12);
        let p = random_povm(4, 3, &mut rng).unwrap();
        assert_eq!(p.len(), 3);
        let rho = random_density(5, 2, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(random_channel(4, 1, 2, &mut rng).is_err());
    }
}
