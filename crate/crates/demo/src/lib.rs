//! Browser demo. Each operation has a plain Rust form returning JSON (used by
//! the native tests) and a `wasm_bindgen` export used by `www/index.html`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ctoq::ctoq::{corollary1_bound, theorem1_report};
use ctoq::haarhp::{derived_quantities, run_experiment, summarize, theorem3_bound, HpConfig, XiSpec};
use ctoq::ppgm::build_ppgm;
use ctoq::qcore::{Channel, OrthoBasis};
use ctoq::random::{random_channel, stream_rng};
use ctoq::Tolerances;

/// Largest N + k the page will simulate.
pub const MAX_QUBITS: usize = 6;

#[derive(Debug, Serialize, PartialEq)]
pub struct CurvePoint {
    pub p: f64,
    pub delta_e: f64,
    pub delta_f: f64,
    pub delta_q: f64,
    pub theorem1: f64,
    pub corollary1: f64,
}

fn noise_channel(kind: &str, d: usize, seed: u64) -> Result<Channel, String> {
    match kind {
        "depolarizing" => Ok(Channel::fully_depolarizing(&[d])),
        "dephasing" => Ok(Channel::dephasing(&OrthoBasis::computational(d))),
        "random" => random_channel(d, d, 2, &mut stream_rng(seed, 0)).map_err(|e| e.to_string()),
        other => Err(format!("unknown noise '{other}'")),
    }
}

/// Δ_q of the C-to-Q decoder and its bounds along T_p = (1−p)·id + p·N, with
/// pPGM decoders in the computational (E) and Fourier (F) bases.
pub fn theorem1_curve_points(d: usize, noise: &str, steps: usize, seed: u64) -> Result<Vec<CurvePoint>, String> {
    if !(2..=5).contains(&d) {
        return Err("d must be between 2 and 5".into());
    }
    if !(1..=50).contains(&steps) {
        return Err("steps must be between 1 and 50".into());
    }
    let tol = Tolerances::default();
    let n = noise_channel(noise, d, seed)?;
    let id = Channel::identity(&[d]);
    let e = OrthoBasis::computational(d);
    let f = OrthoBasis::fourier(d);
    (0..=steps)
        .map(|i| {
            let p = i as f64 / steps as f64;
            let t = Channel::mix(&[id.clone(), n.clone()], &[1.0 - p, p], &tol).map_err(|e| e.to_string())?;
            let pe = build_ppgm(&t, &e, &tol).map_err(|e| e.to_string())?.povm;
            let pf = build_ppgm(&t, &f, &tol).map_err(|e| e.to_string())?.povm;
            let r = theorem1_report(&t, &pe, &pf, &e, &f, &tol).map_err(|e| e.to_string())?;
            Ok(CurvePoint {
                p,
                delta_e: r.delta_cl_e,
                delta_f: r.delta_cl_f,
                delta_q: r.delta_q,
                theorem1: r.bound_thm1,
                corollary1: corollary1_bound(r.delta_cl_e, r.delta_cl_f),
            })
        })
        .collect()
}

fn xi_spec(xi: &str) -> Result<XiSpec, String> {
    match xi {
        "pure" => Ok(XiSpec::Pure),
        "maximally_mixed" => Ok(XiSpec::MaximallyMixed),
        other => Err(format!("unknown initial state '{other}'")),
    }
}

fn check_size(n_bh: usize, n_msg: usize) -> Result<(), String> {
    if n_bh == 0 || n_msg == 0 || n_bh + n_msg > MAX_QUBITS {
        return Err(format!("need N, k >= 1 and N + k <= {MAX_QUBITS}"));
    }
    Ok(())
}

#[derive(Debug, Serialize, PartialEq)]
pub struct SweepRow {
    pub ell: usize,
    pub delta_cl_x: f64,
    pub delta_cl_z: f64,
    pub delta_q: f64,
    pub delta_q_se: f64,
    pub pairwise_overlap: f64,
    pub closed_form: f64,
}

/// Trial means for every radiation size ℓ = 0..N+k.
pub fn hp_sweep_rows(n_bh: usize, n_msg: usize, xi: &str, trials: usize, seed: u64) -> Result<Vec<SweepRow>, String> {
    check_size(n_bh, n_msg)?;
    if !(1..=200).contains(&trials) {
        return Err("trials must be between 1 and 200".into());
    }
    let tol = Tolerances::default();
    let xi = xi_spec(xi)?;
    (0..=n_bh + n_msg)
        .map(|l| {
            let cfg = HpConfig::new(n_bh, n_msg, l, &xi, seed, trials).map_err(|e| e.to_string())?;
            let out = run_experiment(&cfg, &tol).map_err(|e| e.to_string())?;
            let s = summarize(&cfg, &out);
            Ok(SweepRow {
                ell: l,
                delta_cl_x: s.delta_cl_x.mean,
                delta_cl_z: s.delta_cl_z.mean,
                delta_q: s.delta_q.mean,
                delta_q_se: s.delta_q.std_err,
                pairwise_overlap: s.pairwise_overlap.mean,
                closed_form: s.closed_form,
            })
        })
        .collect()
}

#[derive(Debug, Serialize, PartialEq)]
pub struct BoundRow {
    pub ell: usize,
    pub ell_th: f64,
    pub first_term: f64,
    pub log2_delta: f64,
    pub cl_bound: f64,
    pub q_bound: f64,
    pub vacuous: bool,
}

pub fn theorem3_rows(n_bh: usize, n_msg: usize, xi: &str, epsilon: f64) -> Result<Vec<BoundRow>, String> {
    if n_bh == 0 || n_msg == 0 || n_bh + n_msg > 30 {
        return Err("need N, k >= 1 and N + k <= 30".into());
    }
    let tol = Tolerances::default();
    let xi = xi_spec(xi)?;
    (0..=n_bh + n_msg)
        .map(|l| {
            // the bound only needs ξ's spectrum, so one trial is a placeholder
            let cfg = HpConfig::new(n_bh, n_msg, l, &xi, 0, 1).map_err(|e| e.to_string())?;
            let b = theorem3_bound(&cfg, epsilon, &tol).map_err(|e| e.to_string())?;
            Ok(BoundRow {
                ell: l,
                ell_th: derived_quantities(&cfg, &tol).ell_th,
                first_term: b.first_term,
                log2_delta: b.log2_delta,
                cl_bound: b.cl_bound,
                q_bound: b.q_bound,
                vacuous: b.vacuous,
            })
        })
        .collect()
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn theorem1_curve(d: usize, noise: &str, steps: usize, seed: u32) -> Result<String, JsError> {
    to_js(theorem1_curve_points(d, noise, steps, seed as u64))
}

#[wasm_bindgen]
pub fn hp_sweep(n_bh: usize, n_msg: usize, xi: &str, trials: usize, seed: u32) -> Result<String, JsError> {
    to_js(hp_sweep_rows(n_bh, n_msg, xi, trials, seed as u64))
}

#[wasm_bindgen]
pub fn theorem3_table(n_bh: usize, n_msg: usize, xi: &str, epsilon: f64) -> Result<String, JsError> {
    to_js(theorem3_rows(n_bh, n_msg, xi, epsilon))
}
