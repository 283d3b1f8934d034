//! Hayden-Preskill decoding experiments with Haar-random scrambling.
//!
//! Layout: S = A ⊗ B_in with A the k message qubits and B_in the N black-hole
//! qubits. The last ℓ qubits of S are radiated (S_rad); the rest is S_in.
//! B_rad purifies ξ on B_in. The channel A → C = B_rad ⊗ S_rad is
//! ρ ↦ tr_{S_in}[U(ρ ⊗ ξ^{B_in B_rad})U†].

use serde::{Deserialize, Serialize};

use crate::ctoq::CtoQMap;
use crate::error::{Error, Result};
use crate::linop::{self, eig_hermitian_unchecked, Mat, Operator, Vector};
use crate::ppgm::{appendix_b_bound, build_ppgm, pairwise_overlap, prop2_bound, PpgmBundle, Prop2Bound};
use crate::qcore::{collision_entropy, pauli_basis, purify_ket, Channel, OrthoBasis, PauliKind};
use crate::par::{map_indexed, try_map_indexed};
use crate::random::stream_rng;
use crate::tol::Tolerances;

pub use crate::random::haar_unitary;

/// Initial black-hole state ξ^{B_in} by spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum XiSpec {
    Pure,
    MaximallyMixed,
    /// Eigenvalues (padded with zeros to 2^N), diagonal in the computational basis.
    Mixed(Vec<f64>),
}

impl XiSpec {
    pub fn operator(&self, n_bh: usize) -> Result<Operator> {
        let dim = 1usize << n_bh;
        let mut diag = vec![0.0; dim];
        match self {
            XiSpec::Pure => diag[0] = 1.0,
            XiSpec::MaximallyMixed => diag.iter_mut().for_each(|x| *x = 1.0 / dim as f64),
            XiSpec::Mixed(w) => {
                if w.len() > dim {
                    return Err(Error::Config(format!("spectrum has {} entries but ξ has dimension {dim}", w.len())));
                }
                if w.iter().any(|x| !(*x >= 0.0)) {
                    return Err(Error::Config("spectrum entries must be nonnegative".into()));
                }
                let s: f64 = w.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!("spectrum sums to {s}, expected 1")));
                }
                diag[..w.len()].copy_from_slice(w);
            }
        }
        Operator::diag(&diag).reshape_dims(vec![dim], vec![dim])
    }

    pub fn label(&self) -> String {
        match self {
            XiSpec::Pure => "pure".into(),
            XiSpec::MaximallyMixed => "maximally_mixed".into(),
            XiSpec::Mixed(w) => {
                let parts: Vec<String> = w.iter().map(|x| format!("{x}")).collect();
                format!("mixed:{}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisOrder {
    /// E = Pauli-Z, F = Pauli-X.
    ZX,
    /// E = Pauli-X, F = Pauli-Z.
    XZ,
}

#[derive(Clone, Debug)]
pub struct HpConfig {
    pub n_qubits_bh: usize,
    pub n_qubits_msg: usize,
    pub n_qubits_rad: usize,
    pub initial_state: Operator,
    pub seed: u64,
    pub trials: usize,
    pub basis_order: BasisOrder,
}

impl HpConfig {
    pub fn new(n_bh: usize, n_msg: usize, n_rad: usize, xi: &XiSpec, seed: u64, trials: usize) -> Result<Self> {
        let cfg = HpConfig {
            n_qubits_bh: n_bh,
            n_qubits_msg: n_msg,
            n_qubits_rad: n_rad,
            initial_state: xi.operator(n_bh)?,
            seed,
            trials,
            basis_order: BasisOrder::ZX,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        let total = self.n_qubits_bh + self.n_qubits_msg;
        if self.n_qubits_rad > total {
            return Err(Error::Config(format!("ℓ = {} exceeds N + k = {total}", self.n_qubits_rad)));
        }
        let dim = 1usize << self.n_qubits_bh;
        if self.initial_state.nrows() != dim || !self.initial_state.is_square() {
            return Err(Error::Config(format!("ξ must be a {dim}x{dim} density operator")));
        }
        if (self.initial_state.trace().re - 1.0).abs() > 1e-9 {
            return Err(Error::Config("ξ must have unit trace".into()));
        }
        Ok(())
    }

    pub fn with_rad(&self, n_rad: usize) -> Result<Self> {
        let mut c = self.clone();
        c.n_qubits_rad = n_rad;
        c.validate()?;
        Ok(c)
    }

    pub fn dim_msg(&self) -> usize {
        1 << self.n_qubits_msg
    }

    pub fn dim_bh(&self) -> usize {
        1 << self.n_qubits_bh
    }

    pub fn dim_s(&self) -> usize {
        1 << (self.n_qubits_bh + self.n_qubits_msg)
    }

    pub fn dim_s_rad(&self) -> usize {
        1 << self.n_qubits_rad
    }

    pub fn dim_s_in(&self) -> usize {
        1 << (self.n_qubits_bh + self.n_qubits_msg - self.n_qubits_rad)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HpDerived {
    pub ell_th: f64,
    pub lambda_xi: f64,
    pub h2_bin: f64,
    pub rank: usize,
    pub lambda_min_xi: f64,
}

pub fn derived_quantities(cfg: &HpConfig, tol: &Tolerances) -> HpDerived {
    let xi = &cfg.initial_state;
    let e = eig_hermitian_unchecked(xi);
    let thr = tol.rank_tol(xi.nrows()) * e.max().max(0.0);
    let nz: Vec<f64> = e.eigenvalues.iter().copied().filter(|&l| l > thr).collect();
    let rank = nz.len();
    let lambda_min_xi = nz.first().copied().unwrap_or(0.0);
    let h2 = collision_entropy(xi);
    HpDerived {
        ell_th: cfg.n_qubits_msg as f64 + (cfg.n_qubits_bh as f64 - h2) / 2.0,
        lambda_xi: rank as f64 * lambda_min_xi,
        h2_bin: h2,
        rank,
        lambda_min_xi,
    }
}

/// HP channel from U with the purification of ξ computed on the fly.
pub fn hp_channel(u: &Operator, xi: &Operator, cfg: &HpConfig, tol: &Tolerances) -> Result<Channel> {
    let psi = purify_ket(xi, tol)?;
    hp_channel_from_purification(u, &psi, cfg)
}

/// HP channel from U and a purification |ξ⟩ of ξ on B_in ⊗ B_rad (B_in first).
pub fn hp_channel_from_purification(u: &Operator, xi_ket: &Vector, cfg: &HpConfig) -> Result<Channel> {
    let ds = cfg.dim_s();
    let dk = cfg.dim_msg();
    let db = cfg.dim_bh();
    if u.nrows() != ds || u.ncols() != ds {
        return Err(Error::Dim(format!("U must be {ds}x{ds}")));
    }
    if xi_ket.len() % db != 0 {
        return Err(Error::Dim("purification does not factor as B_in ⊗ B_rad".into()));
    }
    let dr = xi_ket.len() / db;
    let c = Mat::from_fn(db, dr, |m, r| xi_ket[m * dr + r]);
    let d_rad = cfg.dim_s_rad();
    let d_in = cfg.dim_s_in();
    let dc = dr * d_rad;
    // W_a = U[:, a-block] c  (ds × dr); K_s[(r, s_rad), a] = W_a[(s, s_rad), r]
    let w: Vec<Mat> = (0..dk).map(|a| u.data().columns(a * db, db) * &c).collect();
    let out_dims = vec![dr, d_rad];
    let kraus = (0..d_in)
        .map(|s| {
            let m = Mat::from_fn(dc, dk, |row, a| {
                let (r, sr) = (row / d_rad, row % d_rad);
                w[a][(s * d_rad + sr, r)]
            });
            Operator::new(m, out_dims.clone(), vec![dk])
        })
        .collect::<Result<Vec<_>>>()?;
    Channel::from_kraus_unchecked(kraus)
}

/// ξ_{W,j} = T(|j_W⟩⟨j_W|) for all j, and ξ_π = T(π).
pub fn hp_states(ch: &Channel, basis: &OrthoBasis) -> Result<(Vec<Operator>, Operator)> {
    let states = crate::ctoq::output_states(ch, basis)?;
    let d = ch.in_dim();
    let pi = ch.apply(&Operator::identity(ch.in_dims()).scale(1.0 / d as f64))?;
    Ok((states, pi))
}

/// Smallest eigenvalue of ξ_j^{S_in} = tr_C[U(|j⟩⟨j| ⊗ ξ)U†] over the basis states.
/// The S_in marginal is the Gram matrix of the Kraus images K_s|j⟩.
pub fn min_eig_s_in(ch: &Channel, basis: &OrthoBasis) -> f64 {
    let n = ch.kraus().len();
    let mut best = f64::INFINITY;
    for j in 0..basis.dim() {
        let v = basis.vector(j);
        let mut a = Mat::zeros(ch.out_dim(), n);
        for (k, kr) in ch.kraus().iter().enumerate() {
            a.set_column(k, &(kr.data() * &v));
        }
        let g = Operator::from_mat(a.adjoint() * a);
        best = best.min(eig_hermitian_unchecked(&g).min());
    }
    best
}

/// E Σ_{i≠j} tr[ξ_iξ_j] over Haar U:
/// 2^k(2^k−1)(2^{2(N+k)−ℓ} − 2^ℓ)/(2^{2(N+k)} − 1) · 2^{−H₂(ξ)}.
pub fn haar_mean_pairwise_overlap(cfg: &HpConfig) -> f64 {
    let k = cfg.n_qubits_msg as i32;
    let nk = (cfg.n_qubits_bh + cfg.n_qubits_msg) as i32;
    let l = cfg.n_qubits_rad as i32;
    let dk = 2f64.powi(k);
    let num = 2f64.powi(2 * nk - l) - 2f64.powi(l);
    let den = 2f64.powi(2 * nk) - 1.0;
    let purity = crate::qcore::purity(&cfg.initial_state);
    dk * (dk - 1.0) * num / den * purity
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl MonteCarlo {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        MonteCarlo { mean, std_err: (var / n.max(1) as f64).sqrt(), samples: n }
    }

    /// (mean − reference)/SE. Differences at rounding level count as agreement,
    /// which matters when every sample is the same number.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.mean - reference;
        if diff.abs() <= 1e-12 * (1.0 + reference.abs()) {
            0.0
        } else if self.std_err > 0.0 {
            diff / self.std_err
        } else {
            f64::INFINITY.copysign(diff)
        }
    }
}

/// Σ_{i≠j} tr[ξ_iξ_j] in the computational basis for one unitary.
pub fn pairwise_overlap_for(u: &Operator, xi_ket: &Vector, cfg: &HpConfig) -> Result<f64> {
    if cfg.n_qubits_msg == 0 {
        return Ok(0.0);
    }
    let ch = hp_channel_from_purification(u, xi_ket, cfg)?;
    let basis = OrthoBasis::computational(cfg.dim_msg());
    let states = crate::ctoq::output_states(&ch, &basis)?;
    Ok(pairwise_overlap(&states))
}

/// Monte-Carlo estimate of the Haar mean using streams 0..samples of `seed`.
pub fn haar_mean_monte_carlo(cfg: &HpConfig, samples: usize, seed: u64, tol: &Tolerances) -> Result<MonteCarlo> {
    let psi = purify_ket(&cfg.initial_state, tol)?;
    let one = |t: usize| -> Result<f64> {
        let mut rng = stream_rng(seed, t as u64);
        let u = haar_unitary(cfg.dim_s(), &mut rng);
        pairwise_overlap_for(&u, &psi, cfg)
    };
    let xs = try_map_indexed(samples, one)?;
    Ok(MonteCarlo::from_samples(&xs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Bound {
    pub cl_bound: f64,
    pub q_bound: f64,
    pub delta_term: f64,
    pub log2_delta: f64,
    pub first_term: f64,
    pub c: f64,
    pub vacuous: bool,
}

/// Admissible ε range (2(1 − Λ_ξ), 1]; empty when Λ_ξ ≤ 1/2.
pub fn epsilon_range(derived: &HpDerived) -> (f64, f64) {
    (2.0 * (1.0 - derived.lambda_xi), 1.0)
}

/// cl_bound = 4^{ℓ_th−ℓ}/(1−ε) + δ with
/// log₂δ = k + 2^{N+k−ℓ+1}(N+k−ℓ+log₂(5/ε)) − (c² log₂e/6)·2^{ℓ+H₂}, c = 1 − (1−ε/2)/Λ_ξ.
pub fn theorem3_bound(cfg: &HpConfig, epsilon: f64, tol: &Tolerances) -> Result<Theorem3Bound> {
    let der = derived_quantities(cfg, tol);
    let (lo, hi) = epsilon_range(&der);
    if !(epsilon > lo && epsilon <= hi) {
        return Err(Error::Range(format!("ε = {epsilon} outside ({lo}, {hi}]")));
    }
    let n = cfg.n_qubits_bh as f64;
    let k = cfg.n_qubits_msg as f64;
    let l = cfg.n_qubits_rad as f64;
    let c = 1.0 - (1.0 - epsilon / 2.0) / der.lambda_xi;
    let log2_delta = k + (n + k - l + 1.0).exp2() * (n + k - l + (5.0 / epsilon).log2())
        - (c * c * std::f64::consts::LOG2_E / 6.0) * (l + der.h2_bin).exp2();
    let delta_term = log2_delta.exp2();
    let first_term = 4f64.powf(der.ell_th - l) / (1.0 - epsilon);
    let cl_bound = first_term + delta_term;
    Ok(Theorem3Bound {
        cl_bound,
        q_bound: (1.0 + std::f64::consts::SQRT_2) * cl_bound.sqrt(),
        delta_term,
        log2_delta,
        first_term,
        c,
        vacuous: !(cl_bound < 1.0),
    })
}

/// log₂ of 2^k times the probability bound on small S_in eigenvalues:
/// k + 2^{N+k−ℓ+1}(N+k−ℓ+log₂(5/ε)) − (2^ℓ r c²/6) log₂e.
pub fn prop3_log2_bound(cfg: &HpConfig, epsilon: f64, tol: &Tolerances) -> Result<f64> {
    let der = derived_quantities(cfg, tol);
    let (lo, hi) = epsilon_range(&der);
    if !(epsilon > lo && epsilon <= hi) {
        return Err(Error::Range(format!("ε = {epsilon} outside ({lo}, {hi}]")));
    }
    let n = cfg.n_qubits_bh as f64;
    let k = cfg.n_qubits_msg as f64;
    let l = cfg.n_qubits_rad as f64;
    let c = 1.0 - (1.0 - epsilon / 2.0) / der.lambda_xi;
    Ok(k + (n + k - l + 1.0).exp2() * (n + k - l + (5.0 / epsilon).log2())
        - (l.exp2() * der.rank as f64 * c * c / 6.0) * std::f64::consts::LOG2_E)
}

/// Threshold (1−ε)/2^{N+k−ℓ} on λ_min(ξ_j^{S_in}).
pub fn min_eig_threshold(cfg: &HpConfig, epsilon: f64) -> f64 {
    (1.0 - epsilon) / cfg.dim_s_in() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisStats {
    pub delta_cl: f64,
    pub lambda_min: f64,
    pub prop2: Prop2Bound,
    pub appx_b: f64,
    pub residual_leak: f64,
    pub collision_entropies: Vec<f64>,
}

fn basis_stats(b: &PpgmBundle) -> BasisStats {
    BasisStats {
        delta_cl: b.delta_cl(),
        lambda_min: b.lambda_min,
        prop2: prop2_bound(b),
        appx_b: appendix_b_bound(b),
        residual_leak: b.residual_leak,
        collision_entropies: b.tau_states.iter().map(collision_entropy).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed_stream: u64,
    pub ell: usize,
    pub delta_cl_x: f64,
    pub delta_cl_z: f64,
    pub delta_q_ctoq: f64,
    pub lambda_w_min: f64,
    pub x: BasisStats,
    pub z: BasisStats,
    pub h2_pi: f64,
    /// √(Δ_E(2−Δ_E)) + √Δ_F for the chosen (E, F).
    pub cor1_bound: f64,
    pub pairwise_overlap_z: f64,
    pub min_eig_s_in: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed_stream: u64,
    pub result: std::result::Result<TrialResult, String>,
}

/// One trial with its own RNG stream.
pub fn run_trial(cfg: &HpConfig, xi_ket: &Vector, trial: usize, tol: &Tolerances) -> Result<TrialResult> {
    if cfg.n_qubits_msg == 0 {
        return Err(Error::Config("the experiment needs at least one message qubit".into()));
    }
    let stream = trial as u64;
    let mut rng = stream_rng(cfg.seed, stream);
    let u = haar_unitary(cfg.dim_s(), &mut rng);
    let ch = hp_channel_from_purification(&u, xi_ket, cfg)?;
    let zb = pauli_basis(cfg.n_qubits_msg, PauliKind::Z)?;
    let xb = pauli_basis(cfg.n_qubits_msg, PauliKind::X)?;
    let bz = build_ppgm(&ch, &zb, tol)?;
    let bx = build_ppgm(&ch, &xb, tol)?;
    let sz = basis_stats(&bz);
    let sx = basis_stats(&bx);
    let (map, de, df) = match cfg.basis_order {
        BasisOrder::ZX => (CtoQMap::new(&bz.povm, &bx.povm, &zb, &xb)?, sz.delta_cl, sx.delta_cl),
        BasisOrder::XZ => (CtoQMap::new(&bx.povm, &bz.povm, &xb, &zb)?, sx.delta_cl, sz.delta_cl),
    };
    let dq = map.delta_q(&ch)?;
    let de_c = de.clamp(0.0, 1.0);
    let cor1_bound = (de_c * (2.0 - de_c)).sqrt() + df.max(0.0).sqrt();
    let h2_pi = collision_entropy(&bz.tau_avg);
    Ok(TrialResult {
        trial,
        seed_stream: stream,
        ell: cfg.n_qubits_rad,
        delta_cl_x: sx.delta_cl,
        delta_cl_z: sz.delta_cl,
        delta_q_ctoq: dq,
        lambda_w_min: sx.lambda_min.min(sz.lambda_min),
        pairwise_overlap_z: pairwise_overlap(&bz.tau_states),
        min_eig_s_in: min_eig_s_in(&ch, &zb).min(min_eig_s_in(&ch, &xb)),
        x: sx,
        z: sz,
        h2_pi,
        cor1_bound,
    })
}

/// All trials of a configuration, in trial order. Failures are recorded per trial.
pub fn run_experiment(cfg: &HpConfig, tol: &Tolerances) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if cfg.n_qubits_msg == 0 {
        return Err(Error::Config("the experiment needs at least one message qubit".into()));
    }
    let psi = purify_ket(&cfg.initial_state, tol)?;
    Ok(map_indexed(cfg.trials, |t| TrialOutcome {
        trial: t,
        seed_stream: t as u64,
        result: run_trial(cfg, &psi, t, tol).map_err(|e| e.to_string()),
    }))
}

/// Fraction of trials whose smallest S_in eigenvalue falls below the threshold.
pub fn min_eig_stats(results: &[TrialOutcome], cfg: &HpConfig, epsilon: f64) -> (f64, f64) {
    let thr = min_eig_threshold(cfg, epsilon);
    let ok: Vec<&TrialResult> = results.iter().filter_map(|o| o.result.as_ref().ok()).collect();
    if ok.is_empty() {
        return (0.0, thr);
    }
    let below = ok.iter().filter(|r| r.min_eig_s_in < thr).count();
    (below as f64 / ok.len() as f64, thr)
}

/// Min-eigenvalue statistic computed by running the configured trials.
pub fn min_eig_stats_run(cfg: &HpConfig, epsilon: f64, tol: &Tolerances) -> Result<(f64, f64)> {
    let der = derived_quantities(cfg, tol);
    let (lo, hi) = epsilon_range(&der);
    if !(epsilon > lo && epsilon <= hi) {
        return Err(Error::Range(format!("ε = {epsilon} outside ({lo}, {hi}]")));
    }
    let psi = purify_ket(&cfg.initial_state, tol)?;
    let zb = OrthoBasis::computational(cfg.dim_msg());
    let xs = try_map_indexed(cfg.trials, |t| {
        let mut rng = stream_rng(cfg.seed, t as u64);
        let u = haar_unitary(cfg.dim_s(), &mut rng);
        let ch = hp_channel_from_purification(&u, &psi, cfg)?;
        Ok(min_eig_s_in(&ch, &zb))
    })?;
    let thr = min_eig_threshold(cfg, epsilon);
    let below = xs.iter().filter(|&&x| x < thr).count();
    Ok((below as f64 / xs.len().max(1) as f64, thr))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub ell: usize,
    pub trials_ok: usize,
    pub trials_failed: usize,
    pub delta_cl_x: MonteCarlo,
    pub delta_cl_z: MonteCarlo,
    pub delta_q: MonteCarlo,
    pub pairwise_overlap: MonteCarlo,
    pub closed_form: f64,
    pub z_score: f64,
    /// Worst bound − value over trials (negative means a violation).
    pub worst_prop2_slack: f64,
    pub worst_cor1_slack: f64,
    pub worst_appx_b_slack: f64,
    pub ill_conditioned_trials: usize,
}

pub fn summarize(cfg: &HpConfig, results: &[TrialOutcome]) -> Summary {
    let ok: Vec<&TrialResult> = results.iter().filter_map(|o| o.result.as_ref().ok()).collect();
    let col = |f: &dyn Fn(&TrialResult) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let pw = MonteCarlo::from_samples(&col(&|r| r.pairwise_overlap_z));
    let closed = haar_mean_pairwise_overlap(cfg);
    let min_of = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    Summary {
        ell: cfg.n_qubits_rad,
        trials_ok: ok.len(),
        trials_failed: results.len() - ok.len(),
        delta_cl_x: MonteCarlo::from_samples(&col(&|r| r.delta_cl_x)),
        delta_cl_z: MonteCarlo::from_samples(&col(&|r| r.delta_cl_z)),
        delta_q: MonteCarlo::from_samples(&col(&|r| r.delta_q_ctoq)),
        pairwise_overlap: pw,
        closed_form: closed,
        z_score: pw.z_score(closed),
        worst_prop2_slack: min_of(col(&|r| {
            (r.x.prop2.sum_form - r.x.delta_cl).min(r.z.prop2.sum_form - r.z.delta_cl)
        })),
        worst_cor1_slack: min_of(col(&|r| r.cor1_bound - r.delta_q_ctoq)),
        worst_appx_b_slack: min_of(col(&|r| (r.x.appx_b - r.x.delta_cl).min(r.z.appx_b - r.z.delta_cl))),
        ill_conditioned_trials: ok.iter().filter(|r| r.x.prop2.ill_conditioned || r.z.prop2.ill_conditioned).count(),
    }
}

/// Partial trace sanity helper: ξ^{B_rad} of the purification.
pub fn xi_b_rad(cfg: &HpConfig, tol: &Tolerances) -> Result<Operator> {
    let psi = purify_ket(&cfg.initial_state, tol)?;
    let db = cfg.dim_bh();
    let full = Operator::square(&psi * psi.adjoint(), vec![db, psi.len() / db])?;
    linop::partial_trace(&full, &[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_anchor() {
        let cfg = HpConfig::new(2, 1, 1, &XiSpec::MaximallyMixed, 0, 1).unwrap();
        assert!((haar_mean_pairwise_overlap(&cfg) - 60.0 / 252.0).abs() < 1e-15);
        let full = cfg.with_rad(3).unwrap();
        assert_eq!(haar_mean_pairwise_overlap(&full), 0.0);
        let none = HpConfig::new(2, 0, 1, &XiSpec::Pure, 0, 1).unwrap();
        assert_eq!(haar_mean_pairwise_overlap(&none), 0.0);
    }

    #[test]
    fn derived_examples() {
        let t = Tolerances::default();
        let d = derived_quantities(&HpConfig::new(4, 1, 0, &XiSpec::Pure, 0, 1).unwrap(), &t);
        assert_eq!((d.h2_bin, d.ell_th, d.lambda_xi), (0.0, 3.0, 1.0));
        let d = derived_quantities(&HpConfig::new(4, 1, 0, &XiSpec::MaximallyMixed, 0, 1).unwrap(), &t);
        assert!((d.h2_bin - 4.0).abs() < 1e-12 && (d.ell_th - 1.0).abs() < 1e-12 && (d.lambda_xi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn epsilon_range_enforced() {
        let t = Tolerances::default();
        let cfg = HpConfig::new(2, 1, 1, &XiSpec::Mixed(vec![0.7, 0.3]), 0, 1).unwrap();
        // Λ = 2·0.3 = 0.6, admissible ε ∈ (0.8, 1]
        assert!(theorem3_bound(&cfg, 0.5, &t).is_err());
        assert!(theorem3_bound(&cfg, 0.9, &t).is_ok());
    }
}
