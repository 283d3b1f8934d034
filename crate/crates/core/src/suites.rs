//! Randomized property suites over generated instances.
//!
//! Every instance draws from its own stream of the master seed, so results do
//! not depend on scheduling.

use serde::{Deserialize, Serialize};

use crate::ctoq::{
    build_ctoq, corollary1_bound, delta_cl, delta_cl_trace_norm, delta_cl_trace_norm_with, delta_q, ghz_distance,
    povm_from_decoder, theorem1_bound, theorem1_both_orderings, xi_bounds, xi_ef, ErrorReport,
};
use crate::error::{Error, Result};
use crate::linop::{Mat, Operator, C64};
use crate::par::try_map_indexed;
use crate::ppgm::{appendix_b_bound, build_ppgm, prop2_bound};
use crate::qcore::{max_correlated_classical, pauli_basis, Channel, OrthoBasis, PauliKind, Povm};
use crate::random::{ginibre, haar_unitary, random_basis, random_channel, random_povm, stream_rng, Rng64};
use crate::tol::Tolerances;
use rand::Rng;

pub const SUITES: [&str; 8] = ["thm1", "cor1", "eq78", "appx_a", "prop2", "appx_b", "eq18", "ghz"];

/// One checked inequality or identity across a suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub evaluated: usize,
    pub violations: usize,
    /// Smallest slack seen; for identities this is −|difference|.
    pub worst_slack: f64,
}

impl Check {
    fn new(name: &str, tolerance: f64) -> Self {
        Check { name: name.into(), tolerance, evaluated: 0, violations: 0, worst_slack: f64::INFINITY }
    }

    fn record(&mut self, slack: f64) {
        self.evaluated += 1;
        if slack.is_nan() || slack < -self.tolerance {
            self.violations += 1;
        }
        if slack.is_nan() {
            self.worst_slack = f64::NAN;
        } else if !self.worst_slack.is_nan() {
            self.worst_slack = self.worst_slack.min(slack);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instances: usize,
    pub seed: u64,
    pub skipped: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0 && c.evaluated > 0)
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Slack values produced by one instance, keyed by check index.
type Slacks = Vec<(usize, f64)>;

fn assemble(suite: &str, instances: usize, seed: u64, mut checks: Vec<Check>, rows: Vec<Option<Slacks>>) -> SuiteReport {
    let mut skipped = 0;
    for row in rows {
        match row {
            Some(r) => r.into_iter().for_each(|(i, s)| checks[i].record(s)),
            None => skipped += 1,
        }
    }
    SuiteReport { suite: suite.into(), instances, seed, skipped, checks }
}

pub fn run_suite(name: &str, instances: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    match name {
        "thm1" => thm1_suite(instances, seed, tol),
        "cor1" => cor1_suite(instances, seed, tol),
        "eq78" => eq78_suite(instances, seed, tol),
        "appx_a" => appx_a_suite(instances, seed, tol),
        "prop2" => prop2_suite(instances, seed, tol),
        "appx_b" => appx_b_suite(instances, seed, tol),
        "eq18" => eq18_suite(instances, seed, tol),
        "ghz" => ghz_suite(instances, seed, tol),
        other => Err(Error::Config(format!("unknown suite '{other}' (expected one of {})", SUITES.join(", ")))),
    }
}

const DIMS: [usize; 3] = [2, 3, 4];

/// Dimension for instance `i` when `per_d` instances are run for each d ∈ {2,3,4}.
fn dim_for(i: usize, per_d: usize) -> usize {
    DIMS[(i / per_d.max(1)).min(2)]
}

/// A random channel A → C with dim C ∈ [d, 2d] and 1–4 Kraus operators.
pub fn random_instance_channel(d: usize, rng: &mut Rng64) -> Result<Channel> {
    let dc = rng.random_range(d..=2 * d);
    let nk = rng.random_range(1..=4usize);
    random_channel(d, dc, nk, rng)
}

/// Either a random POVM or the pPGM of the channel in the given basis.
fn instance_povm(ch: &Channel, basis: &OrthoBasis, rng: &mut Rng64, tol: &Tolerances) -> Result<Povm> {
    if rng.random_bool(0.5) {
        random_povm(ch.out_dim(), basis.dim(), rng)
    } else {
        Ok(build_ppgm(ch, basis, tol)?.povm)
    }
}

fn report_slacks(r: &ErrorReport) -> [f64; 3] {
    [r.bound_thm1 - r.delta_q, r.bound_eq15 - r.xi_ef, r.bound_eq17 - r.xi_ef]
}

fn thm1_suite(per_d: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let checks = vec![
        Check::new("theorem1 (E,F)", 1e-9),
        Check::new("theorem1 (F,E)", 1e-9),
        Check::new("xi <= eq15", 1e-9),
        Check::new("xi <= eq17", 1e-9),
    ];
    let n = 3 * per_d;
    let rows = try_map_indexed(n, |i| {
        let d = dim_for(i, per_d);
        let mut rng = stream_rng(seed, i as u64);
        let ch = random_instance_channel(d, &mut rng)?;
        let e = random_basis(d, &mut rng);
        let f = random_basis(d, &mut rng);
        let pe = instance_povm(&ch, &e, &mut rng, tol)?;
        let pf = instance_povm(&ch, &f, &mut rng, tol)?;
        let (ef, fe) = theorem1_both_orderings(&ch, &pe, &pf, &e, &f, tol)?;
        let s = report_slacks(&ef);
        Ok(Some(vec![(0, s[0]), (1, fe.bound_thm1 - fe.delta_q), (2, s[1]), (3, s[2])]))
    })?;
    Ok(assemble("thm1", n, seed, checks, rows))
}

/// MUB pair for dimension d, rotated by a common random unitary.
fn mub_pair(d: usize, rng: &mut Rng64) -> Result<(OrthoBasis, OrthoBasis)> {
    let (e, f) = if d.is_power_of_two() && rng.random_bool(0.5) {
        let n = d.trailing_zeros() as usize;
        (pauli_basis(n, PauliKind::Z)?, pauli_basis(n, PauliKind::X)?)
    } else {
        (OrthoBasis::computational(d), OrthoBasis::fourier(d))
    };
    let u = haar_unitary(d, rng);
    let tol = Tolerances::default();
    let (e, f) = if rng.random_bool(0.5) { (e, f) } else { (f, e) };
    Ok((OrthoBasis::new(u.data() * e.matrix(), &tol)?, OrthoBasis::new(u.data() * f.matrix(), &tol)?))
}

fn cor1_suite(per_d: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let checks = vec![
        Check::new("dq <= sqrt(dE(2-dE)) + sqrt(dF)", 1e-9),
        Check::new("sqrt(dE(2-dE)) + sqrt(dF) <= (1+sqrt2) max sqrt(dW)", 1e-9),
        Check::new("xi = 0 for MUB", 1e-12),
    ];
    let n = 3 * per_d;
    let rows = try_map_indexed(n, |i| {
        let d = dim_for(i, per_d);
        let mut rng = stream_rng(seed, i as u64);
        let ch = random_instance_channel(d, &mut rng)?;
        let (e, f) = mub_pair(d, &mut rng)?;
        let pe = instance_povm(&ch, &e, &mut rng, tol)?;
        let pf = instance_povm(&ch, &f, &mut rng, tol)?;
        let (r, _) = theorem1_both_orderings(&ch, &pe, &pf, &e, &f, tol)?;
        let b = theorem1_bound(r.delta_cl_e, r.delta_cl_f, 0.0);
        let c = corollary1_bound(r.delta_cl_e, r.delta_cl_f);
        Ok(Some(vec![(0, b - r.delta_q), (1, c - b), (2, -r.xi_ef.abs())]))
    })?;
    Ok(assemble("cor1", n, seed, checks, rows))
}

fn eq78_suite(instances: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let checks = vec![
        Check::new("sum form = trace-norm form (conjugate R)", 1e-10),
        Check::new("sum form = trace-norm form (plain R)", 1e-10),
    ];
    let rows = try_map_indexed(instances, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let d = DIMS[i % 3];
        let ch = random_instance_channel(d, &mut rng)?;
        let w = random_basis(d, &mut rng);
        let p = instance_povm(&ch, &w, &mut rng, tol)?;
        let a = delta_cl(&p, &ch, &w)?;
        let b = delta_cl_trace_norm(&p, &ch, &w)?;
        let c = delta_cl_trace_norm_with(&p, &ch, &w, &max_correlated_classical(&w))?;
        Ok(Some(vec![(0, -(a - b).abs()), (1, -(a - c).abs())]))
    })?;
    Ok(assemble("eq78", instances, seed, checks, rows))
}

fn appx_a_suite(instances: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let checks = vec![
        Check::new("xi <= eq15", 1e-9),
        Check::new("xi <= eq17", 1e-9),
        Check::new("xi = 0 for MUB", 1e-12),
    ];
    let rows = try_map_indexed(instances, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let d = DIMS[i % 3];
        let ch = random_instance_channel(d, &mut rng)?;
        let e = random_basis(d, &mut rng);
        let f = random_basis(d, &mut rng);
        let pf = instance_povm(&ch, &f, &mut rng, tol)?;
        let xi = xi_ef(&ch, &pf, &e, &f)?;
        let (b15, b17) = xi_bounds(&ch, &pf, &e, &f)?;
        let (me, mf) = mub_pair(d, &mut rng)?;
        let pm = instance_povm(&ch, &mf, &mut rng, tol)?;
        let xm = xi_ef(&ch, &pm, &me, &mf)?;
        Ok(Some(vec![(0, b15 - xi), (1, b17 - xi), (2, -xm.abs())]))
    })?;
    Ok(assemble("appx_a", instances, seed, checks, rows))
}

/// A random low-rank channel whose pPGM is well conditioned, or `None` when
/// the draw is ill conditioned.
fn ppgm_instance(i: usize, seed: u64, tol: &Tolerances) -> Result<Option<(Channel, OrthoBasis, crate::ppgm::PpgmBundle)>> {
    let mut rng = stream_rng(seed, i as u64);
    let d = DIMS[i % 3];
    let dc = rng.random_range(d..=3 * d);
    let nk = rng.random_range(1..=3usize).max(d.div_ceil(dc));
    let ch = random_channel(d, dc, nk, &mut rng)?;
    let w = random_basis(d, &mut rng);
    let b = build_ppgm(&ch, &w, tol)?;
    if b.ill_conditioned() {
        return Ok(None);
    }
    Ok(Some((ch, w, b)))
}

fn prop2_suite(instances: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let checks = vec![
        Check::new("dcl <= appendix B", 1e-9),
        Check::new("appendix B <= prop2 sum form", 1e-9),
        Check::new("sum form = entropy form", 1e-10),
    ];
    let rows = try_map_indexed(instances, |i| {
        Ok(ppgm_instance(i, seed, tol)?.map(|(ch, w, b)| {
            let dcl = delta_cl(&b.povm, &ch, &w).unwrap_or(f64::NAN);
            let ab = appendix_b_bound(&b);
            let p2 = prop2_bound(&b);
            vec![(0, ab - dcl), (1, p2.sum_form - ab), (2, -(p2.sum_form - p2.entropy_form).abs())]
        }))
    })?;
    Ok(assemble("prop2", instances, seed, checks, rows))
}

fn appx_b_suite(instances: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let checks = vec![
        Check::new("dcl <= appendix B", 1e-9),
        Check::new("dcl <= 4 * appendix B", 1e-9),
        Check::new("residual leak", 1e-9),
        Check::new("cached dcl = recomputed dcl", 1e-12),
    ];
    let rows = try_map_indexed(instances, |i| {
        Ok(ppgm_instance(i, seed, tol)?.map(|(ch, w, b)| {
            let dcl = delta_cl(&b.povm, &ch, &w).unwrap_or(f64::NAN);
            let ab = appendix_b_bound(&b);
            vec![(0, ab - dcl), (1, 4.0 * ab - dcl), (2, -b.residual_leak), (3, -(b.delta_cl() - dcl).abs())]
        }))
    })?;
    Ok(assemble("appx_b", instances, seed, checks, rows))
}

/// Noisy isometric code: T = (1−p)·V·V† + p·random, D = recovery by V† with
/// the complement sent to |0⟩, mixed with a random decoder with weight q.
pub fn reference_pair(d: usize, rng: &mut Rng64, tol: &Tolerances) -> Result<(Channel, Channel)> {
    let dc = rng.random_range(d..=2 * d);
    let w = haar_unitary(dc, rng);
    let v = Operator::from_mat(w.data().columns(0, d).into_owned());
    let enc = Channel::isometry(&v, tol)?;
    let noise = random_channel(d, dc, rng.random_range(1..=3usize), rng)?;
    let p: f64 = rng.random_range(0.0..0.6);
    let t = Channel::mix(&[enc, noise], &[1.0 - p, p], tol)?;
    let mut kraus = vec![v.dagger()];
    for c in d..dc {
        let mut m = Mat::zeros(d, dc);
        let col = w.data().column(c).adjoint();
        m.row_mut(0).copy_from(&col);
        kraus.push(Operator::from_mat(m));
    }
    let rec = Channel::new(kraus, tol)?;
    let junk = random_channel(dc, d, rng.random_range(dc.div_ceil(d)..=dc.div_ceil(d) + 2), rng)?;
    let q: f64 = rng.random_range(0.0..0.5);
    let dec = Channel::mix(&[rec, junk], &[1.0 - q, q], tol)?;
    Ok((t, dec))
}

fn eq18_suite(instances: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let checks = vec![
        Check::new("dcl(derived, E) <= dq(D)", 1e-10),
        Check::new("dcl(derived, F) <= dq(D)", 1e-10),
        Check::new("dq(CtoQ) <= (1+sqrt2) sqrt(dq(D))", 1e-6),
    ];
    let rows = try_map_indexed(instances, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let d = DIMS[i % 3];
        let (t, dec) = reference_pair(d, &mut rng, tol)?;
        let (e, f) = mub_pair(d, &mut rng)?;
        let dq_ref = delta_q(&dec, &t)?;
        let pe = povm_from_decoder(&dec, &e, tol)?;
        let pf = povm_from_decoder(&dec, &f, tol)?;
        let de = delta_cl(&pe, &t, &e)?;
        let df = delta_cl(&pf, &t, &f)?;
        let ctoq = build_ctoq(&pe, &pf, &e, &f, tol)?;
        let dq = delta_q(&ctoq.total, &t)?;
        Ok(Some(vec![
            (0, dq_ref - de),
            (1, dq_ref - df),
            (2, (1.0 + std::f64::consts::SQRT_2) * dq_ref.max(0.0).sqrt() - dq),
        ]))
    })?;
    Ok(assemble("eq18", instances, seed, checks, rows))
}

/// Channel whose outputs on distinct E-basis inputs have orthogonal supports,
/// plus a POVM that is the support projector on each block and a random
/// split of the leftover space.
pub fn block_diagonal_instance(d: usize, rng: &mut Rng64, tol: &Tolerances) -> Result<(Channel, Povm, OrthoBasis)> {
    let block = rng.random_range(1..=2usize);
    let extra = rng.random_range(0..=2usize);
    let dc = d * block + extra;
    let nk = rng.random_range(1..=3usize);
    let e = random_basis(d, rng);
    let frame = haar_unitary(dc, rng);
    // u[a] ∈ C^{block·nk}: Kraus k sends |a_E⟩ to the k-th slice embedded in block a
    let mut kraus = vec![Mat::zeros(dc, d); nk];
    for a in 0..d {
        let g = ginibre(block * nk, 1, rng);
        let g = &g / C64::new(g.norm(), 0.0);
        for (k, km) in kraus.iter_mut().enumerate() {
            let mut out = nalgebra::DVector::<C64>::zeros(dc);
            for b in 0..block {
                let col = frame.data().column(a * block + b) * g[(k * block + b, 0)];
                out += col;
            }
            *km += &out * e.vector(a).adjoint();
        }
    }
    let ch = Channel::new(kraus.into_iter().map(Operator::from_mat).collect(), tol)?;
    let mut elements: Vec<Mat> = (0..d)
        .map(|a| {
            let cols = frame.data().columns(a * block, block);
            &cols * cols.adjoint()
        })
        .collect();
    if extra > 0 {
        let rest = frame.data().columns(d * block, extra).into_owned();
        let split = random_povm(extra, d, rng)?;
        for (el, m) in elements.iter_mut().zip(split.elements()) {
            *el += &rest * m.data() * rest.adjoint();
        }
    }
    let povm = Povm::new(elements.into_iter().map(|m| Operator::from_mat(m).hermitian_part()).collect(), tol)?;
    Ok((ch, povm, e))
}

fn ghz_suite(instances: usize, seed: u64, tol: &Tolerances) -> Result<SuiteReport> {
    let checks = vec![Check::new("dcl_E = 0", 1e-12), Check::new("coherent output = noisy GHZ", 1e-9)];
    let rows = try_map_indexed(instances, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let d = DIMS[i % 3];
        let (ch, povm, e) = block_diagonal_instance(d, &mut rng, tol)?;
        let de = delta_cl(&povm, &ch, &e)?;
        let ext = crate::ctoq::naimark_extend(&povm, tol)?;
        let r_e = crate::ctoq::build_coherent_measurement(&ext, &e, tol)?;
        let dist = ghz_distance(&r_e, &ch, &e)?;
        Ok(Some(vec![(0, -de.abs()), (1, -dist)]))
    })?;
    Ok(assemble("ghz", instances, seed, checks, rows))
}
