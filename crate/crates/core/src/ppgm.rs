//! Projection-based pretty-good measurements and their error bounds.
//!
//! For τ_j = T(|j⟩⟨j|) let Π_j project onto supp τ_j and Π = Σ_j Π_j. The
//! measurement has elements Π^{-1/2} Π_j Π^{-1/2}; the residual I − supp Π is
//! added to outcome 0 so the POVM keeps exactly d outcomes.
//!
//! Two constructions are provided. The spectral one diagonalizes every τ_j
//! and Π on the full output space. The factored one works from the Kraus
//! operators: τ_j = A_j A_j† with A_j = [K_1|j⟩ … K_n|j⟩], so supports and
//! nonzero spectra come from small Gram matrices. Both use the same relative
//! rank cutoff.

use serde::{Deserialize, Serialize};

use crate::ctoq::output_states;
use crate::error::{Error, Result};
use crate::linop::{eig_hermitian_unchecked, Mat, Operator, C64};
use crate::qcore::{collision_entropy, Channel, OrthoBasis, Povm};
use crate::tol::Tolerances;

/// Projector onto the eigenspaces of `rho` with eigenvalue above `rank_tol·λ_max`.
pub fn support_projection(rho: &Operator, rank_tol: f64) -> Operator {
    let e = eig_hermitian_unchecked(rho);
    let thr = rank_tol * e.max().max(0.0);
    let u = e.support_columns(thr);
    Operator::with_dims_unchecked(&u * u.adjoint(), rho.row_dims().to_vec(), rho.col_dims().to_vec())
}

#[derive(Clone, Debug)]
pub struct PpgmBundle {
    pub povm: Povm,
    pub projectors: Vec<Operator>,
    pub pi_sum: Operator,
    pub tau_states: Vec<Operator>,
    pub tau_avg: Operator,
    /// Smallest nonzero eigenvalue over all τ_j.
    pub lambda_min: f64,
    /// Largest eigenvalue over all τ_j.
    pub lambda_max: f64,
    /// Relative rank cutoff used for every support.
    pub rank_tol: f64,
    /// Residual weight tr[(I − supp Π) τ_j], maximized over j.
    pub residual_leak: f64,
}

impl PpgmBundle {
    pub fn d(&self) -> usize {
        self.tau_states.len()
    }

    /// λ_min below 10·rank_tol (relative to the largest τ eigenvalue).
    pub fn ill_conditioned(&self) -> bool {
        self.lambda_min < 10.0 * self.rank_tol * self.lambda_max
    }

    /// Δ_cl of the pPGM from the cached states.
    pub fn delta_cl(&self) -> f64 {
        crate::ctoq::delta_cl_from_states(&self.povm, &self.tau_states)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PpgmMethod {
    /// Full eigendecompositions on the output space.
    Spectral,
    /// Gram matrices of the Kraus images.
    Factored,
    /// Factored when the Kraus count is below the output dimension.
    Auto,
}

/// pPGM for the states T(|j_W⟩⟨j_W|).
pub fn build_ppgm(channel: &Channel, basis: &OrthoBasis, tol: &Tolerances) -> Result<PpgmBundle> {
    build_ppgm_with(channel, basis, PpgmMethod::Auto, tol)
}

pub fn build_ppgm_with(channel: &Channel, basis: &OrthoBasis, method: PpgmMethod, tol: &Tolerances) -> Result<PpgmBundle> {
    if channel.in_dim() != basis.dim() {
        return Err(Error::Dim("basis does not match channel input".into()));
    }
    let factored = match method {
        PpgmMethod::Spectral => false,
        PpgmMethod::Factored => true,
        PpgmMethod::Auto => channel.kraus().len() < channel.out_dim(),
    };
    if factored {
        factored_ppgm(channel, basis, tol)
    } else {
        spectral_ppgm(channel, basis, tol)
    }
}

fn spectral_ppgm(channel: &Channel, basis: &OrthoBasis, tol: &Tolerances) -> Result<PpgmBundle> {
    let dc = channel.out_dim();
    let rank_tol = tol.rank_tol(dc);
    let taus = output_states(channel, basis)?;
    let mut projectors = Vec::with_capacity(taus.len());
    let mut lambda_min = f64::INFINITY;
    let mut lambda_max: f64 = 0.0;
    for t in &taus {
        let e = eig_hermitian_unchecked(t);
        let thr = rank_tol * e.max().max(0.0);
        if let Some(&l) = e.eigenvalues.iter().find(|&&l| l > thr) {
            lambda_min = lambda_min.min(l);
        }
        lambda_max = lambda_max.max(e.max());
        let u = e.support_columns(thr);
        projectors.push(Operator::with_dims_unchecked(&u * u.adjoint(), t.row_dims().to_vec(), t.col_dims().to_vec()));
    }
    let mut pi = Mat::zeros(dc, dc);
    for p in &projectors {
        pi += p.data();
    }
    let pi_sum = Operator::with_dims_unchecked(pi, channel.out_dims().to_vec(), channel.out_dims().to_vec());
    let e = eig_hermitian_unchecked(&pi_sum);
    let thr = rank_tol * e.max().max(0.0);
    let inv_half = e.reconstruct_with(|l| if l > thr { l.powf(-0.5) } else { 0.0 });
    let supp = e.support_columns(thr);
    let residual = Mat::identity(dc, dc) - &supp * supp.adjoint();
    let mut elements: Vec<Operator> = projectors
        .iter()
        .map(|p| Operator::with_dims_unchecked(inv_half.data() * p.data() * inv_half.data(), p.row_dims().to_vec(), p.col_dims().to_vec()).hermitian_part())
        .collect();
    finish(channel, taus, projectors, pi_sum, &mut elements, residual, lambda_min, lambda_max, rank_tol, tol)
}

fn factored_ppgm(channel: &Channel, basis: &OrthoBasis, tol: &Tolerances) -> Result<PpgmBundle> {
    let dc = channel.out_dim();
    let d = basis.dim();
    let rank_tol = tol.rank_tol(dc);
    let n = channel.kraus().len();
    let dims = channel.out_dims().to_vec();
    let mut taus = Vec::with_capacity(d);
    let mut blocks: Vec<Mat> = Vec::with_capacity(d);
    let mut lambda_min = f64::INFINITY;
    let mut lambda_max: f64 = 0.0;
    for j in 0..d {
        let v = basis.vector(j);
        let mut a = Mat::zeros(dc, n);
        for (k, kr) in channel.kraus().iter().enumerate() {
            a.set_column(k, &(kr.data() * &v));
        }
        taus.push(Operator::with_dims_unchecked(&a * a.adjoint(), dims.clone(), dims.clone()));
        let g = eig_hermitian_unchecked(&Operator::from_mat(a.adjoint() * &a));
        let thr = rank_tol * g.max().max(0.0);
        lambda_max = lambda_max.max(g.max());
        let keep: Vec<usize> = (0..n).filter(|&i| g.eigenvalues[i] > thr).collect();
        if let Some(&i) = keep.first() {
            lambda_min = lambda_min.min(g.eigenvalues[i]);
        }
        let w = g.eigenvectors.data();
        let mut u = Mat::zeros(dc, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            let col = &a * w.column(i) * C64::new(1.0 / g.eigenvalues[i].sqrt(), 0.0);
            u.set_column(c, &col);
        }
        blocks.push(u);
    }
    let projectors: Vec<Operator> =
        blocks.iter().map(|u| Operator::with_dims_unchecked(u * u.adjoint(), dims.clone(), dims.clone())).collect();
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut b = Mat::zeros(dc, total);
    let mut off = 0;
    for u in &blocks {
        b.columns_mut(off, u.ncols()).copy_from(u);
        off += u.ncols();
    }
    let gram = b.adjoint() * &b;
    let ge = eig_hermitian_unchecked(&Operator::from_mat(gram.clone()));
    let thr = rank_tol * ge.max().max(0.0);
    let keep: Vec<usize> = (0..total).filter(|&i| ge.eigenvalues[i] > thr).collect();
    // orthonormal basis U of supp Π with Π = U S² U†
    let vv = ge.eigenvectors.data();
    let mut u_supp = Mat::zeros(dc, keep.len());
    let mut s_vals = Vec::with_capacity(keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = ge.eigenvalues[i].sqrt();
        s_vals.push(s);
        u_supp.set_column(c, &(&b * vv.column(i) * C64::new(1.0 / s, 0.0)));
    }
    let mut pi = Mat::zeros(dc, dc);
    for p in &projectors {
        pi += p.data();
    }
    let pi_sum = Operator::with_dims_unchecked(pi, dims.clone(), dims.clone());
    // Π^{-1/2} U_j = U S^{-1} U† U_j
    let mut elements = Vec::with_capacity(d);
    for u in &blocks {
        let mut c = u_supp.adjoint() * u;
        for (r, s) in s_vals.iter().enumerate() {
            c.row_mut(r).scale_mut(1.0 / s);
        }
        let y = &u_supp * c;
        elements.push(Operator::with_dims_unchecked(&y * y.adjoint(), dims.clone(), dims.clone()).hermitian_part());
    }
    let residual = Mat::identity(dc, dc) - &u_supp * u_supp.adjoint();
    finish(channel, taus, projectors, pi_sum, &mut elements, residual, lambda_min, lambda_max, rank_tol, tol)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    channel: &Channel,
    taus: Vec<Operator>,
    projectors: Vec<Operator>,
    pi_sum: Operator,
    elements: &mut Vec<Operator>,
    residual: Mat,
    lambda_min: f64,
    lambda_max: f64,
    rank_tol: f64,
    tol: &Tolerances,
) -> Result<PpgmBundle> {
    let residual_leak = taus
        .iter()
        .map(|t| residual.dotc(t.data()).re.abs())
        .fold(0.0_f64, f64::max);
    let e0 = elements[0].data() + residual;
    elements[0] = Operator::with_dims_unchecked(e0, channel.out_dims().to_vec(), channel.out_dims().to_vec()).hermitian_part();
    let povm = Povm::new_complete(std::mem::take(elements), tol)?;
    let d = taus.len();
    let mut avg = Mat::zeros(channel.out_dim(), channel.out_dim());
    for t in &taus {
        avg += t.data();
    }
    let tau_avg = Operator::with_dims_unchecked(avg * C64::new(1.0 / d as f64, 0.0), channel.out_dims().to_vec(), channel.out_dims().to_vec());
    Ok(PpgmBundle {
        povm,
        projectors,
        pi_sum,
        tau_states: taus,
        tau_avg,
        lambda_min: if lambda_min.is_finite() { lambda_min } else { 0.0 },
        lambda_max,
        rank_tol,
        residual_leak,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop2Bound {
    pub sum_form: f64,
    pub entropy_form: f64,
    pub lambda_min: f64,
    /// Set when the bound is at least 1 (up to rounding) and says nothing.
    pub vacuous: bool,
    pub ill_conditioned: bool,
}

/// (1/(dλ_min)) Σ_{i≠j} tr[τ_iτ_j] and the collision-entropy form of the same quantity.
pub fn prop2_bound(bundle: &PpgmBundle) -> Prop2Bound {
    let d = bundle.d();
    let taus = &bundle.tau_states;
    let mut cross = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                cross += taus[i].inner(&taus[j]).re;
            }
        }
    }
    let lm = bundle.lambda_min;
    let sum_form = cross / (d as f64 * lm);
    let h_avg = collision_entropy(&bundle.tau_avg);
    let per: f64 = taus.iter().map(|t| (-collision_entropy(t)).exp2()).sum();
    let entropy_form = (d as f64 * (-h_avg).exp2() - per / d as f64) / lm;
    Prop2Bound { sum_form, entropy_form, lambda_min: lm, vacuous: !(sum_form < 1.0 - 1e-12), ill_conditioned: bundle.ill_conditioned() }
}

/// (1/d) Σ_{i≠j} tr[Π_i τ_j].
pub fn appendix_b_bound(bundle: &PpgmBundle) -> f64 {
    let d = bundle.d();
    let mut s = 0.0;
    for (i, p) in bundle.projectors.iter().enumerate() {
        for (j, t) in bundle.tau_states.iter().enumerate() {
            if i != j {
                s += p.inner(t).re;
            }
        }
    }
    s / d as f64
}

/// Σ_{i≠j} tr[τ_iτ_j] (the Haar-averaged quantity of the scrambling experiments).
pub fn pairwise_overlap(taus: &[Operator]) -> f64 {
    let mut s = 0.0;
    for i in 0..taus.len() {
        for j in 0..taus.len() {
            if i != j {
                s += taus[i].inner(&taus[j]).re;
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctoq::delta_cl;

    #[test]
    fn support_projection_cases() {
        let p = support_projection(&Operator::diag(&[0.0, 1.0]), 1e-12);
        assert!(p.max_abs_diff(&Operator::diag(&[0.0, 1.0])) < 1e-15);
        let p = support_projection(&Operator::diag(&[0.5, 0.5]), 1e-12);
        assert!(p.max_abs_diff(&Operator::identity(&[2])) < 1e-14);
        let eps = 1e-6;
        let p = support_projection(&Operator::diag(&[1.0 - eps, eps, 0.0]), 1e-12);
        assert!(p.max_abs_diff(&Operator::diag(&[1.0, 1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn depolarizing_ppgm() {
        let ch = Channel::fully_depolarizing(&[2]);
        let basis = OrthoBasis::computational(2);
        let tol = Tolerances::default();
        let b = build_ppgm(&ch, &basis, &tol).unwrap();
        for m in b.povm.elements() {
            assert!(m.max_abs_diff(&Operator::diag(&[0.5, 0.5])) < 1e-12);
        }
        assert!((delta_cl(&b.povm, &ch, &basis).unwrap() - 0.5).abs() < 1e-12);
        let p2 = prop2_bound(&b);
        assert!((p2.lambda_min - 0.5).abs() < 1e-12);
        assert!((p2.sum_form - 1.0).abs() < 1e-12);
        assert!((p2.entropy_form - 1.0).abs() < 1e-12);
        assert!((appendix_b_bound(&b) - 1.0).abs() < 1e-12);
        assert!(p2.vacuous);
    }
}
