//! Classical-to-quantum decoders built from two POVMs, and the error
//! functionals used to assess them.
//!
//! Subsystem conventions: the purified input Φ lives on A ⊗ R (A first). A
//! channel T: A → C turns it into a state on C ⊗ R. The coherent measurement
//! R_E maps C → C ⊗ A, and the eraser Q_F maps C ⊗ A → A.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{self, kron, Mat, Operator, Vector, C64, ONE};
use crate::qcore::{
    bhattacharyya, compose, max_correlated_classical_conj, max_entangled, overlap_distribution, Channel, OrthoBasis, Povm,
    ProbDist,
};
use crate::tol::Tolerances;

/// Overlaps with modulus at or below this are treated as zero when taking phases.
pub const PHASE_ZERO: f64 = 1e-12;

/// Naimark dilation of a POVM: isometry V: C → C ⊗ O and projections P_j = I ⊗ |j⟩⟨j|.
#[derive(Clone, Debug)]
pub struct NaimarkExtension {
    isometry: Operator,
    projections: Vec<Operator>,
}

impl NaimarkExtension {
    pub fn isometry(&self) -> &Operator {
        &self.isometry
    }

    pub fn projections(&self) -> &[Operator] {
        &self.projections
    }

    pub fn outcomes(&self) -> usize {
        self.projections.len()
    }

    /// Dimension of the system C the POVM acts on.
    pub fn source_dim(&self) -> usize {
        self.isometry.ncols()
    }
}

/// V = Σ_j √M_j ⊗ |j⟩.
pub fn naimark_extend(povm: &Povm, tol: &Tolerances) -> Result<NaimarkExtension> {
    let m = povm.len();
    let dc = povm.dim();
    let mut v = Mat::zeros(dc * m, dc);
    for (j, el) in povm.elements().iter().enumerate() {
        let root = linop::sqrt_psd(el, tol)?;
        for r in 0..dc {
            for c in 0..dc {
                v[(r * m + j, c)] = root.data()[(r, c)];
            }
        }
    }
    let mut row_dims = povm.dims().to_vec();
    row_dims.push(m);
    let isometry = Operator::new(v, row_dims.clone(), povm.dims().to_vec())?;
    let projections = (0..m)
        .map(|j| {
            let mut p = Mat::zeros(m, m);
            p[(j, j)] = ONE;
            kron(&Operator::identity(povm.dims()), &Operator::from_mat(p))
        })
        .collect();
    Ok(NaimarkExtension { isometry, projections })
}

/// V_inv = V† ⊗ |e₀⟩ + |e₀′⟩ ⊗ (I − VV†), an isometry C′ → C ⊗ C′.
pub fn build_v_inv(ext: &NaimarkExtension, e0: &Vector, e0p: &Vector, tol: &Tolerances) -> Result<Operator> {
    let v = ext.isometry.data();
    let (dp, dc) = v.shape();
    if e0.len() != dp || e0p.len() != dc {
        return Err(Error::Dim("e0 must live on C′ and e0′ on C".into()));
    }
    let vvd = v * v.adjoint();
    let q = Mat::identity(dp, dp) - &vvd;
    let resid = (&q * e0).norm();
    if resid > tol.tp {
        return Err(Error::NotInRange(resid));
    }
    let e0m = Mat::from_column_slice(dp, 1, e0.as_slice());
    let e0pm = Mat::from_column_slice(dc, 1, e0p.as_slice());
    let data = v.adjoint().kronecker(&e0m) + e0pm.kronecker(&q);
    let mut row_dims = ext.isometry.col_dims().to_vec();
    row_dims.extend_from_slice(ext.isometry.row_dims());
    Operator::new(data, row_dims, ext.isometry.row_dims().to_vec())
}

/// Default constant vectors: e₀ = V|0⟩ and e₀′ = |0⟩ on C.
pub fn default_e0(ext: &NaimarkExtension) -> (Vector, Vector) {
    let e0 = ext.isometry.data().column(0).into_owned();
    let e0p = Operator::basis_ket(ext.source_dim(), 0);
    (e0, e0p)
}

/// Coherent measurement R_E: C → C ⊗ A, obtained by tracing out C′ from
/// V_inv (Σ_j P_j ⊗ |j_E⟩) V.
pub fn build_coherent_measurement(ext: &NaimarkExtension, e_basis: &OrthoBasis, tol: &Tolerances) -> Result<Channel> {
    let (e0, e0p) = default_e0(ext);
    let v_inv = build_v_inv(ext, &e0, &e0p, tol)?;
    coherent_measurement_with(ext, &v_inv, e_basis)
}

pub(crate) fn coherent_measurement_with(ext: &NaimarkExtension, v_inv: &Operator, e_basis: &OrthoBasis) -> Result<Channel> {
    let d = e_basis.dim();
    if ext.outcomes() != d {
        return Err(Error::Dim(format!("{} POVM outcomes but basis dimension {}", ext.outcomes(), d)));
    }
    let v = ext.isometry.data();
    let (dp, dc) = v.shape();
    // Σ_j P_j ⊗ |j_E⟩ : C′ → C′ ⊗ A
    let mut s = Mat::zeros(dp * d, dp);
    for (j, p) in ext.projections.iter().enumerate() {
        let ej = Mat::from_column_slice(d, 1, e_basis.vector(j).as_slice());
        s += p.data().kronecker(&ej);
    }
    let big = v_inv.data().kronecker(&Mat::identity(d, d)) * s * v;
    // rows of `big` are indexed (c, c′, a); slice out c′
    let mut out_dims = ext.isometry.col_dims().to_vec();
    out_dims.push(d);
    let kraus: Vec<Operator> = (0..dp)
        .map(|cp| {
            let m = Mat::from_fn(dc * d, dc, |r, x| {
                let (c, a) = (r / d, r % d);
                big[((c * dp + cp) * d + a, x)]
            });
            Operator::with_dims_unchecked(m, out_dims.clone(), ext.isometry.col_dims().to_vec())
        })
        .collect();
    Ok(Channel::from_kraus_unchecked(kraus)?.pruned(0.0))
}

/// Phase of ⟨j_E|l_F⟩ with arg(0) := 0.
pub fn theta_phases(e_basis: &OrthoBasis, f_basis: &OrthoBasis, l: usize) -> Result<Vec<C64>> {
    if e_basis.dim() != f_basis.dim() {
        return Err(Error::Dim("bases differ in dimension".into()));
    }
    if l >= f_basis.dim() {
        return Err(Error::Range(format!("outcome {l} out of range")));
    }
    let fl = f_basis.vector(l);
    Ok((0..e_basis.dim())
        .map(|j| {
            let z = e_basis.matrix().column(j).dotc(&fl);
            if z.norm() <= PHASE_ZERO {
                ONE
            } else {
                z / z.norm()
            }
        })
        .collect())
}

/// Θ_l = Σ_j e^{i arg⟨j_E|l_F⟩} |j_E⟩⟨j_E|.
pub fn build_theta(e_basis: &OrthoBasis, f_basis: &OrthoBasis, l: usize) -> Result<Operator> {
    let ph = theta_phases(e_basis, f_basis, l)?;
    let e = e_basis.matrix();
    let mut scaled = e.clone();
    for (j, p) in ph.iter().enumerate() {
        let col = scaled.column(j) * *p;
        scaled.set_column(j, &col);
    }
    Ok(Operator::from_mat(scaled * e.adjoint()))
}

/// Eraser Q_F: C ⊗ A → A with Kraus operators Θ_l (⟨m|√M_{F,l} ⊗ I_A).
pub fn build_eraser(povm_f: &Povm, thetas: &[Operator], tol: &Tolerances) -> Result<Channel> {
    build_eraser_in_basis(povm_f, thetas, &OrthoBasis::computational(povm_f.dim()), tol)
}

/// As [`build_eraser`] with the C-slicing basis {|m⟩} given explicitly.
pub fn build_eraser_in_basis(povm_f: &Povm, thetas: &[Operator], slicing: &OrthoBasis, tol: &Tolerances) -> Result<Channel> {
    if thetas.len() != povm_f.len() {
        return Err(Error::Dim(format!("{} phase operators for {} outcomes", thetas.len(), povm_f.len())));
    }
    if slicing.dim() != povm_f.dim() {
        return Err(Error::Dim("slicing basis must live on C".into()));
    }
    let d = thetas[0].nrows();
    let dc = povm_f.dim();
    let id = Mat::identity(d, d);
    let mut in_dims = povm_f.dims().to_vec();
    in_dims.push(d);
    let mut kraus = Vec::with_capacity(povm_f.len() * dc);
    for (el, th) in povm_f.elements().iter().zip(thetas) {
        if th.nrows() != d {
            return Err(Error::Dim("phase operators differ in dimension".into()));
        }
        let root = linop::sqrt_psd(el, tol)?;
        for m in 0..dc {
            let bra = slicing.vector(m).adjoint() * root.data();
            let k = th.data() * bra.kronecker(&id);
            kraus.push(Operator::with_dims_unchecked(k, vec![d], in_dims.clone()));
        }
    }
    Ok(Channel::from_kraus_unchecked(kraus)?.pruned(0.0))
}

/// The assembled decoder D = Q_F ∘ R_E and its ingredients.
#[derive(Clone, Debug)]
pub struct CtoQDecoder {
    pub r_e: Channel,
    pub q_f: Channel,
    pub total: Channel,
    pub e_basis: OrthoBasis,
    pub f_basis: OrthoBasis,
    pub thetas: Vec<Operator>,
    pub v_inv: Operator,
    pub extension: NaimarkExtension,
}

pub fn build_ctoq(povm_e: &Povm, povm_f: &Povm, e_basis: &OrthoBasis, f_basis: &OrthoBasis, tol: &Tolerances) -> Result<CtoQDecoder> {
    let d = e_basis.dim();
    if povm_e.len() != d || povm_f.len() != d || f_basis.dim() != d {
        return Err(Error::Dim("both POVMs need d outcomes and both bases dimension d".into()));
    }
    if povm_e.dims() != povm_f.dims() {
        return Err(Error::Dim("POVMs act on different spaces".into()));
    }
    let extension = naimark_extend(povm_e, tol)?;
    let (e0, e0p) = default_e0(&extension);
    let v_inv = build_v_inv(&extension, &e0, &e0p, tol)?;
    let r_e = coherent_measurement_with(&extension, &v_inv, e_basis)?;
    let thetas = (0..d).map(|l| build_theta(e_basis, f_basis, l)).collect::<Result<Vec<_>>>()?;
    let q_f = build_eraser(povm_f, &thetas, tol)?;
    let total = compose(&q_f, &r_e)?;
    Ok(CtoQDecoder { r_e, q_f, total, e_basis: e_basis.clone(), f_basis: f_basis.clone(), thetas, v_inv, extension })
}

/// (D ∘ T ⊗ id_R)(Φ^{AR}) computed by applying T then D to the A factor.
pub fn decoded_choi(decoder: &Channel, channel: &Channel) -> Result<Operator> {
    let d = channel.in_dim();
    if decoder.in_dim() != channel.out_dim() || decoder.out_dim() != d {
        return Err(Error::Dim(format!(
            "decoder {:?}→{:?} does not invert channel {:?}→{:?}",
            decoder.in_dims(),
            decoder.out_dims(),
            channel.in_dims(),
            channel.out_dims()
        )));
    }
    let phi = max_entangled(d);
    let mid = channel.apply_to(&phi, &[0])?;
    let n_out = channel.out_dims().len();
    let target: Vec<usize> = (0..n_out).collect();
    let out = decoder.apply_to(&mid, &target)?;
    out.reshape_dims(vec![d, d], vec![d, d])
}

/// Δ_q = ½‖Φ − (D∘T)(Φ)‖₁.
pub fn delta_q(decoder: &Channel, channel: &Channel) -> Result<f64> {
    let out = decoded_choi(decoder, channel)?;
    linop::trace_distance(&max_entangled(channel.in_dim()), &out)
}

fn check_cl(povm: &Povm, channel: &Channel, basis: &OrthoBasis) -> Result<()> {
    if povm.len() != basis.dim() || channel.in_dim() != basis.dim() {
        return Err(Error::Dim(format!(
            "{} outcomes, basis dimension {}, channel input {}",
            povm.len(),
            basis.dim(),
            channel.in_dim()
        )));
    }
    if povm.dim() != channel.out_dim() {
        return Err(Error::Dim("POVM does not act on the channel output".into()));
    }
    Ok(())
}

/// States τ_j = T(|j_W⟩⟨j_W|).
pub fn output_states(channel: &Channel, basis: &OrthoBasis) -> Result<Vec<Operator>> {
    (0..basis.dim())
        .map(|j| {
            let p = basis.projector(j).reshape_dims(channel.in_dims().to_vec(), channel.in_dims().to_vec())?;
            channel.apply(&p)
        })
        .collect()
}

/// Δ_cl = (1/d) Σ_{i≠j} tr[T(|i_W⟩⟨i_W|) M_j].
pub fn delta_cl(povm: &Povm, channel: &Channel, basis: &OrthoBasis) -> Result<f64> {
    check_cl(povm, channel, basis)?;
    let taus = output_states(channel, basis)?;
    Ok(delta_cl_from_states(povm, &taus))
}

pub(crate) fn delta_cl_from_states(povm: &Povm, taus: &[Operator]) -> f64 {
    let d = taus.len();
    let mut s = 0.0;
    for (i, t) in taus.iter().enumerate() {
        for (j, m) in povm.elements().iter().enumerate() {
            if i != j {
                s += m.inner(t).re;
            }
        }
    }
    s / d as f64
}

/// ½‖Ω − (D_M ∘ T)(Ω)‖₁ with Ω = d⁻¹Σ_j |j_W⟩⟨j_W| ⊗ |j_W*⟩⟨j_W*| and D_M the
/// measure-prepare map of the POVM into the basis.
pub fn delta_cl_trace_norm(povm: &Povm, channel: &Channel, basis: &OrthoBasis) -> Result<f64> {
    delta_cl_trace_norm_with(povm, channel, basis, &max_correlated_classical_conj(basis))
}

/// Trace-norm form against an explicitly supplied correlated state on A ⊗ R.
pub fn delta_cl_trace_norm_with(povm: &Povm, channel: &Channel, basis: &OrthoBasis, omega: &Operator) -> Result<f64> {
    check_cl(povm, channel, basis)?;
    let d = basis.dim();
    let dm = Channel::measure_prepare(povm, basis)?;
    let omega = omega.reshape_dims(vec![d, d], vec![d, d])?;
    let mid = channel.apply_to(&omega, &[0])?;
    let target: Vec<usize> = (0..channel.out_dims().len()).collect();
    let out = dm.apply_to(&mid, &target)?;
    linop::trace_distance(&omega, &out.reshape_dims(vec![d, d], vec![d, d])?)
}

/// F_BC(unif_d, p_l) for every l.
pub fn bhattacharyya_profile(e_basis: &OrthoBasis, f_basis: &OrthoBasis) -> Result<Vec<f64>> {
    let d = e_basis.dim();
    let u = ProbDist::uniform(d);
    (0..d).map(|l| bhattacharyya(&u, &overlap_distribution(e_basis, f_basis, l)?)).collect()
}

/// Ξ_EF = 1 − Σ_l tr[T(π) M_{F,l}] F_BC(unif_d, p_l).
pub fn xi_ef(channel: &Channel, povm_f: &Povm, e_basis: &OrthoBasis, f_basis: &OrthoBasis) -> Result<f64> {
    check_cl(povm_f, channel, f_basis)?;
    let d = e_basis.dim();
    let pi = Operator::identity(channel.in_dims()).scale(1.0 / d as f64);
    let t_pi = channel.apply(&pi)?;
    let fbc = bhattacharyya_profile(e_basis, f_basis)?;
    let probs = povm_f.probabilities(&t_pi);
    Ok(1.0 - probs.iter().zip(&fbc).map(|(p, f)| p * f).sum::<f64>())
}

/// Upper bounds on Ξ_EF: (1 − min_l F_l, 1 − d⁻¹Σ_l F_l + Δ_cl,F (F_max − F_min)).
pub fn xi_bounds(channel: &Channel, povm_f: &Povm, e_basis: &OrthoBasis, f_basis: &OrthoBasis) -> Result<(f64, f64)> {
    let dcl_f = delta_cl(povm_f, channel, f_basis)?;
    let fbc = bhattacharyya_profile(e_basis, f_basis)?;
    Ok(xi_bounds_from(&fbc, dcl_f))
}

pub(crate) fn xi_bounds_from(fbc: &[f64], dcl_f: f64) -> (f64, f64) {
    let d = fbc.len() as f64;
    let fmin = fbc.iter().copied().fold(f64::INFINITY, f64::min);
    let fmax = fbc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = fbc.iter().sum::<f64>() / d;
    (1.0 - fmin, 1.0 - mean + dcl_f * (fmax - fmin))
}

/// √(Δ_E(2−Δ_E)) + √Δ_F + √Ξ.
pub fn theorem1_bound(delta_e: f64, delta_f: f64, xi: f64) -> f64 {
    let de = delta_e.clamp(0.0, 1.0);
    (de * (2.0 - de)).sqrt() + delta_f.max(0.0).sqrt() + xi.max(0.0).sqrt()
}

/// (1+√2) max_W √Δ_W.
pub fn corollary1_bound(delta_e: f64, delta_f: f64) -> f64 {
    (1.0 + std::f64::consts::SQRT_2) * delta_e.max(delta_f).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub delta_q: f64,
    pub delta_cl_e: f64,
    pub delta_cl_f: f64,
    pub xi_ef: f64,
    pub bound_thm1: f64,
    pub bound_eq15: f64,
    pub bound_eq17: f64,
}

impl ErrorReport {
    /// bound_thm1 − delta_q; negative means a violation.
    pub fn slack(&self) -> f64 {
        self.bound_thm1 - self.delta_q
    }
}

/// Builds the decoder explicitly and evaluates every quantity of the error report.
pub fn theorem1_report(
    channel: &Channel,
    povm_e: &Povm,
    povm_f: &Povm,
    e_basis: &OrthoBasis,
    f_basis: &OrthoBasis,
    tol: &Tolerances,
) -> Result<ErrorReport> {
    let dec = build_ctoq(povm_e, povm_f, e_basis, f_basis, tol)?;
    let dq = delta_q(&dec.total, channel)?;
    report_with(dq, channel, povm_e, povm_f, e_basis, f_basis)
}

fn report_with(
    dq: f64,
    channel: &Channel,
    povm_e: &Povm,
    povm_f: &Povm,
    e_basis: &OrthoBasis,
    f_basis: &OrthoBasis,
) -> Result<ErrorReport> {
    let de = delta_cl(povm_e, channel, e_basis)?;
    let df = delta_cl(povm_f, channel, f_basis)?;
    let xi = xi_ef(channel, povm_f, e_basis, f_basis)?;
    let fbc = bhattacharyya_profile(e_basis, f_basis)?;
    let (b15, b17) = xi_bounds_from(&fbc, df);
    Ok(ErrorReport {
        delta_q: dq,
        delta_cl_e: de,
        delta_cl_f: df,
        xi_ef: xi,
        bound_thm1: theorem1_bound(de, df, xi),
        bound_eq15: b15,
        bound_eq17: b17,
    })
}

/// Reports for the (E,F) and (F,E) assemblies.
pub fn theorem1_both_orderings(
    channel: &Channel,
    povm_e: &Povm,
    povm_f: &Povm,
    e_basis: &OrthoBasis,
    f_basis: &OrthoBasis,
    tol: &Tolerances,
) -> Result<(ErrorReport, ErrorReport)> {
    Ok((
        theorem1_report(channel, povm_e, povm_f, e_basis, f_basis, tol)?,
        theorem1_report(channel, povm_f, povm_e, f_basis, e_basis, tol)?,
    ))
}

/// M_j = D†(|j_W⟩⟨j_W|).
pub fn povm_from_decoder(decoder: &Channel, basis: &OrthoBasis, tol: &Tolerances) -> Result<Povm> {
    if decoder.out_dim() != basis.dim() {
        return Err(Error::Dim("decoder output does not match basis".into()));
    }
    let elements = (0..basis.dim())
        .map(|j| {
            let p = basis.projector(j).reshape_dims(decoder.out_dims().to_vec(), decoder.out_dims().to_vec())?;
            Ok(decoder.adjoint_apply(&p)?.hermitian_part())
        })
        .collect::<Result<Vec<_>>>()?;
    Povm::new(elements, tol)
}

/// d⁻¹ Σ_{j,i} |j_E*⟩⟨i_E*| ⊗ T(|j_E⟩⟨i_E|) ⊗ |j_E⟩⟨i_E| on R ⊗ C ⊗ A.
pub fn noisy_ghz_state(channel: &Channel, e_basis: &OrthoBasis) -> Result<Operator> {
    let d = e_basis.dim();
    if channel.in_dim() != d {
        return Err(Error::Dim("basis does not match channel input".into()));
    }
    let ec = e_basis.conj();
    let dc = channel.out_dim();
    let n = d * dc * d;
    let mut out = Mat::zeros(n, n);
    for j in 0..d {
        for i in 0..d {
            let vj = e_basis.vector(j);
            let vi = e_basis.vector(i);
            let x = Operator::square(&vj * vi.adjoint(), channel.in_dims().to_vec())?;
            let tx = channel.apply(&x)?;
            let r = ec.vector(j) * ec.vector(i).adjoint();
            let a = &vj * vi.adjoint();
            out += r.kronecker(tx.data()).kronecker(&a);
        }
    }
    let mut dims = vec![d];
    dims.extend_from_slice(channel.out_dims());
    dims.push(d);
    Operator::square(out * C64::new(1.0 / d as f64, 0.0), dims)
}

/// Coherent-measurement output (R_E ∘ T)(Φ^{AR}) reordered to R ⊗ C ⊗ A.
pub fn coherent_output(r_e: &Channel, channel: &Channel) -> Result<Operator> {
    let d = channel.in_dim();
    let phi = max_entangled(d);
    let mid = channel.apply_to(&phi, &[0])?;
    let nc = channel.out_dims().len();
    let target: Vec<usize> = (0..nc).collect();
    let out = r_e.apply_to(&mid, &target)?;
    // out is C..., A, R; move R to the front
    let k = out.row_dims().len();
    let mut perm = vec![k - 1];
    perm.extend(0..k - 1);
    linop::permute_subsystems(&out, &perm)
}

/// Trace distance between the coherent-measurement output and the noisy GHZ state.
pub fn ghz_distance(r_e: &Channel, channel: &Channel, e_basis: &OrthoBasis) -> Result<f64> {
    let a = coherent_output(r_e, channel)?;
    let b = noisy_ghz_state(channel, e_basis)?;
    linop::trace_distance(&a, &b.reshape_dims(a.row_dims().to_vec(), a.col_dims().to_vec())?)
}

/// Structured evaluator of D = Q_F ∘ R_E that avoids materializing the
/// composed Kraus set. With E the E-basis matrix, φ_l the Θ_l phases and
/// f_l = ⟨e₀′|M_{F,l}|e₀′⟩,
///
/// D(X) = E [Σ_l diag(φ_l) B_l diag(φ_l)*] E†,
/// B_l[j][j′] = tr[M_{j′} M_{F,l} M_j X] + f_l (δ_{jj′} tr[M_j X] − tr[M_{j′} M_j X]).
#[derive(Clone, Debug)]
pub struct CtoQMap {
    d: usize,
    e_mat: Mat,
    phases: Vec<Vec<C64>>,
    m_e: Vec<Mat>,
    m_f: Vec<Mat>,
    f_weights: Vec<f64>,
}

impl CtoQMap {
    pub fn new(povm_e: &Povm, povm_f: &Povm, e_basis: &OrthoBasis, f_basis: &OrthoBasis) -> Result<Self> {
        let d = e_basis.dim();
        if povm_e.len() != d || povm_f.len() != d || f_basis.dim() != d || povm_e.dim() != povm_f.dim() {
            return Err(Error::Dim("inconsistent POVMs and bases".into()));
        }
        let phases = (0..d).map(|l| theta_phases(e_basis, f_basis, l)).collect::<Result<Vec<_>>>()?;
        let f_weights = povm_f.elements().iter().map(|m| m.data()[(0, 0)].re).collect();
        Ok(CtoQMap {
            d,
            e_mat: e_basis.matrix().clone(),
            phases,
            m_e: povm_e.elements().iter().map(|m| m.data().clone()).collect(),
            m_f: povm_f.elements().iter().map(|m| m.data().clone()).collect(),
            f_weights,
        })
    }

    /// Assemble the output from the three families of traces, each indexed [j][j′] or [j].
    fn assemble(&self, t_jfj: &[Vec<Vec<C64>>], t_j: &[C64], t_jj: &[Vec<C64>]) -> Mat {
        let d = self.d;
        let mut inner = Mat::zeros(d, d);
        for l in 0..d {
            let ph = &self.phases[l];
            let fl = self.f_weights[l];
            for j in 0..d {
                for jp in 0..d {
                    let mut b = t_jfj[l][j][jp] - t_jj[j][jp] * fl;
                    if j == jp {
                        b += t_j[j] * fl;
                    }
                    inner[(j, jp)] += ph[j] * b * ph[jp].conj();
                }
            }
        }
        &self.e_mat * inner * self.e_mat.adjoint()
    }

    /// D(X) for an operator X on C.
    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        let dc = self.m_e[0].nrows();
        if x.nrows() != dc || x.ncols() != dc {
            return Err(Error::Dim("input does not live on C".into()));
        }
        let d = self.d;
        let x = x.data();
        let mx: Vec<Mat> = self.m_e.iter().map(|m| m * x).collect();
        let t_j: Vec<C64> = mx.iter().map(|m| m.trace()).collect();
        let t_jj: Vec<Vec<C64>> =
            (0..d).map(|j| (0..d).map(|jp| (&self.m_e[jp] * &mx[j]).trace()).collect()).collect();
        let t_jfj: Vec<Vec<Vec<C64>>> = self
            .m_f
            .iter()
            .map(|f| {
                let fmx: Vec<Mat> = mx.iter().map(|m| f * m).collect();
                (0..d).map(|j| (0..d).map(|jp| (&self.m_e[jp] * &fmx[j]).trace()).collect()).collect()
            })
            .collect();
        Ok(Operator::from_mat(self.assemble(&t_jfj, &t_j, &t_jj)))
    }

    /// (D ∘ T ⊗ id_R)(Φ^{AR}) on A ⊗ R, computed from the Kraus operators of T.
    pub fn decoded_choi(&self, channel: &Channel) -> Result<Operator> {
        let d = self.d;
        let dc = self.m_e[0].nrows();
        if channel.in_dim() != d || channel.out_dim() != dc {
            return Err(Error::Dim("channel does not match the decoder".into()));
        }
        // Z[j][k] = M_j K_k  (dc × d)
        let z: Vec<Vec<Mat>> =
            self.m_e.iter().map(|m| channel.kraus().iter().map(|k| m * k.data()).collect()).collect();
        let zero = Mat::zeros(d, d);
        let mut s_j = vec![zero.clone(); d];
        let mut s_jj = vec![vec![zero.clone(); d]; d];
        let mut s_jfj = vec![vec![vec![zero.clone(); d]; d]; d];
        for (kk, k) in channel.kraus().iter().enumerate() {
            let kd = k.data().adjoint();
            for j in 0..d {
                s_j[j] += &kd * &z[j][kk];
                for jp in 0..d {
                    s_jj[j][jp] += z[jp][kk].adjoint() * &z[j][kk];
                }
            }
            for (l, f) in self.m_f.iter().enumerate() {
                for j in 0..d {
                    let fz = f * &z[j][kk];
                    for jp in 0..d {
                        s_jfj[l][j][jp] += z[jp][kk].adjoint() * &fz;
                    }
                }
            }
        }
        // entry [b, a] of each S is tr[· T(|a⟩⟨b|)]
        let mut out = Mat::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                let t_j: Vec<C64> = (0..d).map(|j| s_j[j][(b, a)]).collect();
                let t_jj: Vec<Vec<C64>> = (0..d).map(|j| (0..d).map(|jp| s_jj[j][jp][(b, a)]).collect()).collect();
                let t_jfj: Vec<Vec<Vec<C64>>> = (0..d)
                    .map(|l| (0..d).map(|j| (0..d).map(|jp| s_jfj[l][j][jp][(b, a)]).collect()).collect())
                    .collect();
                let block = self.assemble(&t_jfj, &t_j, &t_jj);
                for r in 0..d {
                    for c in 0..d {
                        out[(r * d + a, c * d + b)] += block[(r, c)];
                    }
                }
            }
        }
        Operator::square(out * C64::new(1.0 / d as f64, 0.0), vec![d, d])
    }

    pub fn delta_q(&self, channel: &Channel) -> Result<f64> {
        let out = self.decoded_choi(channel)?;
        Ok(0.5 * linop::trace_norm_hermitian(&max_entangled(self.d).sub(&out)?))
    }
}

/// Same report as [`theorem1_report`] but with Δ_q from the structured evaluator.
pub fn theorem1_report_fast(
    channel: &Channel,
    povm_e: &Povm,
    povm_f: &Povm,
    e_basis: &OrthoBasis,
    f_basis: &OrthoBasis,
) -> Result<ErrorReport> {
    let map = CtoQMap::new(povm_e, povm_f, e_basis, f_basis)?;
    let dq = map.delta_q(channel)?;
    report_with(dq, channel, povm_e, povm_f, e_basis, f_basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{pauli_basis, PauliKind};

    fn t() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn theta_for_z_and_x() {
        let z = pauli_basis(1, PauliKind::Z).unwrap();
        let x = pauli_basis(1, PauliKind::X).unwrap();
        let t0 = build_theta(&z, &x, 0).unwrap();
        let t1 = build_theta(&z, &x, 1).unwrap();
        assert!(t0.max_abs_diff(&Operator::identity(&[2])) < 1e-15);
        assert!(t1.max_abs_diff(&Operator::diag(&[1.0, -1.0])) < 1e-15);
    }

    #[test]
    fn identity_channel_mub_decodes_perfectly() {
        let z = pauli_basis(1, PauliKind::Z).unwrap();
        let x = pauli_basis(1, PauliKind::X).unwrap();
        let dec = build_ctoq(&Povm::projective(&z), &Povm::projective(&x), &z, &x, &t()).unwrap();
        let dq = delta_q(&dec.total, &Channel::identity(&[2])).unwrap();
        assert!(dq < 1e-9, "{dq}");
    }

    #[test]
    fn depolarizing_delta_q() {
        let dq = delta_q(&Channel::identity(&[2]), &Channel::fully_depolarizing(&[2])).unwrap();
        assert!((dq - 0.75).abs() < 1e-12);
    }
}
