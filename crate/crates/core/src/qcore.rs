//! States, channels, POVMs, bases and classical helpers.

use crate::error::{Error, Result};
use crate::linop::{self, kron, kron_vec, permute_subsystems, C64, Mat, Operator, Vector};
use crate::tol::Tolerances;

/// CPTP map in Kraus form.
#[derive(Clone, Debug)]
pub struct Channel {
    kraus: Vec<Operator>,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
}

impl Channel {
    /// Validates shapes and trace preservation.
    pub fn new(kraus: Vec<Operator>, tol: &Tolerances) -> Result<Self> {
        let ch = Self::from_kraus_unchecked(kraus)?;
        let defect = ch.tp_defect();
        if defect > tol.tp {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(ch)
    }

    /// Shapes are checked, trace preservation is not.
    pub fn from_kraus_unchecked(kraus: Vec<Operator>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::Dim("channel needs at least one Kraus operator".into()))?;
        let in_dims = first.col_dims().to_vec();
        let out_dims = first.row_dims().to_vec();
        for k in &kraus {
            if k.col_dims() != in_dims.as_slice() || k.row_dims() != out_dims.as_slice() {
                return Err(Error::Dim("Kraus operators have inconsistent dims".into()));
            }
        }
        Ok(Channel { kraus, in_dims, out_dims })
    }

    pub fn identity(dims: &[usize]) -> Self {
        Channel { kraus: vec![Operator::identity(dims)], in_dims: dims.to_vec(), out_dims: dims.to_vec() }
    }

    /// Conjugation by a unitary or isometry `v` (must satisfy V†V = I).
    pub fn isometry(v: &Operator, tol: &Tolerances) -> Result<Self> {
        Self::new(vec![v.clone()], tol)
    }

    /// ρ ↦ tr(ρ)·σ.
    pub fn replacement(in_dims: &[usize], sigma: &Operator, tol: &Tolerances) -> Result<Self> {
        let e = linop::eig_hermitian(sigma, tol)?;
        let din: usize = in_dims.iter().product();
        let dout = sigma.nrows();
        let mut kraus = Vec::new();
        for (k, &l) in e.eigenvalues.iter().enumerate() {
            if l <= 0.0 {
                continue;
            }
            let v = e.eigenvectors.data().column(k) * C64::new(l.sqrt(), 0.0);
            for j in 0..din {
                let mut m = Mat::zeros(dout, din);
                m.set_column(j, &v);
                kraus.push(Operator::new(m, sigma.row_dims().to_vec(), in_dims.to_vec())?);
            }
        }
        Self::new(kraus, tol)
    }

    /// ρ ↦ tr(ρ)·I/d.
    pub fn fully_depolarizing(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        let s = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        let mut kraus = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut m = Mat::zeros(d, d);
                m[(i, j)] = s;
                kraus.push(Operator::with_dims_unchecked(m, dims.to_vec(), dims.to_vec()));
            }
        }
        Channel { kraus, in_dims: dims.to_vec(), out_dims: dims.to_vec() }
    }

    /// Dephasing in the given basis: ρ ↦ Σ_j |j⟩⟨j|ρ|j⟩⟨j|.
    pub fn dephasing(basis: &OrthoBasis) -> Self {
        let d = basis.dim();
        let kraus = (0..d).map(|j| basis.projector(j)).collect();
        Channel { kraus, in_dims: vec![d], out_dims: vec![d] }
    }

    /// Measure-and-prepare map ρ ↦ Σ_j tr[ρ M_j] |j_W⟩⟨j_W|.
    pub fn measure_prepare(povm: &Povm, basis: &OrthoBasis) -> Result<Self> {
        if povm.len() != basis.dim() {
            return Err(Error::Dim(format!("{} outcomes but basis of dimension {}", povm.len(), basis.dim())));
        }
        let tol = Tolerances::default();
        let d = basis.dim();
        let dc = povm.dim();
        let mut kraus = Vec::with_capacity(d * dc);
        for (j, m) in povm.elements().iter().enumerate() {
            let root = linop::sqrt_psd(m, &tol)?;
            let w = basis.vector(j);
            for r in 0..dc {
                let row = root.data().row(r);
                let k = &w * row;
                kraus.push(Operator::with_dims_unchecked(k, vec![d], povm.dims().to_vec()));
            }
        }
        Ok(Channel { kraus, in_dims: povm.dims().to_vec(), out_dims: vec![d] }.pruned(0.0))
    }

    /// Convex mixture Σ w_i T_i.
    pub fn mix(channels: &[Channel], weights: &[f64], tol: &Tolerances) -> Result<Self> {
        if channels.len() != weights.len() || channels.is_empty() {
            return Err(Error::Dim("mixture needs one weight per channel".into()));
        }
        let w = ProbDist::new(weights.to_vec(), tol)?;
        let mut kraus = Vec::new();
        for (ch, &p) in channels.iter().zip(w.weights()) {
            if ch.in_dims != channels[0].in_dims || ch.out_dims != channels[0].out_dims {
                return Err(Error::Dim("mixture components differ in dims".into()));
            }
            if p > 0.0 {
                kraus.extend(ch.kraus.iter().map(|k| k.scale(p.sqrt())));
            }
        }
        Self::new(kraus, tol)
    }

    pub fn kraus(&self) -> &[Operator] {
        &self.kraus
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn in_dim(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dims.iter().product()
    }

    /// max |Σ K†K − I|.
    pub fn tp_defect(&self) -> f64 {
        let n = self.in_dim();
        let mut s = Mat::zeros(n, n);
        for k in &self.kraus {
            s += k.data().adjoint() * k.data();
        }
        let id = Mat::identity(n, n);
        (s - id).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// T(ρ) on the full input.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.nrows() != self.in_dim() || rho.ncols() != self.in_dim() {
            return Err(Error::Dim(format!("state of size {} fed to channel on {:?}", rho.nrows(), self.in_dims)));
        }
        let n = self.out_dim();
        let mut out = Mat::zeros(n, n);
        for k in &self.kraus {
            let kr = k.data() * rho.data();
            out += kr * k.data().adjoint();
        }
        Ok(Operator::with_dims_unchecked(out, self.out_dims.clone(), self.out_dims.clone()))
    }

    /// Heisenberg picture Σ K† X K.
    pub fn adjoint_apply(&self, x: &Operator) -> Result<Operator> {
        if x.nrows() != self.out_dim() || x.ncols() != self.out_dim() {
            return Err(Error::Dim("operator does not live on the channel output".into()));
        }
        let n = self.in_dim();
        let mut out = Mat::zeros(n, n);
        for k in &self.kraus {
            out += k.data().adjoint() * x.data() * k.data();
        }
        Ok(Operator::with_dims_unchecked(out, self.in_dims.clone(), self.in_dims.clone()))
    }

    /// Apply the channel to the subsystems `target` of `state` (identity elsewhere).
    /// The output subsystems take the place of the first target subsystem; the
    /// remaining subsystems keep their relative order.
    pub fn apply_to(&self, state: &Operator, target: &[usize]) -> Result<Operator> {
        let dims = state.row_dims().to_vec();
        let n = dims.len();
        if target.is_empty() {
            return Err(Error::Dim("empty target".into()));
        }
        let tdims: Vec<usize> = target
            .iter()
            .map(|&t| if t < n { Ok(dims[t]) } else { Err(Error::Subsystem { index: t, count: n }) })
            .collect::<Result<_>>()?;
        if tdims.iter().product::<usize>() != self.in_dim() {
            return Err(Error::Dim(format!("target dims {tdims:?} do not match channel input {:?}", self.in_dims)));
        }
        let rest: Vec<usize> = (0..n).filter(|i| !target.contains(i)).collect();
        let mut perm = target.to_vec();
        perm.extend_from_slice(&rest);
        let front = permute_subsystems(state, &perm)?;
        let drest: usize = rest.iter().map(|&i| dims[i]).product();
        let id = Mat::identity(drest, drest);
        let dout = self.out_dim();
        let mut out = Mat::zeros(dout * drest, dout * drest);
        for k in &self.kraus {
            let big = k.data().kronecker(&id);
            out += &big * front.data() * big.adjoint();
        }
        let mut out_dims = self.out_dims.clone();
        out_dims.extend(rest.iter().map(|&i| dims[i]));
        let result = Operator::with_dims_unchecked(out, out_dims.clone(), out_dims);
        // move the output block back to where the first target subsystem was
        let m = self.out_dims.len();
        let pos = rest.iter().filter(|&&i| i < target[0]).count();
        let mut order: Vec<usize> = Vec::with_capacity(m + rest.len());
        order.extend(m..m + pos);
        order.extend(0..m);
        order.extend(m + pos..m + rest.len());
        permute_subsystems(&result, &order)
    }

    /// Tensor product T ⊗ S.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        let mut in_dims = self.in_dims.clone();
        in_dims.extend_from_slice(&other.in_dims);
        let mut out_dims = self.out_dims.clone();
        out_dims.extend_from_slice(&other.out_dims);
        Channel { kraus, in_dims, out_dims }
    }

    /// Drop Kraus operators whose entries are all below `eps`.
    pub fn pruned(mut self, eps: f64) -> Self {
        if self.kraus.len() > 1 {
            let keep: Vec<Operator> = self.kraus.iter().filter(|k| k.max_abs() > eps).cloned().collect();
            if !keep.is_empty() {
                self.kraus = keep;
            }
        }
        self
    }
}

/// `later ∘ earlier`; the Kraus set is all pairwise products.
pub fn compose(later: &Channel, earlier: &Channel) -> Result<Channel> {
    if earlier.out_dim() != later.in_dim() {
        return Err(Error::Dim(format!(
            "cannot compose: earlier outputs {:?}, later expects {:?}",
            earlier.out_dims, later.in_dims
        )));
    }
    let mut kraus = Vec::with_capacity(later.kraus.len() * earlier.kraus.len());
    for b in &later.kraus {
        for a in &earlier.kraus {
            let m = b.data() * a.data();
            kraus.push(Operator::with_dims_unchecked(m, later.out_dims.clone(), earlier.in_dims.clone()));
        }
    }
    Ok(Channel { kraus, in_dims: earlier.in_dims.clone(), out_dims: later.out_dims.clone() }.pruned(0.0))
}

/// Ordered list of positive operators summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<Operator>,
}

impl Povm {
    /// Validates PSD-ness of every element and completeness.
    pub fn new(elements: Vec<Operator>, tol: &Tolerances) -> Result<Self> {
        for (j, m) in elements.iter().enumerate() {
            if !m.is_square() {
                return Err(Error::Povm(format!("element {j} is not square")));
            }
            let h = m.hermitian_defect();
            if h > tol.povm {
                return Err(Error::Povm(format!("element {j} is not Hermitian ({h:.3e})")));
            }
            let lmin = linop::min_eigenvalue(m);
            if lmin < -tol.povm {
                return Err(Error::Povm(format!("element {j} has eigenvalue {lmin:.3e}")));
            }
        }
        Self::new_complete(elements, tol)
    }

    /// Checks completeness only; for elements that are PSD by construction.
    pub(crate) fn new_complete(elements: Vec<Operator>, tol: &Tolerances) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::Povm("no elements".into()))?;
        let n = first.nrows();
        let mut s = Mat::zeros(n, n);
        for m in &elements {
            if m.row_dims() != first.row_dims() || m.col_dims() != first.col_dims() {
                return Err(Error::Povm("elements live on different spaces".into()));
            }
            s += m.data();
        }
        let defect = (s - Mat::identity(n, n)).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if defect > tol.povm {
            return Err(Error::Povm(format!("elements sum to identity only up to {defect:.3e}")));
        }
        Ok(Povm { elements })
    }

    /// Projective measurement in `basis`.
    pub fn projective(basis: &OrthoBasis) -> Self {
        Povm { elements: (0..basis.dim()).map(|j| basis.projector(j)).collect() }
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn element(&self, j: usize) -> &Operator {
        &self.elements[j]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> std::ops::Range<usize> {
        0..self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn dims(&self) -> &[usize] {
        self.elements[0].row_dims()
    }

    /// Outcome probabilities tr[ρ M_j].
    pub fn probabilities(&self, rho: &Operator) -> Vec<f64> {
        self.elements.iter().map(|m| m.inner(rho).re).collect()
    }
}

/// Orthonormal basis stored as the columns of a unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoBasis {
    vectors: Mat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Z,
}

impl OrthoBasis {
    pub fn new(vectors: Mat, tol: &Tolerances) -> Result<Self> {
        if !vectors.is_square() || vectors.nrows() == 0 {
            return Err(Error::Basis("basis matrix must be square and nonempty".into()));
        }
        let n = vectors.nrows();
        let g = vectors.adjoint() * &vectors;
        let defect = (g - Mat::identity(n, n)).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if defect > tol.basis {
            return Err(Error::Basis(format!("Gram matrix deviates from identity by {defect:.3e}")));
        }
        Ok(OrthoBasis { vectors })
    }

    pub fn computational(d: usize) -> Self {
        OrthoBasis { vectors: Mat::identity(d, d) }
    }

    /// |l_F⟩ = d^{-1/2} Σ_j ω^{jl} |j⟩ with ω = e^{2πi/d}.
    pub fn fourier(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let vectors = Mat::from_fn(d, d, |j, l| {
            let ang = 2.0 * std::f64::consts::PI * ((j * l) % d) as f64 / d as f64;
            C64::from_polar(s, ang)
        });
        OrthoBasis { vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> Vector {
        self.vectors.column(j).into_owned()
    }

    /// |j⟩⟨j| as an operator on one system.
    pub fn projector(&self, j: usize) -> Operator {
        let v = self.vector(j);
        Operator::from_mat(&v * v.adjoint())
    }

    /// Complex-conjugate basis {|j*⟩}.
    pub fn conj(&self) -> Self {
        OrthoBasis { vectors: self.vectors.map(|z| z.conj()) }
    }

    /// ⟨j|l_other⟩ for all pairs: entry (j, l).
    pub fn overlaps(&self, other: &OrthoBasis) -> Mat {
        self.vectors.adjoint() * &other.vectors
    }
}

/// Pauli X or Z basis on `n` qubits; qubit 0 is the most significant factor.
pub fn pauli_basis(n_qubits: usize, which: PauliKind) -> Result<OrthoBasis> {
    if n_qubits == 0 {
        return Err(Error::Range("pauli_basis needs at least one qubit".into()));
    }
    let single = match which {
        PauliKind::Z => Mat::identity(2, 2),
        PauliKind::X => {
            let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            Mat::from_row_slice(2, 2, &[s, s, s, -s])
        }
    };
    let mut m = single.clone();
    for _ in 1..n_qubits {
        m = m.kronecker(&single);
    }
    Ok(OrthoBasis { vectors: m })
}

/// Nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbDist {
    weights: Vec<f64>,
}

impl ProbDist {
    /// Drift in the total below `tol.prob` is renormalized away; larger drift is an error.
    pub fn new(weights: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Prob("empty distribution".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= -tol.prob)) {
            return Err(Error::Prob(format!("negative or NaN weight {w}")));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > tol.prob {
            return Err(Error::Prob(format!("weights sum to {s}")));
        }
        Ok(ProbDist { weights: weights.iter().map(|w| w.max(0.0) / s).collect() })
    }

    pub fn uniform(d: usize) -> Self {
        ProbDist { weights: vec![1.0 / d as f64; d] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_uniform(&self, eps: f64) -> bool {
        let u = 1.0 / self.weights.len() as f64;
        self.weights.iter().all(|w| (w - u).abs() <= eps)
    }
}

/// (Σ √(p_j q_j))².
pub fn bhattacharyya(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Prob(format!("length {} vs {}", p.len(), q.len())));
    }
    let s: f64 = p.weights.iter().zip(&q.weights).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(s * s)
}

/// −log₂ tr ρ².
pub fn collision_entropy(rho: &Operator) -> f64 {
    -purity(rho).log2()
}

/// tr ρ² for Hermitian ρ.
pub fn purity(rho: &Operator) -> f64 {
    rho.data().iter().map(|z| z.norm_sqr()).sum()
}

/// p_l(j) = |⟨j_E|l_F⟩|².
pub fn overlap_distribution(e: &OrthoBasis, f: &OrthoBasis, l: usize) -> Result<ProbDist> {
    if e.dim() != f.dim() {
        return Err(Error::Dim(format!("bases of dimension {} and {}", e.dim(), f.dim())));
    }
    if l >= f.dim() {
        return Err(Error::Range(format!("outcome {l} out of range for dimension {}", f.dim())));
    }
    let fl = f.vector(l);
    let w: Vec<f64> = (0..e.dim()).map(|j| e.vectors.column(j).dotc(&fl).norm_sqr()).collect();
    ProbDist::new(w, &Tolerances::default())
}

/// Whether every overlap distribution is uniform to `eps`.
pub fn is_mub(e: &OrthoBasis, f: &OrthoBasis, eps: f64) -> bool {
    e.dim() == f.dim() && (0..f.dim()).all(|l| overlap_distribution(e, f, l).map(|p| p.is_uniform(eps)).unwrap_or(false))
}

/// Φ = |Φ⟩⟨Φ| with |Φ⟩ = d^{-1/2} Σ_j |j⟩|j⟩; dims [d, d].
pub fn max_entangled(d: usize) -> Operator {
    let v = max_entangled_ket(d);
    Operator::with_dims_unchecked(&v * v.adjoint(), vec![d, d], vec![d, d])
}

pub fn max_entangled_ket(d: usize) -> Vector {
    let mut v = Vector::zeros(d * d);
    let s = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        v[j * d + j] = s;
    }
    v
}

/// Ω_W = d^{-1} Σ_j |j_W⟩⟨j_W| ⊗ |j_W⟩⟨j_W|.
pub fn max_correlated_classical(basis: &OrthoBasis) -> Operator {
    correlated(basis, basis)
}

/// d^{-1} Σ_j |j_W⟩⟨j_W| ⊗ |j_W*⟩⟨j_W*|: Φ dephased on the second factor in the conjugate basis.
pub fn max_correlated_classical_conj(basis: &OrthoBasis) -> Operator {
    correlated(basis, &basis.conj())
}

fn correlated(a: &OrthoBasis, r: &OrthoBasis) -> Operator {
    let d = a.dim();
    let mut m = Mat::zeros(d * d, d * d);
    for j in 0..d {
        let v = kron_vec(&a.vector(j), &r.vector(j));
        m += &v * v.adjoint();
    }
    Operator::with_dims_unchecked(m * C64::new(1.0 / d as f64, 0.0), vec![d, d], vec![d, d])
}

/// Pure state Σ_i √λ_i |v_i⟩⊗|i⟩ (eigenvalues descending) on system ⊗ copy,
/// returned as a density operator with dims [dims of ρ..., dim ρ].
pub fn purify(rho: &Operator, tol: &Tolerances) -> Result<Operator> {
    let v = purify_ket(rho, tol)?;
    let mut dims = rho.row_dims().to_vec();
    dims.push(rho.nrows());
    Operator::square(&v * v.adjoint(), dims)
}

/// Vector form of [`purify`].
pub fn purify_ket(rho: &Operator, tol: &Tolerances) -> Result<Vector> {
    let e = linop::eig_hermitian(rho, tol)?;
    let d = rho.nrows();
    if e.min() < -tol.povm {
        return Err(Error::NotPsd(e.min()));
    }
    let mut v = Vector::zeros(d * d);
    for (i, k) in (0..d).rev().enumerate() {
        let l = e.eigenvalues[k].max(0.0);
        if l == 0.0 {
            continue;
        }
        let col = e.eigenvectors.data().column(k);
        let s = l.sqrt();
        for a in 0..d {
            v[a * d + i] += col[a] * s;
        }
    }
    Ok(v)
}

/// Kraus operators of the isometry V: A → out split by slicing an environment factor.
/// `v` maps dim `din` into `dout·denv` with the environment as the last factor;
/// the Kraus operators are (I ⊗ ⟨e|) V.
pub fn stinespring_to_kraus(v: &Mat, dout: usize, denv: usize, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Vec<Operator> {
    let din = v.ncols();
    (0..denv)
        .map(|e| {
            let m = Mat::from_fn(dout, din, |r, c| v[(r * denv + e, c)]);
            Operator::with_dims_unchecked(m, out_dims.clone(), in_dims.clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::ONE;

    fn t() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn max_entangled_small() {
        let p = max_entangled(1);
        assert_eq!(p.data()[(0, 0)], ONE);
        let b = max_entangled(2);
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((b.data()[(r, c)].re - 0.5).abs() < 1e-15);
        }
        let m = linop::partial_trace(&b, &[0]).unwrap();
        assert!(m.max_abs_diff(&Operator::diag(&[0.5, 0.5]).reshape_dims(vec![2], vec![2]).unwrap()) < 1e-15);
    }

    #[test]
    fn correlated_computational() {
        let o = max_correlated_classical(&OrthoBasis::computational(2));
        assert!(o.max_abs_diff(&Operator::diag(&[0.5, 0.0, 0.0, 0.5])) < 1e-15);
    }

    #[test]
    fn bhattacharyya_cases() {
        let u = ProbDist::uniform(2);
        let p = ProbDist::new(vec![1.0, 0.0], &t()).unwrap();
        let q = ProbDist::new(vec![0.0, 1.0], &t()).unwrap();
        assert!((bhattacharyya(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        assert!((bhattacharyya(&u, &p).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(bhattacharyya(&p, &q).unwrap(), 0.0);
        assert!(bhattacharyya(&u, &ProbDist::uniform(3)).is_err());
    }

    #[test]
    fn prob_dist_drift() {
        let p = ProbDist::new(vec![0.5, 0.5 + 5e-11], &t()).unwrap();
        assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(ProbDist::new(vec![0.5, 0.6], &t()).is_err());
        assert!(ProbDist::new(vec![1.5, -0.5], &t()).is_err());
    }

    #[test]
    fn collision_entropy_cases() {
        let pure = Operator::diag(&[1.0, 0.0]);
        assert!(collision_entropy(&pure).abs() < 1e-15);
        assert!((collision_entropy(&Operator::diag(&[0.25; 4])) - 2.0).abs() < 1e-14);
        let h = collision_entropy(&Operator::diag(&[0.75, 0.25]));
        assert!((h + (10.0_f64 / 16.0).log2()).abs() < 1e-14);
        assert!((h - 0.678_071_905_112_638_1).abs() < 1e-12);
    }

    #[test]
    fn pauli_bases() {
        let z = pauli_basis(1, PauliKind::Z).unwrap();
        assert_eq!(z, OrthoBasis::computational(2));
        let x = pauli_basis(1, PauliKind::X).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((x.vector(1)[1].re + s).abs() < 1e-15);
        let z2 = pauli_basis(2, PauliKind::Z).unwrap();
        let x2 = pauli_basis(2, PauliKind::X).unwrap();
        for l in 0..4 {
            assert!(overlap_distribution(&z2, &x2, l).unwrap().is_uniform(1e-12));
        }
        assert!(pauli_basis(0, PauliKind::X).is_err());
    }

    #[test]
    fn overlap_distribution_cases() {
        let e = OrthoBasis::computational(3);
        let p = overlap_distribution(&e, &e, 1).unwrap();
        assert_eq!(p.weights(), &[0.0, 1.0, 0.0]);
        let f = OrthoBasis::fourier(3);
        for l in 0..3 {
            let p = overlap_distribution(&e, &f, l).unwrap();
            for w in p.weights() {
                assert!((w - 1.0 / 3.0).abs() < 1e-14);
            }
        }
        assert!(overlap_distribution(&e, &f, 3).is_err());
    }

    #[test]
    fn purify_pure_input() {
        let psi = Vector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let rho = Operator::projector(&psi, vec![2]).unwrap();
        let p = purify(&rho, &t()).unwrap();
        let reduced = linop::partial_trace(&p, &[0]).unwrap();
        assert!(reduced.max_abs_diff(&rho) < 1e-12);
        let copy = linop::partial_trace(&p, &[1]).unwrap();
        assert!((copy.data()[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_on_bell_half() {
        let phi = max_entangled(2);
        let out = Channel::fully_depolarizing(&[2]).apply_to(&phi, &[0]).unwrap();
        assert!(out.max_abs_diff(&Operator::diag(&[0.25; 4])) < 1e-15);
        let same = Channel::identity(&[2]).apply_to(&phi, &[1]).unwrap();
        assert!(same.max_abs_diff(&phi) < 1e-15);
    }

    #[test]
    fn povm_rejects_incomplete() {
        let e = vec![Operator::diag(&[1.0, 0.0]), Operator::diag(&[0.0, 0.5])];
        assert!(Povm::new(e, &t()).is_err());
        let e = vec![Operator::diag(&[1.5, 0.0]), Operator::diag(&[-0.5, 1.0])];
        assert!(Povm::new(e, &t()).is_err());
    }
}
