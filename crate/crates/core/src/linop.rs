//! Dense complex linear algebra on operators tagged with subsystem dimensions.
//!
//! Tensor products use the usual layout: the left factor owns the most
//! significant index, so subsystem 0 is the slowest-varying digit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol::Tolerances;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix with subsystem dimension bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    data: Mat,
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
}

fn check_dims(dims: &[usize], n: usize, what: &str) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Dim(format!("{what} dims {dims:?} must be nonempty and positive")));
    }
    let p: usize = dims.iter().product();
    if p != n {
        return Err(Error::Dim(format!("{what} dims {dims:?} multiply to {p}, matrix has {n}")));
    }
    Ok(())
}

impl Operator {
    pub fn new(data: Mat, row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        check_dims(&row_dims, data.nrows(), "row")?;
        check_dims(&col_dims, data.ncols(), "column")?;
        Ok(Operator { data, row_dims, col_dims })
    }

    /// Square operator with equal row and column dims.
    pub fn square(data: Mat, dims: Vec<usize>) -> Result<Self> {
        Self::new(data, dims.clone(), dims)
    }

    /// Single-system operator; panics only if the matrix is empty.
    pub fn from_mat(data: Mat) -> Self {
        let (r, c) = data.shape();
        assert!(r > 0 && c > 0, "empty matrix");
        Operator { data, row_dims: vec![r], col_dims: vec![c] }
    }

    pub(crate) fn with_dims_unchecked(data: Mat, row_dims: Vec<usize>, col_dims: Vec<usize>) -> Self {
        debug_assert_eq!(row_dims.iter().product::<usize>(), data.nrows());
        debug_assert_eq!(col_dims.iter().product::<usize>(), data.ncols());
        Operator { data, row_dims, col_dims }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Operator { data: Mat::identity(n, n), row_dims: dims.to_vec(), col_dims: dims.to_vec() }
    }

    pub fn zeros(row_dims: &[usize], col_dims: &[usize]) -> Self {
        let r = row_dims.iter().product();
        let c = col_dims.iter().product();
        Operator { data: Mat::zeros(r, c), row_dims: row_dims.to_vec(), col_dims: col_dims.to_vec() }
    }

    /// Column vector (ket) with the given dims; column dims are `[1]`.
    pub fn ket(v: Vector, dims: Vec<usize>) -> Result<Self> {
        let n = v.len();
        Self::new(Mat::from_column_slice(n, 1, v.as_slice()), dims, vec![1])
    }

    /// Rank-one projector |v><v| (no normalization).
    pub fn projector(v: &Vector, dims: Vec<usize>) -> Result<Self> {
        Self::square(v * v.adjoint(), dims)
    }

    /// Real diagonal operator.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let v = Vector::from_iterator(n, values.iter().map(|&x| C64::new(x, 0.0)));
        Self::from_mat(Mat::from_diagonal(&v))
    }

    /// Computational basis ket |i> in dimension `d`.
    pub fn basis_ket(d: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(d);
        v[i] = ONE;
        v
    }

    pub fn data(&self) -> &Mat {
        &self.data
    }

    pub fn into_data(self) -> Mat {
        self.data
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    /// Same data, new dims (total sizes must match).
    pub fn reshape_dims(&self, row_dims: Vec<usize>, col_dims: Vec<usize>) -> Result<Self> {
        Self::new(self.data.clone(), row_dims, col_dims)
    }

    pub fn dagger(&self) -> Self {
        Operator {
            data: self.data.adjoint(),
            row_dims: self.col_dims.clone(),
            col_dims: self.row_dims.clone(),
        }
    }

    pub fn conj(&self) -> Self {
        Operator { data: self.data.map(|z| z.conj()), ..self.clone() }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Operator { data: &self.data * C64::new(s, 0.0), ..self.clone() }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Operator { data: &self.data + &other.data, ..self.clone() })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Operator { data: &self.data - &other.data, ..self.clone() })
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Operator) -> Result<Self> {
        if self.ncols() != other.nrows() {
            return Err(Error::Dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        Ok(Operator {
            data: &self.data * &other.data,
            row_dims: self.row_dims.clone(),
            col_dims: other.col_dims.clone(),
        })
    }

    /// Hilbert-Schmidt inner product tr(self† other).
    pub fn inner(&self, other: &Operator) -> C64 {
        self.data.dotc(&other.data)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.data.iter().zip(other.data.iter()).fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Largest entry of |A - A†|.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.nrows();
        let mut m = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                m = m.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn hermitian_part(&self) -> Self {
        Operator { data: (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0), ..self.clone() }
    }

    fn same_shape(&self, other: &Operator) -> Result<()> {
        if self.row_dims != other.row_dims || self.col_dims != other.col_dims {
            return Err(Error::Dim(format!(
                "shape ({:?},{:?}) vs ({:?},{:?})",
                self.row_dims, self.col_dims, other.row_dims, other.col_dims
            )));
        }
        Ok(())
    }

    fn require_square_dims(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.nrows(), cols: self.ncols() });
        }
        if self.row_dims != self.col_dims {
            return Err(Error::Dim(format!(
                "row dims {:?} differ from column dims {:?}",
                self.row_dims, self.col_dims
            )));
        }
        Ok(())
    }
}

/// Tensor product; dims lists are concatenated.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let mut row_dims = a.row_dims.clone();
    row_dims.extend_from_slice(&b.row_dims);
    let mut col_dims = a.col_dims.clone();
    col_dims.extend_from_slice(&b.col_dims);
    Operator { data: a.data.kronecker(&b.data), row_dims, col_dims }
}

/// Tensor product of a nonempty list, left to right.
pub fn kron_all(ops: &[Operator]) -> Operator {
    let mut it = ops.iter();
    let first = it.next().expect("kron_all of empty list").clone();
    it.fold(first, |acc, op| kron(&acc, op))
}

pub fn kron_vec(a: &Vector, b: &Vector) -> Vector {
    let m = a.kronecker(b);
    Vector::from_column_slice(m.as_slice())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Offsets into the full index for every multi-index over the subsystems `subs`.
fn offsets(dims: &[usize], subs: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &s in subs {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &o in &out {
            for v in 0..dims[s] {
                next.push(o + v * st[s]);
            }
        }
        out = next;
    }
    out
}

/// Trace out every subsystem not listed in `keep`; `keep` must be strictly increasing.
pub fn partial_trace(a: &Operator, keep: &[usize]) -> Result<Operator> {
    a.require_square_dims()?;
    let n = a.row_dims.len();
    for (i, &k) in keep.iter().enumerate() {
        if k >= n {
            return Err(Error::Subsystem { index: k, count: n });
        }
        if i > 0 && keep[i - 1] >= k {
            return Err(Error::Dim(format!("keep indices {keep:?} must be strictly increasing")));
        }
    }
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let ko = offsets(&a.row_dims, keep);
    let to = offsets(&a.row_dims, &traced);
    let dk = ko.len();
    let mut out = Mat::zeros(dk, dk);
    for c in 0..dk {
        for r in 0..dk {
            let mut s = ZERO;
            for &t in &to {
                s += a.data[(ko[r] + t, ko[c] + t)];
            }
            out[(r, c)] = s;
        }
    }
    let dims: Vec<usize> = if keep.is_empty() { vec![1] } else { keep.iter().map(|&k| a.row_dims[k]).collect() };
    Ok(Operator { data: out, row_dims: dims.clone(), col_dims: dims })
}

fn check_perm(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Dim(format!("permutation {perm:?} has wrong length for {n} subsystems")));
    }
    for &p in perm {
        if p >= n {
            return Err(Error::Subsystem { index: p, count: n });
        }
        if seen[p] {
            return Err(Error::Dim(format!("permutation {perm:?} repeats {p}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Reorder tensor factors: subsystem `i` of the result is subsystem `perm[i]` of `a`.
/// Rows and columns are permuted independently by the same permutation.
pub fn permute_subsystems(a: &Operator, perm: &[usize]) -> Result<Operator> {
    check_perm(perm, a.row_dims.len())?;
    if a.col_dims.len() != a.row_dims.len() && a.ncols() != 1 {
        return Err(Error::Dim("row and column subsystem counts differ".into()));
    }
    let rmap = offsets(&a.row_dims, perm);
    let cmap = if a.ncols() == 1 && a.col_dims.len() != a.row_dims.len() {
        vec![0]
    } else {
        check_perm(perm, a.col_dims.len())?;
        offsets(&a.col_dims, perm)
    };
    let data = Mat::from_fn(rmap.len(), cmap.len(), |r, c| a.data[(rmap[r], cmap[c])]);
    let row_dims = perm.iter().map(|&p| a.row_dims[p]).collect();
    let col_dims = if cmap.len() == 1 && a.ncols() == 1 && a.col_dims.len() != a.row_dims.len() {
        a.col_dims.clone()
    } else {
        perm.iter().map(|&p| a.col_dims[p]).collect()
    };
    Ok(Operator { data, row_dims, col_dims })
}

/// Eigendecomposition of a Hermitian operator with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Operator,
}

impl HermitianEig {
    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Rebuild V f(Λ) V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Operator {
        let v = self.eigenvectors.data();
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            scaled.column_mut(j).scale_mut(fl);
        }
        let data = scaled * v.adjoint();
        debug_assert_eq!(data.nrows(), n);
        Operator { data, ..self.eigenvectors.clone() }
    }

    /// Columns whose eigenvalue exceeds `threshold`.
    pub fn support_columns(&self, threshold: f64) -> Mat {
        let idx: Vec<usize> = (0..self.eigenvalues.len()).filter(|&i| self.eigenvalues[i] > threshold).collect();
        let v = self.eigenvectors.data();
        Mat::from_fn(v.nrows(), idx.len(), |r, c| v[(r, idx[c])])
    }
}

/// Hermitian eigendecomposition; the input is symmetrized first and rejected
/// if its asymmetry exceeds the Hermitian tolerance (relative to max(1, |A|max)).
pub fn eig_hermitian(a: &Operator, tol: &Tolerances) -> Result<HermitianEig> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let defect = a.hermitian_defect();
    if defect > tol.hermitian * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(eig_hermitian_unchecked(a))
}

pub(crate) fn eig_hermitian_unchecked(a: &Operator) -> HermitianEig {
    let h = a.hermitian_part();
    let se = h.data.clone().symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let eigenvalues = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = Mat::from_fn(n, n, |r, c| se.eigenvectors[(r, idx[c])]);
    HermitianEig {
        eigenvalues,
        eigenvectors: Operator { data: vecs, row_dims: a.row_dims.clone(), col_dims: a.col_dims.clone() },
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &Operator) -> Vec<f64> {
    let mut s: Vec<f64> = a.data.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Schatten p-norm; pass `f64::INFINITY` for the operator norm.
pub fn schatten_norm(a: &Operator, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::SchattenIndex(p));
    }
    let s = singular_values(a);
    if p.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    if p == 1.0 {
        return Ok(s.iter().sum());
    }
    if p == 2.0 {
        return Ok(s.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    Ok(s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Trace norm of a Hermitian operator via its eigenvalues.
pub fn trace_norm_hermitian(a: &Operator) -> f64 {
    eig_hermitian_unchecked(a).eigenvalues.iter().map(|l| l.abs()).sum()
}

/// ½‖ρ − σ‖₁ computed from the eigenvalues of the difference.
pub fn trace_distance(rho: &Operator, sigma: &Operator) -> Result<f64> {
    let diff = rho.sub(sigma)?;
    if !diff.is_square() {
        return Err(Error::NotSquare { rows: diff.nrows(), cols: diff.ncols() });
    }
    Ok(0.5 * trace_norm_hermitian(&diff))
}

fn psd_eig(a: &Operator, tol: &Tolerances) -> Result<HermitianEig> {
    let e = eig_hermitian(a, tol)?;
    let lmax = e.max().max(0.0);
    let floor = -10.0 * tol.rank_tol(a.nrows()) * lmax.max(1.0) - tol.povm;
    if e.min() < floor {
        return Err(Error::NotPsd(e.min()));
    }
    Ok(e)
}

/// Square root of a PSD operator. Eigenvalues below the relative rank cutoff
/// are treated as zero; √ would otherwise lift rounding noise to ~1e-8.
pub fn sqrt_psd(a: &Operator, tol: &Tolerances) -> Result<Operator> {
    let e = psd_eig(a, tol)?;
    let thr = tol.rank_tol(a.nrows()) * e.max().max(0.0);
    Ok(e.reconstruct_with(|l| if l > thr { l.sqrt() } else { 0.0 }))
}

/// Fidelity (‖√ρ√σ‖₁)².
pub fn fidelity(rho: &Operator, sigma: &Operator, tol: &Tolerances) -> Result<f64> {
    if rho.row_dims != sigma.row_dims || rho.col_dims != sigma.col_dims {
        return Err(Error::Dim("fidelity arguments differ in shape".into()));
    }
    let sr = sqrt_psd(rho, tol)?;
    let ss = sqrt_psd(sigma, tol)?;
    let prod = sr.mul(&ss)?;
    let n1: f64 = singular_values(&prod).iter().sum();
    Ok(n1 * n1)
}

/// Apply `f` to eigenvalues above `rank_tol·λ_max`; the rest map to zero.
pub fn func_on_support(a: &Operator, f: impl Fn(f64) -> f64, rank_tol: f64, tol: &Tolerances) -> Result<Operator> {
    let e = eig_hermitian(a, tol)?;
    let lmax = e.max().max(0.0);
    let thr = rank_tol * lmax;
    if e.min() < -10.0 * thr {
        return Err(Error::NotPsd(e.min()));
    }
    Ok(e.reconstruct_with(|l| if l > thr { f(l) } else { 0.0 }))
}

/// Minimum eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(a: &Operator) -> f64 {
    eig_hermitian_unchecked(a).min()
}

/// Whether `a` is PSD up to `eps` (absolute).
pub fn is_psd(a: &Operator, eps: f64) -> bool {
    a.is_square() && a.hermitian_defect() <= eps.max(1e-12) * a.max_abs().max(1.0) && min_eigenvalue(a) >= -eps
}

/// Thin QR of `m` with the phases of R's diagonal moved into Q, so that R has
/// a positive real diagonal. Columns must be independent.
pub fn orthonormal_columns(m: &Mat) -> Mat {
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols().min(r.nrows()) {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let col = q.column(j) * (d / d.norm());
            q.set_column(j, &col);
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> Operator {
        Operator::from_mat(Mat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]))
    }

    fn pauli_z() -> Operator {
        Operator::diag(&[1.0, -1.0])
    }

    #[test]
    fn kron_identity_and_dims() {
        let i2 = Operator::identity(&[2]);
        let k = kron(&i2, &i2);
        assert_eq!(k.data(), &Mat::identity(4, 4));
        assert_eq!(k.row_dims(), &[2, 2]);
        let a = Operator::zeros(&[2], &[3]);
        let b = Operator::zeros(&[2], &[1]);
        let ab = kron(&a, &b);
        assert_eq!(ab.row_dims(), &[2, 2]);
        assert_eq!(ab.col_dims(), &[3, 1]);
    }

    #[test]
    fn kron_x_z_entries() {
        let k = kron(&pauli_x(), &pauli_z());
        for r in 0..4 {
            for c in 0..4 {
                let expect = match (r, c) {
                    (0, 2) | (2, 0) => 1.0,
                    (1, 3) | (3, 1) => -1.0,
                    _ => 0.0,
                };
                assert_eq!(k.data()[(r, c)], C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn eig_diag_and_pauli() {
        let t = Tolerances::default();
        let e = eig_hermitian(&Operator::diag(&[1.0, 3.0]), &t).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
        let e = eig_hermitian(&pauli_x(), &t).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = Operator::from_mat(Mat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]));
        assert!(matches!(eig_hermitian(&a, &Tolerances::default()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn schatten_small_cases() {
        assert!((schatten_norm(&Operator::identity(&[5]), 1.0).unwrap() - 5.0).abs() < 1e-12);
        let d = Operator::diag(&[3.0, -4.0]);
        assert!((schatten_norm(&d, 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!((schatten_norm(&d, f64::INFINITY).unwrap() - 4.0).abs() < 1e-12);
        assert!(matches!(schatten_norm(&d, 0.5), Err(Error::SchattenIndex(_))));
    }

    #[test]
    fn func_on_support_cases() {
        let t = Tolerances::default();
        let r = func_on_support(&Operator::identity(&[3]), |x| x.powf(-0.5), 1e-12, &t).unwrap();
        assert!(r.max_abs_diff(&Operator::identity(&[3])) < 1e-14);
        let r = func_on_support(&Operator::diag(&[4.0, 0.0]), |x| x.powf(-0.5), 1e-12, &t).unwrap();
        assert!(r.max_abs_diff(&Operator::diag(&[0.5, 0.0])) < 1e-14);
        assert!(matches!(func_on_support(&Operator::diag(&[1.0, -0.5]), |x| x, 1e-12, &t), Err(Error::NotPsd(_))));
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let a = Operator::identity(&[2, 2]);
        assert!(matches!(partial_trace(&a, &[2]), Err(Error::Subsystem { .. })));
    }

    #[test]
    fn permute_swaps_factors() {
        let a = kron(&pauli_x(), &pauli_z());
        let b = permute_subsystems(&a, &[1, 0]).unwrap();
        assert!(b.max_abs_diff(&kron(&pauli_z(), &pauli_x())) < 1e-15);
        let v = Operator::ket(kron_vec(&Operator::basis_ket(2, 1), &Operator::basis_ket(3, 2)), vec![2, 3]).unwrap();
        let w = permute_subsystems(&v, &[1, 0]).unwrap();
        assert_eq!(w.row_dims(), &[3, 2]);
        assert_eq!(w.data()[(2 * 2 + 1, 0)], ONE);
    }
}
