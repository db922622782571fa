//! Dense complex linear algebra.
//!
//! Matrices are stored row-major. Tensor products use the A-major index
//! convention everywhere: the pair `(a, b)` flattens to `a * dim_b + b`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsotError, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance of the hermiticity precondition.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Dense complex matrix with row-major storage.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = QsotError;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        ComplexMatrix::new(raw.rows, raw.cols, raw.entries)
    }
}

impl From<ComplexMatrix> for RawMatrix {
    fn from(m: ComplexMatrix) -> Self {
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            entries: m.entries,
        }
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting bad shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(QsotError::InvalidMatrix(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(QsotError::InvalidMatrix(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(QsotError::InvalidMatrix(format!(
                "entry ({}, {}) is not finite",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, dim, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    /// Square matrix from nested rows. Panics on ragged input; meant for
    /// literals in code and tests.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::new(r, c, rows.concat()).expect("literal matrix")
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        Self::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(values[r], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// The rank-1 operator |u⟩⟨v|.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    /// |e_row⟩⟨e_col| in dimension `rows` × `cols`.
    pub fn unit(rows: usize, cols: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(row, col)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_complex(Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖H − H†‖_F, or `None` for a non-square matrix.
    pub fn hermiticity_residual(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        Some(acc.sqrt())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual().is_some_and(|r| r <= tol)
    }

    /// Checks the relative hermiticity precondition shared by every routine
    /// that takes an observable.
    pub fn ensure_hermitian(&self) -> Result<()> {
        let allowed = HERMITIAN_TOL * self.frobenius_norm().max(1.0);
        match self.hermiticity_residual() {
            None => Err(QsotError::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            ))),
            Some(residual) if residual > allowed => {
                Err(QsotError::NotHermitian { residual, allowed })
            }
            Some(_) => Ok(()),
        }
    }

    /// Returns `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|r| {
                self.entries[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Checked matrix product.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(QsotError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; n * m];
        for r in 0..n {
            let out_row = &mut out[r * m..(r + 1) * m];
            for t in 0..k {
                let a = self.entries[r * k + t];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.entries[t * m..(t + 1) * m];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Self {
            rows: n,
            cols: m,
            entries: out,
        }
    }

    /// Checked elementwise sum.
    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(self.zip_with(rhs, |a, b| a + b))
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(self.zip_with(rhs, |a, b| a - b))
    }

    fn same_shape(&self, rhs: &Self) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(QsotError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Frobenius distance; panics on shape mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "distance shape mismatch"
        );
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &mut self.entries[r * self.cols + c]
    }
}

// Operator impls panic on shape mismatch; the try_* methods are the checked
// variants used at API boundaries.

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Distinct eigenvalues (ascending) of a hermitian matrix with the
/// orthogonal projectors onto their full eigenspaces.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    dim: usize,
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
    multiplicities: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Σ λ_k P_k.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for (lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc = &acc + &p.scale(*lambda);
        }
        acc
    }

    /// Largest |λ|.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }
}

/// Default eigenvalue clustering tolerance: `1e-8 · max(1, ρ(H))`.
pub fn default_cluster_tol(spectral_radius: f64) -> f64 {
    1e-8 * spectral_radius.max(1.0)
}

/// All eigenvalues of a hermitian matrix in ascending order, with the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigh(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    h.ensure_hermitian()?;
    let n = h.rows();
    let sym = h.hermitian_part().to_nalgebra();
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, 10_000).ok_or_else(|| {
        QsotError::NumericalFailure("hermitian eigensolver did not converge".into())
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigenvalues of a hermitian matrix, ascending.
pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigh(h).map(|(values, _)| values)
}

/// Spectral decomposition with eigenvalues closer than `cluster_tol` merged
/// (single linkage over the sorted spectrum). Pass `None` for the default
/// tolerance.
pub fn hermitian_eigendecomposition(
    h: &ComplexMatrix,
    cluster_tol: Option<f64>,
) -> Result<SpectralDecomposition> {
    let (values, vectors) = hermitian_eigh(h)?;
    let n = values.len();
    let radius = values.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(radius));
    if tol.is_nan() || tol < 0.0 {
        return Err(QsotError::InvalidParameter(format!(
            "cluster tolerance {tol} must be nonnegative"
        )));
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if values[k] - values[*g.last().unwrap()] <= tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut multiplicities = Vec::with_capacity(groups.len());
    for g in groups {
        let mean = g.iter().map(|&k| values[k]).sum::<f64>() / g.len() as f64;
        let mut p = ComplexMatrix::zeros(n, n);
        for &k in &g {
            let v = vectors.column(k);
            p = &p + &ComplexMatrix::outer(&v, &v);
        }
        eigenvalues.push(mean);
        projectors.push(p);
        multiplicities.push(g.len());
    }
    Ok(SpectralDecomposition {
        dim: n,
        eigenvalues,
        projectors,
        multiplicities,
    })
}

/// Orthonormal basis of the range of a projector, taken column by column
/// with Gram–Schmidt so the result is deterministic.
pub fn orthonormal_range(p: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    let rank = p.trace().re.round() as usize;
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(rank);
    for c in 0..p.cols() {
        if basis.len() == rank {
            break;
        }
        let mut v = p.column(c);
        for b in &basis {
            let overlap: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= overlap * bi;
            }
        }
        let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    basis
}

/// Which tensor factor to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace over subsystem `which` of an operator on A⊗B.
pub fn partial_trace(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    which: Subsystem,
) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if dim_a == 0 || dim_b == 0 || m.rows() != n || m.cols() != n {
        return Err(QsotError::DimensionMismatch(format!(
            "partial trace over {dim_a}x{dim_b} needs a {n}x{n} matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(match which {
        Subsystem::A => ComplexMatrix::from_fn(dim_b, dim_b, |b1, b2| {
            (0..dim_a)
                .map(|a| m[(a * dim_b + b1, a * dim_b + b2)])
                .sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(dim_a, dim_a, |a1, a2| {
            (0..dim_b)
                .map(|b| m[(a1 * dim_b + b, a2 * dim_b + b)])
                .sum()
        }),
    })
}

/// Partial transpose of the A factor.
pub fn partial_transpose_a(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if m.rows() != n || m.cols() != n {
        return Err(QsotError::DimensionMismatch(format!(
            "partial transpose over {dim_a}x{dim_b} needs a {n}x{n} matrix"
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (a1, b1) = (r / dim_b, r % dim_b);
        let (a2, b2) = (c / dim_b, c % dim_b);
        m[(a2 * dim_b + b1, a1 * dim_b + b2)]
    }))
}

/// {A, B} = AB + BA.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(QsotError::DimensionMismatch(format!(
            "anticommutator needs equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(&(a * b) + &(b * a))
}

/// Kronecker product A⊗B (A-major).
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Kronecker product of vectors.
pub fn tensor_vec(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    u.iter()
        .flat_map(|a| v.iter().map(move |b| a * b))
        .collect()
}

/// Hilbert–Schmidt inner product Tr[A†B].
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() || a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(QsotError::DimensionMismatch(format!(
            "hs_inner needs equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Tr[AB] without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    assert!(
        a.cols() == b.rows() && a.rows() == b.cols(),
        "trace_product shape mismatch"
    );
    let mut acc = ZERO;
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// Orthonormal real basis of the d×d hermitian matrices under Tr[A†B]:
/// the diagonal units, then (E_jk + E_kj)/√2 and i(E_kj − E_jk)/√2 for j<k.
pub fn hermitian_orthonormal_basis(d: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    for j in 0..d {
        basis.push(ComplexMatrix::unit(d, d, j, j));
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = Complex64::new(s, 0.0);
            sym[(k, j)] = Complex64::new(s, 0.0);
            basis.push(sym);
            let mut asym = ComplexMatrix::zeros(d, d);
            asym[(j, k)] = Complex64::new(0.0, -s);
            asym[(k, j)] = Complex64::new(0.0, s);
            basis.push(asym);
        }
    }
    basis
}

/// Numerical rank of a real matrix from its singular values.
pub fn real_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter()
        .filter(|&&s| s > rel_tol * max.max(f64::MIN_POSITIVE))
        .count()
}

/// Rank of the real Gram matrix Re Tr[A_i A_j] of a family of hermitian
/// matrices, i.e. the dimension of its real span.
pub fn real_span_dimension(family: &[ComplexMatrix]) -> usize {
    let n = family.len();
    let gram = DMatrix::from_fn(n, n, |i, j| trace_product(&family[i], &family[j]).re);
    real_rank(&gram, 1e-10)
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::random::{ginibre, random_hermitian, seeded};
    use proptest::prelude::*;

    #[test]
    fn reconstruction_over_many_dimensions() {
        let mut rng = seeded(0xA11);
        for d in [2, 3, 4, 6, 9] {
            for _ in 0..200 {
                let h = random_hermitian(d, &mut rng);
                let sd = hermitian_eigendecomposition(&h, None).unwrap();
                assert!(sd.reconstruct().distance(&h) < 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn projectors_form_orthogonal_resolution(seed: u64, d in 1usize..7) {
            let h = random_hermitian(d, &mut seeded(seed));
            let sd = hermitian_eigendecomposition(&h, None).unwrap();
            let mut sum = ComplexMatrix::zeros(d, d);
            for (k, p) in sd.projectors().iter().enumerate() {
                for (l, q) in sd.projectors().iter().enumerate() {
                    let want = if k == l { p.clone() } else { ComplexMatrix::zeros(d, d) };
                    prop_assert!((p * q).distance(&want) < 1e-10);
                }
                sum = &sum + p;
            }
            prop_assert!(sum.distance(&ComplexMatrix::identity(d)) < 1e-10);
            prop_assert!(sd.eigenvalues().windows(2).all(|w| w[1] - w[0] > default_cluster_tol(sd.spectral_radius())));
        }

        #[test]
        fn partial_trace_of_product(seed: u64, da in 1usize..4, db in 1usize..4) {
            let mut rng = seeded(seed);
            let a = ginibre(da, da, &mut rng);
            let b = ginibre(db, db, &mut rng);
            let ab = tensor(&a, &b);
            let ta = partial_trace(&ab, da, db, Subsystem::A).unwrap();
            let tb = partial_trace(&ab, da, db, Subsystem::B).unwrap();
            prop_assert!(ta.distance(&b.scale_complex(a.trace())) < 1e-12 * (1.0 + ab.frobenius_norm()));
            prop_assert!(tb.distance(&a.scale_complex(b.trace())) < 1e-12 * (1.0 + ab.frobenius_norm()));
            prop_assert!((ta.trace() - ab.trace()).norm() < 1e-12 * (1.0 + ab.frobenius_norm()));
        }

        #[test]
        fn hs_inner_conjugate_symmetry(seed: u64, d in 1usize..5) {
            let mut rng = seeded(seed);
            let a = ginibre(d, d, &mut rng);
            let b = ginibre(d, d, &mut rng);
            let ab = hs_inner(&a, &b).unwrap();
            prop_assert!((ab - hs_inner(&b, &a).unwrap().conj()).norm() < 1e-12);
            let aa = hs_inner(&a, &a).unwrap();
            prop_assert!(aa.re >= 0.0 && aa.im.abs() < 1e-12);
        }

        #[test]
        fn anticommutator_preserves_hermiticity(seed: u64, d in 1usize..5) {
            let mut rng = seeded(seed);
            let a = random_hermitian(d, &mut rng);
            let b = random_hermitian(d, &mut rng);
            prop_assert!(anticommutator(&a, &b).unwrap().is_hermitian(1e-12));
        }
    }
}
