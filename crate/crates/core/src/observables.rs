//! Observables, light-touch classification, Pauli strings and the qutrit
//! SIC-POVM construction.
//!
//! A light-touch observable has a single distinct singular value, i.e. its
//! spectrum is {λ} or {+λ, −λ}. In dimension 3 the observables
//! L_jk = 2P_jk − 𝟙 built from a Weyl–Heisenberg covariant SIC-POVM form an
//! orthogonal basis of such observables.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsotError, Result};
use crate::matcore::{
    default_cluster_tol, hermitian_eigendecomposition, tensor, trace_product, ComplexMatrix,
    SpectralDecomposition, I, ONE, ZERO,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LightTouchClass {
    /// Spectrum {λ}: the observable is λ𝟙.
    Scalar(f64),
    /// Spectrum {+λ, −λ} with λ > 0.
    Dichotomous(f64),
    General,
}

impl LightTouchClass {
    pub fn is_light_touch(&self) -> bool {
        !matches!(self, LightTouchClass::General)
    }
}

/// A hermitian matrix with its canonical spectral decomposition.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: ComplexMatrix,
    spectral: SpectralDecomposition,
    class: LightTouchClass,
}

impl Observable {
    /// Validates hermiticity and decomposes with the default clustering
    /// tolerance.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let spectral = hermitian_eigendecomposition(&matrix, None)?;
        let tol = default_cluster_tol(spectral.spectral_radius());
        let class = classify_spectrum(&spectral, tol);
        Ok(Self {
            matrix,
            spectral,
            class,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(ComplexMatrix::identity(d)).expect("identity is hermitian")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn classification(&self) -> LightTouchClass {
        self.class
    }

    pub fn is_light_touch(&self) -> bool {
        self.class.is_light_touch()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Operator norm (largest |eigenvalue|).
    pub fn spectral_norm(&self) -> f64 {
        self.spectral.spectral_radius()
    }
}

fn classify_spectrum(sd: &SpectralDecomposition, tol: f64) -> LightTouchClass {
    let ev = sd.eigenvalues();
    match ev {
        [l] => LightTouchClass::Scalar(if l.abs() <= tol { 0.0 } else { *l }),
        [lo, hi] if (lo + hi).abs() <= tol && *hi > tol => {
            LightTouchClass::Dichotomous(0.5 * (hi - lo))
        }
        _ => LightTouchClass::General,
    }
}

/// Classifies `o` as Scalar, Dichotomous or General. Eigenvalues within
/// `tol` of each other are treated as equal, and a pair {a, b} counts as
/// {±λ} when |a + b| ≤ `tol`. The zero matrix is Scalar(0).
pub fn classify_light_touch(o: &ComplexMatrix, tol: f64) -> Result<LightTouchClass> {
    if tol.is_nan() || tol < 0.0 {
        return Err(QsotError::InvalidParameter(format!(
            "tolerance {tol} must be nonnegative"
        )));
    }
    let probe = hermitian_eigendecomposition(o, None)?;
    let tol = tol.max(default_cluster_tol(probe.spectral_radius()));
    let sd = hermitian_eigendecomposition(o, Some(tol))?;
    Ok(classify_spectrum(&sd, tol))
}

/// Single-qubit Pauli matrix σ_k, k ∈ {0, 1, 2, 3}.
pub fn pauli(k: u8) -> Result<ComplexMatrix> {
    Ok(match k {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
        2 => ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]),
        3 => ComplexMatrix::diag(&[1.0, -1.0]),
        _ => {
            return Err(QsotError::InvalidIndex(format!(
                "Pauli index {k} not in 0..=3"
            )))
        }
    })
}

/// σ_α = σ_α₁ ⊗ ⋯ ⊗ σ_αₘ.
pub fn pauli_string(alpha: &[u8]) -> Result<Observable> {
    let (first, rest) = alpha
        .split_first()
        .ok_or_else(|| QsotError::InvalidIndex("empty Pauli index sequence".into()))?;
    let mut m = pauli(*first)?;
    for &k in rest {
        m = tensor(&m, &pauli(k)?);
    }
    Observable::new(m)
}

/// All 4^m Pauli strings on m qubits in lexicographic index order.
pub fn pauli_basis(m: usize) -> Result<Vec<Observable>> {
    if m == 0 {
        return Err(QsotError::InvalidIndex("need at least one qubit".into()));
    }
    (0..4usize.pow(m as u32))
        .map(|mut code| {
            let mut alpha = vec![0u8; m];
            for slot in alpha.iter_mut().rev() {
                *slot = (code % 4) as u8;
                code /= 4;
            }
            pauli_string(&alpha)
        })
        .collect()
}

/// Weyl–Heisenberg displacement G_jk = ω^{jk/2} Σ_l ω^{jl} |k⊕l⟩⟨l| in
/// dimension d, with ω = e^{2πi/d} and ω^{jk/2} taken as e^{iπjk/d}.
pub fn weyl_heisenberg(d: usize, j: usize, k: usize) -> Result<ComplexMatrix> {
    if d == 0 || j >= d || k >= d {
        return Err(QsotError::InvalidIndex(format!(
            "G_({j},{k}) undefined in dimension {d}"
        )));
    }
    let df = d as f64;
    let prefactor = Complex64::from_polar(1.0, PI * (j * k) as f64 / df);
    let mut g = ComplexMatrix::zeros(d, d);
    for l in 0..d {
        let phase = Complex64::from_polar(1.0, 2.0 * PI * ((j * l) % d) as f64 / df);
        g[((k + l) % d, l)] = prefactor * phase;
    }
    Ok(g)
}

/// Qutrit displacement operator G_jk.
pub fn weyl_heisenberg_qutrit(j: usize, k: usize) -> Result<ComplexMatrix> {
    weyl_heisenberg(3, j, k)
}

/// A permutation of {0, 1, 2}, stored as the images of 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation3([usize; 3]);

impl Permutation3 {
    pub const IDENTITY: Self = Self([0, 1, 2]);

    pub fn new(images: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &i in &images {
            if i > 2 || seen[i] {
                return Err(QsotError::InvalidParameter(format!(
                    "{images:?} is not a permutation of 0..3"
                )));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    pub fn images(&self) -> [usize; 3] {
        self.0
    }

    /// All six elements of S₃.
    pub fn all() -> [Self; 6] {
        [
            Self([0, 1, 2]),
            Self([0, 2, 1]),
            Self([1, 0, 2]),
            Self([1, 2, 0]),
            Self([2, 0, 1]),
            Self([2, 1, 0]),
        ]
    }

    /// Applies the permutation matrix: component i moves to slot σ(i).
    pub fn apply(&self, v: [Complex64; 3]) -> [Complex64; 3] {
        let mut out = [ZERO; 3];
        for (i, z) in v.into_iter().enumerate() {
            out[self.0[i]] = z;
        }
        out
    }
}

/// The two parametric families of qutrit SIC fiducials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FiducialFamily {
    /// (r₀, r₊e^{iθ}, r₋e^{iφ}) with r± = (r₀ ± √(2 − 3r₀²))/2,
    /// 1/√2 < r₀ ≤ √(2/3) and θ, φ ∈ {π/3, π, 5π/3}.
    V { r0: f64, theta: f64, phi: f64 },
    /// (1, e^{iχ}, 0)/√2 with 0 ≤ χ < 2π.
    W { chi: f64 },
}

/// Allowed phases for the V family.
pub const V_PHASES: [f64; 3] = [PI / 3.0, PI, 5.0 * PI / 3.0];

const PHASE_TOL: f64 = 1e-9;

fn check_v_phase(name: &str, x: f64) -> Result<()> {
    if V_PHASES.iter().any(|p| (x - p).abs() <= PHASE_TOL) {
        Ok(())
    } else {
        Err(QsotError::ParameterOutOfRange(format!(
            "{name} = {x} must be one of π/3, π, 5π/3"
        )))
    }
}

/// Fiducial vector of the given family, permuted by `perm`.
pub fn sic_fiducial(family: FiducialFamily, perm: Permutation3) -> Result<[Complex64; 3]> {
    let v = match family {
        FiducialFamily::V { r0, theta, phi } => {
            let lo = std::f64::consts::FRAC_1_SQRT_2;
            let hi = (2.0f64 / 3.0).sqrt();
            // allow rounding at the closed upper end
            if !(r0 > lo && r0 <= hi + 1e-12) {
                return Err(QsotError::ParameterOutOfRange(format!(
                    "r0 = {r0} must satisfy 1/√2 < r0 ≤ √(2/3)"
                )));
            }
            check_v_phase("theta", theta)?;
            check_v_phase("phi", phi)?;
            let root = (2.0 - 3.0 * r0 * r0).max(0.0).sqrt();
            let r_plus = 0.5 * (r0 + root);
            let r_minus = 0.5 * (r0 - root);
            [
                Complex64::new(r0, 0.0),
                Complex64::from_polar(r_plus, theta),
                Complex64::from_polar(r_minus, phi),
            ]
        }
        FiducialFamily::W { chi } => {
            if !(0.0..2.0 * PI).contains(&chi) {
                return Err(QsotError::ParameterOutOfRange(format!(
                    "chi = {chi} must lie in [0, 2π)"
                )));
            }
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [Complex64::new(s, 0.0), Complex64::from_polar(s, chi), ZERO]
        }
    };
    Ok(perm.apply(v))
}

/// Tolerance for every SIC-POVM invariant.
pub const SIC_TOL: f64 = 1e-10;

/// Nine rank-1 projectors P_jk = G_jk|ψ⟩⟨ψ|G_jk† with pairwise overlaps 1/4.
/// Projector (j, k) sits at index 3j + k.
#[derive(Debug, Clone)]
pub struct SicPovm {
    fiducial: [Complex64; 3],
    vectors: Vec<[Complex64; 3]>,
    projectors: Vec<ComplexMatrix>,
    max_overlap_deviation: f64,
}

impl SicPovm {
    pub fn fiducial(&self) -> [Complex64; 3] {
        self.fiducial
    }

    /// |ψ_jk⟩ = G_jk|ψ⟩, indexed 3j + k.
    pub fn vectors(&self) -> &[[Complex64; 3]] {
        &self.vectors
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn projector(&self, j: usize, k: usize) -> &ComplexMatrix {
        &self.projectors[3 * j + k]
    }

    /// max |Tr[P_a P_b] − 1/4| over distinct pairs.
    pub fn max_overlap_deviation(&self) -> f64 {
        self.max_overlap_deviation
    }
}

/// Generates the Weyl–Heisenberg orbit of `fiducial` and checks that it is
/// a SIC-POVM.
pub fn sic_povm(fiducial: [Complex64; 3]) -> Result<SicPovm> {
    let norm = fiducial.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(QsotError::InvalidParameter(format!(
            "fiducial norm is {norm}, expected 1"
        )));
    }
    let mut vectors = Vec::with_capacity(9);
    let mut projectors = Vec::with_capacity(9);
    for j in 0..3 {
        for k in 0..3 {
            let g = weyl_heisenberg_qutrit(j, k)?;
            let v = g.matvec(&fiducial);
            projectors.push(ComplexMatrix::outer(&v, &v));
            vectors.push([v[0], v[1], v[2]]);
        }
    }

    let mut worst = (0, 0, 0.0f64);
    for a in 0..9 {
        let p = &projectors[a];
        let idem = (p * p).distance(p);
        let trace_dev = (p.trace() - ONE).norm();
        if idem > SIC_TOL || trace_dev > SIC_TOL {
            return Err(QsotError::NumericalFailure(format!(
                "P_{a} is not a rank-1 projector"
            )));
        }
        for (b, q) in projectors.iter().enumerate().skip(a + 1) {
            let dev = (trace_product(p, q) - Complex64::new(0.25, 0.0)).norm();
            if dev > worst.2 {
                worst = (a, b, dev);
            }
        }
    }
    if worst.2 > SIC_TOL {
        return Err(QsotError::FailedOverlapCondition {
            first: worst.0,
            second: worst.1,
            deviation: worst.2,
        });
    }
    let mut sum = ComplexMatrix::zeros(3, 3);
    for p in &projectors {
        sum = &sum + p;
    }
    let completeness = sum.scale(1.0 / 3.0).distance(&ComplexMatrix::identity(3));
    if completeness > SIC_TOL {
        return Err(QsotError::NumericalFailure(format!(
            "(1/3)ΣP deviates from 𝟙 by {completeness:.3e}"
        )));
    }
    Ok(SicPovm {
        fiducial,
        vectors,
        projectors,
        max_overlap_deviation: worst.2,
    })
}

/// L = 2P − 𝟙 for a projector P.
pub fn reflection(p: &ComplexMatrix) -> ComplexMatrix {
    &p.scale(2.0) - &ComplexMatrix::identity(p.rows())
}

/// The nine dichotomous observables L_jk = 2P_jk − 𝟙, indexed 3j + k. Their
/// Gram matrix is 3·𝟙₉.
pub fn light_touch_basis_qutrit(povm: &SicPovm) -> Vec<Observable> {
    povm.projectors()
        .iter()
        .map(|p| Observable::new(reflection(p)).expect("reflection of a projector is hermitian"))
        .collect()
}

/// d² light-touch observables whose real span is all d×d hermitian
/// matrices: 𝟙, the reflections 2|e_i⟩⟨e_i| − 𝟙 for i < d − 1, and for
/// each i < j the reflections through (|e_i⟩ + |e_j⟩)/√2 and
/// (|e_i⟩ + i|e_j⟩)/√2.
pub fn light_touch_spanning_set(d: usize) -> Result<Vec<Observable>> {
    if d == 0 {
        return Err(QsotError::InvalidParameter(
            "dimension must be positive".into(),
        ));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    out.push(Observable::identity(d));
    for i in 0..d.saturating_sub(1) {
        out.push(Observable::new(reflection(&ComplexMatrix::unit(
            d, d, i, i,
        )))?);
    }
    for i in 0..d {
        for j in i + 1..d {
            for phase in [ONE, I] {
                let mut v = vec![ZERO; d];
                v[i] = Complex64::new(s, 0.0);
                v[j] = phase * s;
                out.push(Observable::new(reflection(&ComplexMatrix::outer(&v, &v)))?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{hs_inner, real_span_dimension};

    fn e(theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, theta)
    }

    const TAU3: f64 = 2.0 * PI / 3.0;

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_light_touch(&ComplexMatrix::identity(4), 1e-9).unwrap(),
            LightTouchClass::Scalar(1.0)
        );
        assert_eq!(
            classify_light_touch(&ComplexMatrix::zeros(3, 3), 1e-9).unwrap(),
            LightTouchClass::Scalar(0.0)
        );
        assert_eq!(
            classify_light_touch(&ComplexMatrix::diag(&[2.0, 0.0, -2.0]), 1e-9).unwrap(),
            LightTouchClass::General
        );
        assert_eq!(
            classify_light_touch(&ComplexMatrix::diag(&[1.0, 1.0, 0.0]), 1e-9).unwrap(),
            LightTouchClass::General
        );
        match classify_light_touch(&ComplexMatrix::diag(&[-0.5, 0.5, 0.5]), 1e-9).unwrap() {
            LightTouchClass::Dichotomous(l) => assert!((l - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let bad = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            classify_light_touch(&bad, 1e-9),
            Err(QsotError::NotHermitian { .. })
        ));
    }

    #[test]
    fn pauli_strings_are_dichotomous() {
        for m in 1..=3 {
            for (idx, p) in pauli_basis(m).unwrap().iter().enumerate() {
                let expect = if idx == 0 {
                    LightTouchClass::Scalar(1.0)
                } else {
                    LightTouchClass::Dichotomous(1.0)
                };
                match (p.classification(), expect) {
                    (LightTouchClass::Scalar(a), LightTouchClass::Scalar(b))
                    | (LightTouchClass::Dichotomous(a), LightTouchClass::Dichotomous(b)) => {
                        assert!((a - b).abs() < 1e-12)
                    }
                    (got, _) => panic!("{got:?}"),
                }
                if idx != 0 {
                    assert!(p.matrix().trace().norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pauli_string_examples() {
        assert!(
            pauli_string(&[0])
                .unwrap()
                .matrix()
                .distance(&ComplexMatrix::identity(2))
                < 1e-15
        );
        let zz = pauli_string(&[3, 3]).unwrap();
        assert!(
            zz.matrix()
                .distance(&ComplexMatrix::diag(&[1.0, -1.0, -1.0, 1.0]))
                < 1e-15
        );
        assert!(matches!(pauli_string(&[]), Err(QsotError::InvalidIndex(_))));
        assert!(matches!(
            pauli_string(&[0, 4]),
            Err(QsotError::InvalidIndex(_))
        ));
    }

    #[test]
    fn pauli_product_rule() {
        for m in 1..=3usize {
            let basis = pauli_basis(m).unwrap();
            let scale = 2f64.powi(m as i32);
            for (a, x) in basis.iter().enumerate() {
                for (b, y) in basis.iter().enumerate() {
                    let v = hs_inner(x.matrix(), y.matrix()).unwrap();
                    let expect = if a == b { scale } else { 0.0 };
                    assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn weyl_heisenberg_table() {
        let g = |j, k| weyl_heisenberg_qutrit(j, k).unwrap();
        let z = ZERO;
        let o = ONE;
        let expected = [
            ((0, 0), vec![vec![o, z, z], vec![z, o, z], vec![z, z, o]]),
            ((0, 1), vec![vec![z, z, o], vec![o, z, z], vec![z, o, z]]),
            ((0, 2), vec![vec![z, o, z], vec![z, z, o], vec![o, z, z]]),
            (
                (1, 0),
                vec![vec![o, z, z], vec![z, e(TAU3), z], vec![z, z, e(-TAU3)]],
            ),
            (
                (1, 1),
                vec![
                    vec![z, z, e(-PI / 3.0)],
                    vec![e(PI / 3.0), z, z],
                    vec![z, -o, z],
                ],
            ),
            (
                (1, 2),
                vec![vec![z, e(-TAU3), z], vec![z, z, o], vec![e(TAU3), z, z]],
            ),
            (
                (2, 0),
                vec![vec![o, z, z], vec![z, e(-TAU3), z], vec![z, z, e(TAU3)]],
            ),
            (
                (2, 1),
                vec![vec![z, z, e(-TAU3)], vec![e(TAU3), z, z], vec![z, o, z]],
            ),
            (
                (2, 2),
                vec![vec![z, e(TAU3), z], vec![z, z, o], vec![e(-TAU3), z, z]],
            ),
        ];
        for ((j, k), rows) in expected {
            let want = ComplexMatrix::from_rows(&rows);
            assert!(g(j, k).distance(&want) < 1e-12, "G_{j}{k}");
            let u = g(j, k);
            assert!((&u * &u.adjoint()).distance(&ComplexMatrix::identity(3)) < 1e-12);
        }
        assert!(weyl_heisenberg_qutrit(3, 0).is_err());
    }

    fn w0() -> SicPovm {
        sic_povm(sic_fiducial(FiducialFamily::W { chi: 0.0 }, Permutation3::IDENTITY).unwrap())
            .unwrap()
    }

    #[test]
    fn fiducial_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = sic_fiducial(FiducialFamily::W { chi: 0.0 }, Permutation3::IDENTITY).unwrap();
        assert!((w[0] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((w[1] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!(w[2].norm() < 1e-15);

        let r0 = (2.0f64 / 3.0).sqrt();
        let v = sic_fiducial(
            FiducialFamily::V {
                r0,
                theta: PI,
                phi: PI / 3.0,
            },
            Permutation3::IDENTITY,
        )
        .unwrap();
        let target = 1.0 / 6f64.sqrt();
        assert!((v[1].norm() - target).abs() < 1e-7);
        assert!((v[2].norm() - target).abs() < 1e-7);

        assert!(matches!(
            sic_fiducial(
                FiducialFamily::V {
                    r0: 0.5,
                    theta: PI,
                    phi: PI
                },
                Permutation3::IDENTITY
            ),
            Err(QsotError::ParameterOutOfRange(_))
        ));
        assert!(matches!(
            sic_fiducial(
                FiducialFamily::V {
                    r0: 0.75,
                    theta: 0.0,
                    phi: PI
                },
                Permutation3::IDENTITY
            ),
            Err(QsotError::ParameterOutOfRange(_))
        ));
        assert!(matches!(
            sic_fiducial(FiducialFamily::W { chi: 2.0 * PI }, Permutation3::IDENTITY),
            Err(QsotError::ParameterOutOfRange(_))
        ));
    }

    #[test]
    fn fiducial_norm_over_grid() {
        let lo = std::f64::consts::FRAC_1_SQRT_2;
        let hi = (2.0f64 / 3.0).sqrt();
        for step in 1..=20 {
            let r0 = lo + (hi - lo) * step as f64 / 20.0;
            for &theta in &V_PHASES {
                for &phi in &V_PHASES {
                    for perm in Permutation3::all() {
                        let v = sic_fiducial(FiducialFamily::V { r0, theta, phi }, perm).unwrap();
                        let n: f64 = v.iter().map(Complex64::norm_sqr).sum();
                        assert!((n - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation3::new([0, 0, 1]).is_err());
        assert!(Permutation3::new([0, 1, 3]).is_err());
        let p = Permutation3::new([2, 0, 1]).unwrap();
        let out = p.apply([ONE, I, ZERO]);
        assert_eq!(out, [I, ZERO, ONE]);
    }

    #[test]
    fn reference_orbit_vectors() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = ZERO;
        let o = ONE;
        let expected: [[Complex64; 3]; 9] = [
            [o, o, z],
            [z, o, o],
            [o, z, o],
            [o, e(TAU3), z],
            [z, e(PI / 3.0), -o],
            [e(-TAU3), z, e(TAU3)],
            [o, e(-TAU3), z],
            [z, e(TAU3), o],
            [e(TAU3), z, e(-TAU3)],
        ];
        let povm = w0();
        for (got, want) in povm.vectors().iter().zip(expected) {
            for (g, w) in got.iter().zip(want) {
                assert!((g - w * s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reference_light_touch_matrices() {
        let z = ZERO;
        let o = ONE;
        let m = -ONE;
        let expected = [
            vec![vec![z, o, z], vec![o, z, z], vec![z, z, m]],
            vec![vec![m, z, z], vec![z, z, o], vec![z, o, z]],
            vec![vec![z, z, o], vec![z, m, z], vec![o, z, z]],
            vec![vec![z, e(-TAU3), z], vec![e(TAU3), z, z], vec![z, z, m]],
            vec![vec![m, z, z], vec![z, z, e(-TAU3)], vec![z, e(TAU3), z]],
            vec![vec![z, z, e(TAU3)], vec![z, m, z], vec![e(-TAU3), z, z]],
            vec![vec![z, e(TAU3), z], vec![e(-TAU3), z, z], vec![z, z, m]],
            vec![vec![m, z, z], vec![z, z, e(TAU3)], vec![z, e(-TAU3), z]],
            vec![vec![z, z, e(-TAU3)], vec![z, m, z], vec![e(TAU3), z, z]],
        ];
        let basis = light_touch_basis_qutrit(&w0());
        for (idx, (l, rows)) in basis.iter().zip(expected).enumerate() {
            assert!(
                l.matrix().distance(&ComplexMatrix::from_rows(&rows)) < 1e-12,
                "L_{}{}",
                idx / 3,
                idx % 3
            );
        }
    }

    #[test]
    fn qutrit_basis_gram_and_classification() {
        let basis = light_touch_basis_qutrit(&w0());
        for (a, x) in basis.iter().enumerate() {
            assert!(
                matches!(x.classification(), LightTouchClass::Dichotomous(l) if (l - 1.0).abs() < 1e-10)
            );
            for (b, y) in basis.iter().enumerate() {
                let expect = if a == b { 3.0 } else { 0.0 };
                assert!((trace_product(x.matrix(), y.matrix()).re - expect).abs() < 1e-10);
            }
        }
        let mats: Vec<ComplexMatrix> = basis.iter().map(|o| o.matrix().clone()).collect();
        assert_eq!(real_span_dimension(&mats), 9);
    }

    #[test]
    fn sic_overlap_failure_reported() {
        let bad = [ONE, ZERO, ZERO];
        assert!(matches!(
            sic_povm(bad),
            Err(QsotError::FailedOverlapCondition { .. })
        ));
        let unnormalized = [ONE, ONE, ZERO];
        assert!(sic_povm(unnormalized).is_err());
    }

    #[test]
    fn spanning_set_examples() {
        let one = light_touch_spanning_set(1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].matrix().distance(&ComplexMatrix::identity(1)) < 1e-15);
        for d in 2..=6 {
            let set = light_touch_spanning_set(d).unwrap();
            assert_eq!(set.len(), d * d);
            assert!(set.iter().all(Observable::is_light_touch));
            let mats: Vec<ComplexMatrix> = set.iter().map(|o| o.matrix().clone()).collect();
            assert_eq!(real_span_dimension(&mats), d * d);
        }
        assert!(light_touch_spanning_set(0).is_err());
    }

    #[test]
    fn qubit_spanning_set_contains_paulis() {
        let set = light_touch_spanning_set(2).unwrap();
        let mut family: Vec<ComplexMatrix> = set.iter().map(|o| o.matrix().clone()).collect();
        for k in 0..4 {
            family.push(pauli(k).unwrap());
            assert_eq!(real_span_dimension(&family), 4);
            family.pop();
        }
    }
}
