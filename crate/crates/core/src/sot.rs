//! States over time on A⊗B.
//!
//! The canonical state over time of a process (ℰ, ρ) is
//! ℰ⋆ρ = ½{ρ⊗𝟙, 𝒥[ℰ]}. It reproduces every two-time expectation value whose
//! first observable is light-touch through Tr[(ℰ⋆ρ)(O_A⊗O_B)], and it is the
//! only hermitian operator that does so.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{Process, QuantumChannel};
use crate::error::{QsotError, Result};
use crate::matcore::{
    anticommutator, eigenvalues, hermitian_orthonormal_basis, orthonormal_range, real_rank, tensor,
    trace_product, ComplexMatrix,
};
use crate::observables::{light_touch_spanning_set, Observable};
use crate::twotime::{trace_formula, two_time_ev};

/// Tolerance for hermiticity of a stored state over time.
pub const SOT_HERMITIAN_TOL: f64 = 1e-10;
/// Maximum Gram off-diagonal (relative to the common norm) for a basis to
/// count as orthogonal.
pub const GRAM_TOL: f64 = 1e-8;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Counterexample residuals must exceed this.
pub const MAXIMALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ClosedForm,
    Reconstructed,
    Sampled,
}

/// Hermitian operator on A⊗B together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateOverTime {
    matrix: ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    provenance: Provenance,
}

impl StateOverTime {
    pub fn new(
        matrix: ComplexMatrix,
        dim_a: usize,
        dim_b: usize,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = dim_a * dim_b;
        if n == 0 || matrix.rows() != n || matrix.cols() != n {
            return Err(QsotError::DimensionMismatch(format!(
                "state over time on {dim_a}⊗{dim_b} needs a {n}x{n} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let residual = matrix.hermiticity_residual().unwrap_or(f64::INFINITY);
        let allowed = SOT_HERMITIAN_TOL * matrix.frobenius_norm().max(1.0);
        if residual > allowed {
            return Err(QsotError::NotHermitian { residual, allowed });
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
            dim_a,
            dim_b,
            provenance,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub(crate) fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues(&self.matrix)
    }

    /// Tr[X(O_A⊗O_B)].
    pub fn expectation(&self, o_a: &ComplexMatrix, o_b: &ComplexMatrix) -> Result<f64> {
        if o_a.rows() != self.dim_a || o_b.rows() != self.dim_b {
            return Err(QsotError::DimensionMismatch(format!(
                "state over time is on {}⊗{}, observables act on {} and {}",
                self.dim_a,
                self.dim_b,
                o_a.rows(),
                o_b.rows()
            )));
        }
        trace_formula(&self.matrix, o_a, o_b)
    }
}

/// ½{ρ⊗𝟙, 𝒥} for a channel and input state, without process validation.
pub fn star_product(channel: &QuantumChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rho_id = tensor(rho, &ComplexMatrix::identity(channel.dim_out()));
    Ok(anticommutator(&rho_id, channel.jamiolkowski())?.scale(0.5))
}

/// ℰ⋆ρ = ½{ρ⊗𝟙, 𝒥[ℰ]}.
pub fn canonical_sot(process: &Process) -> StateOverTime {
    let m =
        star_product(process.channel(), process.rho()).expect("process dimensions are consistent");
    StateOverTime::new(
        m,
        process.dim_in(),
        process.dim_out(),
        Provenance::ClosedForm,
    )
    .expect("anticommutator of hermitian matrices is hermitian")
}

/// Common squared norm c of an orthogonal family with Gram matrix c·𝟙.
fn orthogonal_norm(basis: &[Observable]) -> Result<f64> {
    let c = trace_product(basis[0].matrix(), basis[0].matrix()).re;
    let mut deviation: f64 = 0.0;
    for (a, x) in basis.iter().enumerate() {
        for (b, y) in basis.iter().enumerate().skip(a) {
            let g = trace_product(x.matrix(), y.matrix());
            let want = if a == b { c } else { 0.0 };
            deviation =
                deviation.max((g.re - want).abs().max(g.im.abs()) / c.max(f64::MIN_POSITIVE));
        }
    }
    if c.is_nan() || c <= 0.0 || deviation > GRAM_TOL {
        return Err(QsotError::BasisNotOrthogonal { deviation });
    }
    Ok(c)
}

/// Σ_{a,b} evs[a][b]·A_a⊗B_b/(c_A·c_B), where Tr[A_aA_a'] = c_Aδ_aa' and
/// Tr[B_bB_b'] = c_Bδ_bb'. Every A_a must be light-touch.
pub fn pdm_from_correlations(
    dim_a: usize,
    dim_b: usize,
    basis_a: &[Observable],
    basis_b: &[Observable],
    evs: &[Vec<f64>],
) -> Result<StateOverTime> {
    if basis_a.len() != dim_a * dim_a || basis_b.len() != dim_b * dim_b {
        return Err(QsotError::DimensionMismatch(format!(
            "bases need {} and {} elements, got {} and {}",
            dim_a * dim_a,
            dim_b * dim_b,
            basis_a.len(),
            basis_b.len()
        )));
    }
    if basis_a.iter().any(|o| o.dim() != dim_a) || basis_b.iter().any(|o| o.dim() != dim_b) {
        return Err(QsotError::DimensionMismatch(
            "basis element of the wrong dimension".into(),
        ));
    }
    if evs.len() != basis_a.len() || evs.iter().any(|row| row.len() != basis_b.len()) {
        return Err(QsotError::DimensionMismatch(format!(
            "correlation table must be {}x{}",
            basis_a.len(),
            basis_b.len()
        )));
    }
    if let Some(index) = basis_a.iter().position(|o| !o.is_light_touch()) {
        return Err(QsotError::NotLightTouch { index });
    }
    let c_a = orthogonal_norm(basis_a)?;
    let c_b = orthogonal_norm(basis_b)?;

    let mut acc = ComplexMatrix::zeros(dim_a * dim_b, dim_a * dim_b);
    for (a, row) in basis_a.iter().zip(evs) {
        let mut inner = ComplexMatrix::zeros(dim_b, dim_b);
        for (b, &ev) in basis_b.iter().zip(row) {
            inner = &inner + &b.matrix().scale(ev);
        }
        acc = &acc + &tensor(a.matrix(), &inner);
    }
    StateOverTime::new(
        acc.scale(1.0 / (c_a * c_b)),
        dim_a,
        dim_b,
        Provenance::Reconstructed,
    )
}

/// Conditioning data of a reconstruction solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub rank: usize,
    pub unknowns: usize,
    pub equations: usize,
    /// Ratio of extreme nonzero singular values.
    pub condition_number: f64,
    /// ‖Mx − e‖₂ at the solution.
    pub residual: f64,
}

/// Hermitian X minimizing Σ_{a,b} (Tr[X(A_a⊗B_b)] − evs[a][b])², solved
/// over real coordinates in an orthonormal hermitian product basis.
/// Fails with SingularSystem unless the probes determine X uniquely.
pub fn solve_trace_system(
    probes_a: &[ComplexMatrix],
    probes_b: &[ComplexMatrix],
    evs: &[Vec<f64>],
) -> Result<(ComplexMatrix, SolveDiagnostics)> {
    let (Some(first_a), Some(first_b)) = (probes_a.first(), probes_b.first()) else {
        return Err(QsotError::DimensionMismatch(
            "probe families must be nonempty".into(),
        ));
    };
    let (da, db) = (first_a.rows(), first_b.rows());
    if evs.len() != probes_a.len() || evs.iter().any(|r| r.len() != probes_b.len()) {
        return Err(QsotError::DimensionMismatch(format!(
            "correlation table must be {}x{}",
            probes_a.len(),
            probes_b.len()
        )));
    }
    let herm_a = hermitian_orthonormal_basis(da);
    let herm_b = hermitian_orthonormal_basis(db);
    let coords = |probes: &[ComplexMatrix], basis: &[ComplexMatrix]| -> Result<DMatrix<f64>> {
        let d = basis[0].rows();
        if probes.iter().any(|p| p.rows() != d || p.cols() != d) {
            return Err(QsotError::DimensionMismatch(
                "probe of the wrong dimension".into(),
            ));
        }
        Ok(DMatrix::from_fn(probes.len(), basis.len(), |a, p| {
            trace_product(&basis[p], &probes[a]).re
        }))
    };
    let t_a = coords(probes_a, &herm_a)?;
    let t_b = coords(probes_b, &herm_b)?;
    let system = t_a.kronecker(&t_b);
    let rhs = DVector::from_iterator(evs.len() * probes_b.len(), evs.iter().flatten().copied());
    let unknowns = system.ncols();
    let equations = system.nrows();

    let rank = real_rank(&system, RANK_TOL);
    if rank < unknowns {
        return Err(QsotError::SingularSystem {
            rank,
            expected: unknowns,
        });
    }
    let svd = system.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let x = svd
        .solve(&rhs, RANK_TOL * smax)
        .map_err(|e| QsotError::NumericalFailure(format!("least-squares solve failed: {e}")))?;
    let residual = (&system * &x - &rhs).norm();

    let nb = herm_b.len();
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for (p, h) in herm_a.iter().enumerate() {
        let mut inner = ComplexMatrix::zeros(db, db);
        for (q, k) in herm_b.iter().enumerate() {
            inner = &inner + &k.scale(x[p * nb + q]);
        }
        out = &out + &tensor(h, &inner);
    }
    Ok((
        out,
        SolveDiagnostics {
            rank,
            unknowns,
            equations,
            condition_number: smax / smin,
            residual,
        },
    ))
}

/// Reconstruction with its solver diagnostics.
pub fn reconstruct_unique_with_diagnostics(
    process: &Process,
) -> Result<(StateOverTime, SolveDiagnostics)> {
    let (da, db) = (process.dim_in(), process.dim_out());
    let probes_a = light_touch_spanning_set(da)?;
    let probes_b: Vec<Observable> = hermitian_orthonormal_basis(db)
        .into_iter()
        .map(Observable::new)
        .collect::<Result<_>>()?;
    let evs = probes_a
        .par_iter()
        .map(|a| {
            probes_b
                .iter()
                .map(|b| two_time_ev(process, a, b))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mats = |v: &[Observable]| v.iter().map(|o| o.matrix().clone()).collect::<Vec<_>>();
    let (x, diag) = solve_trace_system(&mats(&probes_a), &mats(&probes_b), &evs)?;
    Ok((
        StateOverTime::new(x, da, db, Provenance::Reconstructed)?,
        diag,
    ))
}

/// The unique hermitian X with Tr[X(A⊗B)] = ⟨A, B⟩ for every light-touch A,
/// recovered from two-time expectation values alone.
pub fn reconstruct_unique(process: &Process) -> Result<StateOverTime> {
    reconstruct_unique_with_diagnostics(process).map(|(s, _)| s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalityWitness {
    pub min_eigenvalue: f64,
    /// Σ|λ| over negative eigenvalues.
    pub negativity: f64,
}

/// Eigenvalues above −NEGATIVITY_TOL·max(1, ‖X‖) do not count as negative.
pub const NEGATIVITY_TOL: f64 = 1e-12;

pub fn causality_witness(sot: &StateOverTime) -> Result<CausalityWitness> {
    let ev = sot.eigenvalues()?;
    let radius = ev.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let cutoff = -NEGATIVITY_TOL * radius.max(1.0);
    Ok(CausalityWitness {
        min_eigenvalue: ev[0],
        negativity: ev.iter().filter(|&&l| l < cutoff).map(|l| -l).sum(),
    })
}

/// A process and second observable on which the trace formula with the
/// canonical state over time misses the two-time expectation value.
#[derive(Debug, Clone)]
pub struct MaximalityCounterexample {
    pub process: Process,
    pub o_b: Observable,
    /// |⟨O_A,O_B⟩ − Tr[(ℰ⋆ρ)(O_A⊗O_B)]|.
    pub residual: f64,
    /// Indices (into the ascending spectrum of O_A) of the two eigenspaces
    /// mixed by the input state.
    pub eigenspaces: (usize, usize),
}

fn pick_eigenspaces(ev: &[f64], tol: f64) -> (usize, usize) {
    if ev.len() == 2 {
        if let Some(z) = ev.iter().position(|l| l.abs() <= tol) {
            return (1 - z, z);
        }
    }
    let mut best = (0, 1);
    let mut best_val = -1.0;
    for i in 0..ev.len() {
        for j in i + 1..ev.len() {
            let v = (ev[i] + ev[j]).abs();
            if v > best_val + tol {
                best = (i, j);
                best_val = v;
            }
        }
    }
    best
}

/// For non-light-touch O_A, builds (id, |η⟩⟨η|) with |η⟩ = (|φ⟩+|ψ⟩)/√2
/// spanning two eigenspaces whose eigenvalues do not sum to zero, then
/// scans an orthonormal hermitian basis for the O_B with the largest
/// mismatch (lowest index on ties).
pub fn maximality_counterexample(o_a: &Observable) -> Result<MaximalityCounterexample> {
    if o_a.is_light_touch() {
        return Err(QsotError::IsLightTouch);
    }
    let m = o_a.dim();
    let sd = o_a.spectral();
    let tol = crate::matcore::default_cluster_tol(sd.spectral_radius());
    let (i, j) = pick_eigenspaces(sd.eigenvalues(), tol);
    let phi = orthonormal_range(&sd.projectors()[i]).swap_remove(0);
    let psi = orthonormal_range(&sd.projectors()[j]).swap_remove(0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let eta: Vec<_> = phi.iter().zip(&psi).map(|(a, b)| (a + b) * s).collect();
    let rho = ComplexMatrix::outer(&eta, &eta).hermitian_part();
    let process = Process::new(QuantumChannel::identity(m), rho)?;
    let x = canonical_sot(&process);

    let candidates: Vec<Observable> = hermitian_orthonormal_basis(m)
        .into_iter()
        .map(Observable::new)
        .collect::<Result<_>>()?;
    let scores = candidates
        .par_iter()
        .map(|b| {
            let ev = two_time_ev(&process, o_a, b)?;
            Ok((ev - x.expectation(o_a.matrix(), b.matrix())?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (best, residual) =
        scores
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc },
            );
    if residual.is_nan() || residual <= MAXIMALITY_TOL {
        return Err(QsotError::NumericalFailure(format!(
            "counterexample residual {residual:.3e} does not exceed {MAXIMALITY_TOL:e}"
        )));
    }
    Ok(MaximalityCounterexample {
        process,
        o_b: candidates
            .into_iter()
            .nth(best)
            .expect("index from the same list"),
        residual,
        eigenspaces: (i, j),
    })
}
