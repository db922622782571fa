//! Two-time expectation values of sequential projective measurements.
//!
//! ⟨O_A, O_B⟩ = Σ_{i,j} λ_i μ_j ℙ(i,j) with ℙ(i,j) = Tr[ℰ(P_iρP_i)Q_j], where
//! P_i, Q_j run over the distinct-eigenvalue projectors of O_A and O_B.

use rand::Rng;
use rayon::prelude::*;

use crate::channels::{make_standard, Process, StandardChannel};
use crate::error::{QsotError, Result};
use crate::matcore::{tensor, trace_product, ComplexMatrix};
use crate::observables::{light_touch_spanning_set, pauli, Observable};
use crate::random::{embed_top_left, random_non_light_touch};

/// Probabilities in [−PROB_CLAMP_TOL, 0) are rounded to zero.
pub const PROB_CLAMP_TOL: f64 = 1e-12;

/// Joint outcome distribution of measuring O_A, evolving, then measuring O_B.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    outcomes_a: Vec<f64>,
    outcomes_b: Vec<f64>,
    probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn outcomes_a(&self) -> &[f64] {
        &self.outcomes_a
    }

    pub fn outcomes_b(&self) -> &[f64] {
        &self.outcomes_b
    }

    /// probs()[i][j] = ℙ(i,j).
    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i][j]
    }

    /// ℙ(i) = Σ_j ℙ(i,j).
    pub fn marginal_a(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    /// ℙ(j) = Σ_i ℙ(i,j).
    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.outcomes_b.len())
            .map(|j| self.probs.iter().map(|row| row[j]).sum())
            .collect()
    }

    /// ℙ(j|i), or `None` when ℙ(i) ≤ `min_prob`.
    pub fn conditional(&self, i: usize, min_prob: f64) -> Option<Vec<f64>> {
        let row = self.probs.get(i)?;
        let p: f64 = row.iter().sum();
        (p > min_prob).then(|| row.iter().map(|x| x / p).collect())
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    /// Σ λ_i μ_j ℙ(i,j).
    pub fn expectation(&self) -> f64 {
        let mut acc = 0.0;
        for (row, l) in self.probs.iter().zip(&self.outcomes_a) {
            for (p, m) in row.iter().zip(&self.outcomes_b) {
                acc += l * m * p;
            }
        }
        acc
    }
}

fn check_dims(process: &Process, o_a: &Observable, o_b: &Observable) -> Result<()> {
    if o_a.dim() != process.dim_in() || o_b.dim() != process.dim_out() {
        return Err(QsotError::DimensionMismatch(format!(
            "process is {}→{} but observables act on {} and {}",
            process.dim_in(),
            process.dim_out(),
            o_a.dim(),
            o_b.dim()
        )));
    }
    Ok(())
}

/// Unnormalized post-measurement outputs ℰ(P_iρP_i), one per eigenvalue of O_A.
pub fn collapsed_outputs(process: &Process, o_a: &Observable) -> Result<Vec<ComplexMatrix>> {
    if o_a.dim() != process.dim_in() {
        return Err(QsotError::DimensionMismatch(format!(
            "first observable acts on {}, process input is {}",
            o_a.dim(),
            process.dim_in()
        )));
    }
    let rho = process.rho();
    o_a.spectral()
        .projectors()
        .iter()
        .map(|p| process.channel().apply(&(&(p * rho) * p)))
        .collect()
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if p >= 0.0 {
        Ok(p)
    } else if p >= -PROB_CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(QsotError::NumericalFailure(format!(
            "negative probability {p:.3e}"
        )))
    }
}

pub fn joint_distribution(
    process: &Process,
    o_a: &Observable,
    o_b: &Observable,
) -> Result<JointDistribution> {
    check_dims(process, o_a, o_b)?;
    let outputs = collapsed_outputs(process, o_a)?;
    let probs = outputs
        .iter()
        .map(|out| {
            o_b.spectral()
                .projectors()
                .iter()
                .map(|q| clamp_probability(trace_product(out, q).re))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JointDistribution {
        outcomes_a: o_a.spectral().eigenvalues().to_vec(),
        outcomes_b: o_b.spectral().eigenvalues().to_vec(),
        probs,
    })
}

/// ⟨O_A, O_B⟩ from the joint outcome distribution.
pub fn two_time_ev(process: &Process, o_a: &Observable, o_b: &Observable) -> Result<f64> {
    joint_distribution(process, o_a, o_b).map(|d| d.expectation())
}

/// ⟨O_A, O_B⟩ = Σ_i λ_i Tr[ℰ(P_iρP_i)O_B], without resolving O_B spectrally.
pub fn two_time_ev_compact(process: &Process, o_a: &Observable, o_b: &Observable) -> Result<f64> {
    check_dims(process, o_a, o_b)?;
    let outputs = collapsed_outputs(process, o_a)?;
    Ok(outputs
        .iter()
        .zip(o_a.spectral().eigenvalues())
        .map(|(out, l)| l * trace_product(out, o_b.matrix()).re)
        .sum())
}

/// Tr[X(O_A⊗O_B)], real part.
pub fn trace_formula(x: &ComplexMatrix, o_a: &ComplexMatrix, o_b: &ComplexMatrix) -> Result<f64> {
    let n = o_a.rows() * o_b.rows();
    if x.rows() != n || x.cols() != n {
        return Err(QsotError::DimensionMismatch(format!(
            "operator is {}x{}, probes need {n}x{n}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(trace_product(x, &tensor(o_a, o_b)).re)
}

/// Deviation of one probe pair, normalized by max(1, ‖O_A‖·‖O_B‖).
pub fn probe_residual(
    process: &Process,
    x: &ComplexMatrix,
    o_a: &Observable,
    o_b: &Observable,
) -> Result<f64> {
    let ev = two_time_ev(process, o_a, o_b)?;
    let tf = trace_formula(x, o_a.matrix(), o_b.matrix())?;
    let scale = (o_a.spectral_norm() * o_b.spectral_norm()).max(1.0);
    Ok((ev - tf).abs() / scale)
}

/// Worst normalized deviation between the two-time expectation function of
/// `process` and the trace formula with `x`, over `probes`. Zero for an
/// empty probe list.
pub fn representability_residual(
    process: &Process,
    x: &ComplexMatrix,
    probes: &[(Observable, Observable)],
) -> Result<f64> {
    x.ensure_hermitian()?;
    let n = process.dim_in() * process.dim_out();
    if x.rows() != n {
        return Err(QsotError::DimensionMismatch(format!(
            "candidate is {}x{}, process needs {n}x{n}",
            x.rows(),
            x.cols()
        )));
    }
    let residuals = probes
        .par_iter()
        .map(|(a, b)| probe_residual(process, x, a, b))
        .collect::<Result<Vec<f64>>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Probe pairs split by whether the first observable is light-touch.
#[derive(Debug, Clone)]
pub struct ProbeSet {
    pub light_touch: Vec<(Observable, Observable)>,
    pub general: Vec<(Observable, Observable)>,
}

impl ProbeSet {
    /// Light-touch spanning sets on both sides plus `random_per_side`
    /// non-light-touch observables on each side. Light-touch first
    /// observables are paired with every second observable; random first
    /// observables likewise.
    pub fn build<R: Rng + ?Sized>(
        dim_a: usize,
        dim_b: usize,
        random_per_side: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let span_a = light_touch_spanning_set(dim_a)?;
        let mut side_b = light_touch_spanning_set(dim_b)?;
        let mut random_a = Vec::with_capacity(random_per_side);
        if dim_a >= 2 {
            for _ in 0..random_per_side {
                random_a.push(Observable::new(random_non_light_touch(dim_a, rng))?);
            }
        }
        if dim_b >= 2 {
            for _ in 0..random_per_side {
                side_b.push(Observable::new(random_non_light_touch(dim_b, rng))?);
            }
        }
        let pair = |first: &[Observable]| {
            first
                .iter()
                .flat_map(|a| side_b.iter().map(move |b| (a.clone(), b.clone())))
                .collect::<Vec<_>>()
        };
        Ok(Self {
            light_touch: pair(&span_a),
            general: pair(&random_a),
        })
    }

    pub fn push(&mut self, o_a: Observable, o_b: Observable) {
        if o_a.is_light_touch() {
            self.light_touch.push((o_a, o_b));
        } else {
            self.general.push((o_a, o_b));
        }
    }

    pub fn len(&self) -> usize {
        self.light_touch.len() + self.general.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentabilityReport {
    /// Worst residual over pairs whose first observable is light-touch.
    pub light_touch_residual: f64,
    /// Worst residual over every pair.
    pub all_residual: f64,
    pub light_touch_probes: usize,
    pub general_probes: usize,
}

pub fn representability_report(
    process: &Process,
    x: &ComplexMatrix,
    probes: &ProbeSet,
) -> Result<RepresentabilityReport> {
    let light = representability_residual(process, x, &probes.light_touch)?;
    let general = representability_residual(process, x, &probes.general)?;
    Ok(RepresentabilityReport {
        light_touch_residual: light,
        all_residual: light.max(general),
        light_touch_probes: probes.light_touch.len(),
        general_probes: probes.general.len(),
    })
}

/// a𝟙 + bσ₁ + cσ₂ + dσ₃.
pub fn qubit_observable(coeffs: [f64; 4]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    for (k, c) in coeffs.into_iter().enumerate() {
        m = &m + &pauli(k as u8).expect("index below 4").scale(c);
    }
    m
}

/// Coefficients (a, b, c, d) of the default witness O_B = σ₂. The gap equals c.
pub const DEFAULT_WITNESS_COEFFS: [f64; 4] = [0.0, 0.0, 1.0, 0.0];

/// First-observable Bloch data x = (1,1,0,0) and y = (−1,0,1,0).
pub const WITNESS_X: [f64; 4] = [1.0, 1.0, 0.0, 0.0];
pub const WITNESS_Y: [f64; 4] = [-1.0, 0.0, 1.0, 0.0];

/// A process and observables on which the two-time expectation function
/// fails to be linear in its first argument.
#[derive(Debug, Clone)]
pub struct NonrepresentableWitness {
    pub process: Process,
    pub o1: Observable,
    pub o2: Observable,
    pub o_b: Observable,
    pub coeffs: [f64; 4],
    /// ⟨O₁ − O₂, O_B⟩ − (⟨O₁, O_B⟩ − ⟨O₂, O_B⟩).
    pub gap: f64,
}

impl NonrepresentableWitness {
    /// The probe pair (O₁ − O₂, O_B) that exposes the gap.
    pub fn difference_probe(&self) -> Result<(Observable, Observable)> {
        let diff = self.o1.matrix() - self.o2.matrix();
        Ok((Observable::new(diff)?, self.o_b.clone()))
    }
}

fn block_with_shift(coeffs: [f64; 4], m: usize) -> ComplexMatrix {
    let top = qubit_observable(coeffs);
    let tail =
        coeffs[0] + (coeffs[1] * coeffs[1] + coeffs[2] * coeffs[2] + coeffs[3] * coeffs[3]).sqrt();
    let mut out = embed_top_left(&top, m);
    for k in 2..m {
        out[(k, k)] = tail.into();
    }
    out
}

pub fn nonrepresentable_witness(m: usize, n: usize) -> Result<NonrepresentableWitness> {
    nonrepresentable_witness_with(m, n, DEFAULT_WITNESS_COEFFS)
}

/// Witness on 𝕄_m → 𝕄_n: the identity on the top-left qubit block extended
/// to an isometry-embedding channel, input |−⟩⟨−|, and first observables
/// x·σ, y·σ padded by their larger eigenvalue so their spectra do not grow.
/// O_B is (a,b,c,d)·σ padded with zeros.
pub fn nonrepresentable_witness_with(
    m: usize,
    n: usize,
    coeffs: [f64; 4],
) -> Result<NonrepresentableWitness> {
    if m < 2 || n < 2 {
        return Err(QsotError::InvalidParameter(format!(
            "witness needs m, n ≥ 2, got {m}, {n}"
        )));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(QsotError::InvalidParameter(
            "O_B coefficients must be finite".into(),
        ));
    }
    let channel = make_standard(&StandardChannel::IsometryEmbed { m, n })?;
    let minus = ComplexMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]);
    let process = Process::new(channel, embed_top_left(&minus, m))?;
    let o1 = Observable::new(block_with_shift(WITNESS_X, m))?;
    let o2 = Observable::new(block_with_shift(WITNESS_Y, m))?;
    let o_b = Observable::new(embed_top_left(&qubit_observable(coeffs), n))?;
    let diff = Observable::new(o1.matrix() - o2.matrix())?;
    let gap = two_time_ev(&process, &diff, &o_b)?
        - (two_time_ev(&process, &o1, &o_b)? - two_time_ev(&process, &o2, &o_b)?);
    Ok(NonrepresentableWitness {
        process,
        o1,
        o2,
        o_b,
        coeffs,
        gap,
    })
}
