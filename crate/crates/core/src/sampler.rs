//! Monte-Carlo simulation of the sequential measurement protocol: measure
//! O_A on ρ, let the collapsed state evolve through ℰ, measure O_B.
//!
//! Shots are split into shards of `SHARD_SIZE`. Shard s draws from a
//! ChaCha8 stream keyed by (seed, s), so a record depends only on
//! (process, observables, shots, seed), never on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::Process;
use crate::error::{QsotError, Result};
use crate::matcore::trace_product;
use crate::observables::Observable;
use crate::sot::{pdm_from_correlations, Provenance, StateOverTime};
use crate::twotime::collapsed_outputs;

pub const SHARD_SIZE: u64 = 1 << 16;
/// First outcomes with ℙ(i) below this are never drawn.
pub const MIN_OUTCOME_PROB: f64 = 1e-14;
/// Intermediate probabilities below −NEGATIVE_PROB_TOL are an error.
pub const NEGATIVE_PROB_TOL: f64 = 1e-9;

/// Outcome counts of a sequential-measurement run, indexed by the
/// ascending eigenvalue order of O_A and O_B.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    counts: Vec<Vec<u64>>,
    shots: u64,
    seed: u64,
}

impl ShotRecord {
    /// Builds a record from a count table; `shots` is the table total.
    pub fn from_counts(counts: Vec<Vec<u64>>, seed: u64) -> Result<Self> {
        let width = counts.first().map_or(0, Vec::len);
        if width == 0 || counts.iter().any(|r| r.len() != width) {
            return Err(QsotError::DimensionMismatch(
                "count table must be a nonempty rectangle".into(),
            ));
        }
        let shots = counts.iter().flatten().sum();
        if shots == 0 {
            return Err(QsotError::InvalidParameter("record has no shots".into()));
        }
        Ok(Self {
            counts,
            shots,
            seed,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i][j]
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// counts / shots.
    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        let n = self.shots as f64;
        self.counts
            .iter()
            .map(|r| r.iter().map(|&c| c as f64 / n).collect())
            .collect()
    }
}

fn checked_prob(p: f64) -> Result<f64> {
    if p < -NEGATIVE_PROB_TOL {
        return Err(QsotError::NumericalFailure(format!(
            "negative probability {p:.3e}"
        )));
    }
    Ok(p.max(0.0))
}

/// Cumulative sums normalized so the last entry is exactly 1.
fn normalized_cdf(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect();
    if let Some(k) = weights.iter().rposition(|&w| w > 0.0) {
        for c in &mut cdf[k..] {
            *c = 1.0;
        }
    }
    cdf
}

/// First index whose cumulative weight exceeds u ∈ [0, 1).
fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

struct Sampler {
    first: Vec<f64>,
    second: Vec<Option<Vec<f64>>>,
    na: usize,
    nb: usize,
}

impl Sampler {
    fn new(process: &Process, o_a: &Observable, o_b: &Observable) -> Result<Self> {
        if o_b.dim() != process.dim_out() {
            return Err(QsotError::DimensionMismatch(format!(
                "second observable acts on {}, process output is {}",
                o_b.dim(),
                process.dim_out()
            )));
        }
        let outputs = collapsed_outputs(process, o_a)?;
        let mut p_first = Vec::with_capacity(outputs.len());
        let mut second = Vec::with_capacity(outputs.len());
        for out in &outputs {
            let p = checked_prob(out.trace().re)?;
            if p < MIN_OUTCOME_PROB {
                p_first.push(0.0);
                second.push(None);
                continue;
            }
            let cond = o_b
                .spectral()
                .projectors()
                .iter()
                .map(|q| checked_prob(trace_product(out, q).re / p))
                .collect::<Result<Vec<f64>>>()?;
            p_first.push(p);
            second.push(Some(normalized_cdf(&cond)));
        }
        if p_first.iter().all(|&p| p == 0.0) {
            return Err(QsotError::NumericalFailure(
                "first measurement has no outcome with positive probability".into(),
            ));
        }
        Ok(Self {
            first: normalized_cdf(&p_first),
            second,
            na: outputs.len(),
            nb: o_b.spectral().len(),
        })
    }

    fn run_shard(&self, seed: u64, shard: u64, shots: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard);
        let mut counts = vec![0u64; self.na * self.nb];
        for _ in 0..shots {
            let i = draw(&self.first, rng.random::<f64>());
            let cond = self.second[i]
                .as_ref()
                .expect("zero-probability outcomes are never drawn");
            let j = draw(cond, rng.random::<f64>());
            counts[i * self.nb + j] += 1;
        }
        counts
    }
}

/// Runs `shots` rounds of the protocol and tallies outcome pairs.
pub fn sample_sequential(
    process: &Process,
    o_a: &Observable,
    o_b: &Observable,
    shots: u64,
    seed: u64,
) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(QsotError::InvalidParameter("shots must be positive".into()));
    }
    let sampler = Sampler::new(process, o_a, o_b)?;
    let shards = shots.div_ceil(SHARD_SIZE);
    let flat = (0..shards)
        .into_par_iter()
        .map(|s| {
            let n = SHARD_SIZE.min(shots - s * SHARD_SIZE);
            sampler.run_shard(seed, s, n)
        })
        .reduce(
            || vec![0u64; sampler.na * sampler.nb],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let counts = flat.chunks(sampler.nb).map(<[u64]>::to_vec).collect();
    Ok(ShotRecord {
        counts,
        shots,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvEstimate {
    pub mean: f64,
    /// Sample standard deviation of λ_iμ_j over shots, divided by √shots.
    pub stderr: f64,
}

/// Empirical mean of the product λ_iμ_j and its standard error.
pub fn estimate_ev(
    record: &ShotRecord,
    outcomes_a: &[f64],
    outcomes_b: &[f64],
) -> Result<EvEstimate> {
    if outcomes_a.len() != record.counts.len() || outcomes_b.len() != record.counts[0].len() {
        return Err(QsotError::IndexOutOfRange(format!(
            "record has {}x{} outcome pairs, got {} and {} outcome values",
            record.counts.len(),
            record.counts[0].len(),
            outcomes_a.len(),
            outcomes_b.len()
        )));
    }
    let n = record.shots as f64;
    let mut sum = 0.0;
    for (row, l) in record.counts.iter().zip(outcomes_a) {
        for (&c, m) in row.iter().zip(outcomes_b) {
            sum += c as f64 * l * m;
        }
    }
    let mean = sum / n;
    let mut sq = 0.0;
    for (row, l) in record.counts.iter().zip(outcomes_a) {
        for (&c, m) in row.iter().zip(outcomes_b) {
            sq += c as f64 * (l * m - mean).powi(2);
        }
    }
    let stderr = if record.shots > 1 {
        (sq / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(EvEstimate { mean, stderr })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed used for basis pair number `pair` (row-major over the pair table).
pub fn pair_seed(seed: u64, pair: u64) -> u64 {
    splitmix64(seed ^ splitmix64(pair))
}

/// Pseudo-density matrix from expectation values supplied by `ev_source`,
/// called as ev_source(a, b) for every basis pair. Provenance is Sampled.
pub fn estimate_pdm_with<F>(
    basis_a: &[Observable],
    basis_b: &[Observable],
    ev_source: F,
) -> Result<StateOverTime>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let (Some(a0), Some(b0)) = (basis_a.first(), basis_b.first()) else {
        return Err(QsotError::DimensionMismatch(
            "bases must be nonempty".into(),
        ));
    };
    let nb = basis_b.len();
    let flat = (0..basis_a.len() * nb)
        .into_par_iter()
        .map(|k| ev_source(k / nb, k % nb))
        .collect::<Result<Vec<f64>>>()?;
    let evs: Vec<Vec<f64>> = flat.chunks(nb).map(<[f64]>::to_vec).collect();
    Ok(
        pdm_from_correlations(a0.dim(), b0.dim(), basis_a, basis_b, &evs)?
            .with_provenance(Provenance::Sampled),
    )
}

/// Samples every basis pair `shots_per_pair` times and assembles the
/// pseudo-density matrix from the empirical means.
pub fn estimate_pdm(
    process: &Process,
    basis_a: &[Observable],
    basis_b: &[Observable],
    shots_per_pair: u64,
    seed: u64,
) -> Result<StateOverTime> {
    if shots_per_pair == 0 {
        return Err(QsotError::InvalidParameter(
            "shots per pair must be positive".into(),
        ));
    }
    let nb = basis_b.len() as u64;
    estimate_pdm_with(basis_a, basis_b, |a, b| {
        let (oa, ob) = (&basis_a[a], &basis_b[b]);
        let record = sample_sequential(
            process,
            oa,
            ob,
            shots_per_pair,
            pair_seed(seed, a as u64 * nb + b as u64),
        )?;
        Ok(estimate_ev(
            &record,
            oa.spectral().eigenvalues(),
            ob.spectral().eigenvalues(),
        )?
        .mean)
    })
}
