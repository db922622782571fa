//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use qsot::matcore::{hermitian_orthonormal_basis, ComplexMatrix};
use qsot::observables::{
    light_touch_basis_qutrit, pauli_basis, sic_fiducial, sic_povm, FiducialFamily, Observable,
    Permutation3, SIC_TOL,
};
use qsot::sampler::{estimate_ev, estimate_pdm, sample_sequential};
use qsot::sot::{canonical_sot, reconstruct_unique};
use qsot::twotime::joint_distribution;
use qsot::Process;
use serde::{Deserialize, Serialize};

use crate::document::{read_observable, read_process, sot_body, Envelope, Kind, SotBody};
use crate::error::{CliError, CliResult};
use crate::verify::{run_suite, Relation, Suite, VerifyReport};
use crate::{DimRange, Family, Method, Output};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;

/// Payload of a `report` document, tagged by the command that wrote it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "lowercase", deny_unknown_fields)]
pub enum Report {
    Sic(SicReport),
    Sample(SampleReport),
    Verify(VerifyReport),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapCheck {
    /// max |Tr[P_a P_b] − 1/4| over distinct pairs.
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SicReport {
    pub family: FiducialFamily,
    pub permutation: [usize; 3],
    pub fiducial: [Complex64; 3],
    /// |ψ_jk⟩ indexed 3j + k.
    pub vectors: Vec<[Complex64; 3]>,
    pub projectors: Vec<ComplexMatrix>,
    /// L_jk = 2P_jk − 𝟙, same indexing.
    pub light_touch: Vec<ComplexMatrix>,
    pub overlap: OverlapCheck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleReport {
    pub shots: u64,
    pub seed: u64,
    pub outcomes_a: Vec<f64>,
    pub outcomes_b: Vec<f64>,
    /// counts[i][j] for outcome pair (outcomes_a[i], outcomes_b[j]).
    pub counts: Vec<Vec<u64>>,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: f64,
}

fn report_output(report: Report, pretty: String, pass: bool) -> CliResult<Output> {
    Ok(Output {
        document: Envelope::new(Kind::Report, &report)?,
        pretty,
        pass,
    })
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn fmt_matrix(out: &mut String, m: &ComplexMatrix) {
    for r in 0..m.rows() {
        let row: Vec<String> = m.entries()[r * m.cols()..(r + 1) * m.cols()]
            .iter()
            .map(|&z| fmt_complex(z))
            .collect();
        let _ = writeln!(out, "  {}", row.join("  "));
    }
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn sot_output(body: SotBody) -> CliResult<Output> {
    let mut pretty = String::new();
    let _ = writeln!(
        pretty,
        "state over time on {}x{} ({:?})",
        body.dim_a, body.dim_b, body.provenance
    );
    let _ = writeln!(pretty, "eigenvalues: {}", fmt_list(&body.eigenvalues));
    let _ = writeln!(pretty, "min eigenvalue: {:.6e}", body.min_eigenvalue);
    let _ = writeln!(pretty, "negativity: {:.6e}", body.negativity);
    let _ = writeln!(pretty, "matrix:");
    fmt_matrix(&mut pretty, &body.matrix);
    Ok(Output {
        document: Envelope::new(Kind::Sot, &body)?,
        pretty,
        pass: true,
    })
}

pub fn sot(process_file: &Path) -> CliResult<Output> {
    let process = read_process(process_file)?;
    sot_output(sot_body(&canonical_sot(&process))?)
}

pub fn sic(
    family: Family,
    chi: f64,
    r0: f64,
    theta: f64,
    phi: f64,
    perm: [usize; 3],
) -> CliResult<Output> {
    let family = match family {
        Family::V => FiducialFamily::V { r0, theta, phi },
        Family::W => FiducialFamily::W { chi },
    };
    let permutation = Permutation3::new(perm)?;
    let povm = sic_povm(sic_fiducial(family, permutation)?)?;
    let light_touch: Vec<ComplexMatrix> = light_touch_basis_qutrit(&povm)
        .into_iter()
        .map(|o| o.matrix().clone())
        .collect();
    let overlap = OverlapCheck {
        max_deviation: povm.max_overlap_deviation(),
        tol: SIC_TOL,
        pass: povm.max_overlap_deviation() <= SIC_TOL,
    };

    let mut pretty = String::new();
    let _ = writeln!(pretty, "fiducial {family:?}, permutation {perm:?}");
    for (idx, v) in povm.vectors().iter().enumerate() {
        let parts: Vec<String> = v.iter().map(|&z| fmt_complex(z)).collect();
        let _ = writeln!(
            pretty,
            "psi_{}{} = ({})",
            idx / 3,
            idx % 3,
            parts.join(", ")
        );
    }
    for (idx, l) in light_touch.iter().enumerate() {
        let _ = writeln!(pretty, "L_{}{}:", idx / 3, idx % 3);
        fmt_matrix(&mut pretty, l);
    }
    let _ = writeln!(
        pretty,
        "max |Tr[P_a P_b] - 1/4| = {:.3e} (tol {:e}): {}",
        overlap.max_deviation,
        overlap.tol,
        if overlap.pass { "PASS" } else { "FAIL" }
    );

    let pass = overlap.pass;
    let report = SicReport {
        family,
        permutation: perm,
        fiducial: povm.fiducial(),
        vectors: povm.vectors().to_vec(),
        projectors: povm.projectors().to_vec(),
        light_touch,
        overlap,
    };
    report_output(Report::Sic(report), pretty, pass)
}

pub fn verify(
    suite: Suite,
    dims: DimRange,
    trials: usize,
    seed: u64,
    tol: Option<f64>,
) -> CliResult<Output> {
    if dims.lo < MIN_DIM || dims.hi > MAX_DIM || dims.lo > dims.hi {
        return Err(CliError::Validation(format!(
            "dimensions {}..{} must lie within {MIN_DIM}..{MAX_DIM}",
            dims.lo, dims.hi
        )));
    }
    if trials == 0 {
        return Err(CliError::Validation("trials must be at least 1".into()));
    }
    let dims: Vec<usize> = (dims.lo..=dims.hi).collect();
    let report = run_suite(suite, &dims, trials, seed, tol)?;

    let mut pretty = String::new();
    let _ = writeln!(
        pretty,
        "verify {:?}: dims {:?}, {} trials, seed {:#x}",
        report.suite, report.dims, report.trials, report.seed
    );
    for c in &report.claims {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        let _ = writeln!(
            pretty,
            "{} {}: worst {:.3e} {rel} {:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.claim,
            c.worst,
            c.bound
        );
    }
    let pass = report.pass;
    let _ = writeln!(
        pretty,
        "{}",
        if pass {
            "all claims pass"
        } else {
            "some claims failed"
        }
    );
    report_output(Report::Verify(report), pretty, pass)
}

fn check_shots(shots: u64) -> CliResult<()> {
    if shots == 0 {
        return Err(CliError::Validation("shots must be at least 1".into()));
    }
    Ok(())
}

fn check_observable(name: &str, o: &Observable, dim: usize) -> CliResult<()> {
    if o.dim() != dim {
        return Err(CliError::Validation(format!(
            "{name} has dimension {}, the process needs {dim}",
            o.dim()
        )));
    }
    Ok(())
}

pub fn sample(
    process_file: &Path,
    obs_a: &Path,
    obs_b: &Path,
    shots: u64,
    seed: u64,
) -> CliResult<Output> {
    let process = read_process(process_file)?;
    let o_a = read_observable(obs_a)?;
    let o_b = read_observable(obs_b)?;
    check_observable("first observable", &o_a, process.dim_in())?;
    check_observable("second observable", &o_b, process.dim_out())?;
    check_shots(shots)?;

    let record = sample_sequential(&process, &o_a, &o_b, shots, seed)?;
    let outcomes_a = o_a.spectral().eigenvalues().to_vec();
    let outcomes_b = o_b.spectral().eigenvalues().to_vec();
    let est = estimate_ev(&record, &outcomes_a, &outcomes_b)?;
    let exact = joint_distribution(&process, &o_a, &o_b)?.expectation();

    let mut pretty = String::new();
    let _ = writeln!(pretty, "{shots} shots, seed {seed:#x}");
    for (i, row) in record.counts().iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let _ = writeln!(
                pretty,
                "  ({:+.6}, {:+.6}): {c}",
                outcomes_a[i], outcomes_b[j]
            );
        }
    }
    let _ = writeln!(pretty, "estimate {:.6} +/- {:.6}", est.mean, est.stderr);
    let _ = writeln!(pretty, "exact    {exact:.6}");

    let report = SampleReport {
        shots,
        seed,
        outcomes_a,
        outcomes_b,
        counts: record.counts().to_vec(),
        estimate: est.mean,
        stderr: est.stderr,
        exact,
    };
    report_output(Report::Sample(report), pretty, true)
}

/// Light-touch basis used to sample the first time: Pauli strings when the
/// dimension is a power of two, the W(0) SIC reflections for a qutrit.
fn sampling_basis_a(d: usize) -> CliResult<Vec<Observable>> {
    if d.is_power_of_two() && d >= 2 {
        return Ok(pauli_basis(d.trailing_zeros() as usize)?);
    }
    if d == 3 {
        let povm = sic_povm(sic_fiducial(
            FiducialFamily::W { chi: 0.0 },
            Permutation3::IDENTITY,
        )?)?;
        return Ok(light_touch_basis_qutrit(&povm));
    }
    Err(CliError::Validation(format!(
        "sampled reconstruction needs an input dimension that is a power of two or 3, got {d}"
    )))
}

pub fn pdm_reconstruct(
    process_file: &Path,
    method: Method,
    shots: u64,
    seed: u64,
) -> CliResult<Output> {
    let process: Process = read_process(process_file)?;
    let sot = match method {
        Method::Exact => reconstruct_unique(&process)?,
        Method::Sampled => {
            check_shots(shots)?;
            let basis_a = sampling_basis_a(process.dim_in())?;
            let basis_b = hermitian_orthonormal_basis(process.dim_out())
                .into_iter()
                .map(Observable::new)
                .collect::<qsot::Result<Vec<_>>>()?;
            estimate_pdm(&process, &basis_a, &basis_b, shots, seed)?
        }
    };
    sot_output(sot_body(&sot)?)
}
