//! Seeded verification suites. Each claim records the worst value seen, the
//! bound it is compared against and the outcome.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use qsot::channels::{make_standard, Process, StandardChannel};
use qsot::matcore::{hermitian_orthonormal_basis, tensor, trace_product, ComplexMatrix};
use qsot::observables::{
    light_touch_basis_qutrit, light_touch_spanning_set, sic_fiducial, sic_povm, FiducialFamily,
    Observable, Permutation3, V_PHASES,
};
use qsot::random::{
    random_channel, random_density_matrix, random_hermitian, random_light_touch,
    random_non_light_touch, random_process, seeded, SeededRng,
};
use qsot::sot::{canonical_sot, maximality_counterexample, reconstruct_unique};
use qsot::twotime::{
    nonrepresentable_witness, representability_report, trace_formula, two_time_ev, ProbeSet,
};
use qsot::QsotError;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Theorems,
    Nogo,
    Sic,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Claim {
    pub claim: String,
    pub worst: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub claims: Vec<Claim>,
    pub pass: bool,
}

struct Claims {
    tol_override: Option<f64>,
    list: Vec<Claim>,
}

impl Claims {
    /// `worst` must not exceed `bound` (replaced by the override if set).
    fn at_most(&mut self, claim: &str, worst: f64, bound: f64) {
        let bound = self.tol_override.unwrap_or(bound);
        self.at_most_fixed(claim, worst, bound);
    }

    /// Like `at_most`, for bounds that are not tolerances.
    fn at_most_fixed(&mut self, claim: &str, worst: f64, bound: f64) {
        self.list.push(Claim {
            claim: claim.to_string(),
            worst,
            relation: Relation::AtMost,
            bound,
            pass: worst <= bound,
        });
    }

    fn at_least(&mut self, claim: &str, worst: f64, bound: f64) {
        self.list.push(Claim {
            claim: claim.to_string(),
            worst,
            relation: Relation::AtLeast,
            bound,
            pass: worst >= bound,
        });
    }
}

fn obs(m: ComplexMatrix) -> CliResult<Observable> {
    Ok(Observable::new(m)?)
}

fn theorems(
    dims: &[usize],
    trials: usize,
    rng: &mut SeededRng,
    claims: &mut Claims,
) -> CliResult<()> {
    let mut recon: f64 = 0.0;
    let mut trace: f64 = 0.0;
    let mut marg: f64 = 0.0;
    let mut mixed: f64 = 0.0;
    let mut product: f64 = 0.0;
    for &da in dims {
        for &db in dims {
            let probes_a = light_touch_spanning_set(da)?;
            let probes_b = hermitian_orthonormal_basis(db)
                .into_iter()
                .map(obs)
                .collect::<CliResult<Vec<_>>>()?;
            for _ in 0..trials {
                let p = random_process(da, db, rng);
                let sot = canonical_sot(&p);
                recon = recon.max(reconstruct_unique(&p)?.matrix().distance(sot.matrix()));
                for a in &probes_a {
                    for b in &probes_b {
                        trace = trace.max(
                            (two_time_ev(&p, a, b)? - sot.expectation(a.matrix(), b.matrix())?)
                                .abs(),
                        );
                    }
                }

                let oa = obs(random_hermitian(da, rng))?;
                let ob = obs(random_hermitian(db, rng))?;
                let left = two_time_ev(&p, &oa, &Observable::identity(db))?;
                let right = two_time_ev(&p, &Observable::identity(da), &ob)?;
                marg = marg
                    .max((left - trace_product(p.rho(), oa.matrix()).re).abs())
                    .max((right - trace_product(&p.output_state(), ob.matrix()).re).abs());

                let ch = random_channel(da, db, rng);
                let j = ch.jamiolkowski().scale(1.0 / da as f64);
                let mm = Process::new(ch, ComplexMatrix::identity(da).scale(1.0 / da as f64))?;
                mixed = mixed.max(
                    (two_time_ev(&mm, &oa, &ob)? - trace_formula(&j, oa.matrix(), ob.matrix())?)
                        .abs(),
                );

                let sigma = random_density_matrix(db, rng);
                let rho = random_density_matrix(da, rng);
                let dp = make_standard(&StandardChannel::DiscardPrepare {
                    dim_in: da,
                    sigma: sigma.clone(),
                })?;
                let pp = Process::new(dp, rho.clone())?;
                let rs = tensor(&rho, &sigma);
                product = product.max(
                    (two_time_ev(&pp, &oa, &ob)? - trace_formula(&rs, oa.matrix(), ob.matrix())?)
                        .abs(),
                );
            }
        }
    }
    claims.at_most(
        "reconstruct_unique agrees with the closed form (Frobenius)",
        recon,
        1e-8,
    );
    claims.at_most(
        "trace formula holds for light-touch first observables",
        trace,
        1e-10,
    );
    claims.at_most("one-time expectation values are marginals", marg, 1e-10);
    claims.at_most(
        "maximally mixed input matches the scaled Jamiolkowski matrix",
        mixed,
        1e-10,
    );
    claims.at_most(
        "discard-and-prepare matches the product state",
        product,
        1e-10,
    );

    let mut min_residual = f64::INFINITY;
    let mut wrong_light_touch: f64 = 0.0;
    for &d in dims {
        for _ in 0..trials {
            let o = obs(random_non_light_touch(d, rng))?;
            min_residual =
                min_residual.min(maximality_counterexample(&o).map_or(0.0, |c| c.residual));
            let lt = obs(random_light_touch(d, rng.random_bool(0.75), rng))?;
            if !matches!(maximality_counterexample(&lt), Err(QsotError::IsLightTouch)) {
                wrong_light_touch += 1.0;
            }
        }
    }
    claims.at_least(
        "non-light-touch observables admit a counterexample",
        min_residual,
        1e-6,
    );
    claims.at_most_fixed(
        "light-touch observables admit no counterexample (count)",
        wrong_light_touch,
        0.0,
    );
    Ok(())
}

fn nogo(dims: &[usize], rng: &mut SeededRng, claims: &mut Claims) -> CliResult<()> {
    let mut light: f64 = 0.0;
    let mut general = f64::INFINITY;
    let mut gap = f64::INFINITY;
    for &m in dims {
        for &n in dims {
            let w = nonrepresentable_witness(m, n)?;
            let x = canonical_sot(&w.process);
            let mut probes = ProbeSet::build(m, n, 20, rng)?;
            let (diff, o_b) = w.difference_probe()?;
            probes.push(diff, o_b);
            let report = representability_report(&w.process, x.matrix(), &probes)?;
            light = light.max(report.light_touch_residual);
            general = general.min(report.all_residual);
            gap = gap.min(w.gap.abs());
        }
    }
    claims.at_most(
        "witness is matched by the canonical state on light-touch probes",
        light,
        1e-10,
    );
    claims.at_least(
        "witness is not representable over general probes",
        general,
        0.1,
    );
    claims.at_least("witness nonlinearity gap", gap, 1.0 - 1e-10);
    Ok(())
}

/// V and W fiducials on a grid, in every permutation.
pub fn fiducial_grid() -> Vec<(FiducialFamily, Permutation3)> {
    let hi = (2.0f64 / 3.0).sqrt();
    let mut families = Vec::new();
    for r0 in [
        FRAC_1_SQRT_2 + 0.3 * (hi - FRAC_1_SQRT_2),
        FRAC_1_SQRT_2 + 0.8 * (hi - FRAC_1_SQRT_2),
        hi,
    ] {
        for &theta in &V_PHASES {
            for &phi in &V_PHASES {
                families.push(FiducialFamily::V { r0, theta, phi });
            }
        }
    }
    for chi in [0.0, PI / 7.0, 1.0, PI, 5.5] {
        families.push(FiducialFamily::W { chi });
    }
    families
        .into_iter()
        .flat_map(|f| Permutation3::all().into_iter().map(move |p| (f, p)))
        .collect()
}

fn sic(claims: &mut Claims) -> CliResult<()> {
    let mut overlap: f64 = 0.0;
    let mut resolution: f64 = 0.0;
    let mut gram: f64 = 0.0;
    for (family, perm) in fiducial_grid() {
        let povm = sic_povm(sic_fiducial(family, perm)?)?;
        overlap = overlap.max(povm.max_overlap_deviation());
        let sum = povm
            .projectors()
            .iter()
            .fold(ComplexMatrix::zeros(3, 3), |acc, p| &acc + p);
        resolution = resolution.max(sum.scale(1.0 / 3.0).distance(&ComplexMatrix::identity(3)));
        let basis = light_touch_basis_qutrit(&povm);
        for (a, x) in basis.iter().enumerate() {
            for (b, y) in basis.iter().enumerate() {
                let want = if a == b { 3.0 } else { 0.0 };
                gram = gram.max((trace_product(x.matrix(), y.matrix()).re - want).abs());
            }
        }
    }
    claims.at_most("pairwise overlaps equal 1/4", overlap, 1e-10);
    claims.at_most("(1/3) sum of projectors is the identity", resolution, 1e-10);
    claims.at_most(
        "light-touch Gram matrix is 3 times the identity",
        gram,
        1e-10,
    );
    Ok(())
}

pub fn run_suite(
    suite: Suite,
    dims: &[usize],
    trials: usize,
    seed: u64,
    tol: Option<f64>,
) -> CliResult<VerifyReport> {
    let mut rng = seeded(seed);
    let mut claims = Claims {
        tol_override: tol,
        list: Vec::new(),
    };
    if matches!(suite, Suite::Theorems | Suite::All) {
        theorems(dims, trials, &mut rng, &mut claims)?;
    }
    if matches!(suite, Suite::Nogo | Suite::All) {
        nogo(dims, &mut rng, &mut claims)?;
    }
    if matches!(suite, Suite::Sic | Suite::All) {
        sic(&mut claims)?;
    }
    let pass = claims.list.iter().all(|c| c.pass);
    Ok(VerifyReport {
        suite,
        dims: dims.to_vec(),
        trials,
        seed,
        claims: claims.list,
        pass,
    })
}
