use std::path::{Path, PathBuf};
use std::process::Command;

use num_complex::Complex64;
use qsot::matcore::ComplexMatrix;
use qsot::observables::pauli_string;
use qsot::random::{random_density_matrix, random_hermitian, random_process, seeded};
use qsot::twotime::two_time_ev;
use qsot::Observable;
use qsot_cli::commands::{Report, SampleReport, SicReport};
use qsot_cli::document::{
    observable_document, parse_sot, process_document, read_observable, read_process, state_document,
};
use qsot_cli::verify::VerifyReport;
use qsot_cli::Envelope;
use serde_json::Value;
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn qsot(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_qsot"))
        .args(args)
        .env_remove("QSOT_THREADS")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn report(run: &Run) -> Report {
    let env = Envelope::parse(&run.stdout).expect("report parses");
    env.body(qsot_cli::document::Kind::Report).unwrap()
}

fn max_entry_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn qutrit_sot_eigenvalues() {
    let run = qsot(&["sot", p(&data("qutrit_identity_ket0.json"))]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let env = Envelope::parse(&run.stdout).unwrap();
    let want = [-0.5, -0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 1.0];
    let got: Vec<f64> = serde_json::from_value(env.payload["eigenvalues"].clone()).unwrap();
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-10, "{got:?}");
    }
    let sot = parse_sot(&env).unwrap();
    assert_eq!((sot.dim_a(), sot.dim_b()), (3, 3));
}

#[test]
fn swap_over_two_eigenvalues() {
    // ½{𝟙/2 ⊗ 𝟙, SWAP} = SWAP/2, so the spectrum is {−1/2, 1/2, 1/2, 1/2}.
    let run = qsot(&["sot", p(&data("qubit_identity_mixed.json"))]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let env = Envelope::parse(&run.stdout).unwrap();
    let got: Vec<f64> = serde_json::from_value(env.payload["eigenvalues"].clone()).unwrap();
    for (g, w) in got.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
        assert!((g - w).abs() < 1e-12, "{got:?}");
    }
    assert!((env.payload["negativity"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn written_documents_roundtrip() {
    let dir = TempDir::new().unwrap();
    let mut rng = seeded(11);
    let process = random_process(3, 2, &mut rng);
    let obs = random_hermitian(4, &mut rng);
    let rho = random_density_matrix(3, &mut rng);

    let pf = dir.path().join("process.json");
    std::fs::write(&pf, process_document(&process).unwrap().to_json()).unwrap();
    let back = read_process(&pf).unwrap();
    assert!(max_entry_diff(back.rho(), process.rho()) <= 1e-15);
    for (a, b) in back.channel().kraus().iter().zip(process.channel().kraus()) {
        assert!(max_entry_diff(a, b) <= 1e-15);
    }

    let of = dir.path().join("obs.json");
    std::fs::write(&of, observable_document(&obs).unwrap().to_json()).unwrap();
    assert!(max_entry_diff(read_observable(&of).unwrap().matrix(), &obs) <= 1e-15);

    let sf = dir.path().join("state.json");
    let state = state_document(&rho).unwrap();
    std::fs::write(&sf, state.to_json()).unwrap();
    assert_eq!(Envelope::read(&sf).unwrap(), state);

    // The sot document written by the binary parses back to the same matrix.
    let out = dir.path().join("sot.json");
    let run = qsot(&["sot", p(&pf), "--out", p(&out)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.is_empty());
    let first = parse_sot(&Envelope::read(&out).unwrap()).unwrap();
    let again =
        Envelope::parse(&qsot_cli::document::sot_document(&first).unwrap().to_json()).unwrap();
    assert!(max_entry_diff(parse_sot(&again).unwrap().matrix(), first.matrix()) <= 1e-15);
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            "truncated.json",
            r#"{"schema_version": "1", "kind": "process""#,
        ),
        (
            "kind.json",
            r#"{"schema_version": "1", "kind": "tensor", "payload": {}}"#,
        ),
        (
            "version.json",
            r#"{"schema_version": "2", "kind": "process", "payload": {}}"#,
        ),
        (
            "wrongkind.json",
            r#"{"schema_version": "1", "kind": "state", "payload": {"rho": {"rows": 1, "cols": 1, "entries": [[1.0, 0.0]]}}}"#,
        ),
        (
            "shape.json",
            r#"{"schema_version": "1", "kind": "process", "payload": {"channel": {"dim_in": 1, "dim_out": 1, "kraus": [{"rows": 1, "cols": 1, "entries": []}]}, "rho": {"rows": 1, "cols": 1, "entries": [[1.0, 0.0]]}}}"#,
        ),
    ];
    for (name, text) in cases {
        let f = dir.path().join(name);
        std::fs::write(&f, text).unwrap();
        let run = qsot(&["sot", p(&f)]);
        assert_eq!(run.code, 2, "{name}: {}", run.stderr);
    }
    assert_eq!(qsot(&["sot", "/nonexistent/process.json"]).code, 2);
    assert_eq!(qsot(&["frobnicate"]).code, 2);
}

#[test]
fn validation_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    // A Kraus operator of norm 2 is not trace preserving.
    let not_tp = r#"{"schema_version": "1", "kind": "process", "payload": {"channel": {"dim_in": 1, "dim_out": 1, "kraus": [{"rows": 1, "cols": 1, "entries": [[2.0, 0.0]]}]}, "rho": {"rows": 1, "cols": 1, "entries": [[1.0, 0.0]]}}}"#;
    let f = dir.path().join("not_tp.json");
    std::fs::write(&f, not_tp).unwrap();
    let run = qsot(&["sot", p(&f)]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("trace preservation"), "{}", run.stderr);

    let bad_rho = r#"{"schema_version": "1", "kind": "process", "payload": {"channel": {"dim_in": 1, "dim_out": 1, "kraus": [{"rows": 1, "cols": 1, "entries": [[1.0, 0.0]]}]}, "rho": {"rows": 1, "cols": 1, "entries": [[2.0, 0.0]]}}}"#;
    let f = dir.path().join("bad_rho.json");
    std::fs::write(&f, bad_rho).unwrap();
    assert_eq!(qsot(&["sot", p(&f)]).code, 3);

    let ket0 = data("qubit_identity_ket0.json");
    let z = data("sigma_z.json");
    assert_eq!(
        qsot(&["sample", p(&ket0), p(&z), p(&z), "--shots", "0"]).code,
        3
    );
    let qutrit = data("qutrit_identity_ket0.json");
    assert_eq!(qsot(&["sample", p(&qutrit), p(&z), p(&z)]).code, 3);
    assert_eq!(qsot(&["sic", "--family", "v", "--r0", "0.5"]).code, 3);
    assert_eq!(qsot(&["sic", "--family", "v", "--theta", "0.2"]).code, 3);
    assert_eq!(qsot(&["sic", "--perm", "0,0,1"]).code, 3);
    assert_eq!(qsot(&["verify", "--dims", "2..7"]).code, 3);
    assert_eq!(qsot(&["verify", "--trials", "0"]).code, 3);
    assert_eq!(qsot(&["verify", "--tol=-1"]).code, 3);
}

#[test]
fn sic_w0_matches_tables() {
    let run = qsot(&["sic", "--family", "w", "--chi", "0"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let Report::Sic(SicReport {
        vectors,
        light_touch,
        overlap,
        ..
    }) = report(&run)
    else {
        panic!("not a sic report");
    };
    assert!(overlap.pass && overlap.max_deviation <= 1e-10);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let c = |z: Complex64| z * s;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // |ψ_00⟩, |ψ_01⟩, |ψ_10⟩ = (1, ω, 0)/√2.
    let want = [
        (0, [c(one), c(one), zero]),
        (1, [zero, c(one), c(one)]),
        (3, [c(one), c(w), zero]),
    ];
    for (idx, v) in want {
        for (g, e) in vectors[idx].iter().zip(v) {
            assert!((g - e).norm() < 1e-12, "psi {idx}: {:?}", vectors[idx]);
        }
    }
    // L_00 = 2|ψ_00⟩⟨ψ_00| − 𝟙 has rows (0, 1, 0), (1, 0, 0), (0, 0, −1).
    let l00 =
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, -1.0]]);
    assert!(max_entry_diff(&light_touch[0], &l00) < 1e-12);
    assert_eq!(light_touch.len(), 9);
}

#[test]
fn sic_w_pi_over_7_and_v_family() {
    let run = qsot(&["sic", "--chi", "pi/7"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let Report::Sic(r) = report(&run) else {
        panic!()
    };
    assert!(r.overlap.max_deviation <= 1e-10);

    let run = qsot(&[
        "sic", "--family", "v", "--r0", "0.8", "--theta", "pi", "--phi", "5pi/3", "--perm", "2,0,1",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let Report::Sic(r) = report(&run) else {
        panic!()
    };
    assert!(r.overlap.max_deviation <= 1e-10);
    assert_eq!(r.permutation, [2, 0, 1]);
}

#[test]
fn sample_deterministic_case() {
    let ket0 = data("qubit_identity_ket0.json");
    let z = data("sigma_z.json");
    let run = qsot(&["sample", p(&ket0), p(&z), p(&z), "--shots", "5000"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let Report::Sample(r) = report(&run) else {
        panic!()
    };
    assert_eq!(r.outcomes_a, vec![-1.0, 1.0]);
    assert_eq!(r.counts, vec![vec![0, 0], vec![0, 5000]]);
    assert_eq!((r.estimate, r.stderr, r.exact), (1.0, 0.0, 1.0));
}

#[test]
fn sample_concentrates_and_ignores_thread_count() {
    let dir = TempDir::new().unwrap();
    let mut rng = seeded(5);
    let process = random_process(2, 2, &mut rng);
    let pf = dir.path().join("p.json");
    std::fs::write(&pf, process_document(&process).unwrap().to_json()).unwrap();
    let a = pauli_string(&[1]).unwrap();
    let b = Observable::new(random_hermitian(2, &mut rng)).unwrap();
    let (af, bf) = (dir.path().join("a.json"), dir.path().join("b.json"));
    std::fs::write(&af, observable_document(a.matrix()).unwrap().to_json()).unwrap();
    std::fs::write(&bf, observable_document(b.matrix()).unwrap().to_json()).unwrap();

    let args = |threads: &'static str| {
        vec![
            "--threads",
            threads,
            "--seed",
            "0x5eed",
            "sample",
            p(&pf),
            p(&af),
            p(&bf),
            "--shots",
            "1000000",
        ]
    };
    let run1 = qsot(&args("1"));
    let run4 = qsot(&args("4"));
    assert_eq!(run1.code, 0, "{}", run1.stderr);
    assert_eq!(run1.stdout, run4.stdout);
    let Report::Sample(SampleReport {
        estimate,
        stderr,
        exact,
        ..
    }) = report(&run1)
    else {
        panic!()
    };
    assert!((exact - two_time_ev(&process, &a, &b).unwrap()).abs() < 1e-12);
    assert!(
        (estimate - exact).abs() <= 5.0 * stderr,
        "{estimate} vs {exact} ± {stderr}"
    );

    let other = qsot(&[
        "--seed",
        "1",
        "sample",
        p(&pf),
        p(&af),
        p(&bf),
        "--shots",
        "1000",
    ]);
    let again = qsot(&[
        "--seed",
        "1",
        "sample",
        p(&pf),
        p(&af),
        p(&bf),
        "--shots",
        "1000",
    ]);
    assert_eq!(other.stdout, again.stdout);
}

#[test]
fn threads_from_environment() {
    let ket0 = data("qubit_identity_ket0.json");
    let out = Command::new(env!("CARGO_BIN_EXE_qsot"))
        .args(["sot", p(&ket0)])
        .env("QSOT_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_qsot"))
        .args(["sot", p(&ket0)])
        .env("QSOT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pdm_reconstruct_methods() {
    let qutrit = data("qutrit_identity_ket0.json");
    let exact = qsot(&["pdm-reconstruct", p(&qutrit)]);
    assert_eq!(exact.code, 0, "{}", exact.stderr);
    let closed = qsot(&["sot", p(&qutrit)]);
    let x = parse_sot(&Envelope::parse(&exact.stdout).unwrap()).unwrap();
    let y = parse_sot(&Envelope::parse(&closed.stdout).unwrap()).unwrap();
    assert!(x.matrix().distance(y.matrix()) <= 1e-8);
    assert_eq!(format!("{:?}", x.provenance()), "Reconstructed");

    let sampled = qsot(&[
        "pdm-reconstruct",
        p(&qutrit),
        "--method",
        "sampled",
        "--shots",
        "40000",
    ]);
    assert_eq!(sampled.code, 0, "{}", sampled.stderr);
    let s = parse_sot(&Envelope::parse(&sampled.stdout).unwrap()).unwrap();
    assert_eq!(format!("{:?}", s.provenance()), "Sampled");
    assert!(s.matrix().distance(y.matrix()) < 0.1);

    assert_eq!(
        qsot(&[
            "pdm-reconstruct",
            p(&qutrit),
            "--method",
            "sampled",
            "--shots",
            "0"
        ])
        .code,
        3
    );
}

fn verify_report(args: &[&str]) -> (i32, VerifyReport) {
    let run = qsot(args);
    let Report::Verify(r) = report(&run) else {
        panic!("{}", run.stderr)
    };
    (run.code, r)
}

fn worst(r: &VerifyReport, prefix: &str) -> f64 {
    r.claims
        .iter()
        .find(|c| c.claim.starts_with(prefix))
        .expect(prefix)
        .worst
}

#[test]
fn verify_theorems() {
    let (code, r) = verify_report(&["verify", "theorems", "--dims", "2..3", "--trials", "25"]);
    assert_eq!(code, 0);
    assert!(r.pass);
    assert!(worst(&r, "reconstruct_unique") <= 1e-8);
    assert_eq!(r.dims, vec![2, 3]);
    assert_eq!(r.seed, qsot_cli::DEFAULT_SEED);
}

#[test]
fn verify_nogo_and_sic() {
    let (code, r) = verify_report(&["verify", "nogo"]);
    assert_eq!(code, 0);
    assert!(worst(&r, "witness is matched") <= 1e-10);
    assert!(worst(&r, "witness is not representable") >= 0.1);

    let (code, r) = verify_report(&["verify", "sic"]);
    assert_eq!(code, 0);
    assert!(worst(&r, "pairwise overlaps") <= 1e-10);
}

#[test]
fn verify_failure_exits_1_and_still_reports() {
    let (code, r) = verify_report(&[
        "--tol", "0", "verify", "theorems", "--dims", "3", "--trials", "2",
    ]);
    assert_eq!(code, 1);
    assert!(!r.pass);
    assert!(r.claims.iter().any(|c| !c.pass && c.bound == 0.0));
}

#[test]
fn pretty_format() {
    let run = qsot(&[
        "--format",
        "pretty",
        "sot",
        p(&data("qubit_identity_mixed.json")),
    ]);
    assert_eq!(run.code, 0);
    assert!(run
        .stdout
        .contains("eigenvalues: [-0.500000, 0.500000, 0.500000, 0.500000]"));
    assert!(serde_json::from_str::<Value>(&run.stdout).is_err());
}
