//! Seeded random matrices, channels and processes.
//!
//! Channels come from a Haar-random Stinespring isometry, obtained by QR of
//! a complex Gaussian matrix with the phases of R's diagonal absorbed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::{Process, QuantumChannel};
use crate::matcore::{ComplexMatrix, ONE, ZERO};

/// Deterministic RNG used across tests and the CLI.
pub type SeededRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// GUE-like random hermitian matrix (G + G†)/2.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(d, d, rng).hermitian_part()
}

/// Random full-rank density matrix GG†/Tr[GG†].
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    w.scale(1.0 / tr).hermitian_part()
}

pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| gaussian_complex(rng)).collect();
    let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let v = random_unit_vector(d, rng);
    ComplexMatrix::outer(&v, &v)
}

/// Haar-random isometry of shape rows × cols (rows ≥ cols).
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g: DMatrix<Complex64> = ginibre(rows, cols, rng).to_nalgebra();
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = ComplexMatrix::from_nalgebra(&q);
    for c in 0..cols {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..rows {
            out[(row, c)] *= phase;
        }
    }
    out
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    haar_isometry(d, d, rng)
}

/// Random CPTP map with `kraus_rank` Kraus operators cut from one Haar
/// isometry C^{dim_in} → C^{dim_out}⊗C^{kraus_rank}.
pub fn random_channel_with_rank<R: Rng + ?Sized>(
    dim_in: usize,
    dim_out: usize,
    kraus_rank: usize,
    rng: &mut R,
) -> QuantumChannel {
    let rank = kraus_rank.max(1);
    // dim_out * rank must be at least dim_in for an isometry to exist
    let rank = rank.max(dim_in.div_ceil(dim_out));
    let v = haar_isometry(dim_out * rank, dim_in, rng);
    let kraus = (0..rank)
        .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |r, c| v[(k * dim_out + r, c)]))
        .collect();
    QuantumChannel::from_kraus(dim_in, dim_out, kraus)
        .expect("Stinespring isometry yields a CPTP map")
}

/// Random CPTP map of full Kraus rank dim_in·dim_out.
pub fn random_channel<R: Rng + ?Sized>(
    dim_in: usize,
    dim_out: usize,
    rng: &mut R,
) -> QuantumChannel {
    random_channel_with_rank(dim_in, dim_out, dim_in * dim_out, rng)
}

pub fn random_process<R: Rng + ?Sized>(dim_in: usize, dim_out: usize, rng: &mut R) -> Process {
    let channel = random_channel(dim_in, dim_out, rng);
    let rho = random_density_matrix(dim_in, rng);
    Process::new(channel, rho).expect("random density matrix is valid")
}

/// U diag(λ, …, λ, −λ, …, −λ) U† with a random split and λ ∈ [0.5, 2).
/// With `dichotomous = false` it returns a random multiple of 𝟙.
pub fn random_light_touch<R: Rng + ?Sized>(
    d: usize,
    dichotomous: bool,
    rng: &mut R,
) -> ComplexMatrix {
    let lambda = rng.random_range(0.5..2.0);
    if !dichotomous || d < 2 {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        return ComplexMatrix::identity(d).scale(sign * lambda);
    }
    let plus = rng.random_range(1..d);
    let diag: Vec<f64> = (0..d)
        .map(|k| if k < plus { lambda } else { -lambda })
        .collect();
    let u = haar_unitary(d, rng);
    (&(&u * &ComplexMatrix::diag(&diag)) * &u.adjoint()).hermitian_part()
}

/// Random hermitian matrix whose spectrum is guaranteed not to be of the
/// form {λ} or {±λ}. Eigenvalues are drawn uniformly from [−2, 2] and
/// redrawn until no pair is within 0.1 of each other or of summing to zero.
pub fn random_non_light_touch<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 2, "every 1x1 observable is light-touch");
    let diag = loop {
        let vals: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut ok = true;
        for i in 0..d {
            for j in i + 1..d {
                if (vals[i] - vals[j]).abs() < 0.1 || (vals[i] + vals[j]).abs() < 0.1 {
                    ok = false;
                }
            }
        }
        if ok {
            break vals;
        }
    };
    let u = haar_unitary(d, rng);
    (&(&u * &ComplexMatrix::diag(&diag)) * &u.adjoint()).hermitian_part()
}

/// Zero-padded copy of `m` in the top-left corner of a d×d matrix.
pub fn embed_top_left(m: &ComplexMatrix, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |r, c| {
        if r < m.rows() && c < m.cols() {
            m[(r, c)]
        } else {
            ZERO
        }
    })
}
