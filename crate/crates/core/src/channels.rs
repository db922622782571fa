//! CPTP maps stored as Kraus operators, with the Jamiołkowski matrix
//! 𝒥[ℰ] = Σ_ij E_ij ⊗ ℰ(E_ji) computed once at construction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsotError, Result};
use crate::matcore::{eigenvalues, hermitian_eigh, partial_transpose_a, tensor, ComplexMatrix};
use crate::observables::weyl_heisenberg;

/// Tolerance used when a channel is validated on construction.
pub const CHANNEL_TOL: f64 = 1e-9;
/// Trace and positivity tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    jamiolkowski: ComplexMatrix,
}

/// Outcome of a CPTP check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// ‖Σ K†K − 𝟙‖_F
    pub tp_residual: f64,
    /// Smallest eigenvalue of the Choi matrix (𝒥 partially transposed on A).
    pub min_choi_eigenvalue: f64,
    pub tol: f64,
    pub accepted: bool,
}

impl QuantumChannel {
    /// Builds a channel and rejects it unless it passes `validate_cptp` at
    /// [`CHANNEL_TOL`].
    pub fn from_kraus(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let channel = Self::from_kraus_unchecked(dim_in, dim_out, kraus)?;
        let report = channel.validate_cptp(CHANNEL_TOL);
        if !report.accepted {
            return Err(QsotError::InvalidChannel {
                tp_residual: report.tp_residual,
                min_choi_eigenvalue: report.min_choi_eigenvalue,
            });
        }
        Ok(channel)
    }

    /// Builds a channel checking only shapes. Use [`Self::validate_cptp`]
    /// to inspect whether the Kraus set is actually CPTP.
    pub fn from_kraus_unchecked(
        dim_in: usize,
        dim_out: usize,
        kraus: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(QsotError::InvalidParameter(
                "channel dimensions must be positive".into(),
            ));
        }
        if kraus.is_empty() {
            return Err(QsotError::InvalidParameter("Kraus set is empty".into()));
        }
        if let Some(k) = kraus
            .iter()
            .find(|k| k.rows() != dim_out || k.cols() != dim_in)
        {
            return Err(QsotError::DimensionMismatch(format!(
                "Kraus operator is {}x{}, expected {dim_out}x{dim_in}",
                k.rows(),
                k.cols()
            )));
        }
        let mut channel = Self {
            dim_in,
            dim_out,
            kraus,
            jamiolkowski: ComplexMatrix::zeros(1, 1),
        };
        channel.jamiolkowski = channel.compute_jamiolkowski();
        Ok(channel)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(d, d, vec![ComplexMatrix::identity(d)]).expect("identity channel")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// ℰ(M) = Σ K M K†.
    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.dim_in || m.cols() != self.dim_in {
            return Err(QsotError::DimensionMismatch(format!(
                "channel input is {0}x{0}, got {1}x{2}",
                self.dim_in,
                m.rows(),
                m.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &(&(k * m) * &k.adjoint());
        }
        Ok(out)
    }

    /// Hilbert–Schmidt adjoint ℰ*(B) = Σ K† B K.
    pub fn adjoint_apply(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if b.rows() != self.dim_out || b.cols() != self.dim_out {
            return Err(QsotError::DimensionMismatch(format!(
                "channel output is {0}x{0}, got {1}x{2}",
                self.dim_out,
                b.rows(),
                b.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out = &out + &(&(&k.adjoint() * b) * k);
        }
        Ok(out)
    }

    /// 𝒥[ℰ] = Σ_ij E_ij ⊗ ℰ(E_ji), a (dim_in·dim_out)-square hermitian matrix.
    pub fn jamiolkowski(&self) -> &ComplexMatrix {
        &self.jamiolkowski
    }

    fn compute_jamiolkowski(&self) -> ComplexMatrix {
        let (m, n) = (self.dim_in, self.dim_out);
        let mut j = ComplexMatrix::zeros(m * n, m * n);
        for a in 0..m {
            for b in 0..m {
                let image = self
                    .apply(&ComplexMatrix::unit(m, m, b, a))
                    .expect("unit matrix has input dimension");
                for r in 0..n {
                    for c in 0..n {
                        j[(a * n + r, b * n + c)] = image[(r, c)];
                    }
                }
            }
        }
        j
    }

    /// Choi matrix Σ_ij E_ij ⊗ ℰ(E_ij), the partial transpose of 𝒥 on A.
    pub fn choi(&self) -> ComplexMatrix {
        partial_transpose_a(&self.jamiolkowski, self.dim_in, self.dim_out)
            .expect("shape is consistent")
    }

    /// Trace-preservation residual and Choi positivity; accepted iff the
    /// residual is at most `tol` and the minimum Choi eigenvalue at least −`tol`.
    pub fn validate_cptp(&self, tol: f64) -> ValidationReport {
        let mut sum = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            sum = &sum + &(&k.adjoint() * k);
        }
        let tp_residual = sum.distance(&ComplexMatrix::identity(self.dim_in));
        let min_choi_eigenvalue = eigenvalues(&self.choi().hermitian_part())
            .map(|ev| ev[0])
            .unwrap_or(f64::NEG_INFINITY);
        ValidationReport {
            tp_residual,
            min_choi_eigenvalue,
            tol,
            accepted: tp_residual <= tol && min_choi_eigenvalue >= -tol,
        }
    }
}

/// Channel families used throughout the crate.
#[derive(Debug, Clone)]
pub enum StandardChannel {
    Identity(usize),
    /// ℰ(A) = Tr[A]σ on inputs of dimension `dim_in`.
    DiscardPrepare {
        dim_in: usize,
        sigma: ComplexMatrix,
    },
    /// ℰ(A) = (1 − p)A + p Tr[A] 𝟙/d.
    Depolarizing {
        d: usize,
        p: f64,
    },
    /// ℰ(A) = VAV† + Tr[P_⊥A] 𝟙_n/n with V the n×m partial isometry that is
    /// the identity on span(e₁, e₂) and zero on its complement.
    IsometryEmbed {
        m: usize,
        n: usize,
    },
}

pub fn make_standard(kind: &StandardChannel) -> Result<QuantumChannel> {
    match kind {
        StandardChannel::Identity(d) => {
            if *d == 0 {
                return Err(QsotError::InvalidParameter(
                    "dimension must be positive".into(),
                ));
            }
            Ok(QuantumChannel::identity(*d))
        }
        StandardChannel::DiscardPrepare { dim_in, sigma } => discard_prepare(*dim_in, sigma),
        StandardChannel::Depolarizing { d, p } => depolarizing(*d, *p),
        StandardChannel::IsometryEmbed { m, n } => isometry_embed(*m, *n),
    }
}

fn discard_prepare(dim_in: usize, sigma: &ComplexMatrix) -> Result<QuantumChannel> {
    if dim_in == 0 {
        return Err(QsotError::InvalidParameter(
            "input dimension must be positive".into(),
        ));
    }
    validate_density_matrix(sigma).map_err(|e| QsotError::InvalidParameter(format!("σ: {e}")))?;
    // K_{r,k} = √p_r |u_r⟩⟨k| over the eigenpairs of σ
    let (weights, vectors) = hermitian_eigh(sigma)?;
    let mut kraus = Vec::new();
    for (r, p) in weights.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        let u = vectors.column(r);
        for k in 0..dim_in {
            let mut e = vec![Complex64::new(0.0, 0.0); dim_in];
            e[k] = Complex64::new(1.0, 0.0);
            kraus.push(ComplexMatrix::outer(&u, &e).scale(p.sqrt()));
        }
    }
    QuantumChannel::from_kraus(dim_in, sigma.rows(), kraus)
}

fn depolarizing(d: usize, p: f64) -> Result<QuantumChannel> {
    if d == 0 {
        return Err(QsotError::InvalidParameter(
            "dimension must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(QsotError::InvalidParameter(format!(
            "depolarizing probability {p} outside [0, 1]"
        )));
    }
    // (1/d²) Σ_jk G_jk A G_jk† = Tr[A] 𝟙/d for the Weyl–Heisenberg group.
    let mut kraus = vec![ComplexMatrix::identity(d).scale((1.0 - p).sqrt())];
    if p > 0.0 {
        let w = p.sqrt() / d as f64;
        for j in 0..d {
            for k in 0..d {
                kraus.push(weyl_heisenberg(d, j, k)?.scale(w));
            }
        }
    }
    QuantumChannel::from_kraus(d, d, kraus)
}

fn isometry_embed(m: usize, n: usize) -> Result<QuantumChannel> {
    if m < 2 || n < 2 {
        return Err(QsotError::InvalidParameter(format!(
            "isometry_embed needs m, n >= 2, got ({m}, {n})"
        )));
    }
    let v = ComplexMatrix::from_fn(n, m, |r, c| {
        if r == c && r < 2 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut kraus = vec![v];
    let w = (1.0 / n as f64).sqrt();
    for k in 2..m {
        for l in 0..n {
            kraus.push(ComplexMatrix::unit(n, m, l, k).scale(w));
        }
    }
    QuantumChannel::from_kraus(m, n, kraus)
}

/// Checks hermiticity, unit trace and positivity at [`STATE_TOL`].
pub fn validate_density_matrix(rho: &ComplexMatrix) -> Result<()> {
    rho.ensure_hermitian()
        .map_err(|e| QsotError::InvalidState(e.to_string()))?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
        return Err(QsotError::InvalidState(format!(
            "trace is {tr}, expected 1"
        )));
    }
    let min = eigenvalues(rho)?[0];
    if min < -STATE_TOL {
        return Err(QsotError::InvalidState(format!(
            "minimum eigenvalue {min:.3e} is negative"
        )));
    }
    Ok(())
}

/// A channel paired with an input density matrix.
#[derive(Debug, Clone)]
pub struct Process {
    channel: QuantumChannel,
    rho: ComplexMatrix,
}

impl Process {
    pub fn new(channel: QuantumChannel, rho: ComplexMatrix) -> Result<Self> {
        if rho.rows() != channel.dim_in() || rho.cols() != channel.dim_in() {
            return Err(QsotError::DimensionMismatch(format!(
                "state is {}x{}, channel input dimension is {}",
                rho.rows(),
                rho.cols(),
                channel.dim_in()
            )));
        }
        validate_density_matrix(&rho)?;
        Ok(Self { channel, rho })
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dim_in(&self) -> usize {
        self.channel.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.channel.dim_out
    }

    /// ℰ(ρ)
    pub fn output_state(&self) -> ComplexMatrix {
        self.channel
            .apply(&self.rho)
            .expect("dimensions checked on construction")
    }
}

/// 𝒥[ℰ] built directly from the defining sum, for cross-checking.
pub fn jamiolkowski_by_definition(channel: &QuantumChannel) -> ComplexMatrix {
    let m = channel.dim_in();
    let mut acc = ComplexMatrix::zeros(m * channel.dim_out(), m * channel.dim_out());
    for i in 0..m {
        for j in 0..m {
            let image = channel.apply(&ComplexMatrix::unit(m, m, j, i)).unwrap();
            acc = &acc + &tensor(&ComplexMatrix::unit(m, m, i, j), &image);
        }
    }
    acc
}
