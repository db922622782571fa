//! Versioned JSON documents exchanged by the CLI.
//!
//! Every file is an envelope `{"schema_version": "1", "kind": ..., "payload": ...}`.
//! Matrices are `{"rows", "cols", "entries"}` with row-major `[re, im]` entries
//! under the A-major tensor convention.

use std::fs;
use std::path::Path;

use qsot::channels::{Process, QuantumChannel, CHANNEL_TOL};
use qsot::matcore::ComplexMatrix;
use qsot::sot::{causality_witness, Provenance, StateOverTime};
use qsot::{Observable, QsotError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    State,
    Channel,
    Process,
    Observable,
    Sot,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub schema_version: String,
    pub kind: Kind,
    pub payload: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateBody {
    pub rho: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelBody {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessBody {
    pub channel: ChannelBody,
    pub rho: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableBody {
    pub matrix: ComplexMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SotBody {
    pub dim_a: usize,
    pub dim_b: usize,
    pub provenance: Provenance,
    pub matrix: ComplexMatrix,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub negativity: f64,
}

impl Envelope {
    pub fn new<T: Serialize>(kind: Kind, payload: &T) -> CliResult<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION.to_string(),
            kind,
            payload: serde_json::to_value(payload)?,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported schema_version {:?}, expected {SCHEMA_VERSION:?}",
                env.schema_version
            )));
        }
        Ok(env)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Payload of a document that must be of `kind`.
    pub fn body<T: DeserializeOwned>(&self, kind: Kind) -> CliResult<T> {
        if self.kind != kind {
            return Err(CliError::Parse(format!(
                "expected a {kind:?} document, found {:?}",
                self.kind
            )));
        }
        Ok(serde_json::from_value(self.payload.clone())?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

fn channel_from_body(body: ChannelBody) -> CliResult<QuantumChannel> {
    QuantumChannel::from_kraus(body.dim_in, body.dim_out, body.kraus).map_err(|e| match e {
        QsotError::InvalidChannel {
            tp_residual,
            min_choi_eigenvalue,
        } => CliError::Validation(format!(
            "channel is not CPTP: trace preservation residual {tp_residual:.3e}, minimum Choi eigenvalue \
             {min_choi_eigenvalue:.3e} (tolerance {CHANNEL_TOL:e})"
        )),
        other => other.into(),
    })
}

pub fn channel_document(channel: &QuantumChannel) -> CliResult<Envelope> {
    Envelope::new(
        Kind::Channel,
        &ChannelBody {
            dim_in: channel.dim_in(),
            dim_out: channel.dim_out(),
            kraus: channel.kraus().to_vec(),
        },
    )
}

pub fn read_process(path: &Path) -> CliResult<Process> {
    let body: ProcessBody = Envelope::read(path)?.body(Kind::Process)?;
    let channel = channel_from_body(body.channel)?;
    Process::new(channel, body.rho).map_err(|e| CliError::Validation(format!("input state: {e}")))
}

pub fn process_document(process: &Process) -> CliResult<Envelope> {
    let channel = process.channel();
    Envelope::new(
        Kind::Process,
        &ProcessBody {
            channel: ChannelBody {
                dim_in: channel.dim_in(),
                dim_out: channel.dim_out(),
                kraus: channel.kraus().to_vec(),
            },
            rho: process.rho().clone(),
        },
    )
}

pub fn read_observable(path: &Path) -> CliResult<Observable> {
    let body: ObservableBody = Envelope::read(path)?.body(Kind::Observable)?;
    Observable::new(body.matrix).map_err(|e| CliError::Validation(format!("observable: {e}")))
}

pub fn observable_document(matrix: &ComplexMatrix) -> CliResult<Envelope> {
    Envelope::new(
        Kind::Observable,
        &ObservableBody {
            matrix: matrix.clone(),
        },
    )
}

pub fn state_document(rho: &ComplexMatrix) -> CliResult<Envelope> {
    Envelope::new(Kind::State, &StateBody { rho: rho.clone() })
}

pub fn sot_body(sot: &StateOverTime) -> CliResult<SotBody> {
    let witness = causality_witness(sot)?;
    Ok(SotBody {
        dim_a: sot.dim_a(),
        dim_b: sot.dim_b(),
        provenance: sot.provenance(),
        matrix: sot.matrix().clone(),
        eigenvalues: sot.eigenvalues()?,
        min_eigenvalue: witness.min_eigenvalue,
        negativity: witness.negativity,
    })
}

pub fn sot_document(sot: &StateOverTime) -> CliResult<Envelope> {
    Envelope::new(Kind::Sot, &sot_body(sot)?)
}

/// Parses a state-over-time document back into a validated value.
pub fn parse_sot(env: &Envelope) -> CliResult<StateOverTime> {
    let body: SotBody = env.body(Kind::Sot)?;
    Ok(StateOverTime::new(
        body.matrix,
        body.dim_a,
        body.dim_b,
        body.provenance,
    )?)
}
