//! Two-time expectation values of sequential quantum measurements, the
//! canonical state over time ½{ρ⊗𝟙, 𝒥[ℰ]}, pseudo-density matrices over
//! light-touch observable bases, and numerical checks of the statements
//! that tie them together.
//!
//! Tensor products use the A-major convention throughout: basis state
//! |a⟩⊗|b⟩ has flat index a·d_B + b.

pub mod channels;
pub mod error;
pub mod matcore;
pub mod observables;
pub mod random;
pub mod sampler;
pub mod sot;
pub mod twotime;

pub use channels::{make_standard, Process, QuantumChannel, StandardChannel};
pub use error::{QsotError, Result};
pub use matcore::{ComplexMatrix, SpectralDecomposition};
pub use observables::{LightTouchClass, Observable};
pub use sot::{canonical_sot, Provenance, StateOverTime};
pub use twotime::{joint_distribution, two_time_ev, JointDistribution};
