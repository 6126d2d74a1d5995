//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by construction and evaluation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (deviation {deviation:.3e} exceeds {tol:.1e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("operator is not unitary (deviation {deviation:.3e} exceeds {tol:.1e})")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("slot {slot} out of range for {n_slots} factors")]
    SlotOutOfRange { slot: usize, n_slots: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("unknown channel {channel}")]
    UnknownChannel { channel: usize },

    #[error("invalid level scheme: {reason}")]
    InvalidLevelScheme { reason: String },

    #[error("invalid instance: {reason}")]
    InvalidInstance { reason: String },

    #[error("invalid pulse: {reason}")]
    InvalidPulse { reason: String },

    #[error("pulse area {area} outside the domain (0, 4*pi] of the BB1 phase")]
    PhiCDomain { area: f64 },

    #[error("sequence is already BB1-expanded; nested expansion is not supported")]
    AlreadyExpanded,

    #[error("gate requires two distinct channels, got {channel} twice")]
    DegenerateChannelPair { channel: usize },

    #[error("subspace operator is not an orthogonal projector (deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("target unitary does not preserve the subspace (leakage {leakage:.3e})")]
    SubspaceNotPreserved { leakage: f64 },

    #[error("invalid experiment configuration: {reason}")]
    InvalidExperiment { reason: String },

    #[error("invalid crystal model: {reason}")]
    InvalidModel { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
