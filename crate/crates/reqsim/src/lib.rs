//! Pulse-level simulator and analysis toolkit for rare-earth-ion quantum
//! computing (REQC).
//!
//! The crate models instances of an REQC register (dipole-coupled multi-level
//! ions addressed by frequency channels), compiles composite-pulse gate
//! sequences into exact propagators, and evaluates worst-case gate fidelities.
//! On top of that sit the reproduction experiments: controlled-phase-shift
//! fidelity sweeps over detuning and Rabi-frequency errors, cat-state parity
//! oscillations on a star (bus) register, and Monte Carlo estimates of how
//! many register instances a doped crystal yields.
//!
//! Units: ħ = 1 and the nominal Rabi frequency Ω₀ = 1 throughout. All
//! energies (detunings δ, couplings g, drive strengths Ω) are quoted in units
//! of Ω₀ and all durations in units of 1/Ω₀.

pub mod error;
pub mod experiments;
pub mod fidelity;
pub mod gates;
pub mod hilbert;
pub mod ionmodel;
pub mod pulses;
pub mod testkit;

pub use error::{Error, Result};
