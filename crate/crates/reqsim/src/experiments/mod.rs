//! Reproduction experiments: controlled-phase-shift fidelity sweeps over
//! detuning and Rabi-frequency errors, cat-state parity oscillations on a
//! star register with ensemble averaging, and Monte Carlo instance-yield
//! estimates for doped crystals.
//!
//! Every operation that consumes a seed is deterministic: per-item RNG
//! streams are derived from (master seed, item index), so results are
//! identical across runs and across any parallel execution schedule.

mod cat;
mod crystal;
mod sweep;

pub use cat::{
    cat_circuit, parity_gather_circuit, run_cat_experiment, sample_star_instance, EnsembleSpec,
    ParityPoint,
};
pub use crystal::{
    count_star_instances, estimate_coupling_probability, sample_crystal,
    threshold_for_target_probability, yield_scaling, Crystal, CrystalModel, YieldCount,
    YieldResult,
};
pub use sweep::{
    cps_worst_fidelity, range_inclusive, sweep_cps_fidelity, CpsVariant, SweepGrid, SweepPoint,
};
