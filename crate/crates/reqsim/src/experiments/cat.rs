//! Cat-state preparation, collective rotation analysis, and unitary parity
//! gathering on a star register, with ensemble averaging over instances.
//!
//! The register is a star: channel 0 is the bus, channels `1..n` the outer
//! qubits. Preparation is a composite-pulse Hadamard on the bus followed by
//! bus-controlled CNOTs onto every outer qubit, producing
//! `(|0...0> + |1...1>)/sqrt(2)`. The analysis step rotates every qubit by
//! `phi` about z (an exact software phase) and by `pi/2` about y (physical
//! pulses); the parity is then gathered unitarily by CNOTs from each outer
//! qubit onto the bus, whose |1> population afterwards encodes the register
//! parity. The ensemble average of that population is the observable; the
//! expected parity is `1 - 2 * mean`.
//!
//! All gates are compiled with BB1 composites, matching how the register
//! would actually be driven.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::{apply_circuit, cnot, hadamard, qubit_rotation, z_rotation, GateSpec};
use crate::hilbert::State;
use crate::ionmodel::{ChannelId, Instance, IonParams, Level};
use crate::pulses::ExpansionPolicy;
use crate::testkit::derived_rng;

/// Distribution of instance parameters for ensemble averages.
///
/// Detunings are uniform over `[-delta_halfwidth, +delta_halfwidth]`, Rabi
/// ratios uniform over `[1 - r, 1 + r]`, couplings log-uniform over
/// `[g_min, g_max]`. All draws are per ion (or per coupled pair) and
/// deterministic given the seed.
#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub delta_halfwidth: f64,
    pub omega_relative_halfwidth: f64,
    /// `(g_min, g_max)` with `0 < g_min <= g_max`.
    pub coupling_range: (f64, f64),
    pub n_instances: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    /// Zero-width ensemble at fixed coupling: every instance is the
    /// reference instance.
    pub fn ideal(g: f64, seed: u64) -> Self {
        Self {
            delta_halfwidth: 0.0,
            omega_relative_halfwidth: 0.0,
            coupling_range: (g, g),
            n_instances: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (g_min, g_max) = self.coupling_range;
        if !(g_min > 0.0 && g_max >= g_min) {
            return Err(Error::InvalidExperiment {
                reason: format!(
                    "coupling range ({g_min}, {g_max}) must satisfy 0 < g_min <= g_max"
                ),
            });
        }
        if self.n_instances == 0 {
            return Err(Error::InvalidExperiment {
                reason: "ensemble needs at least one instance".into(),
            });
        }
        if !(0.0..1.0).contains(&self.omega_relative_halfwidth) {
            return Err(Error::InvalidExperiment {
                reason: "omega halfwidth must lie in [0, 1)".into(),
            });
        }
        if self.delta_halfwidth < 0.0 || !self.delta_halfwidth.is_finite() {
            return Err(Error::InvalidExperiment {
                reason: "delta halfwidth must be finite and non-negative".into(),
            });
        }
        Ok(())
    }
}

/// Draw one star instance from the ensemble (index `item` of the seed's
/// stream). Draw order: per ion delta then omega ratio (bus first), then the
/// bus couplings in outer order.
pub fn sample_star_instance(n: usize, spec: &EnsembleSpec, item: u64) -> Result<Instance> {
    let mut rng = derived_rng(spec.seed, item);
    let mut params = Vec::with_capacity(n);
    for _ in 0..n {
        let delta = if spec.delta_halfwidth > 0.0 {
            rng.gen_range(-spec.delta_halfwidth..=spec.delta_halfwidth)
        } else {
            0.0
        };
        let ratio = if spec.omega_relative_halfwidth > 0.0 {
            rng.gen_range(1.0 - spec.omega_relative_halfwidth..=1.0 + spec.omega_relative_halfwidth)
        } else {
            1.0
        };
        params.push(IonParams::new(delta, ratio)?);
    }
    let (g_min, g_max) = spec.coupling_range;
    let mut couplings = Vec::with_capacity(n - 1);
    for _ in 0..n - 1 {
        let g = if g_max > g_min {
            (rng.gen_range(g_min.ln()..=g_max.ln())).exp()
        } else {
            g_min
        };
        couplings.push(g);
    }
    Instance::star_from_parts(&params, &couplings)
}

/// Preparation circuit for the n-qubit cat state: Hadamard on the bus, then
/// CNOT(bus -> outer_k) for every outer qubit.
pub fn cat_circuit(n: usize) -> Result<Vec<GateSpec>> {
    if n < 2 {
        return Err(Error::InvalidExperiment {
            reason: format!("cat state needs at least 2 qubits, got {n}"),
        });
    }
    let bus = ChannelId(0);
    let mut gates = vec![hadamard(bus)];
    for k in 1..n {
        gates.push(cnot(bus, ChannelId(k))?);
    }
    Ok(gates)
}

/// Parity-gather circuit: CNOT(outer_k -> bus) for every outer qubit in
/// index order. Afterwards the bus |1> population equals the parity bit of
/// the pre-gather computational state.
pub fn parity_gather_circuit(n: usize) -> Result<Vec<GateSpec>> {
    if n < 2 {
        return Err(Error::InvalidExperiment {
            reason: format!("parity gather needs at least 2 qubits, got {n}"),
        });
    }
    let bus = ChannelId(0);
    (1..n).map(|k| cnot(ChannelId(k), bus)).collect()
}

/// One ensemble-averaged point of the parity oscillation.
#[derive(Clone, Copy, Debug)]
pub struct ParityPoint {
    pub phi: f64,
    /// Mean bus |1> population after the parity gather.
    pub mean_excited: f64,
    /// Expected parity `1 - 2 * mean_excited`.
    pub parity: f64,
}

fn bb1(gates: Vec<GateSpec>) -> Result<Vec<GateSpec>> {
    gates
        .into_iter()
        .map(|g| g.expand(ExpansionPolicy::Bb1))
        .collect()
}

/// Run the full experiment: prepare the cat state, rotate every qubit by
/// `phi` about z and by `pi/2` about y, gather the parity onto the bus, and
/// ensemble-average the bus |1> population for every `phi`.
pub fn run_cat_experiment(
    n: usize,
    phis: &[f64],
    ensemble: &EnsembleSpec,
) -> Result<Vec<ParityPoint>> {
    ensemble.validate()?;
    if phis.is_empty() {
        return Err(Error::InvalidExperiment {
            reason: "need at least one phi value".into(),
        });
    }
    let prepare = bb1(cat_circuit(n)?)?;
    let gather = bb1(parity_gather_circuit(n)?)?;
    let analysis: Vec<(Vec<GateSpec>, Vec<GateSpec>)> = phis
        .iter()
        .map(|&phi| {
            let z: Vec<GateSpec> = (0..n).map(|q| z_rotation(ChannelId(q), phi)).collect();
            let y = bb1((0..n)
                .map(|q| {
                    qubit_rotation(
                        ChannelId(q),
                        std::f64::consts::FRAC_PI_2,
                        std::f64::consts::FRAC_PI_2,
                    )
                })
                .collect())?;
            Ok((z, y))
        })
        .collect::<Result<_>>()?;

    // Each instance is an independent work item; populations are reduced in
    // instance order so the result does not depend on scheduling.
    let per_instance: Vec<Vec<f64>> = (0..ensemble.n_instances)
        .into_par_iter()
        .map(|item| -> Result<Vec<f64>> {
            let instance = sample_star_instance(n, ensemble, item as u64)?;
            let mut prepared: State = instance.ground_state();
            apply_circuit(&instance, &prepare, &mut prepared)?;
            let mut row = Vec::with_capacity(phis.len());
            for (z, y) in &analysis {
                let mut state = prepared.clone();
                apply_circuit(&instance, z, &mut state)?;
                apply_circuit(&instance, y, &mut state)?;
                apply_circuit(&instance, &gather, &mut state)?;
                row.push(instance.level_population(&state, ChannelId(0), Level::G1)?);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    Ok(phis
        .iter()
        .enumerate()
        .map(|(k, &phi)| {
            let mean =
                per_instance.iter().map(|row| row[k]).sum::<f64>() / ensemble.n_instances as f64;
            ParityPoint {
                phi,
                mean_excited: mean,
                parity: 1.0 - 2.0 * mean,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::apply_circuit;
    use crate::hilbert;
    use std::f64::consts::PI;

    #[test]
    fn bell_state_preparation() {
        let instance = Instance::star(2, 100.0).unwrap();
        let mut state = instance.ground_state();
        apply_circuit(
            &instance,
            &bb1(cat_circuit(2).unwrap()).unwrap(),
            &mut state,
        )
        .unwrap();
        // Overlap with (|00> + |11>)/sqrt(2) up to a global phase.
        let i00 = instance
            .basis_index_of_levels(&[Level::G0, Level::G0])
            .unwrap();
        let i11 = instance
            .basis_index_of_levels(&[Level::G1, Level::G1])
            .unwrap();
        let overlap = (state[i00].norm_sqr()
            + state[i11].norm_sqr()
            + 2.0 * (state[i00].conj() * state[i11]).re.abs())
            / 2.0;
        assert!(overlap >= 1.0 - 1e-6, "overlap {overlap}");
    }

    #[test]
    fn four_qubit_cat_overlap_and_sigma_z() {
        let n = 4;
        let instance = Instance::star(n, 100.0).unwrap();
        let mut state = instance.ground_state();
        apply_circuit(
            &instance,
            &bb1(cat_circuit(n).unwrap()).unwrap(),
            &mut state,
        )
        .unwrap();
        let zeros = instance.basis_index_of_levels(&vec![Level::G0; n]).unwrap();
        let ones = instance.basis_index_of_levels(&vec![Level::G1; n]).unwrap();
        let overlap = (state[zeros].norm_sqr()
            + state[ones].norm_sqr()
            + 2.0 * (state[zeros].conj() * state[ones]).re.abs())
            / 2.0;
        assert!(overlap >= 1.0 - 1e-5, "overlap {overlap}");
        for q in 0..n {
            let sz = instance.sigma_z_expectation(&state, ChannelId(q)).unwrap();
            assert!(sz.abs() < 1e-6, "qubit {q}: <sigma_z> = {sz}");
        }
    }

    #[test]
    fn parity_gather_truth_table() {
        let n = 3;
        let instance = Instance::star(n, 100.0).unwrap();
        let gather = bb1(parity_gather_circuit(n).unwrap()).unwrap();
        for (outers, expect_bus_one) in [
            ([Level::G1, Level::G1], false),
            ([Level::G1, Level::G0], true),
            ([Level::G0, Level::G0], false),
        ] {
            let start = instance
                .basis_index_of_levels(&[Level::G0, outers[0], outers[1]])
                .unwrap();
            let mut state = hilbert::basis_state(instance.dim(), start);
            apply_circuit(&instance, &gather, &mut state).unwrap();
            let p1 = instance
                .level_population(&state, ChannelId(0), Level::G1)
                .unwrap();
            let expect = if expect_bus_one { 1.0 } else { 0.0 };
            assert!(
                (p1 - expect).abs() < 1e-6,
                "outers {:?}: bus |1> population {p1}",
                outers.map(|l| l.label())
            );
        }
    }

    #[test]
    fn ideal_parity_follows_cos_n_phi() {
        let n = 3;
        let phis: Vec<f64> = (0..9).map(|k| k as f64 * PI / 8.0).collect();
        let points = run_cat_experiment(n, &phis, &EnsembleSpec::ideal(100.0, 5)).unwrap();
        for p in &points {
            let expect = (n as f64 * p.phi).cos();
            assert!(
                (p.parity - expect).abs() < 1e-6,
                "phi = {}: parity {} vs cos(n phi) {}",
                p.phi,
                p.parity,
                expect
            );
        }
        // phi = 0: even parity exactly.
        assert!((points[0].parity - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ensemble_widening_reduces_visibility() {
        let n = 2;
        let phis: Vec<f64> = (0..8).map(|k| k as f64 * PI / 4.0).collect();
        let visibility = |points: &[ParityPoint]| {
            points
                .iter()
                .map(|p| p.parity.abs())
                .fold(0.0_f64, f64::max)
        };
        let ideal = run_cat_experiment(n, &phis, &EnsembleSpec::ideal(100.0, 9)).unwrap();
        let noisy = run_cat_experiment(
            n,
            &phis,
            &EnsembleSpec {
                delta_halfwidth: 0.0,
                omega_relative_halfwidth: 0.05,
                coupling_range: (100.0, 100.0),
                n_instances: 24,
                seed: 9,
            },
        )
        .unwrap();
        assert!(visibility(&noisy) <= visibility(&ideal) + 1e-9);
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = EnsembleSpec {
            delta_halfwidth: 0.01,
            omega_relative_halfwidth: 0.05,
            coupling_range: (50.0, 200.0),
            n_instances: 4,
            seed: 123,
        };
        let a = sample_star_instance(3, &spec, 2).unwrap();
        let b = sample_star_instance(3, &spec, 2).unwrap();
        for (x, y) in a.ions().iter().zip(b.ions()) {
            assert_eq!(x.params.delta, y.params.delta);
            assert_eq!(x.params.omega_ratio, y.params.omega_ratio);
        }
        assert_eq!(a.coupling(0, 1), b.coupling(0, 1));
        let c = sample_star_instance(3, &spec, 3).unwrap();
        assert_ne!(a.coupling(0, 1), c.coupling(0, 1));
    }

    #[test]
    fn experiment_results_are_reproducible() {
        let spec = EnsembleSpec {
            delta_halfwidth: 0.005,
            omega_relative_halfwidth: 0.03,
            coupling_range: (60.0, 160.0),
            n_instances: 5,
            seed: 31,
        };
        let phis = [0.0, 0.3, 0.6];
        let a = run_cat_experiment(3, &phis, &spec).unwrap();
        let b = run_cat_experiment(3, &phis, &spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean_excited.to_bits(), y.mean_excited.to_bits());
            assert_eq!(x.parity.to_bits(), y.parity.to_bits());
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(cat_circuit(1).is_err());
        assert!(EnsembleSpec {
            delta_halfwidth: 0.0,
            omega_relative_halfwidth: 0.0,
            coupling_range: (0.0, 1.0),
            n_instances: 1,
            seed: 0,
        }
        .validate()
        .is_err());
    }
}
