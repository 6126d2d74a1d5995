//! Command implementations: experiment dispatch, deterministic CSV emission,
//! and the gate-check / selftest suites.

use std::io::Write;

use reqsim::experiments::{
    run_cat_experiment, sweep_cps_fidelity, yield_scaling, CrystalModel, EnsembleSpec, SweepGrid,
};
use reqsim::fidelity::{
    brute_force_worst_fidelity, full_space_worst_fidelity, subspace_worst_fidelity,
};
use reqsim::gates::{bus_mediated_cnot, cnot, hadamard, simple_cps, symmetrized_cps, GateSpec};
use reqsim::hilbert::{
    basis_state, eigenphases, global_phase_distance, propagator, Operator, Spectrum,
};
use reqsim::ionmodel::Transition;
use reqsim::ionmodel::{ideal_cps_target, ChannelId, Instance, IonParams, Level};
use reqsim::pulses::{
    apply_sequence, bb1_expand, pulse_propagator, sequence_propagator, ExpansionPolicy, Pulse,
    PulseSequence,
};
use reqsim::testkit;

use crate::config::{CatParityConfig, SweepConfig, YieldConfig};

/// Exit classification for run errors.
pub enum RunError {
    /// I/O failure (exit 2).
    Io(String),
    /// Invalid physics parameters or model errors (exit 3).
    Physics(String),
}

impl From<reqsim::Error> for RunError {
    fn from(e: reqsim::Error) -> Self {
        RunError::Physics(e.to_string())
    }
}

pub type RunResult = Result<(), RunError>;

/// Scientific notation with 12 significant digits; the one float format used
/// in every CSV cell.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    format!("{x:.11e}")
}

fn write_file(path: &str, contents: &str) -> RunResult {
    let write = || -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(contents.as_bytes())?;
        f.flush()
    };
    write().map_err(|e| RunError::Io(format!("writing {path}: {e}")))
}

pub fn run_fidelity_sweep(cfg: &SweepConfig) -> RunResult {
    let grid = SweepGrid {
        delta_values: reqsim::experiments::range_inclusive(
            cfg.delta_min,
            cfg.delta_max,
            cfg.delta_step,
        ),
        omega_values: reqsim::experiments::range_inclusive(
            cfg.omega_min,
            cfg.omega_max,
            cfg.omega_step,
        ),
        coupling: cfg.coupling,
        variant: cfg.variant,
    };
    let rows = sweep_cps_fidelity(&grid)?;
    let mut out = String::from("delta,omega,fidelity\n");
    for row in rows {
        out.push_str(&fmt_float(row.delta));
        out.push(',');
        out.push_str(&fmt_float(row.omega));
        out.push(',');
        out.push_str(&fmt_float(row.fidelity));
        out.push('\n');
    }
    write_file(&cfg.output, &out)
}

pub fn run_cat_parity(cfg: &CatParityConfig) -> RunResult {
    let ensemble = EnsembleSpec {
        delta_halfwidth: cfg.delta_width,
        omega_relative_halfwidth: cfg.omega_width,
        coupling_range: (cfg.g_min, cfg.g_max),
        n_instances: cfg.instances,
        seed: cfg.seed,
    };
    let points = run_cat_experiment(cfg.n, &cfg.phis, &ensemble)?;
    let mut out = String::from("phi,mean_excited,parity\n");
    for p in points {
        out.push_str(&fmt_float(p.phi));
        out.push(',');
        out.push_str(&fmt_float(p.mean_excited));
        out.push(',');
        out.push_str(&fmt_float(p.parity));
        out.push('\n');
    }
    write_file(&cfg.output, &out)
}

pub fn run_yield(cfg: &YieldConfig) -> RunResult {
    let model = CrystalModel {
        box_side: cfg.box_side,
        ion_count: cfg.ion_count,
        dipole_constant: cfg.dipole_constant,
        channel_count: *cfg.n_values.iter().max().unwrap_or(&2),
        channel_probability: cfg.channel_probability,
        threshold: cfg.threshold,
        angular_factor: cfg.angular_factor,
    };
    let seeds: Vec<u64> = (0..cfg.n_seeds as u64)
        .map(|k| cfg.seed.wrapping_add(k))
        .collect();
    let result = yield_scaling(&model, &cfg.n_values, &seeds)?;
    let mut out = String::from("n,seed,instance_count\n");
    for yc in &result.counts {
        for (seed, &count) in seeds.iter().zip(&yc.counts) {
            out.push_str(&format!("{},{},{}\n", yc.n, seed, count));
        }
    }
    write_file(&cfg.output, &out)?;
    if result.degenerate {
        println!("yield: degenerate (zero counts for some register size); no fit");
    } else {
        println!(
            "yield: slope of log mean count vs n = {:.6}, log(estimated p) = {:.6} (p = {:.6})",
            result.slope, result.log_estimated_p, result.estimated_p
        );
    }
    Ok(())
}

struct CheckReport {
    failures: usize,
}

impl CheckReport {
    fn new() -> Self {
        Self { failures: 0 }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        if pass {
            println!("[PASS] {name}: {detail}");
        } else {
            self.failures += 1;
            println!("[FAIL] {name}: {detail}");
        }
    }

    fn finish(self, what: &str) -> RunResult {
        if self.failures == 0 {
            println!("{what}: all checks passed");
            Ok(())
        } else {
            Err(RunError::Physics(format!(
                "{what}: {} check(s) failed",
                self.failures
            )))
        }
    }
}

/// Reference-equivalence and truth-table suite.
pub fn run_gate_check(coupling: f64) -> RunResult {
    let mut report = CheckReport::new();
    let (i, j) = (ChannelId(0), ChannelId(1));

    // BB1 composite reproduces the bare pulse exactly on a reference ion.
    let single = Instance::single(IonParams::reference());
    let mut worst = 0.0_f64;
    for theta in [
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::PI,
        std::f64::consts::TAU,
    ] {
        let pulse =
            Pulse::new(ChannelId(0), Transition::G0E, 0.0, theta).map_err(RunError::from)?;
        let bare = pulse_propagator(&single, &pulse)?;
        let composite = sequence_propagator(&single, &bb1_expand(&pulse)?)?;
        worst = worst.max(global_phase_distance(&bare, &composite)?);
    }
    report.check(
        "bb1 reference exactness",
        worst < 1e-9,
        format!("max distance {worst:.3e} (tolerance 1e-9)"),
    );

    // The symmetrized gate acts as the ideal target on the qubit space.
    let pair = Instance::reference_pair(coupling);
    let sym = symmetrized_cps(i, j)?.propagator(&pair)?;
    let target = ideal_cps_target(&pair, i, j)?;
    let projector = pair.qubit_projector(&[i, j])?;
    let f_sym = subspace_worst_fidelity(&target, &sym, &projector)?.value;
    report.check(
        "symmetrized CPS vs ideal target (qubit space)",
        f_sym > 1.0 - 1e-6,
        format!("worst-case fidelity {f_sym:.9}"),
    );

    // Reference equivalence: the residual distance between the symmetrized
    // and simple gates is the finite-blockade phase, which scales as 1/g^2.
    let simple = simple_cps(i, j)?.propagator(&pair)?;
    let d_equiv = global_phase_distance(&simple, &sym)?;
    let bound = (10.0 / (coupling * coupling)).max(1e-10);
    report.check(
        "symmetrized vs simple CPS (finite-blockade residual)",
        d_equiv < bound,
        format!("distance {d_equiv:.3e} (1/g^2 bound {bound:.3e})"),
    );

    // Simple gate still meets the headline fidelity at the reference point.
    let f_simple = subspace_worst_fidelity(&target, &simple, &projector)?.value;
    report.check(
        "simple CPS blockade fidelity",
        f_simple >= 0.999,
        format!("worst-case fidelity {f_simple:.6}"),
    );

    // Composite gate tolerates a 10% Rabi-frequency error.
    let miscoupled = Instance::detuned_pair(0.0, 1.10, coupling);
    let gate = symmetrized_cps(i, j)?.expand(ExpansionPolicy::Bb1)?;
    let u = gate.propagator(&miscoupled)?;
    let t2 = ideal_cps_target(&miscoupled, i, j)?;
    let p2 = miscoupled.qubit_projector(&[i, j])?;
    let f_robust = subspace_worst_fidelity(&t2, &u, &p2)?.value;
    report.check(
        "composite CPS at 10% amplitude error",
        f_robust >= 0.999,
        format!("worst-case fidelity {f_robust:.6}"),
    );

    // CNOT truth table.
    let gate = cnot(i, j)?;
    let mut worst_pop = 1.0_f64;
    for (c_in, t_in, c_out, t_out) in [
        (Level::G0, Level::G0, Level::G0, Level::G0),
        (Level::G0, Level::G1, Level::G0, Level::G1),
        (Level::G1, Level::G0, Level::G1, Level::G1),
        (Level::G1, Level::G1, Level::G1, Level::G0),
    ] {
        let start = pair
            .basis_index_of_levels(&[c_in, t_in])
            .map_err(RunError::from)?;
        let mut state = basis_state(pair.dim(), start);
        gate.apply(&pair, &mut state)?;
        let pc = pair.level_population(&state, i, c_out)?;
        let pt = pair.level_population(&state, j, t_out)?;
        worst_pop = worst_pop.min(pc.min(pt));
    }
    report.check(
        "cnot truth table",
        worst_pop > 1.0 - 1e-5,
        format!("min output population {worst_pop:.9}"),
    );

    // Bus-mediated CNOT: flip, no-op, and bus return.
    let star = Instance::star(3, coupling)?;
    let (bus, a, b) = (ChannelId(0), ChannelId(1), ChannelId(2));
    let gate = bus_mediated_cnot(a, b, bus)?;
    let start = star
        .basis_index_of_levels(&[Level::G0, Level::G1, Level::G0])
        .map_err(RunError::from)?;
    let mut state = basis_state(star.dim(), start);
    gate.apply(&star, &mut state)?;
    let flipped = star.level_population(&state, b, Level::G1)?;
    let bus_home = star.level_population(&state, bus, Level::G0)?;
    report.check(
        "bus-mediated cnot",
        flipped > 1.0 - 1e-5 && bus_home > 1.0 - 1e-6,
        format!("target flip {flipped:.9}, bus return {bus_home:.9}"),
    );

    // Hadamard involution on a single reference ion.
    let h = hadamard(ChannelId(0)).propagator(&single)?;
    let d_h = global_phase_distance(&Operator::identity(single.dim()), &h.matmul(&h))?;
    report.check(
        "hadamard involution",
        d_h < 1e-8,
        format!("H^2 distance {d_h:.3e}"),
    );

    report.finish("gate-check")
}

/// Numerical invariant suites shared with the library validation tests.
pub fn run_selftest(seed: u64) -> RunResult {
    let mut report = CheckReport::new();
    let mut rng = testkit::rng(seed);
    use rand::Rng;

    // Spectral reconstruction for Hermitian and unitary inputs.
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let dim = rng.gen_range(2..=16);
        let h = testkit::random_hermitian(dim, &mut rng);
        let spec = Spectrum::hermitian(&h).map_err(RunError::from)?;
        worst = worst.max(spec.reconstruct().max_abs_diff(&h));
        let u = testkit::random_unitary(dim, &mut rng);
        let spec = Spectrum::unitary(&u).map_err(RunError::from)?;
        worst = worst.max(spec.reconstruct().max_abs_diff(&u));
    }
    report.check(
        "spectral reconstruction (50 Hermitian + 50 unitary, dims 2-16)",
        worst < 1e-9,
        format!("max deviation {worst:.3e}"),
    );

    // Propagator semigroup and adjoint properties.
    let mut worst_semi = 0.0_f64;
    let mut worst_adj = 0.0_f64;
    for _ in 0..20 {
        let dim = rng.gen_range(2..=8);
        let h = testkit::random_hermitian(dim, &mut rng);
        let (t, s): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let ut = propagator(&h, t).map_err(RunError::from)?;
        let us = propagator(&h, s).map_err(RunError::from)?;
        let uts = propagator(&h, t + s).map_err(RunError::from)?;
        worst_semi = worst_semi.max(ut.matmul(&us).max_abs_diff(&uts));
        worst_adj = worst_adj.max(
            ut.adjoint()
                .max_abs_diff(&propagator(&h, -t).map_err(RunError::from)?),
        );
    }
    report.check(
        "propagator semigroup / adjoint",
        worst_semi < 1e-9 && worst_adj < 1e-10,
        format!("semigroup {worst_semi:.3e}, adjoint {worst_adj:.3e}"),
    );

    // Closed-form worst-case fidelity vs the polygon oracle.
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let dim = rng.gen_range(2..=8);
        let (phases, u) = testkit::random_diagonal_unitary(dim, &mut rng);
        let f = full_space_worst_fidelity(&Operator::identity(dim), &u)
            .map_err(RunError::from)?
            .value;
        let oracle = testkit::polygon_min_overlap(&phases);
        worst = worst.max((f - oracle).abs());
    }
    report.check(
        "eigenphase-gap closed form vs polygon minimization",
        worst < 1e-8,
        format!("max deviation {worst:.3e}"),
    );

    // Subspace path agrees with the closed form on the trivial projector,
    // and the brute-force bound brackets both.
    let mut worst_full = 0.0_f64;
    let mut worst_brute = 0.0_f64;
    for k in 0..8u64 {
        let dim = 4;
        let u0 = testkit::random_unitary(dim, &mut rng);
        let u = testkit::random_unitary(dim, &mut rng);
        let id = Operator::identity(dim);
        let full = full_space_worst_fidelity(&u0, &u)
            .map_err(RunError::from)?
            .value;
        let sub = subspace_worst_fidelity(&u0, &u, &id)
            .map_err(RunError::from)?
            .value;
        worst_full = worst_full.max((full - sub).abs());
        let brute =
            brute_force_worst_fidelity(&u0, &u, &id, 200, seed ^ k).map_err(RunError::from)?;
        worst_brute = worst_brute.max((brute - full).abs());
    }
    report.check(
        "numerical-range search vs closed form vs brute force",
        worst_full < 1e-8 && worst_brute < 1e-4,
        format!("subspace dev {worst_full:.3e}, brute dev {worst_brute:.3e}"),
    );

    // BB1 robustness ordering under amplitude errors.
    let ideal = Instance::single(IonParams::reference());
    let pulse = Pulse::new(ChannelId(0), Transition::G0E, 0.0, std::f64::consts::PI)
        .map_err(RunError::from)?;
    let target = pulse_propagator(&ideal, &pulse)?;
    let mut ok = true;
    let mut detail = String::new();
    for eps in [0.02, 0.05, 0.10] {
        let inst = Instance::single(IonParams::new(0.0, 1.0 + eps).map_err(RunError::from)?);
        let plain = pulse_propagator(&inst, &pulse)?;
        let composite = sequence_propagator(&inst, &bb1_expand(&pulse)?)?;
        let d_plain = global_phase_distance(&target, &plain)?;
        let d_comp = global_phase_distance(&target, &composite)?;
        ok &= d_comp < d_plain;
        if (eps - 0.05).abs() < 1e-12 {
            ok &= d_comp * 10.0 <= d_plain;
        }
        detail.push_str(&format!("eps={eps}: {d_comp:.2e} vs {d_plain:.2e}; "));
    }
    report.check("bb1 robustness ordering", ok, detail);

    // Pulse inversion pairing on reference ions.
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let phi: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let theta: f64 = rng.gen_range(0.2..std::f64::consts::TAU);
        let seq = PulseSequence::new(vec![
            Pulse::new(ChannelId(0), Transition::G0E, phi, theta).map_err(RunError::from)?,
            Pulse::new(
                ChannelId(0),
                Transition::G0E,
                phi + std::f64::consts::PI,
                theta,
            )
            .map_err(RunError::from)?,
        ]);
        let u = sequence_propagator(&ideal, &seq)?;
        worst = worst.max(global_phase_distance(&Operator::identity(3), &u)?);
    }
    report.check(
        "inverse pulse pairing",
        worst < 1e-10,
        format!("max distance {worst:.3e}"),
    );

    // Fast state application against the dense propagator route.
    let inst = Instance::detuned_pair(0.02, 1.05, 70.0);
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let seq = PulseSequence::new(
            (0..6)
                .map(|_| {
                    Pulse::new(
                        ChannelId(rng.gen_range(0..2)),
                        if rng.gen_bool(0.5) {
                            Transition::G0E
                        } else {
                            Transition::G1E
                        },
                        rng.gen_range(-3.0..3.0),
                        rng.gen_range(0.3..6.0),
                    )
                    .unwrap()
                })
                .collect(),
        );
        let u = sequence_propagator(&inst, &seq)?;
        let psi = testkit::random_state(inst.dim(), &mut rng);
        let dense = u.apply(&psi);
        let mut fast = psi.clone();
        apply_sequence(&inst, &seq, &mut fast)?;
        let dev = dense
            .iter()
            .zip(fast.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    report.check(
        "blockwise state application vs dense propagator",
        worst < 1e-10,
        format!("max deviation {worst:.3e}"),
    );

    // Eigenphase utilities on a compiled gate.
    let pair = Instance::reference_pair(100.0);
    let sym: GateSpec = symmetrized_cps(ChannelId(0), ChannelId(1))?;
    let u = sym.propagator(&pair)?;
    let phases = eigenphases(&u)?;
    let sorted = phases.windows(2).all(|w| w[0] <= w[1]);
    let in_range = phases
        .iter()
        .all(|&p| (0.0..std::f64::consts::TAU + 1e-9).contains(&p));
    report.check(
        "eigenphases sorted and in range",
        sorted && in_range,
        format!("{} phases", phases.len()),
    );

    report.finish("selftest")
}
