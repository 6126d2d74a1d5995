//! Pulse and sequence representation, BB1 composite expansion, and
//! compilation of sequences into exact propagators.
//!
//! Pulses are ideal squares: constant amplitude and phase over their whole
//! duration, zero rise and fall time, and zero idle time between consecutive
//! pulses. With the nominal Rabi frequency fixed at 1, a pulse of area
//! `theta` lasts exactly `theta`.
//!
//! Sequences hold pulses in application order: the first element is applied
//! first, so the compiled propagator is `U_k ... U_2 U_1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{self, Operator, State};
use crate::ionmodel::{pulse_hamiltonian, ChannelId, Instance, Level, Transition};

/// A square resonant pulse on one channel's optical transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub channel: ChannelId,
    pub transition: Transition,
    /// Drive phase phi in radians.
    pub phase: f64,
    /// Pulse area theta in radians; strictly positive.
    pub area: f64,
}

impl Pulse {
    pub fn new(channel: ChannelId, transition: Transition, phase: f64, area: f64) -> Result<Self> {
        if !phase.is_finite() || !area.is_finite() {
            return Err(Error::NonFinite { context: "pulse" });
        }
        if area <= 0.0 {
            return Err(Error::InvalidPulse {
                reason: format!("area must be positive, got {area}"),
            });
        }
        Ok(Self {
            channel,
            transition,
            phase,
            area,
        })
    }

    /// Duration in units of 1/Omega_0; equals the area since Omega_0 = 1.
    pub fn duration(&self) -> f64 {
        self.area
    }
}

/// Ordered list of pulses, first element applied first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PulseSequence {
    pulses: Vec<Pulse>,
    bb1_expanded: bool,
}

impl PulseSequence {
    pub fn new(pulses: Vec<Pulse>) -> Self {
        Self {
            pulses,
            bb1_expanded: false,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn push(&mut self, pulse: Pulse) {
        self.pulses.push(pulse);
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Sum of pulse areas (equal to the total duration).
    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.area).sum()
    }

    /// Whether this sequence came out of a BB1 expansion.
    pub fn is_bb1_expanded(&self) -> bool {
        self.bb1_expanded
    }

    pub(crate) fn mark_bb1_expanded(&mut self) {
        self.bb1_expanded = true;
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &PulseSequence) -> PulseSequence {
        let mut pulses = self.pulses.clone();
        pulses.extend(other.pulses.iter().copied());
        PulseSequence {
            pulses,
            bb1_expanded: self.bb1_expanded || other.bb1_expanded,
        }
    }
}

/// The amplitude-robust composite phase `phi_c = arccos(-theta / 4 pi)`,
/// principal branch in `(0, pi]`. Defined for areas in `(0, 4 pi]`.
pub fn phi_c(theta: f64) -> Result<f64> {
    if !theta.is_finite() || theta <= 0.0 || theta > 4.0 * PI {
        return Err(Error::PhiCDomain { area: theta });
    }
    Ok((-theta / (4.0 * PI)).acos())
}

/// Replace a single pulse by the five-pulse BB1 composite:
/// `(phi, theta/2), (phi+phi_c, pi), (phi+3 phi_c, 2 pi), (phi+phi_c, pi),
/// (phi, theta/2)` in application order. The reference-ion propagator of the
/// expansion equals the bare pulse exactly; sensitivity to Rabi-frequency
/// errors is suppressed.
pub fn bb1_expand(pulse: &Pulse) -> Result<PulseSequence> {
    let pc = phi_c(pulse.area)?;
    let half = pulse.area / 2.0;
    let mk = |phase: f64, area: f64| Pulse {
        channel: pulse.channel,
        transition: pulse.transition,
        phase,
        area,
    };
    Ok(PulseSequence {
        pulses: vec![
            mk(pulse.phase, half),
            mk(pulse.phase + pc, PI),
            mk(pulse.phase + 3.0 * pc, 2.0 * PI),
            mk(pulse.phase + pc, PI),
            mk(pulse.phase, half),
        ],
        bb1_expanded: true,
    })
}

/// How to realize a sequence's pulses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionPolicy {
    /// Apply the pulses as written.
    Plain,
    /// Replace every pulse by its BB1 composite.
    Bb1,
}

/// Apply the expansion policy to a whole sequence, preserving order.
/// Re-expanding an already expanded sequence is rejected.
pub fn expand_sequence(seq: &PulseSequence, policy: ExpansionPolicy) -> Result<PulseSequence> {
    match policy {
        ExpansionPolicy::Plain => Ok(seq.clone()),
        ExpansionPolicy::Bb1 => {
            if seq.bb1_expanded {
                return Err(Error::AlreadyExpanded);
            }
            let mut out = PulseSequence {
                pulses: Vec::with_capacity(5 * seq.len()),
                bb1_expanded: true,
            };
            for pulse in &seq.pulses {
                out.pulses.extend(bb1_expand(pulse)?.pulses);
            }
            Ok(out)
        }
    }
}

/// Exact propagator of a single pulse on the given instance.
pub fn pulse_propagator(instance: &Instance, pulse: &Pulse) -> Result<Operator> {
    let h = pulse_hamiltonian(instance, pulse)?;
    hilbert::propagator(&h, pulse.duration())
}

/// Exact propagator of a whole sequence: `U = U_k ... U_2 U_1` with the first
/// listed pulse applied first.
pub fn sequence_propagator(instance: &Instance, seq: &PulseSequence) -> Result<Operator> {
    let mut u = Operator::identity(instance.dim());
    for pulse in seq.pulses() {
        let up = pulse_propagator(instance, pulse)?;
        u = up.matmul(&u);
    }
    Ok(u)
}

/// Apply a single pulse to a state in place, using the 1x1/2x2 block
/// structure of the pulse Hamiltonian in the product basis. Exactly
/// equivalent to multiplying by [`pulse_propagator`], but O(dim).
pub fn apply_pulse(instance: &Instance, pulse: &Pulse, state: &mut State) -> Result<()> {
    if state.len() != instance.dim() {
        return Err(Error::DimensionMismatch {
            left: state.len(),
            right: instance.dim(),
        });
    }
    let nu = instance.ion_index(pulse.channel)?;
    let ion = &instance.ions()[nu];
    let ground = ion
        .scheme
        .index_of(pulse.transition.ground())
        .expect("qubit levels always present");
    let excited = ion.scheme.index_of(Level::E).expect("e always present");
    let stride = instance.stride(nu);
    let local_dim = ion.scheme.dim();
    let t = pulse.duration();
    let drive = Complex64::new(0.0, pulse.phase).exp() * (0.5 * ion.params.omega_ratio);

    let mut local = Vec::new();
    for idx in 0..state.len() {
        let l = (idx / stride) % local_dim;
        if l == ground {
            let partner =
                (idx as isize + (excited as isize - ground as isize) * stride as isize) as usize;
            instance.decompose_index(idx, &mut local);
            let e_ground = instance.static_energy(&local);
            local[nu] = excited;
            let e_excited = instance.static_energy(&local);
            let u2 = hilbert::two_level_propagator(e_ground, e_excited, drive, t);
            let (a, b) = (state[idx], state[partner]);
            state[idx] = u2[0][0] * a + u2[0][1] * b;
            state[partner] = u2[1][0] * a + u2[1][1] * b;
        } else if l != excited {
            instance.decompose_index(idx, &mut local);
            let e = instance.static_energy(&local);
            if e != 0.0 {
                state[idx] *= Complex64::new(0.0, -e * t).exp();
            }
        }
    }
    Ok(())
}

/// Apply a whole sequence to a state in place (first pulse first).
pub fn apply_sequence(instance: &Instance, seq: &PulseSequence, state: &mut State) -> Result<()> {
    for pulse in seq.pulses() {
        apply_pulse(instance, pulse, state)?;
    }
    Ok(())
}
