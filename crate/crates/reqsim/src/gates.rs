//! Gate library: dipole-blockade controlled-phase-shift sequences, composite
//! single-qubit operations built from optical pulses, and bus-architecture
//! circuits.
//!
//! A [`GateSpec`] is an ordered list of elements, each either a physical
//! [`Pulse`] or an exact software frame update ([`SoftwarePhase`], a diagonal
//! `diag(1, e^{-i phi})` on one ion's qubit levels, realized as a laser-phase
//! redefinition rather than a drive). Gate construction is pure; applying a
//! gate never mutates the instance.
//!
//! Single-qubit rotations go through the excited state: there is no direct
//! 0-1 drive, so an in-plane rotation is compiled as a Lambda sandwich: a pi
//! pulse parking |1> in |e>, the rotation pulse on 0-e, and the inverse pi
//! pulse. On a reference ion the sandwich reproduces the target SU(2)
//! rotation exactly, with no residual excited-state population.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Operator, State};
use crate::ionmodel::{ChannelId, Instance, Level, Transition};
use crate::pulses::{bb1_expand, pulse_propagator, ExpansionPolicy, Pulse, PulseSequence};

/// Exact diagonal frame update `diag(1, e^{-i phi})` on the qubit levels of
/// one channel (identity on `aux`/`e`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftwarePhase {
    pub channel: ChannelId,
    pub phase: f64,
}

/// One step of a gate: a physical pulse or a software frame update.
#[derive(Clone, Debug, PartialEq)]
pub enum GateElement {
    Pulse(Pulse),
    Frame(SoftwarePhase),
}

/// A named gate as an ordered list of pulses and frame updates (first element
/// applied first).
#[derive(Clone, Debug)]
pub struct GateSpec {
    pub name: String,
    channels: Vec<ChannelId>,
    elements: Vec<GateElement>,
    bb1_expanded: bool,
}

impl GateSpec {
    pub fn new(
        name: impl Into<String>,
        channels: Vec<ChannelId>,
        elements: Vec<GateElement>,
    ) -> Self {
        Self {
            name: name.into(),
            channels,
            elements,
            bb1_expanded: false,
        }
    }

    /// Channels the gate addresses.
    pub fn channels(&self) -> &[ChannelId] {
        &self.channels
    }

    pub fn elements(&self) -> &[GateElement] {
        &self.elements
    }

    /// The physical pulses in application order.
    pub fn sequence(&self) -> PulseSequence {
        let mut seq = PulseSequence::new(
            self.elements
                .iter()
                .filter_map(|e| match e {
                    GateElement::Pulse(p) => Some(*p),
                    GateElement::Frame(_) => None,
                })
                .collect(),
        );
        if self.bb1_expanded {
            seq.mark_bb1_expanded();
        }
        seq
    }

    /// The software frame updates in application order.
    pub fn software_phases(&self) -> Vec<SoftwarePhase> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                GateElement::Frame(f) => Some(*f),
                GateElement::Pulse(_) => None,
            })
            .collect()
    }

    /// Replace every pulse by its BB1 composite (frame updates untouched).
    pub fn expand(&self, policy: ExpansionPolicy) -> Result<GateSpec> {
        match policy {
            ExpansionPolicy::Plain => Ok(self.clone()),
            ExpansionPolicy::Bb1 => {
                if self.bb1_expanded {
                    return Err(Error::AlreadyExpanded);
                }
                let mut elements = Vec::with_capacity(self.elements.len() * 5);
                for e in &self.elements {
                    match e {
                        GateElement::Frame(f) => elements.push(GateElement::Frame(*f)),
                        GateElement::Pulse(p) => {
                            elements.extend(
                                bb1_expand(p)?
                                    .pulses()
                                    .iter()
                                    .map(|q| GateElement::Pulse(*q)),
                            );
                        }
                    }
                }
                Ok(GateSpec {
                    name: self.name.clone(),
                    channels: self.channels.clone(),
                    elements,
                    bb1_expanded: true,
                })
            }
        }
    }

    /// Exact propagator of the gate on the given instance.
    pub fn propagator(&self, instance: &Instance) -> Result<Operator> {
        let mut u = Operator::identity(instance.dim());
        for e in &self.elements {
            let step = match e {
                GateElement::Pulse(p) => pulse_propagator(instance, p)?,
                GateElement::Frame(f) => frame_phase_operator(instance, f)?,
            };
            u = step.matmul(&u);
        }
        Ok(u)
    }

    /// Apply the gate to a state in place (O(dim) per element).
    pub fn apply(&self, instance: &Instance, state: &mut State) -> Result<()> {
        for e in &self.elements {
            match e {
                GateElement::Pulse(p) => crate::pulses::apply_pulse(instance, p, state)?,
                GateElement::Frame(f) => apply_frame_phase(instance, f, state)?,
            }
        }
        Ok(())
    }
}

/// The frame update as a full-space diagonal operator.
pub fn frame_phase_operator(instance: &Instance, frame: &SoftwarePhase) -> Result<Operator> {
    let mu = instance.ion_index(frame.channel)?;
    let g1 = instance.ions()[mu].scheme.index_of(Level::G1).unwrap();
    let stride = instance.stride(mu);
    let d = instance.ions()[mu].scheme.dim();
    let factor = Complex64::new(0.0, -frame.phase).exp();
    let mut u = Operator::identity(instance.dim());
    for idx in 0..instance.dim() {
        if (idx / stride) % d == g1 {
            u.set(idx, idx, factor);
        }
    }
    Ok(u)
}

/// Apply the frame update to a state in place.
pub fn apply_frame_phase(
    instance: &Instance,
    frame: &SoftwarePhase,
    state: &mut State,
) -> Result<()> {
    if state.len() != instance.dim() {
        return Err(Error::DimensionMismatch {
            left: state.len(),
            right: instance.dim(),
        });
    }
    let mu = instance.ion_index(frame.channel)?;
    let g1 = instance.ions()[mu].scheme.index_of(Level::G1).unwrap();
    let stride = instance.stride(mu);
    let d = instance.ions()[mu].scheme.dim();
    let factor = Complex64::new(0.0, -frame.phase).exp();
    for (idx, amp) in state.iter_mut().enumerate() {
        if (idx / stride) % d == g1 {
            *amp *= factor;
        }
    }
    Ok(())
}

fn pulse(channel: ChannelId, transition: Transition, phase: f64, area: f64) -> GateElement {
    GateElement::Pulse(Pulse::new(channel, transition, phase, area).expect("valid gate pulse"))
}

/// The controlled phase shift in its simplest form:
/// `P^(i)_0e(0,pi), P^(j)_1e(0,2pi), P^(i)_0e(pi,pi)` in application order.
pub fn simple_cps(i: ChannelId, j: ChannelId) -> Result<GateSpec> {
    if i == j {
        return Err(Error::DegenerateChannelPair { channel: i.0 });
    }
    Ok(GateSpec::new(
        format!("cps[{i},{j}]"),
        vec![i, j],
        vec![
            pulse(i, Transition::G0E, 0.0, PI),
            pulse(j, Transition::G1E, 0.0, 2.0 * PI),
            pulse(i, Transition::G0E, PI, PI),
        ],
    ))
}

/// The phase-compensated (symmetrized) controlled phase shift: a 12-pulse
/// sequence arranged so both qubit levels of each ion pick up the same
/// unknown phase contributions. Equivalent to [`simple_cps`] on reference
/// ions; far more robust on detuned or miscoupled ones.
pub fn symmetrized_cps(i: ChannelId, j: ChannelId) -> Result<GateSpec> {
    if i == j {
        return Err(Error::DegenerateChannelPair { channel: i.0 });
    }
    Ok(GateSpec::new(
        format!("sym_cps[{i},{j}]"),
        vec![i, j],
        vec![
            pulse(i, Transition::G0E, 0.0, PI),
            pulse(j, Transition::G1E, 0.0, PI),
            pulse(j, Transition::G1E, 0.0, PI),
            pulse(j, Transition::G0E, 0.0, PI),
            pulse(j, Transition::G0E, PI, PI),
            pulse(i, Transition::G0E, PI, PI),
            pulse(i, Transition::G1E, 0.0, PI),
            pulse(j, Transition::G1E, 0.0, PI),
            pulse(j, Transition::G1E, PI, PI),
            pulse(j, Transition::G0E, 0.0, PI),
            pulse(j, Transition::G0E, PI, PI),
            pulse(i, Transition::G1E, PI, PI),
        ],
    ))
}

/// In-plane qubit rotation `exp(-i (theta/2) (cos phi sigma_x + sin phi
/// sigma_y))` on the qubit space of channel `c`, compiled as a Lambda
/// sandwich through `|e>`: `P_1e(0,pi), P_0e(phi + pi/2, theta), P_1e(pi,pi)`.
/// Exact (global phase one) on a reference ion, with zero residual
/// excited-state population. Negative angles rotate about the opposite axis;
/// `theta = 0` compiles to nothing.
pub fn qubit_rotation(c: ChannelId, phi: f64, theta: f64) -> GateSpec {
    let name = format!("rot[{c}]({phi:.3},{theta:.3})");
    let (phi, theta) = if theta < 0.0 {
        (phi + PI, -theta)
    } else {
        (phi, theta)
    };
    if theta == 0.0 {
        return GateSpec::new(name, vec![c], Vec::new());
    }
    GateSpec::new(
        name,
        vec![c],
        vec![
            pulse(c, Transition::G1E, 0.0, PI),
            pulse(c, Transition::G0E, phi + FRAC_PI_2, theta),
            pulse(c, Transition::G1E, PI, PI),
        ],
    )
}

/// Hadamard on channel `c`: the y-rotation by pi/2 followed by the software
/// z-phase `diag(1, -1)`. Exactly the Hadamard matrix on a reference ion.
pub fn hadamard(c: ChannelId) -> GateSpec {
    let mut elements = qubit_rotation(c, FRAC_PI_2, FRAC_PI_2).elements;
    elements.push(GateElement::Frame(SoftwarePhase {
        channel: c,
        phase: PI,
    }));
    GateSpec::new(format!("h[{c}]"), vec![c], elements)
}

/// Exact z-rotation `diag(1, e^{-i phi})` on channel `c`; no physical pulses.
pub fn z_rotation(c: ChannelId, phi: f64) -> GateSpec {
    GateSpec::new(
        format!("rz[{c}]({phi:.3})"),
        vec![c],
        vec![GateElement::Frame(SoftwarePhase {
            channel: c,
            phase: phi,
        })],
    )
}

/// Directly-coupled CNOT: Hadamard on the target, the symmetrized controlled
/// phase shift, Hadamard on the target.
pub fn cnot(control: ChannelId, target: ChannelId) -> Result<GateSpec> {
    if control == target {
        return Err(Error::DegenerateChannelPair { channel: control.0 });
    }
    let h = hadamard(target);
    let cps = symmetrized_cps(control, target)?;
    let mut elements = h.elements.clone();
    elements.extend(cps.elements);
    elements.extend(h.elements);
    Ok(GateSpec::new(
        format!("cnot[{control}->{target}]"),
        vec![control, target],
        elements,
    ))
}

/// CNOT between two outer qubits mediated by the bus: swap `a` into the bus
/// (three bus-adjacent CNOTs), apply CNOT from the bus onto `b`, swap back.
/// Acts as `CNOT(a -> b)` on the qubit space and returns the bus to `|0>`
/// whenever it starts there.
pub fn bus_mediated_cnot(a: ChannelId, b: ChannelId, bus: ChannelId) -> Result<GateSpec> {
    if a == b || a == bus || b == bus {
        return Err(Error::DegenerateChannelPair {
            channel: if a == b { a.0 } else { bus.0 },
        });
    }
    let swap = [cnot(a, bus)?, cnot(bus, a)?, cnot(a, bus)?];
    let mut elements = Vec::new();
    for g in &swap {
        elements.extend(g.elements.iter().cloned());
    }
    elements.extend(cnot(bus, b)?.elements);
    for g in &swap {
        elements.extend(g.elements.iter().cloned());
    }
    Ok(GateSpec::new(
        format!("bus_cnot[{a}->{b} via {bus}]"),
        vec![a, b, bus],
        elements,
    ))
}

/// Propagator of a gate list applied in order.
pub fn circuit_propagator(instance: &Instance, gates: &[GateSpec]) -> Result<Operator> {
    let mut u = Operator::identity(instance.dim());
    for g in gates {
        u = g.propagator(instance)?.matmul(&u);
    }
    Ok(u)
}

/// Apply a gate list to a state in place.
pub fn apply_circuit(instance: &Instance, gates: &[GateSpec], state: &mut State) -> Result<()> {
    for g in gates {
        g.apply(instance, state)?;
    }
    Ok(())
}
