//! Domain model of ions, levels, channels and instances, and construction of
//! the exact Hamiltonian in force during each pulse.
//!
//! An [`Instance`] is one copy of the quantum computer: one ion per active
//! channel, each with its own detuning and Rabi-frequency ratio, plus the
//! static dipole couplings between excited states. Each ion is described in
//! the rotating frame of its own channel's laser, so the static detuning term
//! `-delta |e><e|` acts on every ion during every pulse and an ion parked in
//! `|e>` keeps accruing detuning phase while other ions are driven. Ground
//! hyperfine levels carry zero static energy.
//!
//! Drive convention: a pulse of phase `phi` on the `a-e` transition
//! contributes `(omega/2) (e^{i phi} |a><e| + e^{-i phi} |e><a|)`. The
//! orientation of the in-plane rotation axes is pinned operationally by the
//! parity-oscillation experiment (a `pi/2` rotation about axis `phi = pi/2`
//! must, after a collective z-rotation of a cat state by `phi`, produce the
//! parity signal `cos(n phi)`).

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Operator, State};
use crate::pulses::Pulse;

/// One internal level of an ion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    /// Qubit ground level |0>.
    G0,
    /// Qubit ground level |1>.
    G1,
    /// Auxiliary parking level.
    Aux,
    /// Optically excited level |e>.
    E,
}

impl Level {
    pub fn label(self) -> &'static str {
        match self {
            Level::G0 => "g0",
            Level::G1 => "g1",
            Level::Aux => "aux",
            Level::E => "e",
        }
    }
}

/// Ordered set of levels of one ion with the basis-index assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelScheme {
    levels: Vec<Level>,
}

impl LevelScheme {
    /// Scheme with the given level order; must contain `g0`, `g1` and `e`
    /// exactly once each.
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        for required in [Level::G0, Level::G1, Level::E] {
            let count = levels.iter().filter(|&&l| l == required).count();
            if count != 1 {
                return Err(Error::InvalidLevelScheme {
                    reason: format!("level {} must appear exactly once", required.label()),
                });
            }
        }
        let aux = levels.iter().filter(|&&l| l == Level::Aux).count();
        if aux > 1 {
            return Err(Error::InvalidLevelScheme {
                reason: "aux level may appear at most once".into(),
            });
        }
        Ok(Self { levels })
    }

    /// Default three-level scheme {g0, g1, e} used in gate simulations.
    pub fn qubit() -> Self {
        Self {
            levels: vec![Level::G0, Level::G1, Level::E],
        }
    }

    /// Four-level scheme {g0, g1, aux, e}.
    pub fn with_aux() -> Self {
        Self {
            levels: vec![Level::G0, Level::G1, Level::Aux, Level::E],
        }
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn index_of(&self, level: Level) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }

    pub fn level_at(&self, index: usize) -> Level {
        self.levels[index]
    }
}

/// Per-ion error parameters relative to the reference ion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IonParams {
    /// Detuning from the channel center, units of the nominal Rabi frequency.
    pub delta: f64,
    /// Experienced Rabi frequency over the nominal one; must be positive.
    pub omega_ratio: f64,
}

impl IonParams {
    pub fn new(delta: f64, omega_ratio: f64) -> Result<Self> {
        if !delta.is_finite() || !omega_ratio.is_finite() {
            return Err(Error::NonFinite {
                context: "ion parameters",
            });
        }
        if omega_ratio <= 0.0 {
            return Err(Error::InvalidInstance {
                reason: format!("omega_ratio must be positive, got {omega_ratio}"),
            });
        }
        Ok(Self { delta, omega_ratio })
    }

    /// The idealized reference ion: zero detuning, nominal Rabi frequency.
    pub fn reference() -> Self {
        Self {
            delta: 0.0,
            omega_ratio: 1.0,
        }
    }
}

/// Identifier of a frequency channel within an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelId(pub usize);

impl std::fmt::Display for ChannelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ch{}", self.0)
    }
}

/// One ion of an instance: the channel it represents, its error parameters
/// and its level scheme.
#[derive(Clone, Debug)]
pub struct Ion {
    pub channel: ChannelId,
    pub params: IonParams,
    pub scheme: LevelScheme,
}

/// Which optical transition a pulse drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transition {
    /// g0 <-> e
    G0E,
    /// g1 <-> e
    G1E,
}

impl Transition {
    pub fn ground(self) -> Level {
        match self {
            Transition::G0E => Level::G0,
            Transition::G1E => Level::G1,
        }
    }
}

/// One quantum-computer instance: an ordered list of ions (one per channel)
/// and the symmetric matrix of excited-state couplings `g_{mu nu} >= 0`.
#[derive(Clone, Debug)]
pub struct Instance {
    ions: Vec<Ion>,
    couplings: Array2<f64>,
}

impl Instance {
    pub fn new(ions: Vec<Ion>, couplings: Array2<f64>) -> Result<Self> {
        let n = ions.len();
        if n == 0 {
            return Err(Error::InvalidInstance {
                reason: "instance needs at least one ion".into(),
            });
        }
        if couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::InvalidInstance {
                reason: format!(
                    "coupling matrix is {}x{}, expected {}x{}",
                    couplings.nrows(),
                    couplings.ncols(),
                    n,
                    n
                ),
            });
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::InvalidInstance {
                    reason: "coupling matrix must have zero diagonal".into(),
                });
            }
            for j in 0..n {
                let g = couplings[(i, j)];
                if !g.is_finite() || g < 0.0 {
                    return Err(Error::InvalidInstance {
                        reason: format!("coupling g[{i}][{j}] = {g} must be finite and >= 0"),
                    });
                }
                if couplings[(i, j)] != couplings[(j, i)] {
                    return Err(Error::InvalidInstance {
                        reason: "coupling matrix must be symmetric".into(),
                    });
                }
            }
        }
        for (k, ion) in ions.iter().enumerate() {
            if ions[..k].iter().any(|other| other.channel == ion.channel) {
                return Err(Error::InvalidInstance {
                    reason: format!("duplicate channel {}", ion.channel),
                });
            }
        }
        Ok(Self { ions, couplings })
    }

    /// A single ion on channel 0; no couplings.
    pub fn single(params: IonParams) -> Self {
        Self {
            ions: vec![Ion {
                channel: ChannelId(0),
                params,
                scheme: LevelScheme::qubit(),
            }],
            couplings: Array2::zeros((1, 1)),
        }
    }

    /// Two reference ions on channels 0 and 1 with coupling `g`.
    pub fn reference_pair(g: f64) -> Self {
        Self::detuned_pair(0.0, 1.0, g)
    }

    /// Two ions with identical error parameters on channels 0 and 1.
    pub fn detuned_pair(delta: f64, omega_ratio: f64, g: f64) -> Self {
        let params = IonParams { delta, omega_ratio };
        let ions = vec![
            Ion {
                channel: ChannelId(0),
                params,
                scheme: LevelScheme::qubit(),
            },
            Ion {
                channel: ChannelId(1),
                params,
                scheme: LevelScheme::qubit(),
            },
        ];
        let mut couplings = Array2::zeros((2, 2));
        couplings[(0, 1)] = g;
        couplings[(1, 0)] = g;
        Self { ions, couplings }
    }

    /// Reference star register: channel 0 is the bus, channels `1..n` the
    /// outer qubits, each coupled to the bus with strength `g`.
    pub fn star(n_qubits: usize, g: f64) -> Result<Self> {
        let params = vec![IonParams::reference(); n_qubits];
        let bus_couplings = vec![g; n_qubits.saturating_sub(1)];
        Self::star_from_parts(&params, &bus_couplings)
    }

    /// Star register with per-ion parameters (index 0 = bus) and per-outer
    /// bus couplings.
    pub fn star_from_parts(params: &[IonParams], bus_couplings: &[f64]) -> Result<Self> {
        let n = params.len();
        if n < 2 {
            return Err(Error::InvalidInstance {
                reason: "star register needs at least two qubits".into(),
            });
        }
        if bus_couplings.len() != n - 1 {
            return Err(Error::InvalidInstance {
                reason: format!(
                    "expected {} bus couplings, got {}",
                    n - 1,
                    bus_couplings.len()
                ),
            });
        }
        let ions = params
            .iter()
            .enumerate()
            .map(|(k, &p)| Ion {
                channel: ChannelId(k),
                params: p,
                scheme: LevelScheme::qubit(),
            })
            .collect();
        let mut couplings = Array2::zeros((n, n));
        for (k, &g) in bus_couplings.iter().enumerate() {
            couplings[(0, k + 1)] = g;
            couplings[(k + 1, 0)] = g;
        }
        Self::new(ions, couplings)
    }

    pub fn n_ions(&self) -> usize {
        self.ions.len()
    }

    pub fn ions(&self) -> &[Ion] {
        &self.ions
    }

    pub fn coupling(&self, mu: usize, nu: usize) -> f64 {
        self.couplings[(mu, nu)]
    }

    /// Total product-space dimension.
    pub fn dim(&self) -> usize {
        self.ions.iter().map(|ion| ion.scheme.dim()).product()
    }

    /// Position of the ion representing `channel`.
    pub fn ion_index(&self, channel: ChannelId) -> Result<usize> {
        self.ions
            .iter()
            .position(|ion| ion.channel == channel)
            .ok_or(Error::UnknownChannel { channel: channel.0 })
    }

    /// Stride of ion `mu` in the mixed-radix basis index (ion 0 slowest).
    pub fn stride(&self, mu: usize) -> usize {
        self.ions[mu + 1..]
            .iter()
            .map(|ion| ion.scheme.dim())
            .product()
    }

    /// Basis index of a product state given per-ion local level indices.
    pub fn basis_index(&self, local: &[usize]) -> usize {
        debug_assert_eq!(local.len(), self.n_ions());
        let mut idx = 0;
        for (ion, &l) in self.ions.iter().zip(local) {
            idx = idx * ion.scheme.dim() + l;
        }
        idx
    }

    /// Per-ion local level indices of a basis index.
    pub fn decompose_index(&self, mut index: usize, out: &mut Vec<usize>) {
        out.clear();
        out.resize(self.n_ions(), 0);
        for mu in (0..self.n_ions()).rev() {
            let d = self.ions[mu].scheme.dim();
            out[mu] = index % d;
            index /= d;
        }
    }

    /// Basis index of a product of named levels.
    pub fn basis_index_of_levels(&self, levels: &[Level]) -> Result<usize> {
        let mut local = Vec::with_capacity(self.n_ions());
        for (ion, &level) in self.ions.iter().zip(levels) {
            local.push(
                ion.scheme
                    .index_of(level)
                    .ok_or_else(|| Error::InvalidInstance {
                        reason: format!("ion {} has no level {}", ion.channel, level.label()),
                    })?,
            );
        }
        Ok(self.basis_index(&local))
    }

    /// Static (drive-free) energy of a basis state: detuning terms plus
    /// dipole couplings of simultaneously excited pairs.
    pub(crate) fn static_energy(&self, local: &[usize]) -> f64 {
        let mut energy = 0.0;
        for (mu, ion) in self.ions.iter().enumerate() {
            if ion.scheme.level_at(local[mu]) != Level::E {
                continue;
            }
            energy -= ion.params.delta;
            for (nu, other) in self.ions.iter().enumerate().skip(mu + 1) {
                if other.scheme.level_at(local[nu]) == Level::E {
                    energy += self.couplings[(mu, nu)];
                }
            }
        }
        energy
    }

    /// Full-space indices of the computational basis states spanned by the
    /// named channels (first channel slowest), with every other ion pinned to
    /// `spectator`.
    pub fn computational_basis_indices(
        &self,
        channels: &[ChannelId],
        spectator: Level,
    ) -> Result<Vec<usize>> {
        let slots: Vec<usize> = channels
            .iter()
            .map(|&c| self.ion_index(c))
            .collect::<Result<_>>()?;
        let mut local = vec![0usize; self.n_ions()];
        for (mu, ion) in self.ions.iter().enumerate() {
            if !slots.contains(&mu) {
                local[mu] =
                    ion.scheme
                        .index_of(spectator)
                        .ok_or_else(|| Error::InvalidInstance {
                            reason: format!(
                                "spectator level {} missing on ion {}",
                                spectator.label(),
                                ion.channel
                            ),
                        })?;
            }
        }
        let k = channels.len();
        let mut out = Vec::with_capacity(1 << k);
        for bits in 0..(1usize << k) {
            for (pos, &mu) in slots.iter().enumerate() {
                let one = (bits >> (k - 1 - pos)) & 1 == 1;
                let level = if one { Level::G1 } else { Level::G0 };
                local[mu] = self.ions[mu].scheme.index_of(level).unwrap();
            }
            out.push(self.basis_index(&local));
        }
        Ok(out)
    }

    /// Orthogonal projector onto the computational subspace of the named
    /// channels (spectators pinned to `g0`).
    pub fn qubit_projector(&self, channels: &[ChannelId]) -> Result<Operator> {
        let indices = self.computational_basis_indices(channels, Level::G0)?;
        let mut p = Operator::zeros(self.dim());
        for idx in indices {
            p.set(idx, idx, Complex64::new(1.0, 0.0));
        }
        Ok(p)
    }

    /// Population of `level` on the ion of `channel`.
    pub fn level_population(&self, state: &State, channel: ChannelId, level: Level) -> Result<f64> {
        let mu = self.ion_index(channel)?;
        let target =
            self.ions[mu]
                .scheme
                .index_of(level)
                .ok_or_else(|| Error::InvalidInstance {
                    reason: format!("ion {channel} has no level {}", level.label()),
                })?;
        let stride = self.stride(mu);
        let d = self.ions[mu].scheme.dim();
        let mut pop = 0.0;
        for (idx, amp) in state.iter().enumerate() {
            if (idx / stride) % d == target {
                pop += amp.norm_sqr();
            }
        }
        Ok(pop)
    }

    /// `<sigma_z>` of the qubit on `channel`: population(g0) - population(g1).
    pub fn sigma_z_expectation(&self, state: &State, channel: ChannelId) -> Result<f64> {
        Ok(self.level_population(state, channel, Level::G0)?
            - self.level_population(state, channel, Level::G1)?)
    }

    /// `|g0 g0 ... g0>` of the full register.
    pub fn ground_state(&self) -> State {
        let idx = self
            .basis_index_of_levels(&vec![Level::G0; self.n_ions()])
            .expect("g0 is always present");
        crate::hilbert::basis_state(self.dim(), idx)
    }
}

/// Static dipole coupling between excited states:
/// `sum_{mu < nu} g_{mu nu} |e><e|_mu (x) |e><e|_nu`, diagonal in the product
/// basis. (The symmetric double-counted sum over ordered pairs with the 1/2
/// prefactor equals this sum over unordered pairs.)
pub fn dipole_hamiltonian(instance: &Instance) -> Operator {
    let dim = instance.dim();
    let mut h = Operator::zeros(dim);
    let mut local = Vec::new();
    for idx in 0..dim {
        instance.decompose_index(idx, &mut local);
        let mut energy = 0.0;
        for mu in 0..instance.n_ions() {
            if instance.ions()[mu].scheme.level_at(local[mu]) != Level::E {
                continue;
            }
            for (nu, ion) in instance.ions().iter().enumerate().skip(mu + 1) {
                if ion.scheme.level_at(local[nu]) == Level::E {
                    energy += instance.coupling(mu, nu);
                }
            }
        }
        if energy != 0.0 {
            h.set(idx, idx, Complex64::new(energy, 0.0));
        }
    }
    h
}

/// Rotating-frame Hamiltonian in force while `pulse` is applied: static
/// detunings on every ion, dipole couplings, and the resonant drive on the
/// addressed ion's transition.
pub fn pulse_hamiltonian(instance: &Instance, pulse: &Pulse) -> Result<Operator> {
    let nu = instance.ion_index(pulse.channel)?;
    let ion = &instance.ions()[nu];
    let ground = ion
        .scheme
        .index_of(pulse.transition.ground())
        .expect("qubit levels always present");
    let excited = ion.scheme.index_of(Level::E).expect("e always present");
    let stride = instance.stride(nu);
    let local_dim = ion.scheme.dim();
    let half_omega = 0.5 * ion.params.omega_ratio;
    let drive = Complex64::new(0.0, pulse.phase).exp() * half_omega;

    let dim = instance.dim();
    let mut h = Operator::zeros(dim);
    let mut local = Vec::new();
    for idx in 0..dim {
        instance.decompose_index(idx, &mut local);
        let e = instance.static_energy(&local);
        if e != 0.0 {
            h.set(idx, idx, Complex64::new(e, 0.0));
        }
        if local[nu] == ground {
            let partner =
                (idx as isize + (excited as isize - ground as isize) * stride as isize) as usize;
            debug_assert_eq!((partner / stride) % local_dim, excited);
            h.set(idx, partner, drive);
            h.set(partner, idx, drive.conj());
        }
    }
    Ok(h)
}

/// The ideal controlled-phase-shift target: identity except `-1` on every
/// basis state with both named ions in `g1` (spectator ions unconstrained).
pub fn ideal_cps_target(
    instance: &Instance,
    control: ChannelId,
    target: ChannelId,
) -> Result<Operator> {
    let mu = instance.ion_index(control)?;
    let nu = instance.ion_index(target)?;
    let g1_mu = instance.ions()[mu].scheme.index_of(Level::G1).unwrap();
    let g1_nu = instance.ions()[nu].scheme.index_of(Level::G1).unwrap();
    let dim = instance.dim();
    let mut u = Operator::identity(dim);
    let mut local = Vec::new();
    for idx in 0..dim {
        instance.decompose_index(idx, &mut local);
        if local[mu] == g1_mu && local[nu] == g1_nu {
            u.set(idx, idx, Complex64::new(-1.0, 0.0));
        }
    }
    Ok(u)
}
