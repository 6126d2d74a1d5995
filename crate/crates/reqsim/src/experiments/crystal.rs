//! Monte Carlo model of a doped crystal and the instance-yield estimate for
//! the star architecture.
//!
//! Ions are placed uniformly in a cubic box and assigned to channels
//! independently; two ions count as coupled when their static dipole
//! interaction `g = C / r^3` exceeds the threshold `g_t`. Instances are
//! matched greedily: bus ions in index order each try to claim one unclaimed
//! coupled ion from every outer channel (lowest index first), committing the
//! claims only when all outer channels succeed. The yield scaling experiment
//! fits the slope of log mean instance count against the register size and
//! compares it to the log of the empirically estimated coupling probability.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::testkit::rng;

/// Parameters of the crystal and of the star register carved out of it.
#[derive(Clone, Debug)]
pub struct CrystalModel {
    /// Side length of the cubic box (dimensionless).
    pub box_side: f64,
    /// Number of dopant ions in the box.
    pub ion_count: usize,
    /// Dipole constant C in `g = C / r^3`.
    pub dipole_constant: f64,
    /// Number of channels n of the star register (channel 0 is the bus).
    pub channel_count: usize,
    /// Probability q that an ion belongs to any one given channel;
    /// `q * channel_count <= 1`.
    pub channel_probability: f64,
    /// Coupling threshold g_t above which two ions count as coupled.
    pub threshold: f64,
    /// Include the dipolar angular factor `(1 - 3 cos^2 theta)` in the
    /// coupling, with theta measured against the z axis; coupling then
    /// compares `|g|` to the threshold. Off by default.
    pub angular_factor: bool,
}

impl CrystalModel {
    pub fn validate(&self) -> Result<()> {
        let positive = self.box_side > 0.0
            && self.dipole_constant > 0.0
            && self.threshold > 0.0
            && self.ion_count > 0
            && self.channel_count >= 2;
        if !positive {
            return Err(Error::InvalidModel {
                reason: "box side, dipole constant, threshold must be positive; \
                         at least one ion and two channels required"
                    .into(),
            });
        }
        if !(0.0..=1.0).contains(&self.channel_probability)
            || self.channel_probability * self.channel_count as f64 > 1.0 + 1e-12
        {
            return Err(Error::InvalidModel {
                reason: format!(
                    "channel probability {} with {} channels exceeds 1",
                    self.channel_probability, self.channel_count
                ),
            });
        }
        Ok(())
    }

    /// Same crystal parameters with a different register size.
    pub fn with_channel_count(&self, n: usize) -> Self {
        Self {
            channel_count: n,
            ..self.clone()
        }
    }

    /// Largest distance at which two ions can count as coupled. Without the
    /// angular factor `g = C / r^3 > g_t` iff `r < (C / g_t)^(1/3)`; with it
    /// the factor magnitude peaks at 2 along the z axis.
    pub fn coupling_radius(&self) -> f64 {
        let peak = if self.angular_factor { 2.0 } else { 1.0 };
        (peak * self.dipole_constant / self.threshold).cbrt()
    }

    /// Whether the ions at `a` and `b` count as coupled: `|g| > g_t`.
    pub fn coupled(&self, a: &[f64; 3], b: &[f64; 3]) -> bool {
        let r2 = dist_sq(a, b);
        if r2 == 0.0 {
            return true;
        }
        let r3 = r2 * r2.sqrt();
        let mut g = self.dipole_constant / r3;
        if self.angular_factor {
            let cos2 = (a[2] - b[2]) * (a[2] - b[2]) / r2;
            g *= 1.0 - 3.0 * cos2;
        }
        g.abs() > self.threshold
    }
}

/// A sampled crystal: ion positions and channel assignments
/// (`None` = inactive ion).
#[derive(Clone, Debug)]
pub struct Crystal {
    pub positions: Vec<[f64; 3]>,
    pub channels: Vec<Option<usize>>,
}

impl Crystal {
    pub fn active_count(&self) -> usize {
        self.channels.iter().filter(|c| c.is_some()).count()
    }
}

/// Sample ion positions (uniform in the box) and channel assignments
/// (each ion lands in channel k with probability q, mutually exclusively,
/// inactive otherwise). Deterministic given the seed; one fixed draw order
/// of four uniforms per ion.
pub fn sample_crystal(model: &CrystalModel, seed: u64) -> Result<Crystal> {
    model.validate()?;
    let mut r = rng(seed);
    let mut positions = Vec::with_capacity(model.ion_count);
    let mut channels = Vec::with_capacity(model.ion_count);
    let q = model.channel_probability;
    for _ in 0..model.ion_count {
        let x = r.gen_range(0.0..model.box_side);
        let y = r.gen_range(0.0..model.box_side);
        let z = r.gen_range(0.0..model.box_side);
        positions.push([x, y, z]);
        let u: f64 = r.gen_range(0.0..1.0);
        let k = (u / q).floor() as usize;
        channels.push(if q > 0.0 && k < model.channel_count {
            Some(k)
        } else {
            None
        });
    }
    Ok(Crystal {
        positions,
        channels,
    })
}

/// Uniform cell grid over the box for fixed-radius neighbor queries.
struct CellGrid {
    cells_per_axis: usize,
    cell_size: f64,
    buckets: Vec<Vec<u32>>,
}

impl CellGrid {
    fn build(positions: &[[f64; 3]], box_side: f64, radius: f64) -> Self {
        let cells_per_axis = if radius >= box_side {
            1
        } else {
            ((box_side / radius).floor() as usize).clamp(1, 64)
        };
        let cell_size = box_side / cells_per_axis as f64;
        let mut buckets = vec![Vec::new(); cells_per_axis.pow(3)];
        for (i, p) in positions.iter().enumerate() {
            buckets[Self::bucket_of(p, cell_size, cells_per_axis)].push(i as u32);
        }
        Self {
            cells_per_axis,
            cell_size,
            buckets,
        }
    }

    fn bucket_of(p: &[f64; 3], cell_size: f64, cells_per_axis: usize) -> usize {
        let c = |v: f64| ((v / cell_size) as usize).min(cells_per_axis - 1);
        (c(p[0]) * cells_per_axis + c(p[1])) * cells_per_axis + c(p[2])
    }

    /// Visit all ions in the 27-cell neighborhood of `p`.
    fn for_neighbors(&self, p: &[f64; 3], mut visit: impl FnMut(u32)) {
        let n = self.cells_per_axis as isize;
        let c = |v: f64| ((v / self.cell_size) as isize).min(n - 1);
        let (cx, cy, cz) = (c(p[0]), c(p[1]), c(p[2]));
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let (x, y, z) = (cx + dx, cy + dy, cz + dz);
                    if x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n {
                        continue;
                    }
                    let bucket = ((x * n + y) * n + z) as usize;
                    for &i in &self.buckets[bucket] {
                        visit(i);
                    }
                }
            }
        }
    }
}

fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

/// Count complete star instances by greedy matching.
///
/// Bus ions are visited in index order; for each, the lowest-index unclaimed
/// coupled ion of every outer channel is tentatively claimed. If every outer
/// channel yields a claim the instance is committed (those ions stay
/// claimed); otherwise the tentative claims are released. No backtracking
/// across bus ions.
pub fn count_star_instances(crystal: &Crystal, model: &CrystalModel) -> usize {
    let radius = model.coupling_radius();
    let grid = CellGrid::build(&crystal.positions, model.box_side, radius);
    let n_outer = model.channel_count - 1;
    let mut claimed = vec![false; crystal.positions.len()];
    let mut count = 0;

    for bus in 0..crystal.positions.len() {
        if crystal.channels[bus] != Some(0) || claimed[bus] {
            continue;
        }
        let bus_pos = crystal.positions[bus];
        let mut picks: Vec<u32> = Vec::with_capacity(n_outer);
        let mut complete = true;
        for outer_channel in 1..=n_outer {
            let mut best: Option<u32> = None;
            grid.for_neighbors(&bus_pos, |cand| {
                let c = cand as usize;
                if claimed[c]
                    || crystal.channels[c] != Some(outer_channel)
                    || !model.coupled(&bus_pos, &crystal.positions[c])
                {
                    return;
                }
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            });
            match best {
                Some(pick) => {
                    claimed[pick as usize] = true;
                    picks.push(pick);
                }
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            claimed[bus] = true;
            count += 1;
        } else {
            for pick in picks {
                claimed[pick as usize] = false;
            }
        }
    }
    count
}

/// Empirical coupling probability: the fraction of (active ion, other
/// channel) pairs for which the ion is coupled to at least one member of
/// that channel.
pub fn estimate_coupling_probability(crystal: &Crystal, model: &CrystalModel) -> f64 {
    let radius = model.coupling_radius();
    let grid = CellGrid::build(&crystal.positions, model.box_side, radius);
    let mut trials = 0u64;
    let mut hits = 0u64;
    for (i, channel) in crystal.channels.iter().enumerate() {
        let Some(own) = channel else { continue };
        let mut reachable = vec![false; model.channel_count];
        grid.for_neighbors(&crystal.positions[i], |cand| {
            let c = cand as usize;
            if c == i {
                return;
            }
            if let Some(k) = crystal.channels[c] {
                if !reachable[k] && model.coupled(&crystal.positions[i], &crystal.positions[c]) {
                    reachable[k] = true;
                }
            }
        });
        for (k, &seen) in reachable.iter().enumerate() {
            if k == *own {
                continue;
            }
            trials += 1;
            if seen {
                hits += 1;
            }
        }
    }
    if trials == 0 {
        0.0
    } else {
        hits as f64 / trials as f64
    }
}

/// Instance counts for one register size across seeds.
#[derive(Clone, Debug)]
pub struct YieldCount {
    pub n: usize,
    pub counts: Vec<usize>,
}

impl YieldCount {
    pub fn mean(&self) -> f64 {
        self.counts.iter().sum::<usize>() as f64 / self.counts.len() as f64
    }
}

/// Result of the yield-scaling experiment.
#[derive(Clone, Debug)]
pub struct YieldResult {
    pub counts: Vec<YieldCount>,
    /// Mean empirical coupling probability over all runs.
    pub estimated_p: f64,
    /// Least-squares slope of log mean count against n.
    pub slope: f64,
    pub log_estimated_p: f64,
    /// True when some register size produced no instances at all; the fit is
    /// not meaningful then and `slope` is zero.
    pub degenerate: bool,
}

/// Run the yield experiment over register sizes and seeds.
///
/// `count(n) ~ p^n` up to an n-independent prefactor, so the fitted slope of
/// `log mean count` against `n` estimates `log p`.
pub fn yield_scaling(
    model: &CrystalModel,
    n_values: &[usize],
    seeds: &[u64],
) -> Result<YieldResult> {
    model.validate()?;
    if n_values.len() < 2 {
        return Err(Error::InvalidExperiment {
            reason: "yield scaling needs at least two register sizes".into(),
        });
    }
    if seeds.is_empty() {
        return Err(Error::InvalidExperiment {
            reason: "yield scaling needs at least one seed".into(),
        });
    }
    if n_values.iter().any(|&n| n < 2) {
        return Err(Error::InvalidExperiment {
            reason: "register sizes must be at least 2".into(),
        });
    }

    let runs: Vec<(usize, u64)> = n_values
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results: Vec<(usize, f64)> = runs
        .par_iter()
        .map(|&(n, seed)| -> Result<(usize, f64)> {
            let model_n = model.with_channel_count(n);
            let crystal = sample_crystal(&model_n, seed)?;
            let count = count_star_instances(&crystal, &model_n);
            let p = estimate_coupling_probability(&crystal, &model_n);
            Ok((count, p))
        })
        .collect::<Result<_>>()?;

    let mut counts = Vec::with_capacity(n_values.len());
    for (block, &n) in n_values.iter().enumerate() {
        let slice = &results[block * seeds.len()..(block + 1) * seeds.len()];
        counts.push(YieldCount {
            n,
            counts: slice.iter().map(|&(c, _)| c).collect(),
        });
    }
    let estimated_p = results.iter().map(|&(_, p)| p).sum::<f64>() / results.len() as f64;

    let degenerate = counts.iter().any(|c| c.mean() == 0.0);
    let slope = if degenerate {
        0.0
    } else {
        // Least squares of y = log mean count against n.
        let pts: Vec<(f64, f64)> = counts.iter().map(|c| (c.n as f64, c.mean().ln())).collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };

    Ok(YieldResult {
        counts,
        log_estimated_p: estimated_p.max(f64::MIN_POSITIVE).ln(),
        estimated_p,
        slope,
        degenerate,
    })
}

/// Threshold that targets a given coupling probability `p` for this model:
/// inverts the Poisson estimate `p = 1 - exp(-rho_channel * (4/3) pi r^3)`.
pub fn threshold_for_target_probability(model: &CrystalModel, p: f64) -> f64 {
    let rho_channel = model.ion_count as f64 * model.channel_probability / model.box_side.powi(3);
    let volume = -(1.0 - p).ln() / rho_channel;
    let r3 = volume * 3.0 / (4.0 * std::f64::consts::PI);
    model.dipole_constant / r3
}
