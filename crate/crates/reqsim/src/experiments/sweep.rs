//! Worst-case CPS fidelity over a (detuning, Rabi-ratio) grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fidelity::subspace_worst_fidelity;
use crate::gates::{simple_cps, symmetrized_cps};
use crate::ionmodel::{ideal_cps_target, ChannelId, Instance};
use crate::pulses::ExpansionPolicy;

/// Which controlled-phase-shift implementation a sweep evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpsVariant {
    /// The bare three-pulse gate.
    Simple,
    /// The phase-compensated twelve-pulse gate.
    Symmetrized,
    /// The phase-compensated gate with every pulse replaced by its BB1
    /// composite.
    SymmetrizedBb1,
}

impl CpsVariant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "simple" => Some(Self::Simple),
            "symmetrized" => Some(Self::Symmetrized),
            "symmetrized_bb1" => Some(Self::SymmetrizedBb1),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Simple => "simple",
            Self::Symmetrized => "symmetrized",
            Self::SymmetrizedBb1 => "symmetrized_bb1",
        }
    }
}

impl std::fmt::Display for CpsVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Grid of (delta, omega) points swept at fixed coupling for one variant.
#[derive(Clone, Debug)]
pub struct SweepGrid {
    /// Detunings delta/Omega_0, identical on both ions.
    pub delta_values: Vec<f64>,
    /// Rabi ratios Omega/Omega_0, identical on both ions.
    pub omega_values: Vec<f64>,
    /// Dipole coupling g_12 in units of Omega_0.
    pub coupling: f64,
    pub variant: CpsVariant,
}

impl SweepGrid {
    /// Default grid for a variant at coupling `g`: delta in [-0.05, 0.05]
    /// step 0.0025; omega in [0.85, 1.15] step 0.005 for the composite
    /// variants and the narrower [0.97, 1.03] for the simple gate.
    pub fn default_for(variant: CpsVariant, g: f64) -> Self {
        let delta_values = range_inclusive(-0.05, 0.05, 0.0025);
        let omega_values = match variant {
            CpsVariant::Simple => range_inclusive(0.97, 1.03, 0.005),
            _ => range_inclusive(0.85, 1.15, 0.005),
        };
        Self {
            delta_values,
            omega_values,
            coupling: g,
            variant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_values.is_empty() || self.omega_values.is_empty() {
            return Err(Error::InvalidExperiment {
                reason: "sweep grids must be non-empty".into(),
            });
        }
        let finite = self
            .delta_values
            .iter()
            .chain(self.omega_values.iter())
            .all(|v| v.is_finite());
        if !finite || !self.coupling.is_finite() {
            return Err(Error::NonFinite {
                context: "sweep grid",
            });
        }
        if self.omega_values.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidExperiment {
                reason: "omega ratios must be positive".into(),
            });
        }
        Ok(())
    }
}

/// `min + k step` for k = 0..=round((max-min)/step); endpoints land exactly
/// on the count so grids are reproducible.
pub fn range_inclusive(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step).round() as usize;
    (0..=n).map(|k| min + k as f64 * step).collect()
}

/// One evaluated grid point.
#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub delta: f64,
    pub omega: f64,
    pub fidelity: f64,
}

/// Worst-case fidelity of one CPS realization against the ideal target on
/// the two-qubit computational subspace.
pub fn cps_worst_fidelity(delta: f64, omega: f64, g: f64, variant: CpsVariant) -> Result<f64> {
    let instance = Instance::detuned_pair(delta, omega, g);
    let (i, j) = (ChannelId(0), ChannelId(1));
    let gate = match variant {
        CpsVariant::Simple => simple_cps(i, j)?,
        CpsVariant::Symmetrized => symmetrized_cps(i, j)?,
        CpsVariant::SymmetrizedBb1 => symmetrized_cps(i, j)?.expand(ExpansionPolicy::Bb1)?,
    };
    let realized = gate.propagator(&instance)?;
    let target = ideal_cps_target(&instance, i, j)?;
    let projector = instance.qubit_projector(&[i, j])?;
    Ok(subspace_worst_fidelity(&target, &realized, &projector)?.value)
}

/// Evaluate the whole grid. Rows are emitted in row-major order (delta
/// slowest); grid points are independent and evaluated in parallel.
pub fn sweep_cps_fidelity(grid: &SweepGrid) -> Result<Vec<SweepPoint>> {
    grid.validate()?;
    let points: Vec<(f64, f64)> = grid
        .delta_values
        .iter()
        .flat_map(|&d| grid.omega_values.iter().map(move |&w| (d, w)))
        .collect();
    points
        .par_iter()
        .map(|&(delta, omega)| {
            Ok(SweepPoint {
                delta,
                omega,
                fidelity: cps_worst_fidelity(delta, omega, grid.coupling, grid.variant)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shapes() {
        let g = SweepGrid::default_for(CpsVariant::SymmetrizedBb1, 100.0);
        assert_eq!(g.delta_values.len(), 41);
        assert_eq!(g.omega_values.len(), 61);
        assert!((g.delta_values[0] + 0.05).abs() < 1e-15);
        assert!((g.delta_values[40] - 0.05).abs() < 1e-12);
        let s = SweepGrid::default_for(CpsVariant::Simple, 100.0);
        assert_eq!(s.omega_values.len(), 13);
    }

    #[test]
    fn point_values_near_origin() {
        // Headline point: composite gate at the nominal parameters.
        let f = cps_worst_fidelity(0.0, 1.0, 100.0, CpsVariant::SymmetrizedBb1).unwrap();
        assert!(f >= 0.999, "composite at origin: {f}");

        // Composite tolerates a 10% coupling error.
        let f = cps_worst_fidelity(0.0, 1.10, 100.0, CpsVariant::SymmetrizedBb1).unwrap();
        assert!(f >= 0.999, "composite at 10% amplitude error: {f}");

        // The simple gate does not.
        let f = cps_worst_fidelity(0.0, 1.10, 100.0, CpsVariant::Simple).unwrap();
        assert!(f < 0.999, "simple at 10% amplitude error: {f}");
    }

    #[test]
    fn detuning_residual_pins_the_composite_contour() {
        // The pi(phi)/pi(phi+pi) pairs inside the symmetrized sequence leave
        // a first-order residual rotation ~4*delta at detuning delta, so the
        // composite gate's fidelity falls quadratically along the delta axis
        // and crosses 0.999 near |delta| ~ 0.009.
        let f_001 = cps_worst_fidelity(0.01, 1.0, 100.0, CpsVariant::SymmetrizedBb1).unwrap();
        let f_002 = cps_worst_fidelity(0.02, 1.0, 100.0, CpsVariant::SymmetrizedBb1).unwrap();
        assert!((0.9985..0.9990).contains(&f_001), "F(0.01) = {f_001:.6}");
        assert!((0.9950..0.9958).contains(&f_002), "F(0.02) = {f_002:.6}");
        // Quadratic infidelity in delta: 4x between the two points.
        let ratio = (1.0 - f_002) / (1.0 - f_001);
        assert!((3.2..4.8).contains(&ratio), "ratio {ratio:.2}");
    }

    #[test]
    fn sweep_rows_are_row_major() {
        let grid = SweepGrid {
            delta_values: vec![-0.01, 0.01],
            omega_values: vec![0.99, 1.0, 1.01],
            coupling: 100.0,
            variant: CpsVariant::Simple,
        };
        let rows = sweep_cps_fidelity(&grid).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[0].delta, rows[0].omega), (-0.01, 0.99));
        assert_eq!((rows[1].delta, rows[1].omega), (-0.01, 1.0));
        assert_eq!((rows[3].delta, rows[3].omega), (0.01, 0.99));
    }

    #[test]
    fn variant_parsing_round_trips() {
        for v in [
            CpsVariant::Simple,
            CpsVariant::Symmetrized,
            CpsVariant::SymmetrizedBb1,
        ] {
            assert_eq!(CpsVariant::parse(v.as_str()), Some(v));
        }
        assert_eq!(CpsVariant::parse("bogus"), None);
    }
}
