//! Worst-case fidelity of a realized propagator against a target unitary.
//!
//! Over the full Hilbert space the worst-case fidelity has a closed form in
//! terms of the eigenphases of `U0^dag U`: writing `dphi_max` for the largest
//! circular gap between sorted eigenphases,
//! `F = cos^2(dphi_max / 2)` when `dphi_max >= pi` and `0` otherwise (the
//! attainable overlaps form a convex polygon with vertices on the unit
//! circle; if it straddles the origin the minimum is zero).
//!
//! Restricted to a subspace the polygon argument generalizes to the numerical
//! range of the restricted operator `M = B^dag U0^dag U B`: the worst case is
//! the squared distance from the origin to `W(M)`, computed by maximizing the
//! support margin `lambda_min(Herm(e^{-i alpha} M))` over the direction
//! `alpha` (a deterministic coarse scan plus golden-section refinement).
//! Leakage out of the subspace shrinks `|<psi|M|psi>|` and therefore counts
//! as a loss of fidelity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{self, Operator, Spectrum, State};

/// Angles in the coarse support-function scan.
const ANGLE_SCAN_POINTS: usize = 256;
/// Golden-section refinement stops below this angular width.
const ANGLE_REFINE_TOL: f64 = 1e-10;
/// Support margins at or below this value count as "origin inside": F = 0.
const ORIGIN_CLAMP: f64 = 1e-12;
/// Tolerance for the projector and subspace-preservation admission checks.
const PROJECTOR_TOL: f64 = 1e-9;

/// Outcome of a worst-case fidelity evaluation.
#[derive(Clone, Debug)]
pub struct FidelityResult {
    /// Worst-case fidelity in [0, 1].
    pub value: f64,
    /// Largest circular eigenphase gap (full-space path only).
    pub max_gap: Option<f64>,
    /// State approximately attaining the minimum (subspace path only);
    /// normalized and lying in the declared subspace.
    pub witness: Option<State>,
}

/// Largest circular gap between the sorted eigenphases of a unitary,
/// including the wrap-around gap `2 pi + phi_1 - phi_n`.
pub fn eigenphase_max_gap(u: &Operator) -> Result<f64> {
    let phases = hilbert::eigenphases(u)?;
    Ok(max_circular_gap(&phases))
}

/// Largest circular gap of an already sorted phase list in [0, 2 pi).
pub(crate) fn max_circular_gap(sorted_phases: &[f64]) -> f64 {
    let n = sorted_phases.len();
    let mut gap = std::f64::consts::TAU + sorted_phases[0] - sorted_phases[n - 1];
    for w in sorted_phases.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

/// Worst-case fidelity over the whole space, via the eigenphase-gap closed
/// form on `u0^dag u`.
pub fn full_space_worst_fidelity(u0: &Operator, u: &Operator) -> Result<FidelityResult> {
    if u0.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            left: u0.dim(),
            right: u.dim(),
        });
    }
    let m = u0.adjoint().matmul(u);
    let gap = eigenphase_max_gap(&m)?;
    let value = if gap >= std::f64::consts::PI {
        let c = (gap / 2.0).cos();
        (c * c).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(FidelityResult {
        value,
        max_gap: Some(gap),
        witness: None,
    })
}

/// Worst-case fidelity restricted to a subspace:
/// `F = min over unit psi in range(P) of |<psi| u0^dag u |psi>|^2`.
///
/// `subspace` must be an orthogonal projector and `u0` must map its range to
/// itself. The witness of the returned result approximately attains the
/// minimum.
pub fn subspace_worst_fidelity(
    u0: &Operator,
    u: &Operator,
    subspace: &Operator,
) -> Result<FidelityResult> {
    if u0.dim() != u.dim() || u0.dim() != subspace.dim() {
        return Err(Error::DimensionMismatch {
            left: u0.dim(),
            right: u.dim().max(subspace.dim()),
        });
    }
    let basis = projector_basis(subspace)?;
    check_subspace_preserved(u0, subspace)?;
    let m = restrict_to_basis(&u0.adjoint().matmul(u), &basis);
    let dim = u0.dim();

    let (margin, witness_sub) = support_distance(&m);
    let value = if margin <= ORIGIN_CLAMP {
        0.0
    } else {
        (margin * margin).clamp(0.0, 1.0)
    };

    // Lift the witness back to the full space.
    let mut witness: State = State::zeros(dim);
    for (col, bcol) in basis.iter().enumerate() {
        for r in 0..dim {
            witness[r] += bcol[r] * witness_sub[col];
        }
    }
    let nrm = hilbert::norm(&witness);
    witness.mapv_inplace(|v| v / nrm);

    Ok(FidelityResult {
        value,
        max_gap: None,
        witness: Some(witness),
    })
}

/// Monte Carlo upper bound on the subspace worst-case fidelity: the minimum
/// of `|<psi| u0^dag u |psi>|^2` over seeded Haar-random states in the
/// subspace, each refined by projected gradient descent on the unit sphere.
/// Converges to the true minimum from above as `n_samples` grows.
pub fn brute_force_worst_fidelity(
    u0: &Operator,
    u: &Operator,
    subspace: &Operator,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::InvalidExperiment {
            reason: "n_samples must be at least 1".into(),
        });
    }
    if u0.dim() != u.dim() || u0.dim() != subspace.dim() {
        return Err(Error::DimensionMismatch {
            left: u0.dim(),
            right: u.dim().max(subspace.dim()),
        });
    }
    let basis = projector_basis(subspace)?;
    let k = basis.len();
    // Restrict once; the search runs in the k-dimensional coordinates.
    let m = restrict_to_basis(&u0.adjoint().matmul(u), &basis);
    let madj = m.adjoint();

    let overlap_sq = |psi: &[Complex64]| -> f64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (r, p) in psi.iter().enumerate() {
            let mut mv = Complex64::new(0.0, 0.0);
            for (c, q) in psi.iter().enumerate() {
                mv += m.entry(r, c) * q;
            }
            z += p.conj() * mv;
        }
        z.norm_sqr()
    };

    let mut rng = crate::testkit::rng(seed);
    let mut best = f64::INFINITY;
    for _ in 0..n_samples {
        let mut psi: Vec<Complex64> = (0..k)
            .map(|_| crate::testkit::random_complex(&mut rng))
            .collect();
        normalize(&mut psi);
        let mut f = overlap_sq(&psi);
        let mut step = 0.3;
        for _ in 0..400 {
            // grad_{psi*} |z|^2 = conj(z) M psi + z M^dag psi
            let mut z = Complex64::new(0.0, 0.0);
            let mut mpsi = vec![Complex64::new(0.0, 0.0); k];
            let mut madj_psi = vec![Complex64::new(0.0, 0.0); k];
            for r in 0..k {
                for (c, q) in psi.iter().enumerate() {
                    mpsi[r] += m.entry(r, c) * q;
                    madj_psi[r] += madj.entry(r, c) * q;
                }
            }
            for (p, mp) in psi.iter().zip(&mpsi) {
                z += p.conj() * mp;
            }
            let mut grad: Vec<Complex64> = (0..k)
                .map(|r| z.conj() * mpsi[r] + z * madj_psi[r])
                .collect();
            // Project onto the tangent space of the sphere.
            let overlap: Complex64 = psi.iter().zip(grad.iter()).map(|(p, g)| p.conj() * g).sum();
            for (g, p) in grad.iter_mut().zip(psi.iter()) {
                *g -= overlap * p;
            }
            let gnorm: f64 = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
            if gnorm < 1e-13 {
                break;
            }
            let mut advanced = false;
            while step > 1e-14 {
                let mut cand: Vec<Complex64> = psi
                    .iter()
                    .zip(grad.iter())
                    .map(|(p, g)| p - g * step)
                    .collect();
                normalize(&mut cand);
                let fc = overlap_sq(&cand);
                if fc < f - 1e-18 {
                    psi = cand;
                    f = fc;
                    step *= 1.5;
                    advanced = true;
                    break;
                }
                step *= 0.5;
            }
            if !advanced {
                break;
            }
        }
        best = best.min(f);
    }
    Ok(best.clamp(0.0, 1.0))
}

fn normalize(psi: &mut [Complex64]) {
    let nrm: f64 = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for v in psi.iter_mut() {
        *v /= nrm;
    }
}

/// `B^dag M B` for an orthonormal column set `B`.
fn restrict_to_basis(m_full: &Operator, basis: &[Vec<Complex64>]) -> Operator {
    let k = basis.len();
    let dim = m_full.dim();
    let mut m = Operator::zeros(k);
    for (col, bcol) in basis.iter().enumerate() {
        let mut image = vec![Complex64::new(0.0, 0.0); dim];
        for (r, img) in image.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, b) in bcol.iter().enumerate() {
                acc += m_full.entry(r, c) * b;
            }
            *img = acc;
        }
        for (row, brow) in basis.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, img) in brow.iter().zip(&image) {
                acc += b.conj() * img;
            }
            m.set(row, col, acc);
        }
    }
    m
}

/// Orthonormal basis of the range of an orthogonal projector.
fn projector_basis(p: &Operator) -> Result<Vec<Vec<Complex64>>> {
    let herm_dev = p.hermiticity_deviation();
    let idem_dev = p.matmul(p).max_abs_diff(p);
    let dev = herm_dev.max(idem_dev);
    if dev > PROJECTOR_TOL {
        return Err(Error::NotProjector { deviation: dev });
    }
    let dim = p.dim();
    // Exactly-diagonal projectors (the usual case here) read off directly.
    let mut off_diag: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                off_diag = off_diag.max(p.entry(i, j).norm());
            }
        }
    }
    let basis: Vec<Vec<Complex64>> = if off_diag < 1e-14 {
        (0..dim)
            .filter(|&i| p.entry(i, i).re > 0.5)
            .map(|i| {
                let mut e = vec![Complex64::new(0.0, 0.0); dim];
                e[i] = Complex64::new(1.0, 0.0);
                e
            })
            .collect()
    } else {
        let spec = Spectrum::hermitian(p)?;
        (0..dim)
            .filter(|&j| spec.eigenvalues[j].re > 0.5)
            .map(|j| (0..dim).map(|r| spec.eigenvectors.entry(r, j)).collect())
            .collect()
    };
    if basis.is_empty() {
        return Err(Error::NotProjector { deviation: 1.0 });
    }
    Ok(basis)
}

/// Error if `u0` maps the range of `p` outside itself.
fn check_subspace_preserved(u0: &Operator, p: &Operator) -> Result<()> {
    // leakage = max-abs of (I - P) U0 P
    let dim = u0.dim();
    let u0p = u0.matmul(p);
    let pu0p = p.matmul(&u0p);
    let mut leak: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            leak = leak.max((u0p.entry(i, j) - pu0p.entry(i, j)).norm());
        }
    }
    if leak > PROJECTOR_TOL {
        return Err(Error::SubspaceNotPreserved { leakage: leak });
    }
    Ok(())
}

/// Distance from the origin to the numerical range of `m` (signed support
/// margin; may be negative when the origin is inside), together with the
/// minimizing state at the optimal direction.
fn support_distance(m: &Operator) -> (f64, Vec<Complex64>) {
    let margin = |alpha: f64| -> f64 { herm_min_eigenvalue(&rotated_herm(m, alpha)) };
    let mut best_alpha = 0.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..ANGLE_SCAN_POINTS {
        let alpha = std::f64::consts::TAU * k as f64 / ANGLE_SCAN_POINTS as f64;
        let v = margin(alpha);
        if v > best {
            best = v;
            best_alpha = alpha;
        }
    }
    let half_window = std::f64::consts::TAU / ANGLE_SCAN_POINTS as f64;
    let (mut lo, mut hi) = (best_alpha - half_window, best_alpha + half_window);
    let golden = 0.5 * (3.0 - 5.0_f64.sqrt());
    let mut x1 = lo + golden * (hi - lo);
    let mut x2 = hi - golden * (hi - lo);
    let (mut f1, mut f2) = (margin(x1), margin(x2));
    while hi - lo > ANGLE_REFINE_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - golden * (hi - lo);
            f2 = margin(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + golden * (hi - lo);
            f1 = margin(x1);
        }
    }
    let alpha_star = 0.5 * (lo + hi);
    let h = rotated_herm(m, alpha_star);
    let spec = Spectrum::hermitian_unchecked(&h);
    let k = m.dim();
    let d = spec.eigenvalues[0].re.max(best);

    // Witness: a state in the bottom eigenspace of H whose overlap lies at
    // the supporting point nearest the origin. For a curved boundary the
    // eigenspace is one-dimensional; for a flat edge (normal M, polygonal
    // range) it is degenerate and the nearest point sits between the two
    // extreme expectations of the orthogonal component K, so those are mixed
    // to cancel the tangential part.
    let lambda0 = spec.eigenvalues[0].re;
    let degenerate: Vec<usize> = (0..k)
        .filter(|&j| spec.eigenvalues[j].re - lambda0 <= 1e-9)
        .collect();
    let witness: Vec<Complex64> = if degenerate.len() == 1 {
        (0..k).map(|r| spec.eigenvectors.entry(r, 0)).collect()
    } else {
        // K = (e^{-i a} M - e^{i a} M^dag) / (2i), restricted to the
        // degenerate eigenspace.
        let phase = Complex64::new(0.0, -alpha_star).exp();
        let s = degenerate.len();
        let mut k_sub = Operator::zeros(s);
        for (r, &jr) in degenerate.iter().enumerate() {
            for (c, &jc) in degenerate.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..k {
                    for y in 0..k {
                        let kxy = (phase * m.entry(x, y) - (phase * m.entry(y, x)).conj())
                            / Complex64::new(0.0, 2.0);
                        acc += spec.eigenvectors.entry(x, jr).conj()
                            * kxy
                            * spec.eigenvectors.entry(y, jc);
                    }
                }
                k_sub.set(r, c, acc);
            }
        }
        let kspec = Spectrum::hermitian_unchecked(&k_sub.hermitian_part());
        let kappa_min = kspec.eigenvalues[0].re;
        let kappa_max = kspec.eigenvalues[s - 1].re;
        let (w_lo, w_hi) = if kappa_min <= 0.0 && kappa_max >= 0.0 && kappa_max > kappa_min {
            // Mix the extreme eigenvectors so the tangential component
            // cancels exactly.
            (
                (kappa_max / (kappa_max - kappa_min)).sqrt(),
                (-kappa_min / (kappa_max - kappa_min)).sqrt(),
            )
        } else if kappa_min.abs() <= kappa_max.abs() {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        // Lift kappa eigenvectors back through the degenerate eigenspace.
        let lift = |kcol: usize, r: usize| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, &jx) in degenerate.iter().enumerate() {
                acc += spec.eigenvectors.entry(r, jx) * kspec.eigenvectors.entry(x, kcol);
            }
            acc
        };
        (0..k)
            .map(|r| lift(0, r) * w_lo + lift(s - 1, r) * w_hi)
            .collect()
    };
    (d, witness)
}

/// `Herm(e^{-i alpha} M)`.
fn rotated_herm(m: &Operator, alpha: f64) -> Operator {
    let phase = Complex64::new(0.0, -alpha).exp();
    let k = m.dim();
    let mut h = Operator::zeros(k);
    for i in 0..k {
        for j in 0..k {
            let v = 0.5 * (phase * m.entry(i, j) + (phase * m.entry(j, i)).conj());
            h.set(i, j, v);
        }
    }
    h
}

fn herm_min_eigenvalue(h: &Operator) -> f64 {
    let spec = Spectrum::hermitian_unchecked(h);
    spec.eigenvalues[0].re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    #[test]
    fn max_gap_spot_values() {
        let gap = eigenphase_max_gap(&Operator::identity(4)).unwrap();
        assert!((gap - TAU).abs() < 1e-10);

        let d = Operator::from_diag(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, FRAC_PI_2).exp(),
        ]);
        assert!((eigenphase_max_gap(&d).unwrap() - 1.5 * PI).abs() < 1e-10);

        let thirds = Operator::from_diag(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, TAU / 3.0).exp(),
            Complex64::new(0.0, 2.0 * TAU / 3.0).exp(),
        ]);
        assert!((eigenphase_max_gap(&thirds).unwrap() - TAU / 3.0).abs() < 1e-10);
    }

    #[test]
    fn full_space_spot_values() {
        let mut rng = testkit::rng(51);
        let u = testkit::random_unitary(5, &mut rng);
        let r = full_space_worst_fidelity(&u, &u).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!((r.max_gap.unwrap() - TAU).abs() < 1e-9);

        // diag(1, -1): antipodal chord through the origin.
        let i2 = Operator::identity(2);
        let z = Operator::from_diag(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let r = full_space_worst_fidelity(&i2, &z).unwrap();
        assert!(r.value.abs() < 1e-12);

        // diag(1, i): F = 1/2.
        let s = Operator::from_diag(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let r = full_space_worst_fidelity(&i2, &s).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_polygon_oracle() {
        let mut rng = testkit::rng(52);
        for _ in 0..40 {
            let dim = rng.gen_range(2..=8);
            let phases: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..TAU)).collect();
            let diag: Vec<Complex64> = phases
                .iter()
                .map(|&p| Complex64::new(0.0, p).exp())
                .collect();
            let u = Operator::from_diag(&diag);
            let f = full_space_worst_fidelity(&Operator::identity(dim), &u)
                .unwrap()
                .value;
            let oracle = testkit::polygon_min_overlap(&phases);
            assert!(
                (f - oracle).abs() < 1e-8,
                "dim {dim}: closed form {f} vs polygon {oracle}"
            );
        }
    }

    #[test]
    fn subspace_agrees_with_full_space_on_trivial_projector() {
        let mut rng = testkit::rng(53);
        for _ in 0..20 {
            let dim = rng.gen_range(2..=6);
            let u0 = testkit::random_unitary(dim, &mut rng);
            let u = testkit::random_unitary(dim, &mut rng);
            let full = full_space_worst_fidelity(&u0, &u).unwrap().value;
            let sub = subspace_worst_fidelity(&u0, &u, &Operator::identity(dim))
                .unwrap()
                .value;
            assert!(
                (full - sub).abs() < 1e-8,
                "dim {dim}: full {full} vs subspace {sub}"
            );
        }
    }

    #[test]
    fn witness_attains_the_reported_value() {
        let mut rng = testkit::rng(54);
        for _ in 0..10 {
            let dim = rng.gen_range(2..=6);
            let u0 = testkit::random_unitary(dim, &mut rng);
            let u = testkit::random_unitary(dim, &mut rng);
            let r = subspace_worst_fidelity(&u0, &u, &Operator::identity(dim)).unwrap();
            let w = r.witness.unwrap();
            assert!((hilbert::norm(&w) - 1.0).abs() < 1e-12);
            if r.value > 0.0 {
                let m = u0.adjoint().matmul(&u);
                let z = hilbert::inner(&w, &m.apply(&w));
                assert!(
                    (z.norm_sqr() - r.value).abs() < 1e-6,
                    "witness overlap {} vs value {}",
                    z.norm_sqr(),
                    r.value
                );
            }
        }
    }

    #[test]
    fn monotone_under_restriction_and_phase_invariant() {
        let mut rng = testkit::rng(55);
        for _ in 0..10 {
            let dim = 6;
            // Diagonal target preserves any coordinate subspace.
            let phases: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(0.0, rng.gen_range(0.0..TAU)).exp())
                .collect();
            let u0 = Operator::from_diag(&phases);
            let u = testkit::random_unitary(dim, &mut rng);
            let full = full_space_worst_fidelity(&u0, &u).unwrap().value;
            let mut p = Operator::zeros(dim);
            for i in 0..3 {
                p.set(i, i, Complex64::new(1.0, 0.0));
            }
            let sub = subspace_worst_fidelity(&u0, &u, &p).unwrap().value;
            assert!(sub >= full - 1e-9, "sub {sub} vs full {full}");

            let alpha = Complex64::new(0.0, rng.gen_range(0.0..TAU)).exp();
            let sub_phase = subspace_worst_fidelity(&u0, &u.scale(alpha), &p)
                .unwrap()
                .value;
            assert!((sub - sub_phase).abs() < 1e-10);
            let full_phase = full_space_worst_fidelity(&u0, &u.scale(alpha))
                .unwrap()
                .value;
            assert!((full - full_phase).abs() < 1e-10);
        }
    }

    #[test]
    fn angle_scan_is_converged_at_default_resolution() {
        // Doubling the coarse scan cannot move the refined optimum at the
        // reported precision.
        let mut rng = testkit::rng(56);
        for _ in 0..5 {
            let dim = 4;
            let u0 = testkit::random_unitary(dim, &mut rng);
            let u = testkit::random_unitary(dim, &mut rng);
            let m = u0.adjoint().matmul(&u);
            let (d, _) = support_distance(&m);
            // Re-run with a denser scan.
            let mut best = f64::NEG_INFINITY;
            for k in 0..(2 * ANGLE_SCAN_POINTS) {
                let alpha = TAU * k as f64 / (2 * ANGLE_SCAN_POINTS) as f64;
                best = best.max(herm_min_eigenvalue(&rotated_herm(&m, alpha)));
            }
            let f_default = if d <= ORIGIN_CLAMP { 0.0 } else { d * d };
            let f_dense = if best <= ORIGIN_CLAMP {
                0.0
            } else {
                best * best
            };
            assert!(
                f_dense - f_default < 1e-8,
                "dense {f_dense} vs default {f_default}"
            );
        }
    }

    #[test]
    fn brute_force_bounds_and_matches() {
        let mut rng = testkit::rng(57);
        for _ in 0..8 {
            let dim = 4;
            let u0 = testkit::random_unitary(dim, &mut rng);
            let u = testkit::random_unitary(dim, &mut rng);
            let p = Operator::identity(dim);
            let exact = full_space_worst_fidelity(&u0, &u).unwrap().value;
            let sub = subspace_worst_fidelity(&u0, &u, &p).unwrap().value;
            let brute = brute_force_worst_fidelity(&u0, &u, &p, 200, 7).unwrap();
            assert!(brute >= sub - 1e-7, "brute {brute} below exact {sub}");
            assert!(
                (brute - exact).abs() < 1e-4,
                "brute {brute} vs exact {exact}"
            );
        }
        // On u0^dag u = I the overlap is 1 for every state.
        let u = testkit::random_unitary(3, &mut rng);
        let brute = brute_force_worst_fidelity(&u, &u, &Operator::identity(3), 5, 1).unwrap();
        assert!((brute - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_diagonal_projectors_are_supported() {
        // Rotate a coordinate projector and its diagonal target by a random
        // unitary: the worst-case fidelity is basis-independent.
        let mut rng = testkit::rng(59);
        for _ in 0..5 {
            let dim = 5;
            let (_, d0) = testkit::random_diagonal_unitary(dim, &mut rng);
            let u = testkit::random_unitary(dim, &mut rng);
            let mut p = Operator::zeros(dim);
            for i in 0..3 {
                p.set(i, i, Complex64::new(1.0, 0.0));
            }
            let f_plain = subspace_worst_fidelity(&d0, &u, &p).unwrap().value;

            let v = testkit::random_unitary(dim, &mut rng);
            let rot = |a: &Operator| v.matmul(a).matmul(&v.adjoint());
            let f_rotated = subspace_worst_fidelity(&rot(&d0), &rot(&u), &rot(&p))
                .unwrap()
                .value;
            assert!(
                (f_plain - f_rotated).abs() < 1e-8,
                "plain {f_plain} vs rotated {f_rotated}"
            );
        }
    }

    #[test]
    fn rejects_bad_subspace_inputs() {
        let mut rng = testkit::rng(58);
        let u = testkit::random_unitary(3, &mut rng);
        let not_proj = Operator::identity(3).scale(Complex64::new(0.5, 0.0));
        assert!(matches!(
            subspace_worst_fidelity(&u, &u, &not_proj),
            Err(Error::NotProjector { .. })
        ));

        // A target that rotates the subspace out of itself.
        let mut p = Operator::zeros(3);
        p.set(0, 0, Complex64::new(1.0, 0.0));
        let mut x01 = Operator::zeros(3);
        x01.set(0, 1, Complex64::new(1.0, 0.0));
        x01.set(1, 0, Complex64::new(1.0, 0.0));
        x01.set(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(
            subspace_worst_fidelity(&x01, &u, &p),
            Err(Error::SubspaceNotPreserved { .. })
        ));
    }
}
