//! Seeded random inputs and independent oracles for the validation suites.
//!
//! Everything here is deliberately independent of the production code paths
//! it is used to check: the polygon oracle works from plane geometry, the
//! random unitaries come from Gram-Schmidt rather than any propagator route.
//! The `selftest` command and the test suites share these helpers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hilbert::{Operator, State};

/// Deterministic RNG for a seed; fixed algorithm so streams never change
/// across platforms or releases.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent per-item stream from a master seed, so work items
/// can run in any order or in parallel with identical results.
pub fn derived_rng(master_seed: u64, item: u64) -> ChaCha8Rng {
    // SplitMix64 over (seed, item); decorrelates consecutive items.
    let mut z = master_seed ^ item.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

/// Standard normal sample via Box-Muller.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Complex standard normal (real and imaginary parts independent normals).
pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> Operator {
    let mut h = Operator::zeros(dim);
    for i in 0..dim {
        h.set(i, i, Complex64::new(standard_normal(rng), 0.0));
        for j in (i + 1)..dim {
            let v = random_complex(rng) * 0.5_f64.sqrt();
            h.set(i, j, v);
            h.set(j, i, v.conj());
        }
    }
    h
}

/// Haar-distributed random unitary via Gram-Schmidt of a Ginibre matrix
/// (with re-orthogonalization for numerical safety).
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> Operator {
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| random_complex(rng)).collect())
        .collect();
    for j in 0..dim {
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex64 = cols[k]
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let prev: Vec<Complex64> = cols[k].clone();
                for (v, p) in cols[j].iter_mut().zip(&prev) {
                    *v -= proj * p;
                }
            }
        }
        let nrm: f64 = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= nrm;
        }
    }
    let mut u = Operator::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            u.set(i, j, *v);
        }
    }
    u
}

/// Haar-random unit state vector.
pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> State {
    let mut psi: State = (0..dim).map(|_| random_complex(rng)).collect();
    let nrm = crate::hilbert::norm(&psi);
    psi.mapv_inplace(|v| v / nrm);
    psi
}

/// Random diagonal unitary together with its phase list (each in [0, 2 pi)).
pub fn random_diagonal_unitary<R: Rng>(dim: usize, rng: &mut R) -> (Vec<f64>, Operator) {
    let phases: Vec<f64> = (0..dim)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    let diag: Vec<Complex64> = phases
        .iter()
        .map(|&p| Complex64::new(0.0, p).exp())
        .collect();
    (phases, Operator::from_diag(&diag))
}

/// Independent oracle for the worst-case fidelity of a unitary with the given
/// eigenphases: `min over probability vectors p of |sum_j p_j e^{i phi_j}|^2`.
///
/// The attainable set is the convex polygon spanned by the points
/// `e^{i phi_j}` on the unit circle, so the minimum is the squared distance
/// from the origin to that polygon. Computed geometrically: an angular grid
/// (with golden-section refinement) decides whether the origin is inside; if
/// it is not, the distance is the minimum over all point pairs of the
/// origin-to-segment distance.
pub fn polygon_min_overlap(phases: &[f64]) -> f64 {
    assert!(!phases.is_empty());
    let points: Vec<Complex64> = phases
        .iter()
        .map(|&p| Complex64::new(0.0, p).exp())
        .collect();

    // Support test: the origin lies outside the polygon iff some direction
    // has all points strictly on its positive side.
    let margin = |alpha: f64| -> f64 {
        let dir = Complex64::new(0.0, -alpha).exp();
        points
            .iter()
            .map(|z| (dir * z).re)
            .fold(f64::INFINITY, f64::min)
    };
    let coarse = 4096;
    let mut best_alpha = 0.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..coarse {
        let alpha = std::f64::consts::TAU * k as f64 / coarse as f64;
        let m = margin(alpha);
        if m > best {
            best = m;
            best_alpha = alpha;
        }
    }
    // Golden-section refinement of the support margin around the best angle.
    let golden = 0.5 * (3.0 - 5.0_f64.sqrt());
    let (mut lo, mut hi) = (
        best_alpha - std::f64::consts::TAU / coarse as f64,
        best_alpha + std::f64::consts::TAU / coarse as f64,
    );
    let mut x1 = lo + golden * (hi - lo);
    let mut x2 = hi - golden * (hi - lo);
    let (mut f1, mut f2) = (margin(x1), margin(x2));
    while hi - lo > 1e-12 {
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
    let supported = margin(0.5 * (lo + hi)).max(best);
    if supported <= 1e-12 {
        return 0.0;
    }

    // Origin outside: minimum distance is attained on an edge or vertex of
    // the hull, all of which are covered by the pairwise segments.
    let mut d2 = points
        .iter()
        .map(|z| z.norm_sqr())
        .fold(f64::INFINITY, f64::min);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            d2 = d2.min(segment_distance_sq(points[i], points[j]));
        }
    }
    d2
}

/// Squared distance from the origin to the segment [a, b].
fn segment_distance_sq(a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a.norm_sqr();
    }
    // Projection parameter of the origin onto the segment, clamped.
    let t = (-(a.re * ab.re + a.im * ab.im) / len2).clamp(0.0, 1.0);
    let p = a + ab * t;
    p.norm_sqr()
}
