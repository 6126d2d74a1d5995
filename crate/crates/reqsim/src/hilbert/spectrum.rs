//! Spectral decompositions of Hermitian and unitary operators.
//!
//! The workhorse is a cyclic Jacobi eigensolver for complex Hermitian
//! matrices. Unitary (normal) operators are decomposed by simultaneous
//! diagonalization of their Hermitian and anti-Hermitian parts, which keeps
//! the whole pipeline free of general nonsymmetric eigenvalue machinery. The
//! matrices in scope never exceed a few hundred rows, where Jacobi is both
//! fast enough and very accurate.

use num_complex::Complex64;

use super::operator::Operator;
use super::{HERMITICITY_TOL, UNITARITY_TOL};
use crate::error::{Error, Result};

/// Eigenvalues and an orthonormal eigenbasis of a decomposed operator.
///
/// Columns of `eigenvectors` are the eigenvectors, in the same order as
/// `eigenvalues`. Hermitian decompositions sort eigenvalues ascending (the
/// imaginary parts are exactly zero); unitary decompositions sort by
/// eigenphase ascending in `[0, 2*pi)`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Operator,
}

impl Spectrum {
    /// Decompose a Hermitian operator; rejects inputs beyond the admission
    /// tolerance.
    pub fn hermitian(op: &Operator) -> Result<Self> {
        let dev = op.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                deviation: dev,
                tol: HERMITICITY_TOL,
            });
        }
        Ok(Self::hermitian_unchecked(&op.hermitian_part()))
    }

    /// Decompose without the admission check; the input must already be
    /// Hermitian to working precision.
    pub(crate) fn hermitian_unchecked(op: &Operator) -> Self {
        let (values, vectors) = jacobi_eigh(op);
        Spectrum {
            eigenvalues: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            eigenvectors: vectors,
        }
    }

    /// Decompose a unitary operator into eigenphases and eigenvectors.
    pub fn unitary(op: &Operator) -> Result<Self> {
        let dev = op.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary {
                deviation: dev,
                tol: UNITARITY_TOL,
            });
        }
        let dim = op.dim();
        // U is normal, so the Hermitian and anti-Hermitian parts of any phase
        // rotation e^{-i beta} U commute and share an eigenbasis with U.
        // Diagonalize the Hermitian part first, then split its remaining
        // degenerate eigenspaces with the anti-Hermitian part. The generic
        // rotation angle keeps structured spectra (conjugate eigenphase pairs
        // of real matrices have exactly equal real parts) away from the
        // near-degenerate regime where stage one alone would mix distinct
        // eigenvectors.
        const BETA: f64 = 0.577_215_664_901_532_9;
        let rotated = op.scale(Complex64::new(0.0, -BETA).exp());
        let re = rotated
            .add(&rotated.adjoint())
            .scale(Complex64::new(0.5, 0.0));
        let im = rotated
            .sub(&rotated.adjoint())
            .scale(Complex64::new(0.0, -0.5));
        let (re_vals, mut basis) = jacobi_eigh(&re);

        const GROUP_TOL: f64 = 1e-8;
        let mut start = 0;
        while start < dim {
            let mut end = start + 1;
            while end < dim && (re_vals[end] - re_vals[end - 1]).abs() <= GROUP_TOL {
                end += 1;
            }
            if end - start > 1 {
                split_degenerate_block(&mut basis, &im, start, end);
            }
            start = end;
        }

        // Rayleigh quotients give the eigenvalues; renormalize onto the unit
        // circle to shed residual eigensolver noise.
        let mut pairs: Vec<(f64, usize, Complex64)> = (0..dim)
            .map(|j| {
                let mut lambda = Complex64::new(0.0, 0.0);
                for r in 0..dim {
                    let mut uv = Complex64::new(0.0, 0.0);
                    for c in 0..dim {
                        uv += op.entry(r, c) * basis.entry(c, j);
                    }
                    lambda += basis.entry(r, j).conj() * uv;
                }
                let lambda = lambda / lambda.norm();
                let mut phase = lambda.arg();
                if phase < 0.0 {
                    phase += std::f64::consts::TAU;
                }
                (phase, j, lambda)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

        let mut vectors = Operator::zeros(dim);
        let mut values = Vec::with_capacity(dim);
        for (slot, (_, j, lambda)) in pairs.into_iter().enumerate() {
            values.push(lambda);
            for r in 0..dim {
                vectors.set(r, slot, basis.entry(r, j));
            }
        }
        Ok(Spectrum {
            eigenvalues: values,
            eigenvectors: vectors,
        })
    }

    /// `V diag(lambda) V^dag`; used by the reconstruction invariants.
    pub fn reconstruct(&self) -> Operator {
        let dim = self.eigenvalues.len();
        let mut out = Operator::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..dim {
                    acc += self.eigenvectors.entry(r, m)
                        * self.eigenvalues[m]
                        * self.eigenvectors.entry(c, m).conj();
                }
                out.set(r, c, acc);
            }
        }
        out
    }
}

/// Rotate the columns `start..end` of `basis` so they also diagonalize the
/// restriction of the Hermitian matrix `im`.
fn split_degenerate_block(basis: &mut Operator, im: &Operator, start: usize, end: usize) {
    let dim = basis.dim();
    let k = end - start;
    // B_g = V_g^dag Im V_g
    let mut block = Operator::zeros(k);
    for a in 0..k {
        for b in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..dim {
                let mut mv = Complex64::new(0.0, 0.0);
                for c in 0..dim {
                    mv += im.entry(r, c) * basis.entry(c, start + b);
                }
                acc += basis.entry(r, start + a).conj() * mv;
            }
            block.set(a, b, acc);
        }
    }
    let (_, w) = jacobi_eigh(&block.hermitian_part());
    // V_g <- V_g W
    let mut rotated = vec![Complex64::new(0.0, 0.0); dim * k];
    for r in 0..dim {
        for b in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..k {
                acc += basis.entry(r, start + a) * w.entry(a, b);
            }
            rotated[r * k + b] = acc;
        }
    }
    for r in 0..dim {
        for b in 0..k {
            basis.set(r, start + b, rotated[r * k + b]);
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a complex Hermitian matrix.
///
/// Returns eigenvalues ascending and the matching orthonormal eigenvector
/// columns. Deterministic: fixed sweep order, no pivot randomization.
fn jacobi_eigh(op: &Operator) -> (Vec<f64>, Operator) {
    let dim = op.dim();
    let mut a = op.clone();
    let mut v = Operator::identity(dim);
    if dim == 0 {
        return (Vec::new(), v);
    }

    let scale = op.max_abs().max(1e-300);
    let threshold = scale * 1e-15;
    const MAX_SWEEPS: usize = 60;

    for _ in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off = off.max(a.entry(p, q).norm());
            }
        }
        if off <= threshold {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a.entry(p, q);
                let r = apq.norm();
                if r <= threshold * 1e-2 {
                    continue;
                }
                let alpha = apq / r; // unit-modulus phase of the pivot
                let app = a.entry(p, p).re;
                let aqq = a.entry(q, q).re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // J[p][p] = c, J[p][q] = s, J[q][p] = -s conj(alpha),
                // J[q][q] = c conj(alpha); update A <- J^dag A J, V <- V J.
                let cs = Complex64::new(c, 0.0);
                let ss = Complex64::new(s, 0.0);
                let m_s_ca = -ss * alpha.conj();
                let c_ca = cs * alpha.conj();

                // Column update: M = A J
                for k in 0..dim {
                    let akp = a.entry(k, p);
                    let akq = a.entry(k, q);
                    a.set(k, p, akp * cs + akq * m_s_ca);
                    a.set(k, q, akp * ss + akq * c_ca);
                }
                // Row update: A = J^dag M
                for k in 0..dim {
                    let apk = a.entry(p, k);
                    let aqk = a.entry(q, k);
                    a.set(p, k, apk * cs - aqk * ss * alpha);
                    a.set(q, k, apk * ss + aqk * cs * alpha);
                }
                // Clean the pivot pair and enforce real diagonals.
                a.set(p, q, Complex64::new(0.0, 0.0));
                a.set(q, p, Complex64::new(0.0, 0.0));
                a.set(p, p, Complex64::new(a.entry(p, p).re, 0.0));
                a.set(q, q, Complex64::new(a.entry(q, q).re, 0.0));

                for k in 0..dim {
                    let vkp = v.entry(k, p);
                    let vkq = v.entry(k, q);
                    v.set(k, p, vkp * cs + vkq * m_s_ca);
                    v.set(k, q, vkp * ss + vkq * c_ca);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a.entry(i, i).re.partial_cmp(&a.entry(j, j).re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.entry(i, i).re).collect();
    let mut vectors = Operator::zeros(dim);
    for (slot, &src) in order.iter().enumerate() {
        for r in 0..dim {
            vectors.set(r, slot, v.entry(r, src));
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::RECONSTRUCTION_TOL;
    use crate::testkit;
    use rand::Rng;

    #[test]
    fn hermitian_reconstruction_over_random_matrices() {
        let mut rng = testkit::rng(21);
        for _ in 0..50 {
            let dim = rng.gen_range(2..=16);
            let h = testkit::random_hermitian(dim, &mut rng);
            let spec = Spectrum::hermitian(&h).unwrap();
            assert!(spec.reconstruct().max_abs_diff(&h) < RECONSTRUCTION_TOL);
            assert!(spec.eigenvectors.unitarity_deviation() < 1e-10);
            for w in spec.eigenvalues.windows(2) {
                assert!(w[0].re <= w[1].re);
                assert_eq!(w[0].im, 0.0);
            }
        }
    }

    #[test]
    fn unitary_reconstruction_over_random_matrices() {
        let mut rng = testkit::rng(22);
        for _ in 0..50 {
            let dim = rng.gen_range(2..=16);
            let u = testkit::random_unitary(dim, &mut rng);
            let spec = Spectrum::unitary(&u).unwrap();
            assert!(spec.reconstruct().max_abs_diff(&u) < RECONSTRUCTION_TOL);
            assert!(spec.eigenvectors.unitarity_deviation() < 1e-10);
            for l in &spec.eigenvalues {
                assert!((l.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unitary_with_degenerate_real_parts() {
        // diag(e^{i phi}, e^{-i phi}) has a doubly degenerate Hermitian part;
        // the anti-Hermitian stage must still separate the two phases.
        let phi = 0.7;
        let u = Operator::from_diag(&[
            Complex64::new(0.0, phi).exp(),
            Complex64::new(0.0, -phi).exp(),
        ]);
        let spec = Spectrum::unitary(&u).unwrap();
        assert!(spec.reconstruct().max_abs_diff(&u) < 1e-12);
        let mut phases: Vec<f64> = spec.eigenvalues.iter().map(|l| l.arg()).collect();
        phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((phases[0] + phi).abs() < 1e-12);
        assert!((phases[1] - phi).abs() < 1e-12);
    }

    #[test]
    fn near_mirror_eigenphase_pairs_stay_resolved() {
        // Phases theta and -(theta + eps) have real parts separated by only
        // ~eps*sin(theta); the decomposition must not mix their eigenvectors.
        let mut rng = testkit::rng(23);
        for eps in [0.0, 1e-12, 3e-8, 1e-6] {
            let theta = 0.9;
            let diag = Operator::from_diag(&[
                Complex64::new(0.0, theta).exp(),
                Complex64::new(0.0, -(theta + eps)).exp(),
                Complex64::new(0.0, 0.4).exp(),
            ]);
            let v = testkit::random_unitary(3, &mut rng);
            let u = v.matmul(&diag).matmul(&v.adjoint());
            let spec = Spectrum::unitary(&u).unwrap();
            assert!(
                spec.reconstruct().max_abs_diff(&u) < 1e-10,
                "eps = {eps:.1e}: reconstruction error {:.3e}",
                spec.reconstruct().max_abs_diff(&u)
            );
        }
    }

    #[test]
    fn diagonal_matrix_is_fixed_point() {
        let h = Operator::from_diag(&[
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(2.0, 0.0),
        ]);
        let spec = Spectrum::hermitian(&h).unwrap();
        assert_eq!(spec.eigenvalues[0].re, -1.0);
        assert_eq!(spec.eigenvalues[2].re, 2.0);
        assert!(spec.reconstruct().max_abs_diff(&h) < 1e-14);
    }
}
