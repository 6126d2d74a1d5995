//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Everything here works on [`Operator`], a dense square complex matrix with
//! its dimension carried along. The module provides the Kronecker/embedding
//! machinery used to build multi-ion operators, exact unitary propagators of
//! Hermitian generators, spectral decompositions, and the global-phase
//! comparison metric.
//!
//! Propagators are computed from the spectral decomposition of the (small)
//! Hermitian generator, never from a truncated series, so the results are
//! exact up to eigensolver tolerance and unitary by construction.

mod operator;
mod spectrum;

pub use operator::Operator;
pub use spectrum::Spectrum;

use ndarray::Array1;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Admission tolerance (max-abs) for Hermitian inputs.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Admission tolerance (max-abs) for unitary inputs.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Tolerance on spectral reconstruction `V diag(lambda) V^dag = A`.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

/// A pure state as a dense amplitude vector.
pub type State = Array1<Complex64>;

/// Computational basis state `|index>` of an `dim`-dimensional space.
pub fn basis_state(dim: usize, index: usize) -> State {
    let mut psi = Array1::zeros(dim);
    psi[index] = Complex64::new(1.0, 0.0);
    psi
}

/// Inner product `<a|b>`.
pub fn inner(a: &State, b: &State) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a state.
pub fn norm(a: &State) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product with `a`'s index slowest: `(a ⊗ b)[(i1,i2),(j1,j2)] = a[i1,j1] b[i2,j2]`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (da, db) = (a.dim(), b.dim());
    let dim = da * db;
    let mut out = Operator::zeros(dim);
    for i1 in 0..da {
        for j1 in 0..da {
            let aij = a.entry(i1, j1);
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i2 in 0..db {
                for j2 in 0..db {
                    out.set(i1 * db + i2, j1 * db + j2, aij * b.entry(i2, j2));
                }
            }
        }
    }
    out
}

/// Embed a single-factor operator at position `slot` of a tensor product
/// space with the given local dimensions, identity on all other factors.
pub fn embed(op: &Operator, slot: usize, local_dims: &[usize]) -> Result<Operator> {
    if slot >= local_dims.len() {
        return Err(Error::SlotOutOfRange {
            slot,
            n_slots: local_dims.len(),
        });
    }
    if op.dim() != local_dims[slot] {
        return Err(Error::DimensionMismatch {
            left: op.dim(),
            right: local_dims[slot],
        });
    }
    let mut acc = Operator::identity(1);
    for (s, &d) in local_dims.iter().enumerate() {
        if s == slot {
            acc = kron(&acc, op);
        } else {
            acc = kron(&acc, &Operator::identity(d));
        }
    }
    Ok(acc)
}

/// Exact propagator `exp(-i h t)` of a Hermitian generator.
///
/// The generator is decomposed into the connected components of its exact
/// off-diagonal sparsity pattern; 1x1 and 2x2 components use closed forms
/// (the two-level Rabi solution), larger components a full Hermitian
/// eigendecomposition. Pulse Hamiltonians in the product basis always fall
/// into 1x1/2x2 components, which keeps sequence compilation cheap.
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    if !t.is_finite() {
        return Err(Error::NonFinite {
            context: "propagator duration",
        });
    }
    let dev = h.hermiticity_deviation();
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            deviation: dev,
            tol: HERMITICITY_TOL,
        });
    }
    let dim = h.dim();
    // Symmetrize so the result is unitary up to eigensolver error even when
    // the input carries deviations below the admission tolerance.
    let hs = h.hermitian_part();

    let mut out = Operator::zeros(dim);
    for component in components_of(&hs) {
        match component.len() {
            1 => {
                let i = component[0];
                let e = hs.entry(i, i).re;
                out.set(i, i, (Complex64::new(0.0, -e * t)).exp());
            }
            2 => {
                let (i, j) = (component[0], component[1]);
                let u =
                    two_level_propagator(hs.entry(i, i).re, hs.entry(j, j).re, hs.entry(i, j), t);
                out.set(i, i, u[0][0]);
                out.set(i, j, u[0][1]);
                out.set(j, i, u[1][0]);
                out.set(j, j, u[1][1]);
            }
            _ => {
                let sub = hs.submatrix(&component);
                let spec = Spectrum::hermitian_unchecked(&sub);
                let k = component.len();
                // U_sub = V diag(exp(-i lambda t)) V^dag
                for r in 0..k {
                    for c in 0..k {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for m in 0..k {
                            let phase = (Complex64::new(0.0, -spec.eigenvalues[m].re * t)).exp();
                            acc += spec.eigenvectors.entry(r, m)
                                * phase
                                * spec.eigenvectors.entry(c, m).conj();
                        }
                        out.set(component[r], component[c], acc);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Closed-form `exp(-i H t)` for a 2x2 Hermitian `[[a, w], [conj(w), b]]`.
pub(crate) fn two_level_propagator(a: f64, b: f64, w: Complex64, t: f64) -> [[Complex64; 2]; 2] {
    let mean = 0.5 * (a + b);
    let half_split = 0.5 * (a - b);
    let rabi = (half_split * half_split + w.norm_sqr()).sqrt();
    let phase = (Complex64::new(0.0, -mean * t)).exp();
    let (cos_term, sinc) = if rabi == 0.0 {
        (1.0, t)
    } else {
        ((rabi * t).cos(), (rabi * t).sin() / rabi)
    };
    let minus_i = Complex64::new(0.0, -1.0);
    [
        [
            phase * Complex64::new(cos_term, -half_split * sinc),
            phase * minus_i * w * sinc,
        ],
        [
            phase * minus_i * w.conj() * sinc,
            phase * Complex64::new(cos_term, half_split * sinc),
        ],
    ]
}

/// Connected components of the exact off-diagonal sparsity pattern.
fn components_of(h: &Operator) -> Vec<Vec<usize>> {
    let dim = h.dim();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            if h.entry(i, j) != Complex64::new(0.0, 0.0) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for i in 0..dim {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups.sort_by_key(|g| g[0]);
    groups
}

/// Sorted eigenphases of a unitary, each in `[0, 2*pi)`, ascending.
pub fn eigenphases(u: &Operator) -> Result<Vec<f64>> {
    let spec = Spectrum::unitary(u)?;
    Ok(spec
        .eigenvalues
        .iter()
        .map(|l| {
            let phi = l.arg();
            if phi < 0.0 {
                phi + std::f64::consts::TAU
            } else {
                phi
            }
        })
        .collect())
}

/// `1 - |tr(u^dag v)| / dim`: zero iff `u` and `v` agree up to a global phase.
pub fn global_phase_distance(u: &Operator, v: &Operator) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..u.dim() {
        for k in 0..u.dim() {
            tr += u.entry(k, i).conj() * v.entry(k, i);
        }
    }
    Ok((1.0 - tr.norm() / u.dim() as f64).max(0.0))
}
