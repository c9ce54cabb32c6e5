#![allow(dead_code)]

use nalgebra::DVector;
use num_complex::Complex64;
use oddindex::circle::MatrixLoop;
use oddindex::equispec::GroupAction;
use oddindex::linalg::{c, CMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    random_matrix(rng, n, n).qr().q()
}

pub fn diag(vals: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&v| c(v, 0.0))))
}

/// A `ℤ_p` action on `ℂ^dim` in a random orthonormal frame, with every
/// character present, plus the frame and the per-coordinate characters.
pub fn random_action(rng: &mut impl Rng, order: usize, dim: usize) -> (GroupAction, CMatrix, Vec<usize>) {
    let chars: Vec<usize> = (0..dim).map(|i| if i < order { i } else { rng.random_range(0..order) }).collect();
    let v = random_unitary(rng, dim);
    let phases = CMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        chars.iter().map(|&j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / order as f64)),
    ));
    let u = &v * phases * v.adjoint();
    (GroupAction::new(order, u).expect("unitary of finite order"), v, chars)
}

/// Random Hermitian matrix commuting with the action built by [`random_action`].
pub fn random_equivariant(rng: &mut impl Rng, frame: &CMatrix, chars: &[usize]) -> CMatrix {
    let n = chars.len();
    let h = random_hermitian(rng, n);
    let block = CMatrix::from_fn(n, n, |r, k| if chars[r] == chars[k] { h[(r, k)] } else { c(0.0, 0.0) });
    let d = frame * block * frame.adjoint();
    (&d + d.adjoint()) * c(0.5, 0.0)
}

/// `P z^power + (1 − P)` for a random rank-one projection `P` on `ℂ^size`.
pub fn projection_loop(rng: &mut impl Rng, size: usize, power: i64) -> MatrixLoop {
    let v = random_matrix(rng, size, 1);
    let v = &v / c(v.norm(), 0.0);
    let p = &v * v.adjoint();
    let q = CMatrix::identity(size, size) - &p;
    if power == 0 {
        return MatrixLoop::new(size, [(0, p + q)]).unwrap();
    }
    MatrixLoop::new(size, [(power, p), (0, q)]).unwrap()
}

/// Product of `count` projection loops, each contributing winding `sign(power)`.
pub fn projection_product(rng: &mut impl Rng, size: usize, power: i64, count: usize) -> MatrixLoop {
    let mut g = MatrixLoop::diagonal(&vec![0; size]);
    for _ in 0..count {
        g = g.product(&projection_loop(rng, size, power)).unwrap();
    }
    g
}

/// Constant-frame conjugate `V · diag(z^{k_i}) · W`.
pub fn framed_diagonal(rng: &mut impl Rng, windings: &[i64]) -> MatrixLoop {
    let n = windings.len();
    let v = random_unitary(rng, n);
    let w = random_unitary(rng, n);
    MatrixLoop::diagonal(windings).sandwiched(&v, &w).unwrap()
}

/// Named loops invariant under rotation by `2π/p`, all of degree `≤ 2p`,
/// for which `g⁻¹P₊g` commutes with `P₊`.
pub fn equivariant_loops(rng: &mut impl Rng, p: i64) -> Vec<(String, MatrixLoop)> {
    let mut out = Vec::new();
    for k in [-2 * p, -p, 0, p, 2 * p] {
        out.push((format!("z^{k}"), MatrixLoop::monomial(k)));
    }
    out.push((format!("diag(z^{p}, z^{})", -2 * p), MatrixLoop::diagonal(&[p, -2 * p])));
    out.push((format!("V·diag(z^{}, z^{})·W", 2 * p, -p), framed_diagonal(rng, &[2 * p, -p])));
    out.push((format!("(P₁z^{p} + Q₁)(P₂z^{p} + Q₂)"), projection_product(rng, 2, p, 2)));
    out.push((format!("P z^{} + Q on C^3", -p), projection_loop(rng, 3, -p)));
    out
}
