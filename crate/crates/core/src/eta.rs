//! Truncated equivariant eta functions, the one-form `α`, and the heat
//! formula for the equivariant index.
//!
//! For a finite Hermitian matrix the truncated eta function at `s = 0` is
//! `η_ε(h, D) = Σ_λ χ_λ(h)·sign(λ)·erfc(|λ|√ε)`, where `χ_λ(h)` is the trace of
//! `h` on the `λ`-eigenspace. Along a path `D + tX` its derivative is
//! `−2α_ε(X)` with `α_ε(X) = (ε/π)^{1/2} Tr(h X e^{−εD²})`.
//!
//! Traces of `h` on a representation of `ℤ_p` are complex once `p ≥ 3`, so
//! every quantity here is returned as a [`Complex64`]; [`real_part_checked`]
//! extracts the real value where one is expected.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::equispec::{character_value, GroupAction};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::specflow::OperatorFamily;

/// Default Gauss–Legendre order for [`heat_index_integral`].
pub const DEFAULT_QUADRATURE_ORDER: usize = 32;
/// Largest order tried before giving up on convergence.
pub const MAX_QUADRATURE_ORDER: usize = 1024;
/// Successive quadrature orders must agree to this absolute tolerance.
pub const QUADRATURE_TOL: f64 = 1e-4;

/// `ε·Λ² ∈ [30, 120]` keeps edge modes of a truncation `Λ` below `1e−10`.
pub fn admissible_epsilon_window(truncation: usize) -> (f64, f64) {
    let l2 = (truncation * truncation) as f64;
    (30.0 / l2, 120.0 / l2)
}

/// Returns the real part, or an equivariance-violation error if the
/// imaginary part exceeds `tol`.
pub fn real_part_checked(z: Complex64, tol: f64) -> Result<f64> {
    if z.im.abs() > tol {
        return Err(Error::EquivarianceViolation(z.im));
    }
    Ok(z.re)
}

/// An equivariant Hermitian operator together with the group element `h`
/// (as a power of the generator) and the cut-off time `ε`.
#[derive(Clone, Debug)]
pub struct EtaContext {
    operator: CMatrix,
    action: GroupAction,
    h_power: i64,
    epsilon: f64,
}

/// Eigenvalues of each isotypic block with orthonormal eigenvectors in the
/// block's coordinates.
struct BlockEigen {
    values: Vec<f64>,
    vectors: CMatrix,
}

fn block_eigen(d: &CMatrix, action: &GroupAction) -> Vec<BlockEigen> {
    (0..action.order())
        .map(|j| {
            let (values, vectors) = linalg::eigh(&action.compress(j, d));
            BlockEigen { values, vectors }
        })
        .collect()
}

fn eta_term(lambda: f64, epsilon: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        lambda.signum() * libm::erfc(lambda.abs() * epsilon.sqrt())
    }
}

impl EtaContext {
    pub fn new(operator: CMatrix, action: GroupAction, h_power: i64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("ε must be positive, got {epsilon}")));
        }
        action.ensure_equivariant(&operator, 1e-8)?;
        Ok(EtaContext { operator, action, h_power, epsilon })
    }

    pub fn operator(&self) -> &CMatrix {
        &self.operator
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> Complex64 {
        let order = self.action.order();
        let terms = (0..order).map(|j| {
            let block = linalg::eigvalsh(&self.action.compress(j, &self.operator));
            character_value(order, j, self.h_power) * linalg::compensated_sum(block.into_iter().map(&f))
        });
        linalg::compensated_sum_c(terms)
    }

    /// `η_ε(h, D)`.
    pub fn eta_truncated(&self) -> Complex64 {
        let eps = self.epsilon;
        self.weighted_sum(|l| eta_term(l, eps))
    }

    /// `lim_{ε→0} η_ε(h, D) = Σ χ_λ(h)·sign(λ)`, the finite-dimensional
    /// (degenerate) value of the eta invariant.
    pub fn eta_limit(&self) -> Complex64 {
        self.weighted_sum(|l| if l == 0.0 { 0.0 } else { l.signum() })
    }

    /// `α_ε(X) = (ε/π)^{1/2} Tr(h X e^{−εD²})`, evaluated in the eigenbasis of `D`.
    pub fn alpha(&self, x: &CMatrix) -> Result<Complex64> {
        self.action.ensure_equivariant(x, 1e-8)?;
        Ok(alpha_with(&block_eigen(&self.operator, &self.action), &self.action, x, self.h_power, self.epsilon))
    }

    /// Central difference of `t ↦ η_ε(h, D + tX)` at `t = 0`, paired with the
    /// predicted derivative `−2α_ε(X)`.
    pub fn variation(&self, x: &CMatrix, step: f64) -> Result<(Complex64, Complex64)> {
        let alpha = self.alpha(x)?;
        let shifted = |t: f64| EtaContext {
            operator: &self.operator + x * Complex64::new(t, 0.0),
            ..self.clone()
        };
        let fd = (shifted(step).eta_truncated() - shifted(-step).eta_truncated()) / (2.0 * step);
        Ok((fd, -2.0 * alpha))
    }
}

fn alpha_with(eigen: &[BlockEigen], action: &GroupAction, x: &CMatrix, h_power: i64, epsilon: f64) -> Complex64 {
    let order = action.order();
    let terms = eigen.iter().enumerate().map(|(j, be)| {
        let xj = action.compress(j, x);
        let rotated = be.vectors.adjoint() * xj * &be.vectors;
        let trace = linalg::compensated_sum_c(
            be.values.iter().enumerate().map(|(k, &l)| rotated[(k, k)] * (-epsilon * l * l).exp()),
        );
        character_value(order, j, h_power) * trace
    });
    linalg::compensated_sum_c(terms) * (epsilon / PI).sqrt()
}

/// `η_ε(h, D)` for an operator commuting with `action`.
pub fn eta_truncated(d: &CMatrix, action: &GroupAction, h_power: i64, epsilon: f64) -> Result<Complex64> {
    Ok(EtaContext::new(d.clone(), action.clone(), h_power, epsilon)?.eta_truncated())
}

/// `α_ε(X)` at `D`.
pub fn alpha_form(d: &CMatrix, x: &CMatrix, action: &GroupAction, h_power: i64, epsilon: f64) -> Result<Complex64> {
    EtaContext::new(d.clone(), action.clone(), h_power, epsilon)?.alpha(x)
}

/// `(finite difference of η_ε along X, −2α_ε(X))`.
pub fn variation_check(
    d: &CMatrix,
    x: &CMatrix,
    action: &GroupAction,
    h_power: i64,
    epsilon: f64,
    step: f64,
) -> Result<(Complex64, Complex64)> {
    EtaContext::new(d.clone(), action.clone(), h_power, epsilon)?.variation(x, step)
}

/// Per-character `∫₀¹ (ε/π)^{1/2} Tr_j(Ḋ_u e^{−εD_u²}) du` at a fixed order,
/// for each `ε` in `epsilons`; one eigendecomposition per node serves all.
fn integrate_alpha_blocks(family: &OperatorFamily, epsilons: &[f64], order: usize) -> Result<Vec<Vec<f64>>> {
    let rule = GaussLegendre::new(NonZeroUsize::new(order).ok_or_else(|| {
        Error::InvalidArgument("quadrature order must be positive".into())
    })?);
    let action = family.action();
    let nodes: Vec<Result<Vec<Vec<f64>>>> = rule
        .as_node_weight_pairs()
        .par_iter()
        .map(|&(x, w)| {
            let u = 0.5 * (x + 1.0);
            let d = family.at(u)?;
            let v = family.velocity_at(u)?;
            let eigen = block_eigen(&d, action);
            let diagonals = rotated_diagonals(&eigen, action, &v);
            Ok(epsilons
                .iter()
                .map(|&eps| block_traces(&eigen, &diagonals, eps).into_iter().map(|t| t * 0.5 * w).collect())
                .collect())
        })
        .collect();
    let nodes = nodes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(epsilons
        .iter()
        .enumerate()
        .map(|(e, &eps)| {
            let scale = (eps / PI).sqrt();
            (0..action.order())
                .map(|j| scale * linalg::compensated_sum(nodes.iter().map(|n| n[e][j])))
                .collect()
        })
        .collect())
}

/// Diagonal of `X` in each block's eigenbasis, `(v_kᴴ X v_k)_k`; real because
/// `X` is Hermitian.
fn rotated_diagonals(eigen: &[BlockEigen], action: &GroupAction, x: &CMatrix) -> Vec<Vec<f64>> {
    eigen
        .iter()
        .enumerate()
        .map(|(j, be)| {
            let xv = action.compress(j, x) * &be.vectors;
            (0..be.values.len())
                .map(|k| be.vectors.column(k).iter().zip(xv.column(k).iter()).map(|(a, b)| (a.conj() * b).re).sum())
                .collect()
        })
        .collect()
}

/// `Tr_j(X e^{−εD²})` for each isotypic block from [`rotated_diagonals`].
fn block_traces(eigen: &[BlockEigen], diagonals: &[Vec<f64>], epsilon: f64) -> Vec<f64> {
    eigen
        .iter()
        .zip(diagonals)
        .map(|(be, diag)| {
            linalg::compensated_sum(be.values.iter().zip(diag).map(|(&l, &x)| x * (-epsilon * l * l).exp()))
        })
        .collect()
}

/// `−∫₀¹ α_ε(Ḋ_u) du` split by character: entry `j` is the multiplicity of
/// `χ_j` in the virtual representation the heat formula assigns to the path.
///
/// Gauss–Legendre quadrature starting at `order`, doubled until two
/// successive orders agree to [`QUADRATURE_TOL`] in every entry. For a path
/// from `D` to `g⁻¹Dg` the entries approximate the integers of `Ind_H(T_g)`.
pub fn heat_index_characters(family: &OperatorFamily, epsilon: f64, order: usize) -> Result<Vec<f64>> {
    Ok(heat_index_characters_multi(family, &[epsilon], order)?.remove(0))
}

/// [`heat_index_characters`] at several `ε` at once, sharing the spectral
/// decompositions along the path. Doubling continues until every `ε`
/// has converged.
pub fn heat_index_characters_multi(family: &OperatorFamily, epsilons: &[f64], order: usize) -> Result<Vec<Vec<f64>>> {
    if !family.is_refinable() {
        return Err(Error::InvalidArgument("heat integral needs a family that can be evaluated at any u".into()));
    }
    if let Some(bad) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {bad}")));
    }
    let mut n = order.max(1);
    let mut prev = integrate_alpha_blocks(family, epsilons, n)?;
    let mut change = f64::INFINITY;
    while 2 * n <= MAX_QUADRATURE_ORDER {
        n *= 2;
        let next = integrate_alpha_blocks(family, epsilons, n)?;
        change = prev
            .iter()
            .flatten()
            .zip(next.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change <= QUADRATURE_TOL {
            return Ok(next.into_iter().map(|per| per.into_iter().map(|v| -v).collect()).collect());
        }
        prev = next;
    }
    Err(Error::Quadrature(change))
}

/// `−∫₀¹ α_ε(Ḋ_u) du` at `h`; see [`heat_index_characters`].
///
/// For a path from `D` to `g⁻¹Dg` this is the index trace `Ind(h, T_g)`.
pub fn heat_index_integral(family: &OperatorFamily, h_power: i64, epsilon: f64, order: usize) -> Result<Complex64> {
    let per_char = heat_index_characters(family, epsilon, order)?;
    Ok(character_trace(&per_char, h_power))
}

/// `Σ_j m_j χ_j(h)` for real multiplicities `m_j`.
pub fn character_trace(multiplicities: &[f64], h_power: i64) -> Complex64 {
    let order = multiplicities.len();
    linalg::compensated_sum_c(
        multiplicities.iter().enumerate().map(|(j, &m)| character_value(order, j, h_power) * m),
    )
}
