//! Fourier-truncated model on the circle: Dirac operator `−√−1 d/dθ` twisted
//! by `ℂᴺ`, Hardy projection, Toeplitz operator of a unitary matrix loop and
//! its equivariant index under the rotation group `ℤ_p`.
//!
//! Basis vectors are `e^{inθ} ⊗ e_a` for `|n| ≤ Λ`, `0 ≤ a < N`, stored at
//! index `(n + Λ)·N + a`. The rotation by `2π/p` sends `e^{inθ}` to
//! `e^{−2π√−1 n/p} e^{inθ}`, so mode `n` carries character `(−n) mod p`.
//!
//! Operators such as `g⁻¹Dg` are compressed exactly: the product is formed
//! on the window widened by the loop degree and then cut back, so the
//! compressed matrix equals `Q g⁻¹ D g Q` for the mode projection `Q`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equispec::{GroupAction, RepElement};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, I};
use crate::specflow::{OperatorFamily, Refiner};

/// Default zero threshold for singular values of Toeplitz sections.
pub const SVD_TOL: f64 = 1e-7;
/// Required ratio between the smallest nonzero singular value and `SVD_TOL`.
pub const SVD_GAP_RATIO: f64 = 1e3;

/// Unitary matrix-valued trigonometric polynomial `g(θ) = Σ_j A_j e^{ijθ}`.
#[derive(Clone, Debug)]
pub struct MatrixLoop {
    size: usize,
    coeffs: BTreeMap<i64, CMatrix>,
}

impl MatrixLoop {
    pub fn new(size: usize, coeffs: impl IntoIterator<Item = (i64, CMatrix)>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("loop size must be positive".into()));
        }
        let mut map: BTreeMap<i64, CMatrix> = BTreeMap::new();
        for (j, a) in coeffs {
            if a.shape() != (size, size) {
                return Err(Error::InvalidArgument(format!(
                    "coefficient of mode {j} is {}x{}, expected {size}x{size}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            let entry = map.entry(j).or_insert_with(|| CMatrix::zeros(size, size));
            *entry += a;
        }
        map.retain(|_, a| linalg::max_abs(a) > 0.0);
        let lp = MatrixLoop { size, coeffs: map };
        let grid = 4 * (lp.degree() + 1);
        let id = CMatrix::identity(size, size);
        for i in 0..grid {
            let g = lp.eval(2.0 * PI * i as f64 / grid as f64);
            let defect = linalg::max_abs(&(g.adjoint() * &g - &id));
            if defect > 1e-8 {
                return Err(Error::InvalidArgument(format!(
                    "loop is not unitary at θ = 2π·{i}/{grid} (defect {defect:.2e})"
                )));
            }
        }
        Ok(lp)
    }

    /// Scalar loop `e^{ikθ}`.
    pub fn monomial(k: i64) -> Self {
        MatrixLoop::diagonal(&[k])
    }

    /// `diag(e^{i k_1 θ}, …, e^{i k_N θ})`.
    pub fn diagonal(windings: &[i64]) -> Self {
        let n = windings.len();
        let mut coeffs: BTreeMap<i64, CMatrix> = BTreeMap::new();
        for (a, &k) in windings.iter().enumerate() {
            coeffs.entry(k).or_insert_with(|| CMatrix::zeros(n, n))[(a, a)] = c(1.0, 0.0);
        }
        MatrixLoop { size: n, coeffs }
    }

    /// Constant loop with value `v` (must be unitary).
    pub fn constant(v: CMatrix) -> Result<Self> {
        MatrixLoop::new(v.nrows(), [(0, v)])
    }

    /// `v · g · w` for constant unitaries `v`, `w`.
    pub fn sandwiched(&self, v: &CMatrix, w: &CMatrix) -> Result<Self> {
        MatrixLoop::new(self.size, self.coeffs.iter().map(|(&j, a)| (j, v * a * w)))
    }

    /// Pointwise product `self(θ)·other(θ)`.
    pub fn product(&self, other: &MatrixLoop) -> Result<Self> {
        if self.size != other.size {
            return Err(Error::InvalidArgument("loops of different sizes".into()));
        }
        let mut terms = Vec::new();
        for (&j, a) in &self.coeffs {
            for (&k, b) in &other.coeffs {
                terms.push((j + k, a * b));
            }
        }
        MatrixLoop::new(self.size, terms)
    }

    /// `θ ↦ g(θ)ᴴ = g(θ)⁻¹`.
    pub fn inverse(&self) -> Self {
        MatrixLoop {
            size: self.size,
            coeffs: self.coeffs.iter().map(|(&j, a)| (-j, a.adjoint())).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Largest `|j|` with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|j| j.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, CMatrix> {
        &self.coeffs
    }

    pub fn coefficient(&self, j: i64) -> Option<&CMatrix> {
        self.coeffs.get(&j)
    }

    pub fn eval(&self, theta: f64) -> CMatrix {
        self.coeffs.iter().fold(CMatrix::zeros(self.size, self.size), |acc, (&j, a)| {
            acc + a * Complex64::from_polar(1.0, j as f64 * theta)
        })
    }

    /// `ω(θ) = g⁻¹ dg/dθ`.
    pub fn log_derivative(&self, theta: f64) -> CMatrix {
        let deriv = self.coeffs.iter().fold(CMatrix::zeros(self.size, self.size), |acc, (&j, a)| {
            acc + a * (I * j as f64 * Complex64::from_polar(1.0, j as f64 * theta))
        });
        self.eval(theta).adjoint() * deriv
    }

    /// Invariance under rotation by `2π/p` holds iff every mode is divisible by `p`.
    pub fn is_equivariant(&self, order: usize) -> bool {
        self.coeffs.keys().all(|j| j.rem_euclid(order as i64) == 0)
    }

    /// Degree of `θ ↦ det g(θ)` by phase continuation on `64(d+1)` points.
    pub fn winding_number(&self) -> Result<i64> {
        let grid = 64 * (self.degree() + 1);
        let det = |i: usize| self.eval(2.0 * PI * i as f64 / grid as f64).determinant();
        let mut total = 0.0;
        let mut prev = det(0);
        for i in 1..=grid {
            let next = det(i % grid);
            let step = (next / prev).arg();
            if step.abs() > PI / 2.0 {
                return Err(Error::Resolution(step));
            }
            total += step;
            prev = next;
        }
        Ok((total / (2.0 * PI)).round() as i64)
    }

    pub fn from_toml_str(text: &str) -> Result<(Self, Option<usize>)> {
        let spec: LoopSpec = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<loop>".into(),
            message: e.to_string(),
        })?;
        spec.build()
    }

    /// Reads a loop specification file; also returns its declared group order.
    pub fn from_file(path: &Path) -> Result<(Self, Option<usize>)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let (lp, order) = MatrixLoop::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse { path: path.to_path_buf(), message },
            other => other,
        })?;
        if let Some(p) = order {
            if !lp.is_equivariant(p) {
                return Err(Error::InvalidArgument(format!(
                    "{}: loop has Fourier modes not divisible by the group order {p}",
                    path.display()
                )));
            }
        }
        Ok((lp, order))
    }

    pub fn to_spec(&self, group_order: Option<usize>) -> LoopSpec {
        LoopSpec {
            size: self.size,
            group_order,
            coefficient: self
                .coeffs
                .iter()
                .map(|(&mode, a)| CoefficientSpec {
                    mode,
                    re: (0..self.size).map(|r| (0..self.size).map(|k| a[(r, k)].re).collect()).collect(),
                    im: Some((0..self.size).map(|r| (0..self.size).map(|k| a[(r, k)].im).collect()).collect()),
                })
                .collect(),
        }
    }
}

/// On-disk form of a loop: `size`, optional `group_order`, and one
/// `[[coefficient]]` table per Fourier mode with `re`/`im` row arrays.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_order: Option<usize>,
    #[serde(default)]
    pub coefficient: Vec<CoefficientSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub mode: i64,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl LoopSpec {
    pub fn build(&self) -> Result<(MatrixLoop, Option<usize>)> {
        let n = self.size;
        let mut terms = Vec::new();
        for coef in &self.coefficient {
            let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
            if !rows_ok(&coef.re) || !coef.im.as_ref().is_none_or(rows_ok) {
                return Err(Error::InvalidArgument(format!("coefficient of mode {} is not {n}x{n}", coef.mode)));
            }
            let a = CMatrix::from_fn(n, n, |r, k| {
                c(coef.re[r][k], coef.im.as_ref().map_or(0.0, |im| im[r][k]))
            });
            terms.push((coef.mode, a));
        }
        if self.group_order == Some(0) {
            return Err(Error::InvalidArgument("group order must be at least 1".into()));
        }
        Ok((MatrixLoop::new(n, terms)?, self.group_order))
    }
}

/// Truncated circle model `(Λ, N, g, p)` with its derived operators.
#[derive(Clone, Debug)]
pub struct CircleModel {
    truncation: usize,
    order: usize,
    lp: MatrixLoop,
    action: GroupAction,
}

/// Block matrix of multiplication by `lp` from modes `cols` to modes `rows`.
fn multiplication_block(lp: &MatrixLoop, rows: (i64, i64), cols: (i64, i64)) -> CMatrix {
    let n = lp.size();
    let nr = (rows.1 - rows.0 + 1).max(0) as usize;
    let nc = (cols.1 - cols.0 + 1).max(0) as usize;
    let mut m = CMatrix::zeros(nr * n, nc * n);
    for ci in 0..nc {
        let col_mode = cols.0 + ci as i64;
        for (&j, a) in lp.coefficients() {
            let row_mode = col_mode + j;
            if row_mode < rows.0 || row_mode > rows.1 {
                continue;
            }
            let ri = (row_mode - rows.0) as usize;
            m.view_mut((ri * n, ci * n), (n, n)).copy_from(a);
        }
    }
    m
}

fn mode_character(mode: i64, order: usize) -> usize {
    (-mode).rem_euclid(order as i64) as usize
}

/// Per-character nullity of the rectangular section of `T_lp`: domain modes
/// `0..=L−d`, range modes `0..=L`.
fn rectangular_nullities(lp: &MatrixLoop, truncation: usize, order: usize, svd_tol: f64) -> Result<Vec<usize>> {
    let l = truncation as i64;
    let d = lp.degree() as i64;
    let section = multiplication_block(lp, (0, l), (0, l - d));
    let n = lp.size();
    (0..order)
        .map(|j| {
            let pick = |modes: i64| -> Vec<usize> {
                (0..=modes)
                    .filter(|&m| mode_character(m, order) == j)
                    .flat_map(|m| (0..n).map(move |a| m as usize * n + a))
                    .collect()
            };
            let rows = pick(l);
            let cols = pick(l - d);
            let block = CMatrix::from_fn(rows.len(), cols.len(), |r, k| section[(rows[r], cols[k])]);
            let sv = linalg::singular_values(&block);
            if let Some(&bad) = sv.iter().find(|&&s| s > svd_tol && s < svd_tol * SVD_GAP_RATIO) {
                return Err(Error::IllConditionedKernel { tol: svd_tol, value: bad });
            }
            let rank = sv.iter().filter(|&&s| s > svd_tol).count();
            Ok(cols.len() - rank)
        })
        .collect()
}

impl CircleModel {
    pub fn new(lp: MatrixLoop, truncation: usize, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("group order must be at least 1".into()));
        }
        if !lp.is_equivariant(order) {
            return Err(Error::InvalidArgument(format!(
                "loop is not invariant under rotation by 2π/{order}: a Fourier mode is not divisible by {order}"
            )));
        }
        let guard = 8 * (lp.degree() + 1);
        if truncation < guard {
            return Err(Error::InvalidArgument(format!(
                "truncation {truncation} is inside the guard band; need at least {guard}"
            )));
        }
        let l = truncation as i64;
        let chars: Vec<usize> = (-l..=l)
            .flat_map(|m| std::iter::repeat_n(mode_character(m, order), lp.size()))
            .collect();
        let action = GroupAction::from_characters(order, &chars)?;
        Ok(CircleModel { truncation, order, lp, action })
    }

    /// Smallest admissible truncation for `lp`.
    pub fn guard_truncation(lp: &MatrixLoop) -> usize {
        8 * (lp.degree() + 1)
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrix_loop(&self) -> &MatrixLoop {
        &self.lp
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn dim(&self) -> usize {
        (2 * self.truncation + 1) * self.lp.size()
    }

    /// Fourier mode of basis index `i`.
    pub fn mode_of(&self, i: usize) -> i64 {
        (i / self.lp.size()) as i64 - self.truncation as i64
    }

    fn mode_diagonal(&self, f: impl Fn(i64) -> f64) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_iterator(self.dim(), (0..self.dim()).map(|i| c(f(self.mode_of(i)), 0.0))))
    }

    pub fn dirac(&self) -> CMatrix {
        self.mode_diagonal(|n| n as f64)
    }

    /// `P₊`: projection onto modes `n ≥ 0`.
    pub fn hardy_projection(&self) -> CMatrix {
        self.mode_diagonal(|n| if n >= 0 { 1.0 } else { 0.0 })
    }

    /// `P = P₊ − P₋`.
    pub fn hardy_sign(&self) -> CMatrix {
        self.mode_diagonal(|n| if n >= 0 { 1.0 } else { -1.0 })
    }

    /// Exact compression of `g⁻¹ F g` for a mode-diagonal symbol `F`.
    fn conjugated_diagonal(&self, f: impl Fn(i64) -> f64) -> CMatrix {
        let l = self.truncation as i64;
        let d = self.lp.degree() as i64;
        let n = self.lp.size();
        let ext = multiplication_block(&self.lp, (-l - d, l + d), (-l, l));
        let mut weighted = ext.clone();
        for r in 0..weighted.nrows() {
            let weight = f(-l - d + (r / n) as i64);
            weighted.row_mut(r).scale_mut(weight);
        }
        linalg::hermitian_part(&(ext.adjoint() * weighted))
    }

    /// `Q g⁻¹ D g Q`.
    pub fn conjugated_dirac(&self) -> CMatrix {
        self.conjugated_diagonal(|n| n as f64)
    }

    /// `Q g⁻¹ P g Q`.
    pub fn conjugated_hardy_sign(&self) -> CMatrix {
        self.conjugated_diagonal(|n| if n >= 0 { 1.0 } else { -1.0 })
    }

    /// `P₊ g P₊` on modes `0..=Λ`.
    pub fn toeplitz_compression(&self) -> CMatrix {
        let l = self.truncation as i64;
        multiplication_block(&self.lp, (0, l), (0, l))
    }

    /// Kernel and cokernel of `T_g` as representations of `ℤ_p`, read from
    /// rectangular sections and required to agree after doubling `Λ`.
    pub fn kernel_cokernel(&self, svd_tol: f64) -> Result<(RepElement, RepElement)> {
        let inv = self.lp.inverse();
        let at = |l: usize| -> Result<(Vec<usize>, Vec<usize>)> {
            Ok((
                rectangular_nullities(&self.lp, l, self.order, svd_tol)?,
                rectangular_nullities(&inv, l, self.order, svd_tol)?,
            ))
        };
        let base = at(self.truncation)?;
        let doubled = at(2 * self.truncation)?;
        if base != doubled {
            return Err(Error::TruncationTooSmall(self.truncation));
        }
        let to_rep = |v: &[usize]| RepElement::new(v.iter().map(|&x| x as i64).collect());
        Ok((to_rep(&base.0)?, to_rep(&base.1)?))
    }

    /// `Ind_H(T_g) = ker T_g − coker T_g`.
    pub fn equivariant_index(&self) -> Result<RepElement> {
        let (ker, coker) = self.kernel_cokernel(SVD_TOL)?;
        Ok(&ker - &coker)
    }

    /// `D_u = (1 − u) D + u Q g⁻¹ D g Q`.
    pub fn d_path(&self, grid: usize) -> Result<OperatorFamily> {
        self.linear_path(self.dirac(), self.conjugated_dirac(), grid)
    }

    /// `P_u = (1 − u) P + u Q g⁻¹ P g Q`.
    pub fn p_path(&self, grid: usize) -> Result<OperatorFamily> {
        self.linear_path(self.hardy_sign(), self.conjugated_hardy_sign(), grid)
    }

    fn linear_path(&self, start: CMatrix, end: CMatrix, grid: usize) -> Result<OperatorFamily> {
        let velocity = &end - &start;
        let (a, b) = (start, end);
        let refiner: Refiner = Arc::new(move |u| &a * c(1.0 - u, 0.0) + &b * c(u, 0.0));
        Ok(OperatorFamily::from_refiner(self.action.clone(), refiner, grid)?
            .with_velocity(Arc::new(move |_| velocity.clone())))
    }

    /// Eigenvalues of `P_u`, split into those whose eigenvectors live in the
    /// interior modes `|n| ≤ Λ − 2d − 1` and those with weight near the edge.
    pub fn p_path_spectrum(&self, u: f64) -> (Vec<f64>, Vec<f64>) {
        let pu = self.hardy_sign() * c(1.0 - u, 0.0) + self.conjugated_hardy_sign() * c(u, 0.0);
        let (vals, vecs) = linalg::eigh(&pu);
        let edge = self.truncation as i64 - 2 * self.lp.degree() as i64 - 1;
        let mut interior = Vec::new();
        let mut flagged = Vec::new();
        for (k, &v) in vals.iter().enumerate() {
            let weight: f64 = (0..self.dim())
                .filter(|&i| self.mode_of(i).abs() > edge)
                .map(|i| vecs[(i, k)].norm_sqr())
                .sum();
            if weight > 1e-6 {
                flagged.push(v);
            } else {
                interior.push(v);
            }
        }
        (interior, flagged)
    }
}
