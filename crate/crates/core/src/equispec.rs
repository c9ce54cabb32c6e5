//! Spectral decomposition of Hermitian matrices that commute with a unitary
//! action of the cyclic group `ℤ_p`, organised by isotypic character.
//!
//! Character `χ_j` sends the generator to `e^{2π√−1 j/p}`. The isotypic
//! projector for `χ_j` is `Π_j = (1/p) Σ_k χ_j(k)* U^k`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Unitary action of the generator of `ℤ_p` on a finite-dimensional space.
#[derive(Clone, Debug)]
pub struct GroupAction {
    order: usize,
    generator: CMatrix,
    bases: Vec<CharacterBasis>,
}

/// Orthonormal basis of one isotypic component.
#[derive(Clone, Debug)]
pub enum CharacterBasis {
    /// The component is spanned by standard basis vectors (diagonal actions).
    Coordinates(Vec<usize>),
    /// Columns form an orthonormal basis of the component.
    Dense(CMatrix),
}

/// Virtual representation of `ℤ_p`: integer multiplicity of each character.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RepElement {
    coeffs: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPoint {
    pub value: f64,
    pub mult: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct IsotypicSpectrum {
    pub points: Vec<SpectralPoint>,
}

/// `χ_j(g^k) = e^{2π√−1 jk/p}`.
pub fn character_value(order: usize, j: usize, k: i64) -> Complex64 {
    let jk = (j as i64 * k).rem_euclid(order as i64);
    Complex64::from_polar(1.0, 2.0 * PI * jk as f64 / order as f64)
}

impl GroupAction {
    pub fn new(order: usize, generator: CMatrix) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("group order must be at least 1".into()));
        }
        if generator.nrows() != generator.ncols() {
            return Err(Error::InvalidArgument("group generator must be square".into()));
        }
        let dim = generator.nrows();
        let id = CMatrix::identity(dim, dim);
        let unitarity = linalg::max_abs(&(generator.adjoint() * &generator - &id));
        if unitarity > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "group generator is not unitary (defect {unitarity:.2e})"
            )));
        }
        let period = linalg::max_abs(&(linalg::matrix_power(&generator, order) - &id));
        if period > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "generator does not satisfy U^{order} = Id (defect {period:.2e})"
            )));
        }
        let bases = if linalg::is_diagonal(&generator, 1e-14) {
            coordinate_bases(order, &generator)?
        } else {
            dense_bases(order, &generator)
        };
        Ok(GroupAction { order, generator, bases })
    }

    /// Trivial group acting on `ℂ^dim`.
    pub fn trivial(dim: usize) -> Self {
        GroupAction::from_characters(1, &vec![0; dim]).expect("trivial action is valid")
    }

    /// Diagonal action where basis vector `i` carries character `chars[i]`.
    pub fn from_characters(order: usize, chars: &[usize]) -> Result<Self> {
        if order == 0 || chars.iter().any(|&j| j >= order) {
            return Err(Error::InvalidArgument("character labels must lie in 0..order".into()));
        }
        let diag = nalgebra::DVector::from_iterator(
            chars.len(),
            chars.iter().map(|&j| character_value(order, j, 1)),
        );
        GroupAction::new(order, CMatrix::from_diagonal(&diag))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn power(&self, k: i64) -> CMatrix {
        let k = k.rem_euclid(self.order as i64) as usize;
        linalg::matrix_power(&self.generator, k)
    }

    pub fn bases(&self) -> &[CharacterBasis] {
        &self.bases
    }

    /// Character label of each standard basis vector, when the action is diagonal.
    pub fn coordinate_characters(&self) -> Option<Vec<usize>> {
        let mut labels = vec![0; self.dim()];
        for (j, basis) in self.bases.iter().enumerate() {
            match basis {
                CharacterBasis::Coordinates(idx) => idx.iter().for_each(|&i| labels[i] = j),
                CharacterBasis::Dense(_) => return None,
            }
        }
        Some(labels)
    }

    /// `‖DU − UD‖ / ‖D‖` in the Frobenius norm (zero for `D = 0`).
    pub fn commutator_defect(&self, d: &CMatrix) -> f64 {
        let norm = linalg::frobenius(d);
        if norm == 0.0 {
            return 0.0;
        }
        if let Some(labels) = self.coordinate_characters() {
            // Diagonal generator: (DU − UD)_{rk} = d_{rk} (u_k − u_r).
            let u: Vec<Complex64> = (0..self.dim()).map(|i| self.generator[(i, i)]).collect();
            let sq: f64 = (0..self.dim())
                .flat_map(|r| (0..self.dim()).map(move |k| (r, k)))
                .filter(|&(r, k)| labels[r] != labels[k])
                .map(|(r, k)| (d[(r, k)] * (u[k] - u[r])).norm_sqr())
                .sum();
            return sq.sqrt() / norm;
        }
        linalg::frobenius(&(d * &self.generator - &self.generator * d)) / norm
    }

    pub fn ensure_equivariant(&self, d: &CMatrix, rel_tol: f64) -> Result<()> {
        if d.nrows() != self.dim() || d.ncols() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "operator is {}x{}, group acts on dimension {}",
                d.nrows(),
                d.ncols(),
                self.dim()
            )));
        }
        let defect = self.commutator_defect(d);
        if defect > rel_tol {
            return Err(Error::NonEquivariant(defect));
        }
        Ok(())
    }

    /// Compression `V_jᴴ D V_j` of `d` to the component of character `j`.
    pub fn compress(&self, j: usize, d: &CMatrix) -> CMatrix {
        match &self.bases[j] {
            CharacterBasis::Coordinates(idx) => {
                CMatrix::from_fn(idx.len(), idx.len(), |r, k| d[(idx[r], idx[k])])
            }
            CharacterBasis::Dense(v) => v.adjoint() * d * v,
        }
    }

    pub fn multiplicity(&self, j: usize) -> usize {
        match &self.bases[j] {
            CharacterBasis::Coordinates(idx) => idx.len(),
            CharacterBasis::Dense(v) => v.ncols(),
        }
    }
}

fn coordinate_bases(order: usize, generator: &CMatrix) -> Result<Vec<CharacterBasis>> {
    let mut idx = vec![Vec::new(); order];
    for i in 0..generator.nrows() {
        let z = generator[(i, i)];
        let j = (z.arg() * order as f64 / (2.0 * PI)).round().rem_euclid(order as f64) as usize % order;
        if (z - character_value(order, j, 1)).norm() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "diagonal entry {z} is not a {order}-th root of unity"
            )));
        }
        idx[j].push(i);
    }
    Ok(idx.into_iter().map(CharacterBasis::Coordinates).collect())
}

fn dense_bases(order: usize, generator: &CMatrix) -> Vec<CharacterBasis> {
    projectors_from_generator(order, generator)
        .into_iter()
        .map(|pi| {
            let (vals, vecs) = linalg::eigh(&pi);
            let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
            CharacterBasis::Dense(CMatrix::from_fn(pi.nrows(), cols.len(), |r, k| vecs[(r, cols[k])]))
        })
        .collect()
}

fn projectors_from_generator(order: usize, generator: &CMatrix) -> Vec<CMatrix> {
    let dim = generator.nrows();
    let mut powers = Vec::with_capacity(order);
    powers.push(CMatrix::identity(dim, dim));
    for k in 1..order {
        powers.push(&powers[k - 1] * generator);
    }
    (0..order)
        .map(|j| {
            powers.iter().enumerate().fold(CMatrix::zeros(dim, dim), |acc, (k, uk)| {
                acc + uk * character_value(order, j, k as i64).conj()
            }) / Complex64::new(order as f64, 0.0)
        })
        .collect()
}

/// Isotypic projectors `Π_0, …, Π_{p−1}`.
pub fn isotypic_projectors(action: &GroupAction) -> Vec<CMatrix> {
    projectors_from_generator(action.order, &action.generator)
}

/// Eigen-data of each compressed block `Π_j D Π_j`, merged into spectral
/// points. `cluster_tol` is absolute; `None` selects `1e−8 ×` the spectral
/// diameter.
pub fn equivariant_eigendecompose(
    d: &CMatrix,
    action: &GroupAction,
    cluster_tol: Option<f64>,
) -> Result<IsotypicSpectrum> {
    action.ensure_equivariant(d, 1e-8)?;
    let per_char: Vec<Vec<f64>> = (0..action.order)
        .map(|j| linalg::eigvalsh(&action.compress(j, d)))
        .collect();
    Ok(IsotypicSpectrum::from_block_eigenvalues(&per_char, cluster_tol))
}

impl IsotypicSpectrum {
    /// Merges per-character eigenvalue lists into spectral points.
    pub fn from_block_eigenvalues(per_char: &[Vec<f64>], cluster_tol: Option<f64>) -> Self {
        let order = per_char.len();
        let mut all: Vec<(f64, usize)> = per_char
            .iter()
            .enumerate()
            .flat_map(|(j, vals)| vals.iter().map(move |&v| (v, j)))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        let tol = cluster_tol.unwrap_or_else(|| {
            let diameter = match (all.first(), all.last()) {
                (Some(lo), Some(hi)) => hi.0 - lo.0,
                _ => 0.0,
            };
            let scale = all.iter().map(|x| x.0.abs()).fold(0.0, f64::max);
            1e-8 * if diameter > 0.0 { diameter } else { scale.max(1.0) }
        });
        let mut points: Vec<SpectralPoint> = Vec::new();
        let mut sums: Vec<f64> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for (v, j) in all {
            if points.is_empty() || v - last > tol {
                points.push(SpectralPoint { value: v, mult: vec![0; order] });
                sums.push(0.0);
            }
            let k = points.len() - 1;
            points[k].mult[j] += 1;
            sums[k] += v;
            last = v;
        }
        for (p, s) in points.iter_mut().zip(sums) {
            p.value = s / p.total() as f64;
        }
        IsotypicSpectrum { points }
    }

    pub fn dim(&self) -> usize {
        self.points.iter().map(SpectralPoint::total).sum()
    }

    /// Eigenvalues repeated by total multiplicity, ascending.
    pub fn flattened(&self) -> Vec<f64> {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.value, p.total()))
            .collect()
    }
}

impl SpectralPoint {
    pub fn total(&self) -> usize {
        self.mult.iter().sum()
    }

    pub fn trace_at(&self, h_power: i64) -> Complex64 {
        let order = self.mult.len();
        self.mult
            .iter()
            .enumerate()
            .map(|(j, &m)| character_value(order, j, h_power) * m as f64)
            .sum()
    }
}

impl RepElement {
    pub fn zero(order: usize) -> Self {
        RepElement { coeffs: vec![0; order] }
    }

    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("representation of the empty group".into()));
        }
        Ok(RepElement { coeffs })
    }

    /// One copy of character `j`.
    pub fn unit(order: usize, j: usize) -> Self {
        let mut r = Self::zero(order);
        r.coeffs[j] = 1;
        r
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> i64 {
        self.coeffs[j]
    }

    pub fn add_to(&mut self, j: usize, amount: i64) {
        self.coeffs[j] += amount;
    }

    /// Virtual dimension (trace at the identity).
    pub fn dimension(&self) -> i64 {
        self.coeffs.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// `Tr(h, r) = Σ_j r_j χ_j(h)` with `h = g^{h_power}`.
    pub fn character_trace(&self, h_power: i64) -> Complex64 {
        let order = self.order();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &m)| character_value(order, j, h_power) * m as f64)
            .sum()
    }

    /// Inverse of [`RepElement::character_trace`] over all group elements.
    pub fn from_traces(traces: &[Complex64]) -> Result<Self> {
        let order = traces.len();
        let coeffs = (0..order)
            .map(|j| {
                let z: Complex64 = traces
                    .iter()
                    .enumerate()
                    .map(|(k, &t)| t * character_value(order, j, k as i64).conj())
                    .sum::<Complex64>()
                    / order as f64;
                let rounded = z.re.round();
                if (z - Complex64::new(rounded, 0.0)).norm() > 1e-6 {
                    Err(Error::InvalidArgument(format!("trace data is not a character: coefficient {z}")))
                } else {
                    Ok(rounded as i64)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        RepElement::new(coeffs)
    }
}

impl fmt::Display for RepElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| format!("{c}·χ{j}"))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Add for &RepElement {
    type Output = RepElement;
    fn add(self, rhs: &RepElement) -> RepElement {
        assert_eq!(self.order(), rhs.order(), "representations of different groups");
        RepElement { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &RepElement {
    type Output = RepElement;
    fn sub(self, rhs: &RepElement) -> RepElement {
        self + &(-rhs)
    }
}

impl Neg for &RepElement {
    type Output = RepElement;
    fn neg(self) -> RepElement {
        RepElement { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}
