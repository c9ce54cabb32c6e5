//! Odd complex Clifford algebras `C(n)`, their spin representation and the
//! symbol map onto the exterior algebra.
//!
//! Monomials `c_A = c_{a_1} c_{a_2} ⋯ c_{a_k}` with `a_1 < ⋯ < a_k` are
//! indexed by bitmasks: bit `i - 1` is set when generator `c_i` occurs.
//! Generators satisfy `c_i c_j + c_j c_i = -2 δ_ij`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, I};

/// Largest supported ambient dimension; the symbol representation is `2ⁿ × 2ⁿ`.
pub const MAX_DIM: usize = 11;

pub struct CliffordAlgebra {
    n: usize,
    m: usize,
    generators: Vec<CMatrix>,
    monomial_reps: OnceLock<Vec<CMatrix>>,
}

impl fmt::Debug for CliffordAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CliffordAlgebra").field("n", &self.n).finish()
    }
}

/// Element of `C(n) ⊗ ℂ` in the canonical monomial basis.
#[derive(Clone, Debug)]
pub struct CliffordElement {
    algebra: Arc<CliffordAlgebra>,
    coeffs: Vec<Complex64>,
}

/// Image of an element under the symbol map, acting on `Λℂⁿ` with the
/// subset-indexed basis `e_S` (bit order as for monomials).
#[derive(Clone, Debug)]
pub struct SymbolImage {
    pub matrix: CMatrix,
}

fn pauli() -> [CMatrix; 3] {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    [
        CMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        CMatrix::from_row_slice(2, 2, &[o, -I, I, o]),
        CMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
    ]
}

/// `2m + 1` mutually anticommuting Hermitian involutions of size `2^m`.
fn hermitian_gammas(m: usize) -> Vec<CMatrix> {
    let [sx, sy, sz] = pauli();
    let mut gammas = vec![sx.clone(), sy.clone(), sz.clone()];
    for _ in 1..m {
        let size = gammas[0].nrows();
        let id = CMatrix::identity(size, size);
        let mut next: Vec<CMatrix> = gammas.iter().map(|g| g.kronecker(&sx)).collect();
        next.push(id.kronecker(&sy));
        next.push(id.kronecker(&sz));
        gammas = next;
    }
    gammas
}

/// Sign picked up when moving the generators of `b` past those of `a`
/// into increasing order, including the `c_i² = -1` contractions.
fn monomial_product_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        // generators of `a` with larger index than this one of `b`
        swaps += (a >> (bit + 1)).count_ones();
        rest &= rest - 1;
    }
    swaps += (a & b).count_ones();
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Action of `σ(c_i) = e_i∧ − ι(e_i*)` on the basis form `e_set` (`i` zero-based).
fn symbol_generator_on_basis(i: usize, set: usize) -> (f64, usize) {
    let below = (set & ((1usize << i) - 1)).count_ones();
    let parity = if below % 2 == 0 { 1.0 } else { -1.0 };
    if set & (1 << i) == 0 {
        (parity, set | (1 << i))
    } else {
        (-parity, set & !(1 << i))
    }
}

/// `σ(c_A) e_S = sign · e_{S △ A}`.
fn symbol_monomial_on_basis(monomial: usize, set: usize) -> (f64, usize) {
    let mut sign = 1.0;
    let mut current = set;
    // rightmost generator acts first
    for i in (0..usize::BITS as usize).rev() {
        if monomial & (1 << i) != 0 {
            let (s, next) = symbol_generator_on_basis(i, current);
            sign *= s;
            current = next;
        }
    }
    (sign, current)
}

impl CliffordAlgebra {
    pub fn new(n: usize) -> Result<Arc<Self>> {
        if n % 2 == 0 || !(3..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "Clifford dimension must be odd and in 3..={MAX_DIM}, got {n}"
            )));
        }
        let m = (n - 1) / 2;
        let mut generators: Vec<CMatrix> = hermitian_gammas(m).into_iter().map(|g| g * I).collect();
        let mut algebra = CliffordAlgebra {
            n,
            m,
            generators: generators.clone(),
            monomial_reps: OnceLock::new(),
        };
        let gamma = algebra.chirality_matrix();
        if gamma[(0, 0)].re < 0.0 {
            let last = generators.len() - 1;
            generators[last] = -generators[last].clone();
            algebra.generators = generators;
        }
        Ok(Arc::new(algebra))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_dim(&self) -> usize {
        self.m
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.m
    }

    pub fn num_monomials(&self) -> usize {
        1 << self.n
    }

    /// Spin-representation matrix of generator `c_i`, `i` in `1..=n`.
    pub fn generator_matrix(&self, i: usize) -> &CMatrix {
        &self.generators[i - 1]
    }

    pub fn top_mask(&self) -> usize {
        self.num_monomials() - 1
    }

    fn chirality_matrix(&self) -> CMatrix {
        let mut prod = CMatrix::identity(self.spin_dim(), self.spin_dim());
        for g in &self.generators {
            prod = &prod * g;
        }
        prod * I.powu(self.m as u32 + 1)
    }

    fn monomial_reps(&self) -> &[CMatrix] {
        self.monomial_reps.get_or_init(|| {
            let d = self.spin_dim();
            let mut reps = Vec::with_capacity(self.num_monomials());
            reps.push(CMatrix::identity(d, d));
            for mask in 1..self.num_monomials() {
                // drop the highest generator; it multiplies on the right
                let hi = usize::BITS - 1 - mask.leading_zeros();
                let lower = mask & !(1 << hi);
                reps.push(&reps[lower] * &self.generators[hi as usize]);
            }
            reps
        })
    }
}

impl CliffordElement {
    pub fn zero(algebra: &Arc<CliffordAlgebra>) -> Self {
        CliffordElement {
            algebra: Arc::clone(algebra),
            coeffs: vec![Complex64::new(0.0, 0.0); algebra.num_monomials()],
        }
    }

    pub fn scalar(algebra: &Arc<CliffordAlgebra>, value: Complex64) -> Self {
        Self::monomial(algebra, 0, value)
    }

    pub fn monomial(algebra: &Arc<CliffordAlgebra>, mask: usize, value: Complex64) -> Self {
        let mut e = Self::zero(algebra);
        e.coeffs[mask] = value;
        e
    }

    /// Generator `c_i`, `i` in `1..=n`.
    pub fn generator(algebra: &Arc<CliffordAlgebra>, i: usize) -> Self {
        Self::monomial(algebra, 1 << (i - 1), c(1.0, 0.0))
    }

    /// Product of the listed generators in the given order.
    pub fn word(algebra: &Arc<CliffordAlgebra>, indices: &[usize]) -> Self {
        indices.iter().fold(Self::scalar(algebra, c(1.0, 0.0)), |acc, &i| {
            acc.multiply(&Self::generator(algebra, i)).expect("same algebra")
        })
    }

    /// `Γ = (√−1)^{m+1} c₁⋯cₙ`.
    pub fn chirality(algebra: &Arc<CliffordAlgebra>) -> Self {
        let all: Vec<usize> = (1..=algebra.n).collect();
        Self::word(algebra, &all).scale(I.powu(algebra.m as u32 + 1))
    }

    /// Builds an element from its full coefficient vector (length `2ⁿ`).
    pub fn from_coeffs(algebra: &Arc<CliffordAlgebra>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != algebra.num_monomials() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                algebra.num_monomials(),
                coeffs.len()
            )));
        }
        Ok(CliffordElement { algebra: Arc::clone(algebra), coeffs })
    }

    pub fn algebra(&self) -> &Arc<CliffordAlgebra> {
        &self.algebra
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> Complex64 {
        self.coeffs[mask]
    }

    pub fn scalar_part(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn scale(&self, z: Complex64) -> Self {
        CliffordElement {
            algebra: Arc::clone(&self.algebra),
            coeffs: self.coeffs.iter().map(|&x| x * z).collect(),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.algebra.n != other.algebra.n {
            return Err(Error::InvalidArgument(format!(
                "elements of C({}) and C({}) cannot be combined",
                self.algebra.n, other.algebra.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(CliffordElement {
            algebra: Arc::clone(&self.algebra),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    /// Canonical-form product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for (a, &x) in self.coeffs.iter().enumerate().filter(|(_, x)| **x != Complex64::new(0.0, 0.0)) {
            for (b, &y) in other.coeffs.iter().enumerate().filter(|(_, y)| **y != Complex64::new(0.0, 0.0)) {
                out[a ^ b] += x * y * monomial_product_sign(a, b);
            }
        }
        Ok(CliffordElement { algebra: Arc::clone(&self.algebra), coeffs: out })
    }

    /// Matrix in the irreducible `2^m`-dimensional representation with `Γ = Id`.
    pub fn spin_rep(&self) -> CMatrix {
        let reps = self.algebra.monomial_reps();
        let d = self.algebra.spin_dim();
        self.coeffs
            .iter()
            .zip(reps)
            .filter(|(x, _)| **x != Complex64::new(0.0, 0.0))
            .fold(CMatrix::zeros(d, d), |acc, (&x, r)| acc + r * x)
    }

    pub fn symbol(&self) -> SymbolImage {
        let dim = self.algebra.num_monomials();
        let mut matrix = CMatrix::zeros(dim, dim);
        for (mask, &x) in self.coeffs.iter().enumerate().filter(|(_, x)| **x != Complex64::new(0.0, 0.0)) {
            for set in 0..dim {
                let (sign, target) = symbol_monomial_on_basis(mask, set);
                matrix[(target, set)] += x * sign;
            }
        }
        SymbolImage { matrix }
    }

    /// `σ(self)` applied to the unit form `1 ∈ Λ⁰`, without forming the matrix.
    pub fn symbol_on_unit(&self) -> CVector {
        let dim = self.algebra.num_monomials();
        let mut v = CVector::zeros(dim);
        for (mask, &x) in self.coeffs.iter().enumerate() {
            if x != Complex64::new(0.0, 0.0) {
                let (sign, target) = symbol_monomial_on_basis(mask, 0);
                v[target] += x * sign;
            }
        }
        v
    }

    /// Spin trace from the top-degree part of `σ(x)·1`:
    /// `Tr_S(x) = −√−1 (−2√−1)^m (σ(x)1)_{[n]}`, valid for non-scalar `x`.
    pub fn trace_spin_via_symbol(&self) -> Result<Complex64> {
        if self.scalar_part() != Complex64::new(0.0, 0.0) {
            return Err(Error::Precondition(
                "the symbol trace formula holds only for elements without a scalar part".into(),
            ));
        }
        let top = self.symbol_on_unit()[self.algebra.top_mask()];
        let m = self.algebra.m as u32;
        Ok(-I * (c(0.0, -2.0)).powu(m) * top)
    }
}

impl SymbolImage {
    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    /// Coefficient of `e₁∧⋯∧eₙ` in `σ(x)·1`.
    pub fn top_of_unit(&self) -> Complex64 {
        self.matrix[(self.matrix.nrows() - 1, 0)]
    }
}
