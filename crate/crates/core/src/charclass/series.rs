use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponent vector over the generators of a [`FormSeries`].
pub type Monomial = Vec<u32>;

/// Truncated polynomial algebra over ℂ in commuting generators of form degree
/// two (Chern roots), keeping only terms of form degree `≤ dmax`.
///
/// Arithmetic operators panic when the operands use different generator
/// lists or truncation degrees; that is a programming error, not a data one.
#[derive(Clone, PartialEq)]
pub struct FormSeries {
    vars: Arc<[String]>,
    dmax: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl fmt::Debug for FormSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (m, z) in &self.terms {
            let name: Vec<String> = m
                .iter()
                .zip(self.vars.iter())
                .filter(|(e, _)| **e > 0)
                .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            list.entry(&if name.is_empty() { "1".to_string() } else { name.join("·") }, z);
        }
        list.finish()
    }
}

fn form_degree(m: &[u32]) -> usize {
    2 * m.iter().map(|&e| e as usize).sum::<usize>()
}

impl FormSeries {
    pub fn zero(vars: Arc<[String]>, dmax: usize) -> Self {
        FormSeries { vars, dmax, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Arc<[String]>, dmax: usize, z: Complex64) -> Self {
        let mut s = FormSeries::zero(vars, dmax);
        s.insert(vec![0; s.vars.len()], z);
        s
    }

    pub fn one(vars: Arc<[String]>, dmax: usize) -> Self {
        FormSeries::constant(vars, dmax, Complex64::one())
    }

    /// The generator named `name`; unknown names are an error.
    pub fn generator(vars: Arc<[String]>, dmax: usize, name: &str) -> Result<Self> {
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown generator {name}")))?;
        let mut m = vec![0; vars.len()];
        m[i] = 1;
        let mut s = FormSeries::zero(vars, dmax);
        s.insert(m, Complex64::one());
        Ok(s)
    }

    /// Single term `z · Π x_i^{e_i}`.
    pub fn monomial(vars: Arc<[String]>, dmax: usize, exponents: Monomial, z: Complex64) -> Self {
        assert_eq!(exponents.len(), vars.len(), "exponent vector length");
        let mut s = FormSeries::zero(vars, dmax);
        s.insert(exponents, z);
        s
    }

    fn insert(&mut self, m: Monomial, z: Complex64) {
        if form_degree(&m) > self.dmax || z == Complex64::zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert(Complex64::zero());
        *entry += z;
        if *entry == Complex64::zero() {
            self.terms.remove(&m);
        }
    }

    fn check_compatible(&self, other: &FormSeries) {
        assert!(
            self.dmax == other.dmax && self.vars == other.vars,
            "series over different generators or truncation degrees"
        );
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn dmax(&self) -> usize {
        self.dmax
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &[u32]) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|z| *z == Complex64::zero())
    }

    pub fn scale(&self, z: Complex64) -> Self {
        let mut out = FormSeries::zero(self.vars.clone(), self.dmax);
        for (m, c) in &self.terms {
            out.insert(m.clone(), c * z);
        }
        out
    }

    /// Terms of exactly form degree `deg`.
    pub fn degree_part(&self, deg: usize) -> Self {
        FormSeries {
            vars: self.vars.clone(),
            dmax: self.dmax,
            terms: self.terms.iter().filter(|(m, _)| form_degree(m) == deg).map(|(m, z)| (m.clone(), *z)).collect(),
        }
    }

    /// Largest coefficientwise difference.
    pub fn max_abs_diff(&self, other: &FormSeries) -> f64 {
        self.check_compatible(other);
        (self - other).terms.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(FormSeries::one(self.vars.clone(), self.dmax), |acc, _| &acc * self)
    }

    /// `1/self`, via the geometric series in the nilpotent part.
    pub fn invert(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.norm() == 0.0 {
            return Err(Error::NonUnit);
        }
        let one = FormSeries::one(self.vars.clone(), self.dmax);
        let x = &self.scale(c0.inv()) - &one;
        let mut acc = one.clone();
        let mut power = one;
        for k in 1..=self.dmax / 2 {
            power = &power * &x;
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            acc = &acc + &power.scale(Complex64::new(sign, 0.0));
        }
        Ok(acc.scale(c0.inv()))
    }

    /// `Σ_k coeffs[k] · self^k`; requires a nilpotent argument (zero constant term).
    pub fn compose(&self, coeffs: &[Complex64]) -> Result<Self> {
        if self.constant_term().norm() != 0.0 {
            return Err(Error::Precondition("can only substitute a series without constant term".into()));
        }
        let mut acc = FormSeries::zero(self.vars.clone(), self.dmax);
        let mut power = FormSeries::one(self.vars.clone(), self.dmax);
        for (k, &ck) in coeffs.iter().enumerate() {
            if k > 0 {
                power = &power * self;
                if power.is_zero() {
                    break;
                }
            }
            acc = &acc + &power.scale(ck);
        }
        Ok(acc)
    }

    /// Taylor expansion `f(a + self) = Σ f^{(k)}(a)/k! · self^k`, given the
    /// derivatives `f^{(k)}(a)`.
    pub fn taylor(&self, derivative: impl Fn(usize) -> Complex64) -> Result<Self> {
        let mut factorial = 1.0;
        let coeffs: Vec<Complex64> = (0..=self.dmax / 2)
            .map(|k| {
                if k > 0 {
                    factorial *= k as f64;
                }
                derivative(k) / factorial
            })
            .collect();
        self.compose(&coeffs)
    }
}

impl Add for &FormSeries {
    type Output = FormSeries;

    fn add(self, rhs: &FormSeries) -> FormSeries {
        self.check_compatible(rhs);
        let mut out = self.clone();
        for (m, z) in &rhs.terms {
            out.insert(m.clone(), *z);
        }
        out
    }
}

impl Neg for &FormSeries {
    type Output = FormSeries;

    fn neg(self) -> FormSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &FormSeries {
    type Output = FormSeries;

    fn sub(self, rhs: &FormSeries) -> FormSeries {
        self + &(-rhs)
    }
}

impl Mul for &FormSeries {
    type Output = FormSeries;

    fn mul(self, rhs: &FormSeries) -> FormSeries {
        self.check_compatible(rhs);
        let mut out = FormSeries::zero(self.vars.clone(), self.dmax);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                let m: Monomial = a.iter().zip(b).map(|(i, j)| i + j).collect();
                out.insert(m, x * y);
            }
        }
        out
    }
}

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = −1/2`), exact.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(BigRational::one());
            continue;
        }
        // Σ_{j=0}^{m} C(m+1, j) B_j = 0
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Coefficients `a_k` of `x^{2k}` in `(x/2)/sin(x/2)`, for `k ≤ max_k`:
/// `a_k = (−1)^{k+1} (2^{2k} − 2) B_{2k} / ((2k)! 4^k)`.
pub fn ahat_coefficients(max_k: usize) -> Vec<BigRational> {
    let b = bernoulli_numbers(2 * max_k);
    (0..=max_k)
        .map(|k| {
            if k == 0 {
                return BigRational::one();
            }
            let two_pow = BigInt::one() << (2 * k);
            let num = (two_pow.clone() - BigInt::from(2)) * if k % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            let den = factorial(2 * k) * two_pow;
            BigRational::from_integer(num) * &b[2 * k] / BigRational::from_integer(den)
        })
        .collect()
}

/// `c_j = j!/(2j+1)!`, the weight of `Tr(ω^{2j+1})` in the odd Chern character.
pub fn odd_chern_coefficient(j: usize) -> BigRational {
    BigRational::new(factorial(j), factorial(2 * j + 1))
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `Π_i (x_i/2)/sin(x_i/2)` over the given roots (arbitrary nilpotent series).
pub fn ahat_factor(roots: &[FormSeries], vars: Arc<[String]>, dmax: usize) -> Result<FormSeries> {
    let coeffs = ahat_coefficients(dmax / 4 + 1);
    let mut even = Vec::with_capacity(2 * coeffs.len());
    for q in &coeffs {
        even.push(Complex64::new(rational_to_f64(q), 0.0));
        even.push(Complex64::zero());
    }
    roots.iter().try_fold(FormSeries::one(vars, dmax), |acc, r| Ok(&acc * &r.compose(&even)?))
}
