use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::pfaffian::{block_antisymmetric, pfaffian};
use super::series::{ahat_factor, odd_chern_coefficient, rational_to_f64, FormSeries, Monomial};
use crate::error::{Error, Result};

/// Overall sign of the fixed-point density, fixed by requiring the full
/// circle to reproduce the Toeplitz index `−deg(det g)`.
pub const GLOBAL_SIGN: f64 = -1.0;

/// Phase contributed by each normal 2-plane once the sine factor is written
/// as the real `2 sin((θ + v)/2)`; with it the product form and the
/// Pfaffian form of the density coincide.
pub const NORMAL_PHASE: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `GLOBAL_SIGN · (−√−1/2π)^{(k+1)/2} · NORMAL_PHASE^s` for a fixed
/// component of dimension `k` with `s` normal planes.
pub fn prefactor(dim_f: usize, s: usize) -> Complex64 {
    let base = Complex64::new(0.0, -1.0 / (2.0 * PI));
    base.powu(dim_f.div_ceil(2) as u32) * NORMAL_PHASE.powu(s as u32) * GLOBAL_SIGN
}

/// An odd-degree form on the fixed component, known only through its
/// name and degree.
#[derive(Clone, Debug, PartialEq)]
pub struct OddForm {
    pub form: String,
    pub degree: usize,
    pub coeff: Complex64,
}

/// Odd Chern character `Σ_j c_j Tr(ω^{2j+1})` as a combination of named odd forms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OddChernCharacter {
    pub terms: Vec<OddForm>,
}

/// A value of `Tr((g⁻¹dg)^{2j+1})`, a form of degree `2j+1` called `form`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDatum {
    pub j: usize,
    pub form: String,
    #[serde(with = "complex_pair")]
    pub value: Complex64,
}

/// Weights each trace by `c_j = j!/(2j+1)!`.
pub fn odd_chern_character(traces: &[TraceDatum]) -> OddChernCharacter {
    OddChernCharacter {
        terms: traces
            .iter()
            .map(|t| OddForm {
                form: t.form.clone(),
                degree: 2 * t.j + 1,
                coeff: t.value * rational_to_f64(&odd_chern_coefficient(t.j)),
            })
            .collect(),
    }
}

/// Characteristic numbers of the fixed component: the integral over `F` of
/// an odd form times a monomial in the Chern roots.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Integrator {
    values: BTreeMap<(String, Monomial), Complex64>,
}

impl Integrator {
    pub fn insert(&mut self, form: &str, monomial: Monomial, value: Complex64) {
        self.values.insert((form.to_string(), monomial), value);
    }

    pub fn get(&self, form: &str, monomial: &[u32]) -> Option<Complex64> {
        self.values.get(&(form.to_string(), monomial.to_vec())).copied()
    }
}

/// One connected fixed component `F` of `h`.
#[derive(Clone, Debug)]
pub struct FixedPointData {
    dim_f: usize,
    angles: Vec<f64>,
    vars: Arc<[String]>,
    chern: OddChernCharacter,
    integrator: Integrator,
}

fn check_angle(theta: f64) -> Result<()> {
    let reduced = theta.rem_euclid(2.0 * PI);
    if reduced.min(2.0 * PI - reduced) < 1e-12 {
        return Err(Error::SingularAngle(theta));
    }
    Ok(())
}

impl FixedPointData {
    /// `f_roots` name the `(k−1)/2` Chern roots of `TF`, `nu_roots` the `s`
    /// roots of the normal bundle, one per angle.
    pub fn new(
        dim_f: usize,
        angles: Vec<f64>,
        f_roots: Vec<String>,
        nu_roots: Vec<String>,
        chern: OddChernCharacter,
        integrator: Integrator,
    ) -> Result<Self> {
        if dim_f % 2 == 0 {
            return Err(Error::InvalidArgument(format!("fixed component dimension {dim_f} must be odd")));
        }
        if f_roots.len() != dim_f / 2 {
            return Err(Error::InvalidArgument(format!(
                "a {dim_f}-dimensional component has {} tangent roots, got {}",
                dim_f / 2,
                f_roots.len()
            )));
        }
        if nu_roots.len() != angles.len() {
            return Err(Error::InvalidArgument(format!(
                "{} angles but {} normal roots",
                angles.len(),
                nu_roots.len()
            )));
        }
        angles.iter().try_for_each(|&t| check_angle(t))?;
        let mut names: Vec<String> = f_roots;
        names.extend(nu_roots);
        let mut seen = names.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != names.len() {
            return Err(Error::InvalidArgument("root names must be distinct".into()));
        }
        if let Some(t) = chern.terms.iter().find(|t| t.degree % 2 == 0 || t.degree > dim_f) {
            return Err(Error::InvalidArgument(format!(
                "form {} has degree {}, need an odd degree ≤ {dim_f}",
                t.form, t.degree
            )));
        }
        Ok(FixedPointData { dim_f, angles, vars: names.into(), chern, integrator })
    }

    pub fn dim_f(&self) -> usize {
        self.dim_f
    }

    pub fn codim(&self) -> usize {
        2 * self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    fn root(&self, i: usize) -> FormSeries {
        FormSeries::generator(self.vars.clone(), self.dim_f, &self.vars[i]).expect("own generator")
    }

    pub fn tangent_roots(&self) -> Vec<FormSeries> {
        (0..self.dim_f / 2).map(|i| self.root(i)).collect()
    }

    pub fn normal_roots(&self) -> Vec<FormSeries> {
        (0..self.angles.len()).map(|i| self.root(self.dim_f / 2 + i)).collect()
    }

    /// `Â(F)` with the root convention `(u/2)/sin(u/2)`.
    pub fn ahat(&self) -> Result<FormSeries> {
        ahat_factor(&self.tangent_roots(), self.vars.clone(), self.dim_f)
    }

    pub fn normal_factor(&self) -> Result<FormSeries> {
        sin_normal_factor(&self.angles, &self.normal_roots(), self.vars.clone(), self.dim_f)
    }

    /// Even part of the density: `prefactor · Â(F) · [Pf-sine]⁻¹`, with the
    /// Pfaffian taken through the general matching sum.
    pub fn characteristic_form_density(&self) -> Result<FormSeries> {
        let inv = if self.angles.is_empty() {
            FormSeries::one(self.vars.clone(), self.dim_f)
        } else {
            pfaffian(&block_antisymmetric(&sine_blocks(&self.angles, &self.normal_roots())?)?)?.invert()?
        };
        Ok((&self.ahat()? * &inv).scale(prefactor(self.dim_f, self.angles.len())))
    }

    /// Even part of the density in product form:
    /// `GLOBAL_SIGN · (−√−1/2π)^{m+1} · j(R^F) · Π_i (−π / sin((v_i + θ_i)/2))`
    /// with `j(R^F) = Π (√−1u/2)/sinh(√−1u/2)` and `2m + 1 = dim F + 2s`.
    pub fn product_form_density(&self) -> Result<FormSeries> {
        let (k, s) = (self.dim_f, self.angles.len());
        let half_i = Complex64::new(0.0, 0.5);
        // sinh(y)/y = Σ y^{2j}/(2j+1)!
        let mut sinh_over: Vec<Complex64> = Vec::new();
        let mut fact = 1.0;
        for n in 0..=k {
            if n > 0 {
                fact *= n as f64;
            }
            sinh_over.push(if n % 2 == 0 { Complex64::new(1.0 / (fact * (n as f64 + 1.0)), 0.0) } else { Complex64::default() });
        }
        let mut acc = FormSeries::one(self.vars.clone(), k);
        for u in self.tangent_roots() {
            acc = &acc * &u.scale(half_i).compose(&sinh_over)?.invert()?;
        }
        for (theta, v) in self.angles.iter().zip(self.normal_roots()) {
            let sine = two_half_sine(*theta, &v)?.scale(Complex64::new(0.5, 0.0));
            acc = &acc * &sine.invert()?.scale(Complex64::new(-PI, 0.0));
        }
        let m_plus_one = (k + 2 * s).div_ceil(2) as u32;
        Ok(acc.scale(Complex64::new(0.0, -1.0 / (2.0 * PI)).powu(m_plus_one) * GLOBAL_SIGN))
    }

    /// `∫_F` of the top-degree part of `ch(g) · even`.
    pub fn integrate_top(&self, even: &FormSeries) -> Result<Complex64> {
        let mut total = Complex64::default();
        for term in &self.chern.terms {
            for (m, z) in even.degree_part(self.dim_f - term.degree).terms() {
                let value = self.integrator.get(&term.form, m).ok_or_else(|| {
                    let mono: Vec<String> = m
                        .iter()
                        .zip(self.vars.iter())
                        .filter(|(e, _)| **e > 0)
                        .map(|(e, v)| format!("{v}^{e}"))
                        .collect();
                    Error::MissingIntegral(format!("{}·[{}]", term.form, mono.join(" ")))
                })?;
                total += term.coeff * z * value;
            }
        }
        Ok(total)
    }
}

/// `2 sin((θ + v)/2)` as a Taylor series in the nilpotent root `v`.
fn two_half_sine(theta: f64, v: &FormSeries) -> Result<FormSeries> {
    check_angle(theta)?;
    let half = v.scale(Complex64::new(0.5, 0.0));
    let s = half.taylor(|k| Complex64::new((theta / 2.0 + k as f64 * PI / 2.0).sin(), 0.0))?;
    Ok(s.scale(Complex64::new(2.0, 0.0)))
}

fn sine_blocks(angles: &[f64], roots: &[FormSeries]) -> Result<Vec<FormSeries>> {
    angles.iter().zip(roots).map(|(&t, v)| two_half_sine(t, v)).collect()
}

/// `Π_i [2 sin((θ_i + v_i)/2)]⁻¹`, the inverse Pfaffian of the block-diagonal
/// sine matrix, computed block by block.
pub fn sin_normal_factor(angles: &[f64], roots: &[FormSeries], vars: Arc<[String]>, dmax: usize) -> Result<FormSeries> {
    if angles.len() != roots.len() {
        return Err(Error::InvalidArgument("one normal root per angle".into()));
    }
    sine_blocks(angles, roots)?
        .iter()
        .try_fold(FormSeries::one(vars, dmax), |acc, b| Ok(&acc * &b.invert()?))
}

/// Contribution of one fixed component to `Ind(h, T_g)`.
pub fn lefschetz_contribution(data: &FixedPointData) -> Result<Complex64> {
    let even = &data.ahat()? * &data.normal_factor()?;
    Ok(data.integrate_top(&even)? * prefactor(data.dim_f, data.angles.len()))
}

/// Sum over all fixed components; an empty list gives exactly zero.
pub fn lefschetz_sum(components: &[FixedPointData]) -> Result<Complex64> {
    components.iter().map(lefschetz_contribution).sum()
}

/// The whole circle as its own fixed set with `g = e^{ikθ}`:
/// `Tr(g⁻¹dg) = √−1 k dθ` and `∫ dθ = 2π`.
pub fn circle_calibration_data(k: i64) -> FixedPointData {
    let chern = odd_chern_character(&[TraceDatum { j: 0, form: "dtheta".into(), value: Complex64::new(0.0, k as f64) }]);
    let mut integrator = Integrator::default();
    integrator.insert("dtheta", vec![], Complex64::new(2.0 * PI, 0.0));
    FixedPointData::new(1, vec![], vec![], vec![], chern, integrator).expect("valid circle data")
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// On-disk form of a list of fixed components.
///
/// ```toml
/// expected = [-1.0, 0.0]      # optional reference value of the sum
///
/// [[component]]
/// dim_f = 1
/// angles = []
/// trace = [{ j = 0, form = "dtheta", value = [0.0, 1.0] }]
/// integral = [{ form = "dtheta", monomial = {}, value = [6.283185307179586, 0.0] }]
/// ```
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<[f64; 2]>,
    #[serde(default)]
    pub component: Vec<ComponentSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub dim_f: usize,
    #[serde(default)]
    pub angles: Vec<f64>,
    #[serde(default)]
    pub f_roots: Vec<String>,
    #[serde(default)]
    pub nu_roots: Vec<String>,
    #[serde(default)]
    pub trace: Vec<TraceDatum>,
    #[serde(default)]
    pub integral: Vec<IntegralSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralSpec {
    pub form: String,
    #[serde(default)]
    pub monomial: BTreeMap<String, u32>,
    #[serde(with = "complex_pair")]
    pub value: Complex64,
}

impl ComponentSpec {
    pub fn build(&self) -> Result<FixedPointData> {
        let mut names = self.f_roots.clone();
        names.extend(self.nu_roots.iter().cloned());
        let mut integrator = Integrator::default();
        for entry in &self.integral {
            let mut mono = vec![0; names.len()];
            for (root, &e) in &entry.monomial {
                let i = names
                    .iter()
                    .position(|n| n == root)
                    .ok_or_else(|| Error::InvalidArgument(format!("integral refers to unknown root {root}")))?;
                mono[i] = e;
            }
            integrator.insert(&entry.form, mono, entry.value);
        }
        FixedPointData::new(
            self.dim_f,
            self.angles.clone(),
            self.f_roots.clone(),
            self.nu_roots.clone(),
            odd_chern_character(&self.trace),
            integrator,
        )
    }
}

impl FixedPointFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse { path: "<fixed-point data>".into(), message: e.to_string() })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn components(&self) -> Result<Vec<FixedPointData>> {
        self.component.iter().map(ComponentSpec::build).collect()
    }
}
