//! Scalar and equivariant spectral flow of sampled paths of Hermitian matrices.
//!
//! Because the group action commutes with every member of the path, each
//! isotypic block evolves independently and the flow through a level `c` in
//! block `j` is the drop of the counting function `N_{<c}` between the two
//! endpoints. Samples along the path localise the crossings: on every
//! sample interval the change of the counting function must be explained by
//! eigenvalues inside a guard window around the level, whose radius is twice
//! the bound on the block's eigenvalue motion over that interval (Weyl). An
//! interval that fails the check is bisected through the refiner.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::equispec::{GroupAction, RepElement};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Produces the path member at an arbitrary parameter `u ∈ [0, 1]`.
pub type Refiner = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

pub const DEFAULT_GRID: usize = 33;

#[derive(Clone)]
pub struct OperatorFamily {
    samples: Vec<(f64, CMatrix)>,
    action: GroupAction,
    refiner: Option<Refiner>,
    velocity: Option<Refiner>,
}

impl std::fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorFamily")
            .field("samples", &self.samples.len())
            .field("dim", &self.action.dim())
            .field("order", &self.action.order())
            .field("refinable", &self.refiner.is_some())
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct FlowConfig {
    /// Upper cap for the level offset `δ`.
    pub max_delta: f64,
    /// Eigenvalues with `|λ| ≤ zero_tol · max(1, ‖spectrum‖)` count as zero.
    pub zero_tol: f64,
    /// Required distance between the level and any endpoint eigenvalue.
    pub level_margin: f64,
    /// Guard radius as a multiple of the eigenvalue-motion bound.
    pub guard_factor: f64,
    pub max_depth: usize,
    /// Fixed `δ` replacing the automatic choice.
    pub delta_override: Option<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { max_delta: 0.5, zero_tol: 1e-9, level_margin: 1e-6, guard_factor: 2.0, max_depth: 20, delta_override: None }
    }
}

/// Net crossing of one character block inside a certified sample interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub u_start: f64,
    pub u_end: f64,
    pub character: usize,
    /// Positive when eigenvalues moved upward through the level.
    pub net: i64,
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub scalar_flow: i64,
    pub equivariant_flow: RepElement,
    pub level: f64,
    pub crossings: Vec<Crossing>,
}

impl FlowResult {
    pub fn trace_at(&self, h_power: i64) -> Complex64 {
        self.equivariant_flow.character_trace(h_power)
    }
}

fn uniform_grid(points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

impl OperatorFamily {
    /// Family given only by samples; certification cannot refine it.
    pub fn from_samples(samples: Vec<(f64, CMatrix)>, action: GroupAction) -> Result<Self> {
        let family = OperatorFamily { samples, action, refiner: None, velocity: None };
        family.validate()?;
        Ok(family)
    }

    /// Samples `refiner` on a uniform grid of `grid` points and keeps it for bisection.
    pub fn from_refiner(action: GroupAction, refiner: Refiner, grid: usize) -> Result<Self> {
        let samples = uniform_grid(grid).into_par_iter().map(|u| (u, refiner(u))).collect();
        let family = OperatorFamily { samples, action, refiner: Some(refiner), velocity: None };
        family.validate()?;
        Ok(family)
    }

    /// Straight line `(1 − u) D₀ + u D₁` with its constant velocity.
    pub fn linear(start: CMatrix, end: CMatrix, action: GroupAction, grid: usize) -> Result<Self> {
        let velocity = &end - &start;
        let (a, b) = (start, end);
        let refiner: Refiner = Arc::new(move |u| &a * Complex64::new(1.0 - u, 0.0) + &b * Complex64::new(u, 0.0));
        Ok(OperatorFamily::from_refiner(action, refiner, grid)?.with_velocity(Arc::new(move |_| velocity.clone())))
    }

    /// Attaches `dD/du`, used by heat integrals along the path.
    pub fn with_velocity(mut self, velocity: Refiner) -> Self {
        self.velocity = Some(velocity);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::InvalidArgument("a family needs at least two samples".into()));
        }
        let first = self.samples[0].0;
        let last = self.samples[self.samples.len() - 1].0;
        if first != 0.0 || last != 1.0 {
            return Err(Error::InvalidArgument(format!("samples must span [0, 1], got [{first}, {last}]")));
        }
        if self.samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument("sample parameters must increase strictly".into()));
        }
        for (_, d) in &self.samples {
            self.action.ensure_equivariant(d, 1e-8)?;
        }
        Ok(())
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn samples(&self) -> &[(f64, CMatrix)] {
        &self.samples
    }

    pub fn start(&self) -> &CMatrix {
        &self.samples[0].1
    }

    pub fn end(&self) -> &CMatrix {
        &self.samples[self.samples.len() - 1].1
    }

    pub fn is_refinable(&self) -> bool {
        self.refiner.is_some()
    }

    /// Path member at `u`; exact for sample points, otherwise needs the refiner.
    pub fn at(&self, u: f64) -> Result<CMatrix> {
        if let Some((_, d)) = self.samples.iter().find(|(v, _)| *v == u) {
            return Ok(d.clone());
        }
        match &self.refiner {
            Some(r) => Ok(r(u)),
            None => Err(Error::InvalidArgument(format!("family has no refiner to evaluate u = {u}"))),
        }
    }

    /// `dD/du` from the attached velocity, or a central difference of the refiner.
    pub fn velocity_at(&self, u: f64) -> Result<CMatrix> {
        if let Some(v) = &self.velocity {
            return Ok(v(u));
        }
        let r = self
            .refiner
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("family has neither velocity nor refiner".into()))?;
        let h = 1e-5;
        Ok((r(u + h) - r(u - h)) / Complex64::new(2.0 * h, 0.0))
    }

    /// Same path traversed from `u = 1` to `u = 0`.
    pub fn reversed(&self) -> Self {
        let samples = self.samples.iter().rev().map(|(u, d)| (1.0 - u, d.clone())).collect();
        let refiner = self.refiner.clone().map(|r| -> Refiner { Arc::new(move |u| r(1.0 - u)) });
        let velocity = self.velocity.clone().map(|v| -> Refiner { Arc::new(move |u| -v(1.0 - u)) });
        OperatorFamily { samples, action: self.action.clone(), refiner, velocity }
    }

    /// Portion over `[a, b]` reparametrised to `[0, 1]` and resampled.
    pub fn restricted(&self, a: f64, b: f64, grid: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
            return Err(Error::InvalidArgument(format!("invalid sub-interval [{a}, {b}]")));
        }
        let r = self
            .refiner
            .clone()
            .ok_or_else(|| Error::InvalidArgument("restriction needs a refiner".into()))?;
        let refiner: Refiner = Arc::new(move |u| r(a + (b - a) * u));
        let mut family = OperatorFamily::from_refiner(self.action.clone(), refiner, grid)?;
        if let Some(v) = self.velocity.clone() {
            let scale = Complex64::new(b - a, 0.0);
            family.velocity = Some(Arc::new(move |u| v(a + (b - a) * u) * scale));
        }
        Ok(family)
    }
}

fn block_eigenvalues(action: &GroupAction, d: &CMatrix) -> Vec<Vec<f64>> {
    (0..action.order()).map(|j| linalg::eigvalsh(&action.compress(j, d))).collect()
}

fn count_below(vals: &[f64], level: f64) -> i64 {
    vals.iter().filter(|&&v| v < level).count() as i64
}

/// Level `−δ` at which the flow is counted.
///
/// `δ` is half the smallest nonzero `|λ|` over both endpoints, capped at
/// `config.max_delta`; when both endpoints are invertible the level is 0.
pub fn choose_level(family: &OperatorFamily, config: &FlowConfig) -> Result<f64> {
    let ends = [
        linalg::eigvalsh(family.start()),
        linalg::eigvalsh(family.end()),
    ];
    if let Some(delta) = config.delta_override {
        let level = -delta;
        if ends.iter().flatten().any(|v| (v - level).abs() < config.level_margin) {
            return Err(Error::LevelSelection(format!("endpoint eigenvalue sits at the level {level}")));
        }
        return Ok(level);
    }
    let scale = ends.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
    let zero = config.zero_tol * scale;
    let invertible = ends.iter().all(|vals| vals.iter().all(|v| v.abs() > zero));
    if invertible && ends.iter().all(|e| !e.is_empty()) {
        return Ok(0.0);
    }
    let smallest = ends
        .iter()
        .flatten()
        .map(|v| v.abs())
        .filter(|&a| a > zero)
        .fold(f64::INFINITY, f64::min);
    if !smallest.is_finite() {
        return Err(Error::LevelSelection("no nonzero eigenvalue at either endpoint".into()));
    }
    let level = -(0.5 * smallest).min(config.max_delta);
    if ends.iter().flatten().any(|v| (v - level).abs() < config.level_margin) {
        return Err(Error::LevelSelection(format!("endpoint eigenvalue sits at the level {level}")));
    }
    Ok(level)
}

struct Sample {
    u: f64,
    matrix: CMatrix,
    blocks: Vec<Vec<f64>>,
}

struct Walker<'a> {
    family: &'a OperatorFamily,
    level: f64,
    config: &'a FlowConfig,
    crossings: Vec<Crossing>,
}

impl Walker<'_> {
    fn sample(&self, u: f64, matrix: CMatrix) -> Sample {
        let blocks = block_eigenvalues(&self.family.action, &matrix);
        Sample { u, matrix, blocks }
    }

    fn window_count(&self, vals: &[f64], radius: f64) -> i64 {
        vals.iter().filter(|&&v| (v - self.level).abs() <= radius).count() as i64
    }

    fn walk(&mut self, left: &Sample, right: &Sample, depth: usize) -> Result<()> {
        let action = &self.family.action;
        let mut found = Vec::new();
        let mut certified = true;
        for j in 0..action.order() {
            let net = count_below(&left.blocks[j], self.level) - count_below(&right.blocks[j], self.level);
            if net == 0 {
                continue;
            }
            let motion = linalg::hermitian_norm_bound(&action.compress(j, &(&right.matrix - &left.matrix)));
            let radius = self.config.guard_factor * motion;
            let window = self
                .window_count(&left.blocks[j], radius)
                .min(self.window_count(&right.blocks[j], radius));
            if net.abs() > window {
                certified = false;
                break;
            }
            found.push(Crossing { u_start: left.u, u_end: right.u, character: j, net });
        }
        if certified {
            self.crossings.extend(found);
            return Ok(());
        }
        let Some(refiner) = &self.family.refiner else {
            return Err(Error::InsufficientResolution(left.u, right.u));
        };
        if depth >= self.config.max_depth {
            return Err(Error::NonConvergence { depth: self.config.max_depth, u: 0.5 * (left.u + right.u) });
        }
        let mid_u = 0.5 * (left.u + right.u);
        let mid = self.sample(mid_u, refiner(mid_u));
        self.walk(left, &mid, depth + 1)?;
        self.walk(&mid, right, depth + 1)
    }
}

/// Equivariant spectral flow through `level`: one unit of `χ_j` for each
/// eigenvalue of block `j` that crosses the level upward.
pub fn spectral_flow_per_character(family: &OperatorFamily, level: f64, config: &FlowConfig) -> Result<FlowResult> {
    let action = &family.action;
    let mut walker = Walker { family, level, config, crossings: Vec::new() };
    let samples: Vec<Sample> = family
        .samples
        .par_iter()
        .map(|(u, d)| walker.sample(*u, d.clone()))
        .collect();
    for end in [&samples[0], &samples[samples.len() - 1]] {
        if end.blocks.iter().flatten().any(|v| (v - level).abs() < config.level_margin) {
            return Err(Error::LevelSelection(format!(
                "endpoint eigenvalue within {} of the level {level}",
                config.level_margin
            )));
        }
    }
    for pair in samples.windows(2) {
        walker.walk(&pair[0], &pair[1], 0)?;
    }
    let mut flow = RepElement::zero(action.order());
    for c in &walker.crossings {
        flow.add_to(c.character, c.net);
    }
    let first = &samples[0];
    let last = &samples[samples.len() - 1];
    for j in 0..action.order() {
        debug_assert_eq!(
            flow.coeff(j),
            count_below(&first.blocks[j], level) - count_below(&last.blocks[j], level)
        );
    }
    let mut crossings = walker.crossings;
    crossings.sort_by(|a, b| a.u_start.total_cmp(&b.u_start).then(a.character.cmp(&b.character)));
    Ok(FlowResult { scalar_flow: flow.dimension(), equivariant_flow: flow, level, crossings })
}

/// Chooses the level and computes the flow.
pub fn spectral_flow(family: &OperatorFamily, config: &FlowConfig) -> Result<FlowResult> {
    let level = choose_level(family, config)?;
    spectral_flow_per_character(family, level, config)
}

/// Whether two paths with common endpoints carry the same equivariant flow.
pub fn homotopy_invariance_check(a: &OperatorFamily, b: &OperatorFamily, config: &FlowConfig) -> Result<bool> {
    if a.action.order() != b.action.order() || linalg::max_abs(&(a.action.generator() - b.action.generator())) > 1e-12 {
        return Err(Error::InvalidArgument("families use different group actions".into()));
    }
    let tol = 1e-10;
    if a.start().shape() != b.start().shape()
        || linalg::max_abs(&(a.start() - b.start())) > tol
        || linalg::max_abs(&(a.end() - b.end())) > tol
    {
        return Err(Error::InvalidArgument("families do not share endpoints".into()));
    }
    let level = choose_level(a, config)?;
    let fa = spectral_flow_per_character(a, level, config)?;
    let fb = spectral_flow_per_character(b, level, config)?;
    Ok(fa.equivariant_flow == fb.equivariant_flow)
}
