//! Scenario configuration: a TOML file, command-line overrides, and the
//! resolved [`Scenario`] echoed into every report.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use oddindex::charclass::{FixedPointData, FixedPointFile};
use oddindex::circle::{CircleModel, MatrixLoop};
use oddindex::clifford::MAX_DIM;
use oddindex::eta::{admissible_epsilon_window, DEFAULT_QUADRATURE_ORDER, MAX_QUADRATURE_ORDER};
use oddindex::specflow::DEFAULT_GRID;
use serde::{Deserialize, Serialize};

use crate::cli::ScenarioArgs;

/// Level offset used on the `P` path; keeps the level away from `±(1 − 2u)`
/// crossings at grid points.
pub const DEFAULT_P_DELTA: f64 = 0.3;
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_VARIATION_PAIRS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Library(#[from] oddindex::error::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    CliffordCheck,
    Index,
    Specflow,
    Eta,
    Lefschetz,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::CliffordCheck, Suite::Index, Suite::Specflow, Suite::Eta, Suite::Lefschetz];
}

/// On-disk scenario. Every field is optional; flags override it.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: Option<u64>,
    pub checks: Option<Vec<Suite>>,
    pub output: Option<PathBuf>,
    pub model: ModelSection,
    pub flow: FlowSection,
    pub eta: EtaSection,
    pub clifford: CliffordSection,
    pub lefschetz: LefschetzSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub loop_file: Option<PathBuf>,
    pub windings: Option<Vec<i64>>,
    pub group_order: Option<usize>,
    pub truncation: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    pub grid: Option<usize>,
    pub delta: Option<f64>,
    pub p_delta: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtaSection {
    pub epsilon: Option<f64>,
    pub quadrature_order: Option<usize>,
    pub h_power: Option<i64>,
    pub variation_pairs: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliffordSection {
    pub dims: Option<Vec<usize>>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LefschetzSection {
    pub data_file: Option<PathBuf>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::File { path: path.to_path_buf(), message: e.to_string() })?;
        let mut file: ScenarioFile =
            toml::from_str(&text).map_err(|e| ConfigError::File { path: path.to_path_buf(), message: e.to_string() })?;
        // Paths inside a config file are relative to the file.
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut file.model.loop_file, &mut file.lefschetz.data_file, &mut file.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(file)
    }
}

/// Where the matrix loop comes from.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopSource {
    File(PathBuf),
    Windings(Vec<i64>),
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelConfig {
    #[serde(rename = "loop")]
    pub source: LoopSource,
    pub group_order: usize,
    pub truncation: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowConfigEcho {
    pub grid: usize,
    pub delta: Option<f64>,
    pub p_delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaConfig {
    pub epsilon: f64,
    pub quadrature_order: usize,
    pub h_powers: Vec<i64>,
    pub variation_pairs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CliffordConfig {
    pub dims: Vec<usize>,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LefschetzConfig {
    pub data_file: Option<PathBuf>,
}

/// Fully resolved and validated run parameters.
#[derive(Clone, Debug, Serialize)]
pub struct Scenario {
    pub seed: u64,
    pub checks: Vec<Suite>,
    pub model: ModelConfig,
    pub flow: FlowConfigEcho,
    pub eta: EtaConfig,
    pub clifford: CliffordConfig,
    pub lefschetz: LefschetzConfig,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// Inputs built once per run and shared by the suites.
pub struct Prepared {
    pub scenario: Scenario,
    pub model: CircleModel,
    pub fixed_points: Option<(Vec<FixedPointData>, [f64; 2])>,
}

fn load_loop(source: &LoopSource) -> Result<(MatrixLoop, Option<usize>), ConfigError> {
    match source {
        LoopSource::File(path) => Ok(MatrixLoop::from_file(path)?),
        LoopSource::Windings(w) if w.is_empty() => Err(invalid("at least one winding is needed")),
        LoopSource::Windings(w) => Ok((MatrixLoop::diagonal(w), None)),
    }
}

/// Merges file values and flags (flags win), fills defaults, loads the
/// referenced files and validates every parameter range.
pub fn resolve(args: &ScenarioArgs, default_checks: Option<Vec<Suite>>) -> Result<Prepared, ConfigError> {
    let file = match &args.config {
        Some(path) => ScenarioFile::load(path)?,
        None => ScenarioFile::default(),
    };

    let source = match (&args.loop_file, &args.winding, &file.model.loop_file, &file.model.windings) {
        (Some(p), _, _, _) => LoopSource::File(p.clone()),
        (None, Some(w), _, _) => LoopSource::Windings(w.clone()),
        (None, None, Some(p), _) => LoopSource::File(p.clone()),
        (None, None, None, Some(w)) => LoopSource::Windings(w.clone()),
        (None, None, None, None) => LoopSource::Windings(vec![2]),
    };
    let (lp, file_order) = load_loop(&source)?;
    let group_order = args.group_order.or(file.model.group_order).or(file_order).unwrap_or(2);
    if group_order == 0 {
        return Err(invalid("group order must be at least 1"));
    }
    if !lp.is_equivariant(group_order) {
        return Err(invalid(format!(
            "the loop has Fourier modes not divisible by the group order {group_order}, so it is not invariant under the rotation"
        )));
    }
    let guard = CircleModel::guard_truncation(&lp);
    let truncation = args.truncation.or(file.model.truncation).unwrap_or(guard);
    if truncation < guard {
        return Err(invalid(format!("truncation {truncation} is inside the guard band; need at least {guard}")));
    }
    let model = CircleModel::new(lp, truncation, group_order)?;

    let grid = args.grid.or(file.flow.grid).unwrap_or(DEFAULT_GRID);
    if grid < 2 {
        return Err(invalid("the flow grid needs at least two points"));
    }
    let delta = args.delta.or(file.flow.delta);
    let p_delta = args.p_delta.or(file.flow.p_delta).unwrap_or(DEFAULT_P_DELTA);
    for (name, d) in [("delta", delta), ("p_delta", Some(p_delta))] {
        if let Some(d) = d {
            if !(d > 0.0 && d < 1.0) {
                return Err(invalid(format!("{name} must lie in (0, 1), got {d}")));
            }
        }
    }

    let (lo, hi) = admissible_epsilon_window(truncation);
    let epsilon = args.epsilon.or(file.eta.epsilon).unwrap_or(lo);
    if !(epsilon >= lo && 2.0 * epsilon <= hi * (1.0 + 1e-12)) {
        return Err(invalid(format!(
            "ε = {epsilon} must satisfy {lo:.6} ≤ ε and 2ε ≤ {hi:.6} for truncation {truncation}"
        )));
    }
    let quadrature_order = args.quadrature_order.or(file.eta.quadrature_order).unwrap_or(DEFAULT_QUADRATURE_ORDER);
    if quadrature_order == 0 || quadrature_order > MAX_QUADRATURE_ORDER {
        return Err(invalid(format!("quadrature order must lie in 1..={MAX_QUADRATURE_ORDER}")));
    }
    let h_powers = match args.h_power.or(file.eta.h_power) {
        Some(h) if h < 0 || h >= group_order as i64 => {
            return Err(invalid(format!("h_power must lie in 0..{group_order}, got {h}")))
        }
        Some(h) => vec![h],
        None => (0..group_order as i64).collect(),
    };
    let variation_pairs = args.variation_pairs.or(file.eta.variation_pairs).unwrap_or(DEFAULT_VARIATION_PAIRS);

    let dims = args.dims.clone().or(file.clifford.dims).unwrap_or_else(|| vec![3, 5, 7]);
    if let Some(&n) = dims.iter().find(|&&n| n % 2 == 0 || !(3..=MAX_DIM).contains(&n)) {
        return Err(invalid(format!("Clifford dimension {n} must be odd and in 3..={MAX_DIM}")));
    }
    let samples = args.samples.or(file.clifford.samples).unwrap_or(DEFAULT_SAMPLES);

    let checks = default_checks.or(file.checks).unwrap_or_else(|| Suite::ALL.to_vec());
    let data_file = args.fixed_point.clone().or(file.lefschetz.data_file);
    let fixed_points = match (&data_file, checks.contains(&Suite::Lefschetz)) {
        (Some(path), true) => {
            let parsed = FixedPointFile::from_file(path)?;
            let expected = parsed.expected.ok_or_else(|| ConfigError::File {
                path: path.clone(),
                message: "fixed-point data needs an `expected` value to compare against".into(),
            })?;
            Some((parsed.components()?, expected))
        }
        _ => None,
    };

    let scenario = Scenario {
        seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        checks,
        model: ModelConfig { source, group_order, truncation },
        flow: FlowConfigEcho { grid, delta, p_delta },
        eta: EtaConfig { epsilon, quadrature_order, h_powers, variation_pairs },
        clifford: CliffordConfig { dims, samples },
        lefschetz: LefschetzConfig { data_file },
        output: args.output.clone().or(file.output),
    };
    Ok(Prepared { scenario, model, fixed_points })
}
