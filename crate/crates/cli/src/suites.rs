//! The verification suites. Each returns its records in a fixed order.

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use oddindex::charclass::{circle_calibration_data, lefschetz_contribution, lefschetz_sum};
use oddindex::clifford::{CliffordAlgebra, CliffordElement};
use oddindex::equispec::{GroupAction, RepElement};
use oddindex::eta::{heat_index_characters_multi, character_trace, EtaContext};
use oddindex::linalg::CMatrix;
use oddindex::specflow::{spectral_flow, FlowConfig, FlowResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{Prepared, Suite};
use crate::report::{complex, Record};

pub const CLIFFORD_TOL: f64 = 1e-10;
pub const HEAT_TOL: f64 = 1e-3;
pub const DRIFT_TOL: f64 = 1e-4;
pub const VARIATION_REL_TOL: f64 = 1e-5;
pub const VARIATION_STEP: f64 = 1e-5;
pub const LEFSCHETZ_TOL: f64 = 1e-9;
const VARIATION_DIM: usize = 6;

/// Lazily computed quantities shared between suites.
pub struct Runner<'a> {
    prep: &'a Prepared,
    timing: bool,
    index: OnceLock<Result<(RepElement, RepElement), String>>,
    d_flow: OnceLock<Result<FlowResult, String>>,
}

fn rep_json(r: &RepElement) -> Value {
    json!(r.coeffs())
}

fn rep_distance(a: &RepElement, b: &RepElement) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).abs()).max().unwrap_or(0) as f64
}

impl<'a> Runner<'a> {
    pub fn new(prep: &'a Prepared, timing: bool) -> Self {
        Runner { prep, timing, index: OnceLock::new(), d_flow: OnceLock::new() }
    }

    pub fn run(&self, suite: Suite) -> Vec<Record> {
        match suite {
            Suite::CliffordCheck => self.clifford(),
            Suite::Index => self.index_suite(),
            Suite::Specflow => self.specflow(),
            Suite::Eta => self.eta(),
            Suite::Lefschetz => self.lefschetz(),
        }
    }

    fn timed(&self, f: impl FnOnce() -> Record) -> Record {
        let start = Instant::now();
        let mut r = f();
        if self.timing {
            r.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        r
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.prep.scenario.seed);
        rng.set_stream(stream);
        rng
    }

    fn model_inputs(&self) -> Value {
        let m = &self.prep.scenario.model;
        json!({ "group_order": m.group_order, "truncation": m.truncation, "size": self.prep.model.matrix_loop().size() })
    }

    /// `(kernel, cokernel)` of the Toeplitz operator.
    fn kernel_cokernel(&self) -> Result<&(RepElement, RepElement), String> {
        self.index
            .get_or_init(|| self.prep.model.kernel_cokernel(oddindex::circle::SVD_TOL).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn index(&self) -> Result<RepElement, String> {
        self.kernel_cokernel().map(|(k, c)| k - c)
    }

    fn d_flow(&self) -> Result<&FlowResult, String> {
        self.d_flow
            .get_or_init(|| {
                let cfg = FlowConfig { delta_override: self.prep.scenario.flow.delta, ..FlowConfig::default() };
                let fam = self.prep.model.d_path(self.prep.scenario.flow.grid).map_err(|e| e.to_string())?;
                spectral_flow(&fam, &cfg).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn clifford(&self) -> Vec<Record> {
        let cfg = &self.prep.scenario.clifford;
        let mut rng = self.rng(1);
        cfg.dims
            .iter()
            .map(|&n| {
                self.timed(|| {
                    let rec = Record::new("clifford-check", format!("spin-trace n={n}"), json!({ "n": n, "samples": cfg.samples }));
                    let alg = match CliffordAlgebra::new(n) {
                        Ok(a) => a,
                        Err(e) => return rec.failed(e),
                    };
                    // Worst element: (deviation, via symbol, direct).
                    let mut worst = (0.0, Complex64::default(), Complex64::default());
                    for _ in 0..cfg.samples {
                        let mut coeffs: Vec<Complex64> = (0..alg.num_monomials())
                            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                            .collect();
                        coeffs[0] = Complex64::default();
                        let x = match CliffordElement::from_coeffs(&alg, coeffs) {
                            Ok(x) => x,
                            Err(e) => return rec.failed(e),
                        };
                        let via = match x.trace_spin_via_symbol() {
                            Ok(v) => v,
                            Err(e) => return rec.failed(e),
                        };
                        let direct = x.spin_rep().trace();
                        let dev = (via - direct).norm();
                        if dev >= worst.0 {
                            worst = (dev, via, direct);
                        }
                    }
                    rec.compare(complex(worst.1), complex(worst.2), worst.0, CLIFFORD_TOL)
                        .with_note("element with the largest deviation")
                })
            })
            .collect()
    }

    fn index_suite(&self) -> Vec<Record> {
        let mut out = Vec::new();
        out.push(self.timed(|| {
            let rec = Record::new("index", "index-vs-winding", self.model_inputs());
            let (ker, coker) = match self.kernel_cokernel() {
                Ok(kc) => kc,
                Err(e) => return rec.failed(e),
            };
            let winding = match self.prep.model.matrix_loop().winding_number() {
                Ok(w) => w,
                Err(e) => return rec.failed(e),
            };
            let index = ker - coker;
            let dim = index.dimension();
            rec.compare(json!(dim), json!(-winding), (dim + winding).abs() as f64, 0.0).with_note(format!(
                "kernel {ker}, cokernel {coker}, index {index}"
            ))
        }));
        out
    }

    fn specflow(&self) -> Vec<Record> {
        let sc = &self.prep.scenario;
        let mut out = Vec::new();
        out.push(self.timed(|| {
            let rec = Record::new(
                "specflow",
                "d-path-flow-vs-index",
                json!({ "model": self.model_inputs(), "grid": sc.flow.grid, "delta": sc.flow.delta }),
            );
            let flow = match self.d_flow() {
                Ok(f) => f,
                Err(e) => return rec.failed(e),
            };
            let index = match self.index() {
                Ok(i) => i,
                Err(e) => return rec.failed(e),
            };
            let expect = -&index;
            rec.compare(rep_json(&flow.equivariant_flow), rep_json(&expect), rep_distance(&flow.equivariant_flow, &expect), 0.0)
                .with_note(format!("level {}, scalar flow {}", flow.level, flow.scalar_flow))
        }));
        out.push(self.timed(|| {
            let rec = Record::new(
                "specflow",
                "p-path-flow-vs-d-path-flow",
                json!({ "model": self.model_inputs(), "grid": sc.flow.grid, "p_delta": sc.flow.p_delta }),
            );
            let cfg = FlowConfig { delta_override: Some(sc.flow.p_delta), ..FlowConfig::default() };
            let p_flow = match self.prep.model.p_path(sc.flow.grid).and_then(|f| spectral_flow(&f, &cfg)) {
                Ok(f) => f,
                Err(e) => return rec.failed(e),
            };
            let d_flow = match self.d_flow() {
                Ok(f) => f,
                Err(e) => return rec.failed(e),
            };
            rec.compare(
                rep_json(&p_flow.equivariant_flow),
                rep_json(&d_flow.equivariant_flow),
                rep_distance(&p_flow.equivariant_flow, &d_flow.equivariant_flow),
                0.0,
            )
        }));
        out
    }

    fn eta(&self) -> Vec<Record> {
        let sc = &self.prep.scenario;
        let eps = sc.eta.epsilon;
        let start = Instant::now();
        let heat = self
            .prep
            .model
            .d_path(sc.flow.grid)
            .and_then(|fam| heat_index_characters_multi(&fam, &[eps, 2.0 * eps], sc.eta.quadrature_order))
            .map_err(|e| e.to_string());
        let shared_ms = start.elapsed().as_secs_f64() * 1e3;
        let index = self.index();
        let mut out = Vec::new();
        for &h in &sc.eta.h_powers {
            let inputs = json!({ "h_power": h, "epsilon": eps, "quadrature_order": sc.eta.quadrature_order });
            let rec = Record::new("eta", format!("heat-integral h={h}"), inputs.clone());
            out.push(match (&heat, &index) {
                (Err(e), _) | (_, Err(e)) => rec.failed(e),
                (Ok(per_eps), Ok(index)) => {
                    let value = character_trace(&per_eps[0], h);
                    let exact = index.character_trace(h);
                    rec.compare(complex(value), complex(exact), (value - exact).norm(), HEAT_TOL)
                }
            });
            let rec = Record::new("eta", format!("epsilon-doubling h={h}"), inputs);
            out.push(match &heat {
                Err(e) => rec.failed(e),
                Ok(per_eps) => {
                    let (a, b) = (character_trace(&per_eps[0], h), character_trace(&per_eps[1], h));
                    rec.compare(complex(b), complex(a), (b - a).norm(), DRIFT_TOL)
                }
            });
        }
        if self.timing {
            // The heat integrals are shared; charge them evenly.
            let share = shared_ms / out.len().max(1) as f64;
            out.iter_mut().for_each(|r| r.wall_time_ms = Some(share));
        }
        out.push(self.timed(|| self.variation()));
        out
    }

    /// Finite-difference derivative of the eta function against `−2α` on
    /// random equivariant pairs; reports the worst pair.
    fn variation(&self) -> Record {
        let sc = &self.prep.scenario;
        let p = sc.model.group_order;
        let rec = Record::new(
            "eta",
            "variation",
            json!({ "pairs": sc.eta.variation_pairs, "dim": VARIATION_DIM, "group_order": p, "step": VARIATION_STEP }),
        );
        let mut rng = self.rng(2);
        let mut worst: Option<(f64, Complex64, Complex64, f64, f64)> = None;
        for _ in 0..sc.eta.variation_pairs {
            let chars: Vec<usize> = (0..VARIATION_DIM).map(|i| if i < p { i } else { rng.random_range(0..p) }).collect();
            let action = match GroupAction::from_characters(p, &chars) {
                Ok(a) => a,
                Err(e) => return rec.failed(e),
            };
            let d = random_block_hermitian(&mut rng, &chars);
            let x = random_block_hermitian(&mut rng, &chars);
            let h = rng.random_range(0..p as i64);
            let eps = rng.random_range(0.2..1.5);
            let pair = EtaContext::new(d, action, h, eps).and_then(|ctx| ctx.variation(&x, VARIATION_STEP));
            let (fd, expected) = match pair {
                Ok(v) => v,
                Err(e) => return rec.failed(e),
            };
            let err = (fd - expected).norm();
            let tol = VARIATION_REL_TOL * expected.norm().max(1e-3);
            if worst.is_none_or(|w| err / tol > w.3 / w.4) {
                worst = Some((eps, fd, expected, err, tol));
            }
        }
        match worst {
            None => rec.compare(Value::Null, Value::Null, 0.0, 0.0).with_note("no pairs requested"),
            Some((eps, fd, expected, err, tol)) => rec
                .compare(complex(fd), complex(expected), err, tol)
                .with_note(format!("worst pair at ε = {eps:.4}; oracle is −2α")),
        }
    }

    fn lefschetz(&self) -> Vec<Record> {
        let mut out = Vec::new();
        out.push(self.timed(|| {
            let lp = self.prep.model.matrix_loop();
            let rec = Record::new("lefschetz", "circle-calibration", self.model_inputs());
            let winding = match lp.winding_number() {
                Ok(w) => w,
                Err(e) => return rec.failed(e),
            };
            let index = match self.index() {
                Ok(i) => i,
                Err(e) => return rec.failed(e),
            };
            match lefschetz_contribution(&circle_calibration_data(winding)) {
                Err(e) => rec.failed(e),
                Ok(value) => {
                    let exact = Complex64::new(index.dimension() as f64, 0.0);
                    rec.compare(complex(value), complex(exact), (value - exact).norm(), LEFSCHETZ_TOL)
                        .with_note(format!("odd Chern character i·{winding}·dθ on the whole circle"))
                }
            }
        }));
        if let Some((components, expected)) = &self.prep.fixed_points {
            out.push(self.timed(|| {
                let rec = Record::new(
                    "lefschetz",
                    "fixed-point-sum",
                    json!({ "data_file": self.prep.scenario.lefschetz.data_file, "components": components.len() }),
                );
                match lefschetz_sum(components) {
                    Err(e) => rec.failed(e),
                    Ok(value) => {
                        let exact = Complex64::new(expected[0], expected[1]);
                        rec.compare(complex(value), complex(exact), (value - exact).norm(), LEFSCHETZ_TOL)
                    }
                }
            }));
        }
        out
    }
}

/// Hermitian matrix that is block diagonal with respect to `chars`.
fn random_block_hermitian(rng: &mut impl Rng, chars: &[usize]) -> CMatrix {
    let n = chars.len();
    let a = CMatrix::from_fn(n, n, |r, k| {
        if chars[r] == chars[k] {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            Complex64::default()
        }
    });
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}
