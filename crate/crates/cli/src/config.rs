//! Run configuration: one JSON document plus command-line overrides,
//! validated as a whole before anything runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use structscan::experiments::Estimator;
use structscan::family::FamilySpec;
use structscan::graph::{generate_graph, Graph, GraphKind};
use structscan::io::ObservationMode;
use structscan::mixture::{EmConfig, SizeBand};
use structscan::scan::SearchBudget;

/// Generated graph: a benchmark construction and the seed that fixes it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphGen {
    #[serde(flatten)]
    pub kind: GraphKind,
    /// Defaults to the run seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyBlock {
    /// interval, submatrix, connected, graph_cut, edge_dense, epsilon_ball
    /// or unstructured.
    pub kind: String,
    pub n: Option<usize>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub rho: Option<usize>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub points: Option<Vec<Vec<f64>>>,
    /// Edge-list file: `n_vertices` on the first line, then `u v` pairs.
    pub graph_file: Option<PathBuf>,
    pub graph: Option<GraphGen>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleModel {
    /// Anomalous subset distribution.
    Asd,
    /// Two-component Gaussian mixture.
    Gmm,
    /// Poisson counts with a relative risk inside the anomaly.
    Poisson,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the subcommand when present.
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub family: Option<FamilyBlock>,
    pub estimator: Option<String>,
    pub input: Option<PathBuf>,
    pub mode: Option<ObservationMode>,
    pub output: Option<PathBuf>,
    /// Trial-level CSV of `bias`; defaults to the output path with a `.csv`
    /// extension.
    pub trials_output: Option<PathBuf>,
    /// Where a fitted mixture is written, when one is fitted.
    pub fit_output: Option<PathBuf>,

    pub model: Option<SampleModel>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
    pub anomaly_frac: Option<f64>,
    pub anomaly_within: Option<Vec<usize>>,
    pub q_in: Option<f64>,
    pub baseline: Option<f64>,
    pub baselines: Option<Vec<f64>>,

    pub mu_grid: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub error_target: Option<f64>,
    pub trials_null: Option<usize>,
    pub trials_alt: Option<usize>,
    pub mu_max: Option<f64>,
    pub pairs: Option<Vec<(f64, f64)>>,
    pub n_grid: Option<Vec<usize>>,
    /// Fixed member size for `export-ilp`.
    pub size: Option<usize>,

    pub budget: SearchBudget,
    pub em: EmConfig,
    pub band: SizeBand,
}

/// Flags that override the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub family: Option<String>,
    pub n: Option<usize>,
    pub estimator: Option<String>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub trials: Option<usize>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub k: Option<usize>,
}

/// Every problem found while validating, reported together.
#[derive(Debug, Default)]
pub struct Violations(pub Vec<String>);

impl Violations {
    pub fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    pub fn extend(&mut self, msgs: impl IntoIterator<Item = String>) {
        self.0.extend(msgs);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($($f:ident),*) => {$(if o.$f.is_some() { self.$f = o.$f; })*};
        }
        set!(seed, estimator, input, output, trials, mu, alpha, k);
        if o.family.is_some() || o.n.is_some() {
            let block = self.family.get_or_insert_with(|| FamilyBlock {
                kind: "unstructured".into(),
                ..FamilyBlock::default()
            });
            if let Some(kind) = o.family {
                block.kind = kind;
            }
            if o.n.is_some() {
                block.n = o.n;
            }
        }
    }

    pub fn estimator_or(&self, default: Estimator, v: &mut Violations) -> Estimator {
        match self.estimator.as_deref().map(Estimator::parse) {
            None => default,
            Some(Ok(e)) => e,
            Some(Err(e)) => {
                v.push(e.to_string());
                default
            }
        }
    }

    /// Builds the family; `n_hint` fills in `n` when the block omits it.
    pub fn family_spec(&self, n_hint: Option<usize>, v: &mut Violations) -> Option<FamilySpec> {
        let Some(b) = &self.family else {
            v.push("family is required");
            return None;
        };
        let before = v.0.len();
        let need = |v: &mut Violations, what: &str| v.push(format!("family `{}` needs `{what}`", b.kind));
        let graph = |v: &mut Violations| -> Option<Graph> {
            match (&b.graph_file, &b.graph) {
                (Some(_), Some(_)) => {
                    v.push("give either family.graph_file or family.graph, not both");
                    None
                }
                (None, None) => {
                    need(v, "graph_file` or `graph");
                    None
                }
                (Some(p), None) => Graph::read(p).map_err(|e| v.push(format!("{}: {e}", p.display()))).ok(),
                (None, Some(gen)) => {
                    let Some(n) = b.n.or(n_hint) else {
                        need(v, "n");
                        return None;
                    };
                    let Some(seed) = gen.seed.or(self.seed) else {
                        v.push("family.graph.seed is required when no run seed is given");
                        return None;
                    };
                    generate_graph(&gen.kind, n, seed).map_err(|e| v.push(e.to_string())).ok()
                }
            }
        };
        let spec = match b.kind.as_str() {
            "interval" | "unstructured" => match b.n.or(n_hint) {
                Some(n) if n > 0 => Some(if b.kind == "interval" {
                    FamilySpec::interval(n)
                } else {
                    FamilySpec::unstructured(n)
                }),
                Some(_) => {
                    v.push("family.n must be positive");
                    None
                }
                None => {
                    need(v, "n");
                    None
                }
            },
            "submatrix" => match (b.rows, b.cols) {
                (Some(r), Some(c)) => Some(FamilySpec::submatrix(r, c)),
                _ => {
                    need(v, "rows` and `cols");
                    None
                }
            },
            "connected" => graph(v).map(FamilySpec::connected),
            "graph_cut" => match b.rho {
                None => {
                    need(v, "rho");
                    None
                }
                Some(rho) => graph(v).map(|g| FamilySpec::graph_cut(g, rho)),
            },
            "edge_dense" => match b.delta {
                None => {
                    need(v, "delta");
                    None
                }
                Some(d) => graph(v).and_then(|g| FamilySpec::edge_dense(g, d).map_err(|e| v.push(e.to_string())).ok()),
            },
            "epsilon_ball" => match (&b.points, b.epsilon) {
                (Some(p), Some(e)) => FamilySpec::epsilon_ball(p.clone(), e).map_err(|e| v.push(e.to_string())).ok(),
                _ => {
                    need(v, "points` and `epsilon");
                    None
                }
            },
            other => {
                v.push(format!("unknown family kind `{other}`"));
                None
            }
        };
        let spec = spec?;
        if let Err(e) = spec.validate() {
            v.push(e.to_string());
        }
        if let Some(n) = b.n {
            if n != spec.n {
                v.push(format!("family.n = {n} but the family has {} elements", spec.n));
            }
        }
        if let Some(h) = n_hint {
            if h != spec.n {
                v.push(format!("the data have {h} observations but the family has {} elements", spec.n));
            }
        }
        (v.0.len() == before).then_some(spec)
    }

    /// Anomaly size from `k` or `anomaly_frac`.
    pub fn anomaly_size(&self, n: usize, v: &mut Violations) -> Option<usize> {
        match (self.k, self.anomaly_frac) {
            (Some(_), Some(_)) => {
                v.push("give either k or anomaly_frac, not both");
                None
            }
            (Some(k), None) => Some(k),
            (None, frac) => {
                let f = frac.unwrap_or(0.05);
                if !(f > 0.0 && f < 1.0) {
                    v.push(format!("anomaly_frac {f} outside (0, 1)"));
                    return None;
                }
                Some((f * n as f64).round() as usize)
            }
        }
    }

    pub fn require<T: Clone>(field: &Option<T>, name: &str, v: &mut Violations) -> Option<T> {
        if field.is_none() {
            v.push(format!("`{name}` is required"));
        }
        field.clone()
    }
}
