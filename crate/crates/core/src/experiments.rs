//! Monte-Carlo harness: bias and overlap of anomaly estimators, detection
//! thresholds, the closed-form asymptotic bias of the unstructured MLE, and
//! Wasserstein scaling between mixture and anomalous-subset samples.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::family::{FamilyKind, FamilySpec};
use crate::index_set::IndexSet;
use crate::io::content_hash;
use crate::mixture::{self, quantile, EmConfig, SizeBand};
use crate::rng::{self, label};
use crate::sampling::{sample_gmm_with, standard_normals, AnomalySampler};
use crate::scan::{self, ScanResult, SearchBudget};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetMetrics {
    /// `2 |A ∩ Â| / (|A| + |Â|)`.
    pub f_measure: f64,
    /// `|A ∩ Â| / |A|`.
    pub normalized_intersection: f64,
    /// `|A △ Â| / |A|`.
    pub normalized_error: f64,
    /// `(|Â| - |A|) / n`.
    pub size_bias: f64,
}

pub fn set_metrics(a: &IndexSet, est: &IndexSet) -> Result<SetMetrics> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.universe_size() != est.universe_size() {
        return Err(Error::UniverseMismatch {
            expected: a.universe_size(),
            got: est.universe_size(),
        });
    }
    let inter = a.intersection_len(est) as f64;
    let (na, ne) = (a.len() as f64, est.len() as f64);
    Ok(SetMetrics {
        f_measure: 2.0 * inter / (na + ne),
        normalized_intersection: inter / na,
        normalized_error: (na + ne - 2.0 * inter) / na,
        size_bias: (ne - na) / a.universe_size() as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Scan-statistic maximum likelihood.
    Mle,
    /// Size-constrained maximum total responsibility.
    Gmm,
    /// Unconstrained maximum of shifted responsibilities.
    GmmShifted,
    /// Size-penalized submatrix scan.
    Regularized,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Mle => "mle",
            Estimator::Gmm => "gmm",
            Estimator::GmmShifted => "gmm_shifted",
            Estimator::Regularized => "regularized",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mle" => Ok(Estimator::Mle),
            "gmm" => Ok(Estimator::Gmm),
            "gmm_shifted" | "gmm-shifted" => Ok(Estimator::GmmShifted),
            "regularized" => Ok(Estimator::Regularized),
            _ => Err(Error::param(format!("unknown estimator `{s}`"))),
        }
    }
}

/// Estimator settings shared by every trial.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorSettings {
    pub budget: SearchBudget,
    pub em: EmConfig,
    pub band: SizeBand,
}

/// Runs `estimator` on Gaussian data. `seed` drives search restarts and EM
/// jitter.
pub fn run_estimator(
    x: &[f64],
    family: &FamilySpec,
    estimator: Estimator,
    settings: &EstimatorSettings,
    seed: u64,
) -> Result<ScanResult> {
    let budget = settings.budget.clone().with_seed(seed);
    match estimator {
        Estimator::Mle => scan::mle(x, family, &budget),
        Estimator::Gmm | Estimator::GmmShifted => {
            let em = EmConfig {
                seed,
                ..settings.em.clone()
            };
            let fit = mixture::fit_gmm_em(x, &em)?;
            if estimator == Estimator::Gmm {
                mixture::gmm_estimator(&fit, family, settings.band, &budget)
            } else {
                mixture::gmm_estimator_shifted(&fit, family, &budget)
            }
        }
        Estimator::Regularized => {
            match family.kind {
                FamilyKind::Submatrix { rows, cols } if rows == cols => {}
                _ => return Err(Error::param("the regularized estimator needs a square submatrix family")),
            }
            scan::regularized_submatrix_mle(x, &budget).map(|r| r.result)
        }
    }
}

/// Uniform draws of size-`k` members, optionally restricted to members
/// inside a vertex subset of a graph family (or an index subset of the
/// unstructured family).
pub struct AnomalySource {
    family: FamilySpec,
    k: usize,
    seed: u64,
    restricted: Option<(FamilySpec, Vec<usize>)>,
}

impl AnomalySource {
    pub fn new(family: &FamilySpec, k: usize, within: Option<&[usize]>, seed: u64) -> Result<Self> {
        let restricted = match within {
            None => None,
            Some(vs) => {
                let sub = match &family.kind {
                    FamilyKind::Unstructured => {
                        let mut keep = vs.to_vec();
                        keep.sort_unstable();
                        keep.dedup();
                        (FamilySpec::unstructured(keep.len()), keep)
                    }
                    FamilyKind::Connected { graph } => {
                        let (g, keep) = graph.induced_subgraph(vs)?;
                        (FamilySpec::connected(g), keep)
                    }
                    FamilyKind::GraphCut { graph, rho } => {
                        let (g, keep) = graph.induced_subgraph(vs)?;
                        (FamilySpec::graph_cut(g, *rho), keep)
                    }
                    FamilyKind::EdgeDense { graph, delta } => {
                        let (g, keep) = graph.induced_subgraph(vs)?;
                        (FamilySpec::edge_dense(g, *delta)?, keep)
                    }
                    _ => {
                        return Err(Error::param(format!(
                            "anomaly restriction is not supported for the {} family",
                            family.kind_name()
                        )))
                    }
                };
                Some(sub)
            }
        };
        // fail early when no member of size k exists
        let probe = restricted.as_ref().map_or(family, |(f, _)| f);
        AnomalySampler::new(probe, k, seed)?;
        Ok(Self {
            family: family.clone(),
            k,
            seed,
            restricted,
        })
    }

    fn sampler(&self) -> Result<AnomalySampler<'_>> {
        let f = self.restricted.as_ref().map_or(&self.family, |(f, _)| f);
        AnomalySampler::new(f, self.k, self.seed)
    }

    /// Draws one anomaly with the given generator.
    pub fn draw(&self, sampler: &AnomalySampler, rng: &mut rng::StreamRng) -> Result<IndexSet> {
        let s = sampler.sample(rng)?;
        match &self.restricted {
            None => Ok(s),
            Some((_, keep)) => {
                let mapped = IndexSet::new(self.family.n, s.iter().map(|i| keep[i]))?;
                if !self.family.contains(&mapped)? {
                    return Err(Error::InvalidFamily(
                        "restricted anomaly is not a member of the full family".into(),
                    ));
                }
                Ok(mapped)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasConfig {
    pub family: FamilySpec,
    /// Anomaly size as a fraction of `n`; ignored when `anomaly_size` is set.
    #[serde(default = "default_frac")]
    pub anomaly_frac: f64,
    #[serde(default)]
    pub anomaly_size: Option<usize>,
    /// Draw anomalies only among members inside these indices.
    #[serde(default)]
    pub anomaly_within: Option<Vec<usize>>,
    pub mu_grid: Vec<f64>,
    pub trials: usize,
    pub estimator: Estimator,
    pub seed: u64,
    #[serde(default)]
    pub settings: EstimatorSettings,
}

fn default_frac() -> f64 {
    0.05
}

impl BiasConfig {
    pub fn anomaly_size(&self) -> usize {
        self.anomaly_size
            .unwrap_or_else(|| (self.anomaly_frac * self.family.n as f64).round() as usize)
    }

    /// Every violation, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Err(e) = self.family.validate() {
            v.push(e.to_string());
        }
        let k = self.anomaly_size();
        if k < 1 {
            v.push(format!("anomaly size {k} must be at least 1"));
        }
        if k > self.family.n {
            v.push(format!("anomaly size {k} exceeds n = {}", self.family.n));
        }
        if self.anomaly_size.is_none() && !(self.anomaly_frac > 0.0 && self.anomaly_frac < 1.0) {
            v.push(format!("anomaly_frac {} outside (0, 1)", self.anomaly_frac));
        }
        if self.mu_grid.is_empty() {
            v.push("mu_grid is empty".into());
        }
        if let Some(m) = self.mu_grid.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            v.push(format!("mu {m} must be finite and nonnegative"));
        }
        if self.trials == 0 {
            v.push("trials must be positive".into());
        }
        if let Err(e) = self.settings.budget.validate() {
            v.push(e.to_string());
        }
        if let Err(e) = self.settings.em.validate() {
            v.push(e.to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::param(v.join("; ")))
        }
    }
}

/// Provenance of a report: enough to identify and rerun the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub mu_grid: Vec<f64>,
    pub trials: usize,
    pub estimator: Estimator,
    pub seed: u64,
    /// SHA-256 of the full configuration JSON, graph included.
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub mu: f64,
    pub trials: usize,
    /// Mean of `(|Â| - k) / n`.
    pub bias_mean: f64,
    pub bias_q1: f64,
    pub bias_q3: f64,
    pub f_measure_mean: f64,
    pub norm_intersection_mean: f64,
    pub norm_error_mean: f64,
    /// Fraction of trials solved heuristically.
    pub heuristic_fraction: f64,
    pub wall_clock_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub mu: f64,
    pub trial: usize,
    pub estimator: Estimator,
    pub est_size: usize,
    pub f_measure: f64,
    pub norm_intersection: f64,
    pub norm_error: f64,
    pub size_bias: f64,
    pub score: f64,
    pub solver: scan::Solver,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub cells: Vec<CellSummary>,
    /// Stored separately as CSV.
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

impl ExperimentReport {
    pub fn cell(&self, mu: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.mu == mu)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Anomaly and noise for trial `t` of an experiment keyed by `path`. Both
/// are independent of the mean, so every cell of a grid reuses them and
/// `x = z + mu 1_A`.
fn trial_data(
    source: &AnomalySource,
    sampler: &AnomalySampler,
    n: usize,
    seed: u64,
    path: &[u64],
) -> Result<(IndexSet, Vec<f64>)> {
    let mut key = path.to_vec();
    key.insert(0, label::ANOMALY);
    let a = source.draw(sampler, &mut rng::stream(seed, &key))?;
    key[0] = label::NOISE;
    let z = standard_normals(n, &mut rng::stream(seed, &key));
    Ok((a, z))
}

fn shifted(z: &[f64], a: &IndexSet, mu: f64) -> Vec<f64> {
    let mut x = z.to_vec();
    for i in a.iter() {
        x[i] += mu;
    }
    x
}

/// Runs every `(mu, trial)` cell. Data depend only on `(seed, trial)` and
/// the estimator's own randomness only on `(seed, mu index, trial)`, so two
/// estimators run with the same seed see identical data.
pub fn bias_experiment(cfg: &BiasConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let n = cfg.family.n;
    let k = cfg.anomaly_size();
    let source = AnomalySource::new(&cfg.family, k, cfg.anomaly_within.as_deref(), cfg.seed)?;
    let sampler = source.sampler()?;
    let data: Vec<(IndexSet, Vec<f64>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial_data(&source, &sampler, n, cfg.seed, &[t as u64]))
        .collect::<Result<_>>()?;

    let family_name = cfg.family.kind_name().to_string();
    let mut cells = Vec::with_capacity(cfg.mu_grid.len());
    let mut rows = Vec::with_capacity(cfg.mu_grid.len() * cfg.trials);
    for (mi, &mu) in cfg.mu_grid.iter().enumerate() {
        let started = Instant::now();
        let cell_rows: Vec<TrialRow> = data
            .par_iter()
            .enumerate()
            .map(|(t, (a, z))| {
                let x = shifted(z, a, mu);
                let est_seed = rng::child_seed(cfg.seed, &[label::ESTIMATOR, mi as u64, t as u64]);
                let est = run_estimator(&x, &cfg.family, cfg.estimator, &cfg.settings, est_seed)?;
                let m = set_metrics(a, &est.set)?;
                Ok(TrialRow {
                    family: family_name.clone(),
                    n,
                    k,
                    mu,
                    trial: t,
                    estimator: cfg.estimator,
                    est_size: est.set.len(),
                    f_measure: m.f_measure,
                    norm_intersection: m.normalized_intersection,
                    norm_error: m.normalized_error,
                    size_bias: m.size_bias,
                    score: est.score,
                    solver: est.solver,
                    seed: cfg.seed,
                })
            })
            .collect::<Result<_>>()?;
        cells.push(summarize_cell(mu, &cell_rows, started.elapsed().as_secs_f64() * 1e3));
        rows.extend(cell_rows);
    }
    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: ReportConfig {
            family: family_name,
            n,
            k,
            mu_grid: cfg.mu_grid.clone(),
            trials: cfg.trials,
            estimator: cfg.estimator,
            seed: cfg.seed,
            config_hash: content_hash(&serde_json::to_vec(cfg)?),
        },
        cells,
        rows,
    })
}

/// Aggregates for the rows of one cell.
pub fn summarize_cell(mu: f64, rows: &[TrialRow], wall_clock_ms: f64) -> CellSummary {
    let col = |f: fn(&TrialRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let bias = col(|r| r.size_bias);
    CellSummary {
        mu,
        trials: rows.len(),
        bias_mean: mean(&bias),
        bias_q1: quantile(&bias, 0.25),
        bias_q3: quantile(&bias, 0.75),
        f_measure_mean: mean(&col(|r| r.f_measure)),
        norm_intersection_mean: mean(&col(|r| r.norm_intersection)),
        norm_error_mean: mean(&col(|r| r.norm_error)),
        heuristic_fraction: rows.iter().filter(|r| r.solver == scan::Solver::Heuristic).count() as f64
            / rows.len() as f64,
        wall_clock_ms,
    }
}

// ---------------------------------------------------------------------------
// detection threshold

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuDetectConfig {
    pub family: FamilySpec,
    pub k: usize,
    #[serde(default = "default_error_target")]
    pub error_target: f64,
    #[serde(default = "default_trials")]
    pub trials_null: usize,
    #[serde(default = "default_trials")]
    pub trials_alt: usize,
    #[serde(default = "default_mu_max")]
    pub mu_max: f64,
    pub seed: u64,
    #[serde(default)]
    pub budget: SearchBudget,
}

fn default_error_target() -> f64 {
    0.01
}

fn default_trials() -> usize {
    1000
}

fn default_mu_max() -> f64 {
    10.0
}

/// Spacing of the grid on which the detection threshold is reported.
pub const MU_GRID_STEP: f64 = 0.1;

impl MuDetectConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Err(e) = self.family.validate() {
            v.push(e.to_string());
        }
        let n = self.family.n;
        if self.k == 0 || 2 * self.k >= n {
            v.push(format!("anomaly size {} must satisfy 1 <= k < n/2 = {}", self.k, n as f64 / 2.0));
        }
        if !(self.error_target > 0.0 && self.error_target < 0.5) {
            v.push(format!("error_target {} outside (0, 0.5)", self.error_target));
        }
        if self.trials_null < 100 || self.trials_alt < 100 {
            v.push("trials_null and trials_alt must each be at least 100".into());
        }
        if !(self.mu_max > 0.0 && self.mu_max.is_finite()) {
            v.push("mu_max must be positive".into());
        }
        if let Err(e) = self.budget.validate() {
            v.push(e.to_string());
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorPoint {
    pub mu: f64,
    /// Fraction of null samples above the threshold (constant in `mu`).
    pub type1: f64,
    /// Fraction of alternative samples at or below the threshold.
    pub type2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuDetectReport {
    pub mu_detect: f64,
    pub threshold: f64,
    pub type1: f64,
    /// Every mean evaluated during the search, ascending.
    pub curve: Vec<ErrorPoint>,
    pub seed: u64,
}

/// Null calibration and alternative samples shared by every candidate mean.
pub struct DetectionHarness<'c> {
    cfg: &'c MuDetectConfig,
    pub threshold: f64,
    pub type1: f64,
    alt: Vec<(IndexSet, Vec<f64>)>,
}

impl<'c> DetectionHarness<'c> {
    pub fn new(cfg: &'c MuDetectConfig) -> Result<Self> {
        let v = cfg.violations();
        if !v.is_empty() {
            return Err(Error::param(v.join("; ")));
        }
        let n = cfg.family.n;
        let null: Vec<f64> = (0..cfg.trials_null)
            .into_par_iter()
            .map(|t| {
                let z = standard_normals(n, &mut rng::stream(cfg.seed, &[label::NULL, t as u64]));
                let budget = cfg
                    .budget
                    .clone()
                    .with_seed(rng::child_seed(cfg.seed, &[label::ESTIMATOR, label::NULL, t as u64]));
                scan::glr_statistic(&z, &cfg.family, &budget)
            })
            .collect::<Result<_>>()?;
        let mut sorted = null.clone();
        sorted.sort_by(f64::total_cmp);
        // smallest order statistic with at most error_target of the null above it
        let idx = ((1.0 - cfg.error_target) * cfg.trials_null as f64).ceil() as usize;
        let threshold = sorted[idx.clamp(1, sorted.len()) - 1];
        let type1 = null.iter().filter(|&&s| s > threshold).count() as f64 / null.len() as f64;

        let source = AnomalySource::new(&cfg.family, cfg.k, None, cfg.seed)?;
        let sampler = source.sampler()?;
        let alt = (0..cfg.trials_alt)
            .into_par_iter()
            .map(|t| trial_data(&source, &sampler, n, cfg.seed, &[label::ALT, t as u64]))
            .collect::<Result<_>>()?;
        Ok(Self {
            cfg,
            threshold,
            type1,
            alt,
        })
    }

    /// Estimated type-II error at `mu`. Each alternative trial keeps its
    /// anomaly and noise across means, so for exact solvers the estimate is
    /// nonincreasing in `mu`.
    pub fn type2(&self, mu: f64) -> Result<f64> {
        let misses: Vec<bool> = self
            .alt
            .par_iter()
            .enumerate()
            .map(|(t, (a, z))| {
                let x = shifted(z, a, mu);
                let budget = self
                    .cfg
                    .budget
                    .clone()
                    .with_seed(rng::child_seed(self.cfg.seed, &[label::ESTIMATOR, label::ALT, t as u64]));
                Ok(scan::glr_statistic(&x, &self.cfg.family, &budget)? <= self.threshold)
            })
            .collect::<Result<_>>()?;
        Ok(misses.iter().filter(|&&m| m).count() as f64 / misses.len() as f64)
    }

    pub fn curve(&self, mus: &[f64]) -> Result<Vec<ErrorPoint>> {
        mus.iter()
            .map(|&mu| {
                Ok(ErrorPoint {
                    mu,
                    type1: self.type1,
                    type2: self.type2(mu)?,
                })
            })
            .collect()
    }
}

/// Smallest mean on the `0.1` grid whose estimated type-II error is at most
/// `error_target`, with the rejection threshold set at the empirical
/// `1 - error_target` quantile of the null GLR statistic. Whole means are
/// tried first to bracket the answer, which is then bisected on the grid.
pub fn estimate_mu_detect(cfg: &MuDetectConfig) -> Result<MuDetectReport> {
    let h = DetectionHarness::new(cfg)?;
    let steps_per_unit = (1.0 / MU_GRID_STEP).round() as usize;
    // division keeps grid points exact decimals (34 / 10 = 3.4, not 3.4000000000000004)
    let grid = |j: usize| j as f64 / steps_per_unit as f64;
    let mut seen: BTreeMap<usize, f64> = BTreeMap::new();
    let mut eval = |j: usize| -> Result<bool> {
        let e = match seen.get(&j) {
            Some(&e) => e,
            None => {
                let e = h.type2(grid(j))?;
                seen.insert(j, e);
                e
            }
        };
        Ok(e <= cfg.error_target)
    };
    let j_max = (cfg.mu_max * steps_per_unit as f64 + 1e-9).floor() as usize;
    let mut lo = 0;
    let mut hi = None;
    let mut j = steps_per_unit.min(j_max);
    loop {
        if eval(j)? {
            hi = Some(j);
            break;
        }
        lo = j;
        if j >= j_max {
            break;
        }
        j = (j + steps_per_unit).min(j_max);
    }
    let Some(mut hi) = hi else {
        return Err(Error::Numerical(format!(
            "type-II error above {} at every mean up to {}",
            cfg.error_target, cfg.mu_max
        )));
    };
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if eval(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let curve = seen
        .iter()
        .map(|(&j, &e)| ErrorPoint {
            mu: grid(j),
            type1: h.type1,
            type2: e,
        })
        .collect();
    Ok(MuDetectReport {
        mu_detect: grid(hi),
        threshold: h.threshold,
        type1: h.type1,
        curve,
        seed: cfg.seed,
    })
}

// ---------------------------------------------------------------------------
// asymptotic bias of the unstructured MLE

fn upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Limit of `Γ / sqrt(n)` for the set `{i : x_i > t}` under the mixture
/// `alpha N(mu, 1) + (1 - alpha) N(0, 1)`.
pub fn threshold_objective(alpha: f64, mu: f64, t: f64) -> f64 {
    let mass = alpha * upper_tail(t - mu) + (1.0 - alpha) * upper_tail(t);
    let sum = alpha * (mu * upper_tail(t - mu) + phi(t - mu)) + (1.0 - alpha) * phi(t);
    sum / mass.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBias {
    pub t_star: f64,
    pub bias: f64,
}

/// Limit of `Bias(|Â|/n)` for the unstructured MLE with `|A| = alpha n`:
/// the MLE is asymptotically the set above the threshold `T*` maximizing
/// [`threshold_objective`], so the bias is
/// `alpha Q(T* - mu) + (1 - alpha) Q(T*) - alpha` with `Q` the normal
/// upper tail.
pub fn asymptotic_unstructured_bias(alpha: f64, mu: f64) -> Result<AsymptoticBias> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::param(format!("alpha {alpha} outside (0, 0.5)")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param(format!("mu {mu} must be positive")));
    }
    let g = |t: f64| threshold_objective(alpha, mu, t);
    let (lo, hi) = (-10.0, mu + 10.0);
    let steps = ((hi - lo) / 0.01).ceil() as usize;
    let grid = |i: usize| lo + (hi - lo) * i as f64 / steps as f64;
    let best = (0..=steps)
        .map(|i| (i, g(grid(i))))
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Numerical("objective is not finite on the bracket".into()))?
        .0;
    if best == 0 || best == steps {
        return Err(Error::Numerical(format!(
            "maximizer sits on the bracket edge [{lo}, {hi}]"
        )));
    }
    // golden-section search on the bracketing cell pair
    let (mut a, mut b) = (grid(best - 1), grid(best + 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-10 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    // the objective is flat at its peak, so finish on the sign of the
    // derivative
    let slope = |t: f64| (g(t + 1e-6) - g(t - 1e-6)) / 2e-6;
    let (mut a, mut b) = (a - 1e-6, b + 1e-6);
    if slope(a) > 0.0 && slope(b) < 0.0 {
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if slope(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
    }
    let t_star = 0.5 * (a + b);
    let bias = alpha * upper_tail(t_star - mu) + (1.0 - alpha) * upper_tail(t_star) - alpha;
    Ok(AsymptoticBias { t_star, bias })
}

// ---------------------------------------------------------------------------
// Wasserstein scaling

/// 1-Wasserstein distance between two equal-size empirical measures.
pub fn wasserstein_1d(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::param(format!("sample sizes differ: {} vs {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::param("empty samples"));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    Ok(xs.iter().zip(&ys).map(|(a, b)| (a - b).abs()).sum::<f64>() / x.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WassersteinConfig {
    /// `(alpha, mu)` pairs.
    pub pairs: Vec<(f64, f64)>,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WassersteinSeries {
    pub alpha: f64,
    pub mu: f64,
    /// `(n, mean distance)`.
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of `ln d` against `ln n`.
    pub slope: f64,
}

/// Least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Mean distance between a mixture sample and an anomalous-subset sample
/// with `|A| = round(alpha n)` at each `n`, and the log-log slope.
pub fn wasserstein_scaling(cfg: &WassersteinConfig) -> Result<Vec<WassersteinSeries>> {
    if cfg.n_grid.len() < 2 {
        return Err(Error::param("n_grid needs at least two sizes"));
    }
    let (lo, hi) = (
        *cfg.n_grid.iter().min().unwrap() as f64,
        *cfg.n_grid.iter().max().unwrap() as f64,
    );
    if hi / lo < 100.0 {
        return Err(Error::param("n_grid must span at least two decades"));
    }
    if cfg.trials == 0 {
        return Err(Error::param("trials must be positive"));
    }
    cfg.pairs
        .iter()
        .enumerate()
        .map(|(pi, &(alpha, mu))| {
            if !(alpha > 0.0 && alpha < 1.0) || !(mu >= 0.0) {
                return Err(Error::param(format!("invalid pair ({alpha}, {mu})")));
            }
            let points = cfg
                .n_grid
                .iter()
                .enumerate()
                .map(|(ni, &n)| {
                    let ds: Vec<f64> = (0..cfg.trials)
                        .into_par_iter()
                        .map(|t| {
                            let path = [pi as u64, ni as u64, t as u64];
                            let mut r = rng::stream(cfg.seed, &[&[label::LATENT][..], &path].concat());
                            let (gmm, _) = sample_gmm_with(alpha, mu, n, &mut r)?;
                            let mut r = rng::stream(cfg.seed, &[&[label::NOISE][..], &path].concat());
                            let mut asd = standard_normals(n, &mut r);
                            let k = (alpha * n as f64).round() as usize;
                            // which indices carry the shift does not affect the sorted sample
                            for v in asd.iter_mut().take(k) {
                                *v += mu;
                            }
                            wasserstein_1d(&gmm, &asd)
                        })
                        .collect::<Result<_>>()?;
                    Ok((n, mean(&ds)))
                })
                .collect::<Result<Vec<_>>>()?;
            let lx: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
            let ly: Vec<f64> = points.iter().map(|&(_, d)| d.ln()).collect();
            Ok(WassersteinSeries {
                alpha,
                mu,
                slope: ls_slope(&lx, &ly),
                points,
            })
        })
        .collect()
}
