use std::path::{Path, PathBuf};

use serde::Serialize;
use structscan::experiments::{
    self, asymptotic_unstructured_bias, bias_experiment, estimate_mu_detect, wasserstein_scaling, BiasConfig,
    Estimator, EstimatorSettings, MuDetectConfig, WassersteinConfig,
};
use structscan::family::FamilySpec;
use structscan::io::{self, content_hash, ObservationMode};
use structscan::mixture::{self, MixtureFit};
use structscan::sampling::{self, Observations};
use structscan::scan::{self, ScanResult, Solver};
use structscan::{lp, Error};

use crate::config::{RunConfig, SampleModel, Violations};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("artifact check failed: {0}")]
    Verify(String),
}

impl CliError {
    /// 2 configuration, 3 input data or files, 4 no feasible member or
    /// search limits, 5 numerical, 6 artifact verification.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verify(_) => 6,
            CliError::Core(e) => match e {
                Error::InvalidParameter(_) | Error::WrongMode { .. } => 2,
                Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Parse { .. }
                | Error::InvalidGraph(_)
                | Error::IndexOutOfRange { .. }
                | Error::UniverseMismatch { .. }
                | Error::EmptySet => 3,
                Error::InvalidFamily(_)
                | Error::NoMemberOfSize { .. }
                | Error::EmptyBand { .. }
                | Error::TooLargeToEnumerate { .. } => 4,
                Error::Numerical(_) => 5,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn check(v: Violations) -> Result<()> {
    if v.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(v.0))
    }
}

/// Output document: the command's result plus the seed and a hash of the
/// resolved configuration and input data.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    seed: Option<u64>,
    content_hash: String,
    #[serde(flatten)]
    body: T,
}

fn provenance(cfg: &RunConfig, input: Option<&[u8]>) -> Result<String> {
    let mut bytes = serde_json::to_vec(cfg).map_err(Error::from)?;
    if let Some(b) = input {
        bytes.extend_from_slice(b);
    }
    Ok(content_hash(&bytes))
}

/// Prints to stdout without a path; otherwise writes the file and checks
/// that it parses back to the same document.
fn emit_json(path: Option<&Path>, doc: &impl Serialize) -> Result<()> {
    let value = serde_json::to_value(doc).map_err(Error::from)?;
    let text = serde_json::to_string_pretty(&value).map_err(Error::from)? + "\n";
    match path {
        None => print!("{text}"),
        Some(p) => {
            std::fs::write(p, &text).map_err(Error::from)?;
            let back: serde_json::Value =
                serde_json::from_slice(&std::fs::read(p).map_err(Error::from)?).map_err(Error::from)?;
            if back != value {
                return Err(CliError::Verify(format!("{} does not read back", p.display())));
            }
        }
    }
    Ok(())
}

fn read_input(cfg: &RunConfig, v: &mut Violations) -> Option<(PathBuf, Vec<u8>)> {
    let path = RunConfig::require(&cfg.input, "input", v)?;
    match std::fs::read(&path) {
        Ok(b) => Some((path, b)),
        Err(e) => {
            v.push(format!("{}: {e}", path.display()));
            None
        }
    }
}

pub fn run(command: &str, cfg: RunConfig) -> Result<()> {
    match command {
        "sample" => sample(cfg),
        "estimate" => estimate(cfg),
        "bias" => bias(cfg),
        "mu-detect" => mu_detect(cfg),
        "wasserstein" => wasserstein(cfg),
        "asymptotic-bias" => asymptotic_bias(cfg),
        "disease" => disease(cfg),
        "export-ilp" => export_ilp(cfg),
        other => Err(CliError::Config(vec![format!("unknown command `{other}`")])),
    }
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}"))
}

#[derive(Serialize)]
struct SampleMeta {
    model: SampleModel,
    n: usize,
    data_path: String,
    data_hash: String,
    anomaly: Option<Vec<usize>>,
    latent: Option<Vec<bool>>,
}

fn sample(mut cfg: RunConfig) -> Result<()> {
    let seed = *cfg.seed.get_or_insert_with(rand::random);
    let mut v = Violations::default();
    let model = cfg.model.unwrap_or(SampleModel::Asd);
    let output = RunConfig::require(&cfg.output, "output", &mut v);
    let mu = cfg.mu.unwrap_or(0.0);
    if model != SampleModel::Poisson && !(mu.is_finite() && mu >= 0.0) {
        v.push(format!("mu {mu} must be finite and nonnegative"));
    }
    let (obs, anomaly, latent) = match model {
        SampleModel::Gmm => {
            let n = cfg.family.as_ref().and_then(|b| b.n);
            let alpha = RunConfig::require(&cfg.alpha, "alpha", &mut v);
            if n.is_none() {
                v.push("`n` is required");
            }
            check(v)?;
            let (obs, z) = sampling::sample_gmm(alpha.unwrap(), mu, n.unwrap(), seed)?;
            (obs, None, Some(z))
        }
        SampleModel::Asd | SampleModel::Poisson => {
            let family = cfg.family_spec(None, &mut v);
            let k = family.as_ref().and_then(|f| cfg.anomaly_size(f.n, &mut v));
            let mut baselines = Vec::new();
            if model == SampleModel::Poisson {
                let q = RunConfig::require(&cfg.q_in, "q_in", &mut v);
                if q.is_some_and(|q| !(q.is_finite() && q > 0.0)) {
                    v.push("q_in must be positive");
                }
                if let Some(f) = &family {
                    baselines = match (&cfg.baselines, cfg.baseline) {
                        (Some(_), Some(_)) => {
                            v.push("give either baseline or baselines, not both");
                            vec![]
                        }
                        (Some(b), None) => b.clone(),
                        (None, b) => vec![b.unwrap_or(1.0); f.n],
                    };
                    if baselines.len() != f.n {
                        v.push(format!("{} baselines for {} observations", baselines.len(), f.n));
                    }
                    if baselines.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
                        v.push("baselines must be positive");
                    }
                }
            }
            check(v)?;
            let (family, k) = (family.unwrap(), k.unwrap());
            let a = sampling::sample_anomaly(&family, k, seed)?;
            let obs = if model == SampleModel::Asd {
                sampling::sample_asd(&a, mu, seed)?
            } else {
                sampling::sample_poisson_counts(&a, cfg.q_in.unwrap(), &baselines, seed)?
            };
            (obs, Some(a.into_vec()), None)
        }
    };
    let output = output.unwrap();
    io::write_observations(&output, &obs)?;
    let mode = match obs {
        Observations::Gaussian { .. } => ObservationMode::Gaussian,
        Observations::Poisson(_) => ObservationMode::Poisson,
    };
    if io::read_observations(&output, mode)? != obs {
        return Err(CliError::Verify(format!("{} does not read back", output.display())));
    }
    let meta = SampleMeta {
        model,
        n: obs.len(),
        data_path: output.display().to_string(),
        data_hash: content_hash(&std::fs::read(&output).map_err(Error::from)?),
        anomaly,
        latent,
    };
    let doc = Envelope {
        command: "sample",
        seed: Some(seed),
        content_hash: provenance(&cfg, None)?,
        body: meta,
    };
    emit_json(Some(&sidecar(&output, ".meta.json")), &doc)
}

#[derive(Serialize)]
struct EstimateOut<'a> {
    family: &'a str,
    estimator: Estimator,
    n: usize,
    set: Vec<usize>,
    size: usize,
    /// Objective of the estimator at `set`.
    score: f64,
    /// Scan statistic of `set` (Poisson score for count data).
    gamma: f64,
    solver: Solver,
    evaluations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<MixtureFit>,
}

fn write_fit(cfg: &RunConfig, fit: &MixtureFit) -> Result<()> {
    if let Some(p) = &cfg.fit_output {
        io::write_fit(fit, p)?;
        // the iteration trace is not part of the file
        let expected = MixtureFit {
            trace: Vec::new(),
            ..fit.clone()
        };
        if io::read_fit(p)? != expected {
            return Err(CliError::Verify(format!("{} does not read back", p.display())));
        }
    }
    Ok(())
}

fn estimate(cfg: RunConfig) -> Result<()> {
    let mut v = Violations::default();
    if cfg.mode == Some(ObservationMode::Poisson) {
        v.push("estimate takes Gaussian observations; use `disease` for counts");
    }
    let input = read_input(&cfg, &mut v);
    let estimator = cfg.estimator_or(Estimator::Mle, &mut v);
    budget_checks(&cfg, &mut v);
    check(std::mem::take(&mut v))?;
    let (_, bytes) = input.unwrap();
    let obs = io::parse_observations(&bytes[..], ObservationMode::Gaussian)?;
    let x = obs.as_gaussian()?;
    let family = cfg.family_spec(Some(x.len()), &mut v);
    check(v)?;
    let family = family.unwrap();
    let seed = cfg.seed.unwrap_or(0);
    let budget = cfg.budget.clone().with_seed(seed);
    let em = structscan::mixture::EmConfig { seed, ..cfg.em.clone() };
    let (res, fit): (ScanResult, Option<MixtureFit>) = match estimator {
        Estimator::Mle => (scan::mle(x, &family, &budget)?, None),
        Estimator::Regularized => {
            let settings = EstimatorSettings {
                budget: cfg.budget.clone(),
                em: cfg.em.clone(),
                band: cfg.band,
            };
            (experiments::run_estimator(x, &family, estimator, &settings, seed)?, None)
        }
        Estimator::Gmm | Estimator::GmmShifted => {
            let fit = mixture::fit_gmm_em(x, &em)?;
            let res = if estimator == Estimator::Gmm {
                mixture::gmm_estimator(&fit, &family, cfg.band, &budget)?
            } else {
                mixture::gmm_estimator_shifted(&fit, &family, &budget)?
            };
            write_fit(&cfg, &fit)?;
            (res, Some(fit))
        }
    };
    let body = EstimateOut {
        family: family.kind_name(),
        estimator,
        n: family.n,
        size: res.set.len(),
        score: res.score,
        gamma: scan::gamma(x, &res.set)?,
        solver: res.solver,
        evaluations: res.evaluations,
        set: res.set.into_vec(),
        fit,
    };
    let doc = Envelope {
        command: "estimate",
        seed: Some(seed),
        content_hash: provenance(&cfg, Some(&bytes))?,
        body,
    };
    emit_json(cfg.output.as_deref(), &doc)
}

fn budget_checks(cfg: &RunConfig, v: &mut Violations) {
    if let Err(e) = cfg.budget.validate() {
        v.push(e.to_string());
    }
    if let Err(e) = cfg.em.validate() {
        v.push(e.to_string());
    }
}

fn mu_grid(cfg: &RunConfig, v: &mut Violations) -> Vec<f64> {
    match (&cfg.mu_grid, cfg.mu) {
        (Some(g), None) => g.clone(),
        (None, Some(m)) => vec![m],
        (Some(_), Some(_)) => {
            v.push("give either mu or mu_grid, not both");
            vec![]
        }
        (None, None) => {
            v.push("`mu_grid` (or `mu`) is required");
            vec![]
        }
    }
}

fn bias(cfg: RunConfig) -> Result<()> {
    let mut v = Violations::default();
    let seed = RunConfig::require(&cfg.seed, "seed", &mut v);
    let output = RunConfig::require(&cfg.output, "output", &mut v);
    let estimator = cfg.estimator_or(Estimator::Mle, &mut v);
    let grid = mu_grid(&cfg, &mut v);
    let family = cfg.family_spec(None, &mut v);
    check(std::mem::take(&mut v))?;
    let family = family.unwrap();
    let bc = BiasConfig {
        anomaly_frac: cfg.anomaly_frac.unwrap_or(0.05),
        anomaly_size: cfg.k,
        anomaly_within: cfg.anomaly_within.clone(),
        mu_grid: grid,
        trials: cfg.trials.unwrap_or(50),
        estimator,
        seed: seed.unwrap(),
        settings: EstimatorSettings {
            budget: cfg.budget.clone(),
            em: cfg.em.clone(),
            band: cfg.band,
        },
        family,
    };
    if cfg.k.is_some() && cfg.anomaly_frac.is_some() {
        v.push("give either k or anomaly_frac, not both");
    }
    v.extend(bc.violations());
    check(v)?;
    let report = bias_experiment(&bc)?;
    let json = output.unwrap();
    let csv = cfg.trials_output.clone().unwrap_or_else(|| json.with_extension("csv"));
    io::write_report(&report, &json, &csv)?;
    if io::read_report(&json, &csv)? != report {
        return Err(CliError::Verify(format!("{} does not read back", json.display())));
    }
    println!("mu\tbias_mean\tbias_q1\tbias_q3\tf_measure\tnorm_intersection");
    for c in &report.cells {
        println!(
            "{}\t{:.5}\t{:.5}\t{:.5}\t{:.4}\t{:.4}",
            c.mu, c.bias_mean, c.bias_q1, c.bias_q3, c.f_measure_mean, c.norm_intersection_mean
        );
    }
    Ok(())
}

fn mu_detect(cfg: RunConfig) -> Result<()> {
    let mut v = Violations::default();
    let seed = RunConfig::require(&cfg.seed, "seed", &mut v);
    let family = cfg.family_spec(None, &mut v);
    let k = family.as_ref().and_then(|f| cfg.anomaly_size(f.n, &mut v));
    check(std::mem::take(&mut v))?;
    let mc = MuDetectConfig {
        family: family.unwrap(),
        k: k.unwrap(),
        error_target: cfg.error_target.unwrap_or(0.01),
        trials_null: cfg.trials_null.or(cfg.trials).unwrap_or(1000),
        trials_alt: cfg.trials_alt.or(cfg.trials).unwrap_or(1000),
        mu_max: cfg.mu_max.unwrap_or(10.0),
        seed: seed.unwrap(),
        budget: cfg.budget.clone(),
    };
    v.extend(mc.violations());
    check(v)?;
    let report = estimate_mu_detect(&mc)?;
    println!("mu_detect = {}", report.mu_detect);
    if let Some(p) = &cfg.output {
        let doc = Envelope {
            command: "mu-detect",
            seed: Some(mc.seed),
            content_hash: provenance(&cfg, None)?,
            body: &report,
        };
        emit_json(Some(p), &doc)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SeriesOut {
    series: Vec<experiments::WassersteinSeries>,
}

fn wasserstein(cfg: RunConfig) -> Result<()> {
    let mut v = Violations::default();
    let seed = RunConfig::require(&cfg.seed, "seed", &mut v);
    let pairs = match (&cfg.pairs, cfg.alpha, cfg.mu) {
        (Some(p), None, None) => p.clone(),
        (None, Some(a), Some(m)) => vec![(a, m)],
        _ => {
            v.push("give `pairs`, or both `alpha` and `mu`");
            vec![]
        }
    };
    for (a, m) in &pairs {
        if !(*a > 0.0 && *a < 1.0) {
            v.push(format!("alpha {a} outside (0, 1)"));
        }
        if !(m.is_finite() && *m >= 0.0) {
            v.push(format!("mu {m} must be finite and nonnegative"));
        }
    }
    let n_grid = cfg.n_grid.clone().unwrap_or_else(|| vec![100, 1000, 10_000, 100_000]);
    if n_grid.len() < 2 || n_grid.contains(&0) {
        v.push("n_grid needs at least two positive sizes");
    }
    let trials = cfg.trials.unwrap_or(20);
    if trials == 0 {
        v.push("trials must be positive");
    }
    check(v)?;
    let wc = WassersteinConfig {
        pairs,
        n_grid,
        trials,
        seed: seed.unwrap(),
    };
    let series = wasserstein_scaling(&wc)?;
    for s in &series {
        println!("alpha {} mu {}: slope {:.4}", s.alpha, s.mu, s.slope);
    }
    let doc = Envelope {
        command: "wasserstein",
        seed: Some(wc.seed),
        content_hash: provenance(&cfg, None)?,
        body: SeriesOut { series },
    };
    match &cfg.output {
        Some(p) => emit_json(Some(p), &doc),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct AsymptoticOut {
    alpha: f64,
    mu: f64,
    t_star: f64,
    bias: f64,
}

fn asymptotic_bias(cfg: RunConfig) -> Result<()> {
    let mut v = Violations::default();
    let alpha = RunConfig::require(&cfg.alpha, "alpha", &mut v);
    let grid = mu_grid(&cfg, &mut v);
    check(v)?;
    let alpha = alpha.unwrap();
    let rows = grid
        .iter()
        .map(|&mu| {
            let r = asymptotic_unstructured_bias(alpha, mu)?;
            Ok(AsymptoticOut {
                alpha,
                mu,
                t_star: r.t_star,
                bias: r.bias,
            })
        })
        .collect::<std::result::Result<Vec<_>, Error>>()?;
    let doc = Envelope {
        command: "asymptotic-bias",
        seed: None,
        content_hash: provenance(&cfg, None)?,
        body: serde_json::json!({ "values": rows }),
    };
    emit_json(cfg.output.as_deref(), &doc)
}

fn disease(cfg: RunConfig) -> Result<()> {
    let mut v = Violations::default();
    if cfg.mode == Some(ObservationMode::Gaussian) {
        v.push("disease takes Poisson observations");
    }
    let input = read_input(&cfg, &mut v);
    let estimator = cfg.estimator_or(Estimator::Mle, &mut v);
    if estimator == Estimator::Regularized {
        v.push("the regularized estimator applies to Gaussian submatrix data only");
    }
    budget_checks(&cfg, &mut v);
    check(std::mem::take(&mut v))?;
    let (_, bytes) = input.unwrap();
    let obs = io::parse_observations(&bytes[..], ObservationMode::Poisson)?;
    let data = obs.as_poisson()?;
    let family = if cfg.family.is_some() {
        let f = cfg.family_spec(Some(data.len()), &mut v);
        check(v)?;
        f.unwrap()
    } else {
        FamilySpec::unstructured(data.len())
    };
    let seed = cfg.seed.unwrap_or(0);
    let budget = cfg.budget.clone().with_seed(seed);
    let (res, fit) = if estimator == Estimator::Mle {
        (scan::poisson_scan_mle(data, &family, &budget)?, None)
    } else {
        let em = structscan::mixture::EmConfig { seed, ..cfg.em.clone() };
        let fit = mixture::fit_poisson_mixture_em(data, &em)?;
        let res = if estimator == Estimator::Gmm {
            mixture::gmm_estimator(&fit, &family, cfg.band, &budget)?
        } else {
            mixture::gmm_estimator_shifted(&fit, &family, &budget)?
        };
        write_fit(&cfg, &fit)?;
        (res, Some(fit))
    };
    let body = EstimateOut {
        family: family.kind_name(),
        estimator,
        n: family.n,
        size: res.set.len(),
        score: res.score,
        gamma: scan::poisson_score(data, &res.set)?,
        solver: res.solver,
        evaluations: res.evaluations,
        set: res.set.into_vec(),
        fit,
    };
    let doc = Envelope {
        command: "disease",
        seed: Some(seed),
        content_hash: provenance(&cfg, Some(&bytes))?,
        body,
    };
    emit_json(cfg.output.as_deref(), &doc)
}

fn export_ilp(cfg: RunConfig) -> Result<()> {
    let mut v = Violations::default();
    let input = read_input(&cfg, &mut v);
    let output = RunConfig::require(&cfg.output, "output", &mut v);
    let estimator = cfg.estimator_or(Estimator::Mle, &mut v);
    match estimator {
        Estimator::Mle if cfg.size.is_none() => {
            v.push("the mle objective is linear only at a fixed size; set `size`")
        }
        Estimator::GmmShifted if cfg.size.is_some() => v.push("gmm_shifted exports an unconstrained model; drop `size`"),
        Estimator::Regularized => v.push("the regularized objective has no linear form"),
        _ => {}
    }
    check(std::mem::take(&mut v))?;
    let (_, bytes) = input.unwrap();
    let obs = io::parse_observations(&bytes[..], ObservationMode::Gaussian)?;
    let x = obs.as_gaussian()?;
    let family = cfg.family_spec(Some(x.len()), &mut v);
    check(v)?;
    let family = family.unwrap();
    let seed = cfg.seed.unwrap_or(0);
    let (weights, size) = match estimator {
        Estimator::Mle => (x.to_vec(), cfg.size),
        _ => {
            let em = structscan::mixture::EmConfig { seed, ..cfg.em.clone() };
            let fit = mixture::fit_gmm_em(x, &em)?;
            write_fit(&cfg, &fit)?;
            if estimator == Estimator::Gmm {
                let size = cfg.size.unwrap_or_else(|| fit.target_size());
                (fit.responsibilities.clone(), Some(size))
            } else {
                let tau = mixture::responsibility_shift(&fit).unwrap_or(0.5);
                (fit.responsibilities.iter().map(|r| r - tau).collect(), None)
            }
        }
    };
    let model = lp::lp_model(&family, &weights, size)?;
    let text = format!(
        "\\ seed = {seed}\n\\ content_hash = {}\n{model}",
        provenance(&cfg, Some(&bytes))?
    );
    let output = output.unwrap();
    std::fs::write(&output, &text).map_err(Error::from)?;
    if std::fs::read_to_string(&output).map_err(Error::from)? != text {
        return Err(CliError::Verify(format!("{} does not read back", output.display())));
    }
    Ok(())
}
