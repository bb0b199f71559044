//! Two-component mixtures fitted by EM, and anomaly estimators built on
//! their responsibilities.
//!
//! The Gaussian model is `X ~ alpha N(mu, 1) + (1 - alpha) N(0, 1)`; the
//! Poisson model is `C_i ~ alpha Pois(q B_i) + (1 - alpha) Pois(B_i)`.
//!
//! ```
//! use structscan::family::FamilySpec;
//! use structscan::mixture::{fit_gmm_em, gmm_estimator, EmConfig, SizeBand};
//! use structscan::scan::SearchBudget;
//!
//! let mut x = vec![0.0; 90];
//! x.extend([8.0; 10]);
//! let fit = fit_gmm_em(&x, &EmConfig::default()).unwrap();
//! assert!((fit.alpha_hat - 0.1).abs() < 1e-6);
//! let est = gmm_estimator(&fit, &FamilySpec::unstructured(100), SizeBand::Exact, &SearchBudget::default()).unwrap();
//! assert_eq!(est.set.as_slice(), &(90..100).collect::<Vec<_>>()[..]);
//! ```

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::family::FamilySpec;
use crate::rng::{self, label};
use crate::sampling::PoissonData;
use crate::scan::{self, ScanResult, SearchBudget};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    /// Stop once an iteration gains less log-likelihood than this and the
    /// parameters moved by less than `tol / 10`.
    pub tol: f64,
    pub max_iter: usize,
    /// Jittered restarts on top of the default start.
    pub restarts: usize,
    /// Starting mixing weight.
    pub init_alpha: f64,
    /// Starting effect is this quantile of the data (of `C/B` for counts).
    pub init_quantile: f64,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1000,
            restarts: 5,
            init_alpha: 0.1,
            init_quantile: 0.9,
            seed: 0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::param("tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter must be positive"));
        }
        if !(self.init_alpha > 0.0 && self.init_alpha < 1.0) {
            return Err(Error::param("init_alpha must lie in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.init_quantile) {
            return Err(Error::param("init_quantile must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Fitted size of the elevated component's effect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Effect {
    /// Mean shift of the Gaussian model.
    #[serde(rename = "mu_hat")]
    Mean(f64),
    /// Relative risk of the Poisson model.
    #[serde(rename = "q_hat")]
    RelativeRisk(f64),
}

impl Effect {
    pub fn value(self) -> f64 {
        match self {
            Effect::Mean(v) | Effect::RelativeRisk(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureFit {
    pub alpha_hat: f64,
    #[serde(flatten)]
    pub effect: Effect,
    pub loglik: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    /// Posterior probability of the elevated component, per observation.
    #[serde(skip)]
    pub responsibilities: Vec<f64>,
    /// Log-likelihood before each iteration of the winning run, followed by
    /// the final value.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

impl MixtureFit {
    pub fn n(&self) -> usize {
        self.responsibilities.len()
    }

    /// `round(alpha_hat n)` clamped to `[1, n - 1]`.
    pub fn target_size(&self) -> usize {
        let n = self.n();
        ((self.alpha_hat * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1))
    }
}

fn log_sigmoid_pair(z: f64) -> f64 {
    // ln(1 + e^z)
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Sample quantile with linear interpolation between order statistics.
pub(crate) fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = p * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// The two models share the EM loop; they differ in the per-point log odds
/// of the elevated component, the log-likelihood and the effect update.
trait Model: Sync {
    fn n(&self) -> usize;
    /// `ln[alpha f1(x_i)] - ln[(1 - alpha) f0(x_i)]`.
    fn log_odds(&self, i: usize, alpha: f64, effect: f64) -> f64;
    /// `ln[(1 - alpha) f0(x_i)]`.
    fn log_null(&self, i: usize, alpha: f64) -> f64;
    fn update_effect(&self, r: &[f64]) -> f64;
    fn initial_effect(&self, quantile: f64) -> f64;
    fn wrap(&self, effect: f64) -> Effect;
}

struct Gaussian<'a>(&'a [f64]);

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

impl Model for Gaussian<'_> {
    fn n(&self) -> usize {
        self.0.len()
    }

    fn log_odds(&self, i: usize, alpha: f64, mu: f64) -> f64 {
        let x = self.0[i];
        (alpha / (1.0 - alpha)).ln() + mu * x - 0.5 * mu * mu
    }

    fn log_null(&self, i: usize, alpha: f64) -> f64 {
        let x = self.0[i];
        (1.0 - alpha).ln() - 0.5 * x * x - LN_SQRT_2PI
    }

    fn update_effect(&self, r: &[f64]) -> f64 {
        let (num, den) = r
            .iter()
            .zip(self.0)
            .fold((0.0, 0.0), |(a, b), (&ri, &xi)| (a + ri * xi, b + ri));
        if den > 0.0 {
            (num / den).max(0.0)
        } else {
            0.0
        }
    }

    fn initial_effect(&self, q: f64) -> f64 {
        quantile(self.0, q).max(0.0)
    }

    fn wrap(&self, mu: f64) -> Effect {
        Effect::Mean(mu)
    }
}

struct Poisson<'a> {
    counts: Vec<f64>,
    baselines: &'a [f64],
    ln_null: Vec<f64>,
}

impl<'a> Poisson<'a> {
    fn new(data: &'a PoissonData) -> Self {
        let counts: Vec<f64> = data.counts().iter().map(|&c| c as f64).collect();
        let ln_null = counts
            .iter()
            .zip(data.baselines())
            .map(|(&c, &b)| c * b.ln() - b - ln_gamma(c + 1.0))
            .collect();
        Self {
            counts,
            baselines: data.baselines(),
            ln_null,
        }
    }
}

impl Model for Poisson<'_> {
    fn n(&self) -> usize {
        self.counts.len()
    }

    fn log_odds(&self, i: usize, alpha: f64, q: f64) -> f64 {
        (alpha / (1.0 - alpha)).ln() + self.counts[i] * q.ln() - (q - 1.0) * self.baselines[i]
    }

    fn log_null(&self, i: usize, alpha: f64) -> f64 {
        (1.0 - alpha).ln() + self.ln_null[i]
    }

    fn update_effect(&self, r: &[f64]) -> f64 {
        let (num, den) = (0..r.len()).fold((0.0, 0.0), |(a, b), i| {
            (a + r[i] * self.counts[i], b + r[i] * self.baselines[i])
        });
        if den > 0.0 {
            (num / den).max(1.0)
        } else {
            1.0
        }
    }

    fn initial_effect(&self, q: f64) -> f64 {
        let ratios: Vec<f64> = self
            .counts
            .iter()
            .zip(self.baselines)
            .map(|(c, b)| c / b)
            .collect();
        quantile(&ratios, q).max(1.0)
    }

    fn wrap(&self, q: f64) -> Effect {
        Effect::RelativeRisk(q)
    }
}

fn loglik(model: &dyn Model, alpha: f64, effect: f64) -> f64 {
    (0..model.n())
        .map(|i| model.log_null(i, alpha) + log_sigmoid_pair(model.log_odds(i, alpha, effect)))
        .sum()
}

fn responsibilities_of(model: &dyn Model, alpha: f64, effect: f64) -> Vec<f64> {
    (0..model.n())
        .map(|i| sigmoid(model.log_odds(i, alpha, effect)))
        .collect()
}

struct Run {
    alpha: f64,
    effect: f64,
    loglik: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn em_run(model: &dyn Model, mut alpha: f64, mut effect: f64, cfg: &EmConfig) -> Run {
    let n = model.n() as f64;
    let (lo, hi) = (1.0 / n, 1.0 - 1.0 / n);
    alpha = alpha.clamp(lo, hi);
    let mut ll = loglik(model, alpha, effect);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let r = responsibilities_of(model, alpha, effect);
        let next_alpha = (r.iter().sum::<f64>() / n).clamp(lo, hi);
        let next_effect = model.update_effect(&r);
        let next_ll = loglik(model, next_alpha, next_effect);
        let step = (next_alpha - alpha).abs().max((next_effect - effect).abs());
        let gain = next_ll - ll;
        alpha = next_alpha;
        effect = next_effect;
        ll = next_ll;
        trace.push(ll);
        if gain < cfg.tol && step <= cfg.tol / 10.0 {
            converged = true;
            break;
        }
    }
    Run {
        alpha,
        effect,
        loglik: ll,
        iterations,
        converged,
        trace,
    }
}

fn fit(model: &dyn Model, cfg: &EmConfig) -> Result<MixtureFit> {
    cfg.validate()?;
    let n = model.n();
    if n < 2 {
        return Err(Error::param("mixture fit needs at least two observations"));
    }
    let base_effect = model.initial_effect(cfg.init_quantile);
    let starts: Vec<(f64, f64)> = (0..=cfg.restarts)
        .map(|j| {
            if j == 0 {
                return (cfg.init_alpha, base_effect);
            }
            let mut r = rng::stream(cfg.seed, &[label::EM, j as u64]);
            let alpha = cfg.init_alpha * (r.random_range(-1.0..1.0f64)).exp2();
            let effect = model.initial_effect(r.random_range(0.75..0.99));
            (alpha.min(0.49), effect * r.random_range(0.7..1.3))
        })
        .collect();
    let runs: Vec<Run> = starts
        .par_iter()
        .map(|&(a, e)| em_run(model, a, e, cfg))
        .collect();
    // highest log-likelihood, earliest restart on ties
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.loglik > a.loglik { b } else { a })
        .unwrap();
    if !best.loglik.is_finite() {
        return Err(Error::Numerical("EM log-likelihood is not finite".into()));
    }
    Ok(MixtureFit {
        alpha_hat: best.alpha,
        effect: model.wrap(best.effect),
        loglik: best.loglik,
        iterations: best.iterations,
        restarts_used: cfg.restarts,
        converged: best.converged,
        responsibilities: responsibilities_of(model, best.alpha, best.effect),
        trace: best.trace,
    })
}

/// `r_i = alpha phi(x_i - mu) / (alpha phi(x_i - mu) + (1 - alpha) phi(x_i))`.
pub fn responsibilities(x: &[f64], alpha: f64, mu: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(responsibilities_of(&Gaussian(x), alpha, mu))
}

pub fn fit_gmm_em(x: &[f64], cfg: &EmConfig) -> Result<MixtureFit> {
    fit(&Gaussian(x), cfg)
}

pub fn fit_poisson_mixture_em(data: &PoissonData, cfg: &EmConfig) -> Result<MixtureFit> {
    fit(&Poisson::new(data), cfg)
}

/// Admissible sizes for the GMM estimator around `alpha_hat n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeBand {
    /// Exactly `round(alpha_hat n)`.
    #[default]
    Exact,
    /// `round(alpha_hat n) +- floor(sqrt(n ln n))`.
    Wide,
}

impl SizeBand {
    pub fn limits(self, fit: &MixtureFit) -> (usize, usize) {
        let n = fit.n();
        let t = fit.target_size();
        match self {
            SizeBand::Exact => (t, t),
            SizeBand::Wide => {
                let w = ((n as f64) * (n as f64).ln()).sqrt().floor() as usize;
                (t.saturating_sub(w).max(1), (t + w).min(n.saturating_sub(1).max(1)))
            }
        }
    }
}

fn check_fit(fit: &MixtureFit, family: &FamilySpec) -> Result<()> {
    if fit.n() != family.n {
        return Err(Error::UniverseMismatch {
            expected: family.n,
            got: fit.n(),
        });
    }
    Ok(())
}

/// Family member with size in the band maximizing total responsibility.
/// The score is the total responsibility.
pub fn gmm_estimator(fit: &MixtureFit, family: &FamilySpec, band: SizeBand, budget: &SearchBudget) -> Result<ScanResult> {
    check_fit(fit, family)?;
    let (low, high) = band.limits(fit);
    let mut best: Option<ScanResult> = None;
    let mut evaluations = 0;
    for size in low..=high {
        match scan::maximize_sum(&fit.responsibilities, family, Some(size), budget) {
            Ok(r) => {
                evaluations += r.evaluations;
                let better = match &best {
                    None => true,
                    Some(b) => r.score > b.score || (r.score == b.score && r.set < b.set),
                };
                if better {
                    best = Some(r);
                }
            }
            Err(Error::NoMemberOfSize { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let mut best = best.ok_or(Error::EmptyBand { low, high })?;
    best.evaluations = evaluations;
    Ok(best)
}

/// Shift applied by [`gmm_estimator_shifted`]: midpoint between the `T`-th
/// and `(T+1)`-th largest responsibilities, `T = round(alpha_hat n)`.
/// `None` when those two are equal.
pub fn responsibility_shift(fit: &MixtureFit) -> Option<f64> {
    let t = fit.target_size();
    let mut r = fit.responsibilities.clone();
    r.sort_by(|a, b| b.total_cmp(a));
    let (above, below) = (r[t - 1], r[t]);
    (above > below).then_some(0.5 * (above + below))
}

/// Unconstrained maximizer of `sum (r_i - tau)` over the family, with `tau`
/// from [`responsibility_shift`]. Falls back to [`gmm_estimator`] when the
/// shift is undefined. The score is the total shifted responsibility.
pub fn gmm_estimator_shifted(fit: &MixtureFit, family: &FamilySpec, budget: &SearchBudget) -> Result<ScanResult> {
    check_fit(fit, family)?;
    let Some(tau) = responsibility_shift(fit) else {
        return gmm_estimator(fit, family, SizeBand::Exact, budget);
    };
    let shifted: Vec<f64> = fit.responsibilities.iter().map(|r| r - tau).collect();
    scan::maximize_sum(&shifted, family, None, budget)
}
