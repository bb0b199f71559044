//! Scan statistics and maximum-likelihood anomaly estimates.
//!
//! The Gaussian scan statistic of a set `S` is `Γ(S) = sum_{i in S} x_i /
//! sqrt(|S|)`. Its maximizer over a family is the MLE of the anomaly and its
//! maximum is the GLR detection statistic.
//!
//! ```
//! use structscan::family::FamilySpec;
//! use structscan::scan::{mle, SearchBudget};
//!
//! let x = [0.0, 5.0, 5.0, 0.0];
//! let est = mle(&x, &FamilySpec::interval(4), &SearchBudget::default()).unwrap();
//! assert_eq!(est.set.as_slice(), &[1, 2]);
//! assert!((est.score - 10.0 / 2f64.sqrt()).abs() < 1e-12);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyKind, FamilySpec};
use crate::index_set::IndexSet;
use crate::objective::Objective;
use crate::sampling::{ln_binomial, PoissonData};
use crate::search::{self, Found, SizeMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Provably optimal: closed form or full enumeration.
    Exact,
    Heuristic,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Exact => "exact",
            Solver::Heuristic => "heuristic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub set: IndexSet,
    pub score: f64,
    pub solver: Solver,
    /// Number of candidate sets scored.
    pub evaluations: u64,
}

/// Search limits for the families without a closed-form solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBudget {
    /// Annealing steps per restart; `None` means `200 * n`.
    pub iterations: Option<usize>,
    /// Annealing restarts.
    pub restarts: usize,
    /// Graph families are enumerated exhaustively when they have at most
    /// this many vertices and at most `enum_cap` members.
    pub enum_max_vertices: usize,
    pub enum_cap: u64,
    /// Random restarts of the alternating submatrix search.
    pub submatrix_restarts: usize,
    /// Submatrices are searched exactly when the shorter side is at most
    /// this long.
    pub submatrix_exact_side: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            iterations: None,
            restarts: 5,
            enum_max_vertices: 20,
            enum_cap: 1 << 21,
            submatrix_restarts: 20,
            submatrix_exact_side: 12,
            seed: 0,
        }
    }
}

impl SearchBudget {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Never enumerate graph families; always anneal.
    pub fn heuristic_only(mut self) -> Self {
        self.enum_max_vertices = 0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == Some(0) {
            return Err(Error::param("iterations must be positive"));
        }
        if self.restarts == 0 || self.submatrix_restarts == 0 {
            return Err(Error::param("restarts must be positive"));
        }
        if self.submatrix_exact_side > 24 {
            return Err(Error::param("submatrix_exact_side above 24 is intractable"));
        }
        Ok(())
    }
}

fn check_len(family: &FamilySpec, n: usize) -> Result<()> {
    if family.n != n {
        return Err(Error::UniverseMismatch {
            expected: family.n,
            got: n,
        });
    }
    family.validate()
}

fn check_set(s: &IndexSet, n: usize) -> Result<()> {
    if s.universe_size() != n {
        return Err(Error::UniverseMismatch {
            expected: n,
            got: s.universe_size(),
        });
    }
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

fn into_result(found: Found, n: usize, obj: &Objective) -> ScanResult {
    let score = obj.score_set(&found.best.set);
    ScanResult {
        set: IndexSet::from_sorted(n, found.best.set),
        score,
        solver: if found.exact {
            Solver::Exact
        } else {
            Solver::Heuristic
        },
        evaluations: found.evaluations,
    }
}

/// `Γ(s) = sum_{i in s} x_i / sqrt(|s|)`.
pub fn gamma(x: &[f64], s: &IndexSet) -> Result<f64> {
    check_set(s, x.len())?;
    Ok(Objective::Gamma(x).score_set(s.as_slice()))
}

/// Family member maximizing Γ. Ties go to the lexicographically smallest
/// index sequence.
pub fn mle(x: &[f64], family: &FamilySpec, budget: &SearchBudget) -> Result<ScanResult> {
    check_len(family, x.len())?;
    budget.validate()?;
    let obj = Objective::Gamma(x);
    let found = search::solve(family, &obj, SizeMode::Free, budget, None)?;
    Ok(into_result(found, x.len(), &obj))
}

/// Maximum of Γ over the family.
pub fn glr_statistic(x: &[f64], family: &FamilySpec, budget: &SearchBudget) -> Result<f64> {
    mle(x, family, budget).map(|r| r.score)
}

/// Size penalty of a `p x q` submatrix of an `m x m` matrix:
/// `sqrt(2 ln(m^2 C(m,p) C(m,q)))`.
pub fn submatrix_penalty(m: usize, p: usize, q: usize) -> f64 {
    (2.0 * (2.0 * (m as f64).ln() + ln_binomial(m, p) + ln_binomial(m, q))).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizedResult {
    /// Penalized optimum; `score` is the penalized value.
    pub result: ScanResult,
    /// Unpenalized Γ of the same set.
    pub gamma: f64,
}

/// Maximizes `Γ(M) - submatrix_penalty(m, p, q)` over submatrices of an
/// `m x m` row-major matrix.
pub fn regularized_submatrix_mle(x: &[f64], budget: &SearchBudget) -> Result<RegularizedResult> {
    let n = x.len();
    let m = (n as f64).sqrt().round() as usize;
    if m * m != n || n == 0 {
        return Err(Error::param(format!("{n} observations do not form a square matrix")));
    }
    budget.validate()?;
    let family = FamilySpec::submatrix(m, m);
    let obj = Objective::Gamma(x);
    let table: Vec<Vec<f64>> = (0..=m)
        .map(|p| (0..=m).map(|q| submatrix_penalty(m, p, q)).collect())
        .collect();
    let pen = |p: usize, q: usize| table[p][q];
    let found = search::solve(&family, &obj, SizeMode::Free, budget, Some(&pen))?;
    let mut result = into_result(found, n, &obj);
    let gamma = result.score;
    let (p, q) = shape(&result.set, m);
    result.score = gamma - pen(p, q);
    Ok(RegularizedResult { result, gamma })
}

fn shape(s: &IndexSet, cols: usize) -> (usize, usize) {
    let mut rows: Vec<usize> = s.iter().map(|i| i / cols).collect();
    let mut cs: Vec<usize> = s.iter().map(|i| i % cols).collect();
    rows.dedup();
    cs.sort_unstable();
    cs.dedup();
    (rows.len(), cs.len())
}

fn poisson_vectors(data: &PoissonData) -> Vec<f64> {
    data.counts().iter().map(|&c| c as f64).collect()
}

/// Expectation-based Poisson score
/// `sum B + (sum C)(-1 + ln sum C - ln sum B)` of `s`; `sum B` when the
/// set holds no counts.
pub fn poisson_score(data: &PoissonData, s: &IndexSet) -> Result<f64> {
    check_set(s, data.len())?;
    let counts = poisson_vectors(data);
    let obj = Objective::Poisson {
        counts: &counts,
        baselines: data.baselines(),
    };
    Ok(obj.score_set(s.as_slice()))
}

/// Family member maximizing the Poisson score.
pub fn poisson_scan_mle(data: &PoissonData, family: &FamilySpec, budget: &SearchBudget) -> Result<ScanResult> {
    check_len(family, data.len())?;
    budget.validate()?;
    let counts = poisson_vectors(data);
    let obj = Objective::Poisson {
        counts: &counts,
        baselines: data.baselines(),
    };
    let found = search::solve(family, &obj, SizeMode::Free, budget, None)?;
    Ok(into_result(found, data.len(), &obj))
}

/// Family member maximizing `sum_{i in S} w_i`, optionally restricted to
/// members of size `size`.
pub fn maximize_sum(w: &[f64], family: &FamilySpec, size: Option<usize>, budget: &SearchBudget) -> Result<ScanResult> {
    check_len(family, w.len())?;
    budget.validate()?;
    let obj = Objective::Linear(w);
    let mode = size.map_or(SizeMode::Free, SizeMode::Fixed);
    let found = search::solve(family, &obj, mode, budget, None)?;
    Ok(into_result(found, w.len(), &obj))
}

/// Whether `family` admits a closed-form solver (no search budget used).
pub fn has_closed_form(family: &FamilySpec) -> bool {
    matches!(
        family.kind,
        FamilyKind::Unstructured | FamilyKind::Interval | FamilyKind::EpsilonBall { .. }
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn set(n: usize, v: &[usize]) -> IndexSet {
        IndexSet::new(n, v.iter().copied()).unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&[2.0], &set(1, &[0])).unwrap(), 2.0);
        assert_eq!(gamma(&[1.0; 4], &set(4, &[0, 1, 2, 3])).unwrap(), 2.0);
        let g = gamma(&[3.0, -1.0, 2.0], &set(3, &[0, 2])).unwrap();
        assert!((g - 5.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(gamma(&[1.0], &IndexSet::empty(1)), Err(Error::EmptySet)));
    }

    #[test]
    fn mle_examples() {
        let b = SearchBudget::default();
        let r = mle(&[5.0, -1.0, -2.0], &FamilySpec::unstructured(3), &b).unwrap();
        assert_eq!(r.set.as_slice(), &[0]);
        assert_eq!(r.score, 5.0);
        assert_eq!(r.solver, Solver::Exact);

        let path = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = mle(&[1.0, -5.0, 1.0, 1.0], &FamilySpec::connected(path), &b).unwrap();
        assert_eq!(r.set.as_slice(), &[2, 3]);
        assert!((r.score - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lexicographically_smallest() {
        let b = SearchBudget::default();
        let r = mle(&[1.0, 3.0, 3.0, 1.0, 3.0], &FamilySpec::unstructured(5), &b).unwrap();
        assert_eq!(r.set.as_slice(), &[1, 2, 4]);
        let r = mle(&[3.0, -10.0, 3.0], &FamilySpec::interval(3), &b).unwrap();
        assert_eq!(r.set.as_slice(), &[0]);
    }

    #[test]
    fn regularized_two_by_two() {
        let r = regularized_submatrix_mle(&[3.0, 0.0, 0.0, 0.0], &SearchBudget::default()).unwrap();
        assert_eq!(r.result.set.as_slice(), &[0]);
        let pen = (2.0 * 16f64.ln()).sqrt();
        assert!((r.result.score - (3.0 - pen)).abs() < 1e-12);
        assert_eq!(r.gamma, 3.0);
        assert!(regularized_submatrix_mle(&[0.0; 3], &SearchBudget::default()).is_err());
    }

    #[test]
    fn poisson_toy() {
        let data = PoissonData::new(vec![5, 1], vec![2.0, 2.0]).unwrap();
        let r = poisson_scan_mle(&data, &FamilySpec::unstructured(2), &SearchBudget::default()).unwrap();
        assert_eq!(r.set.as_slice(), &[0]);
        assert!((r.score - (2.0 + 5.0 * (-1.0 + 2.5f64.ln()))).abs() < 1e-12);
    }
}
