//! Maximizers of additive-summary objectives over family members.

mod anneal;
mod submatrix;

use crate::error::{Error, Result};
use crate::family::{ball, FamilyKind, FamilySpec};
use crate::objective::{Acc, CompensatedSum, Objective};
use crate::scan::SearchBudget;

pub(crate) use submatrix::{Penalty, Submatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SizeMode {
    Free,
    Fixed(usize),
}

impl SizeMode {
    fn admits(self, len: usize) -> bool {
        match self {
            SizeMode::Free => true,
            SizeMode::Fixed(k) => len == k,
        }
    }
}

/// Best set seen so far, ordered by score then lexicographically smallest
/// index sequence.
#[derive(Clone, Debug)]
pub(crate) struct Best {
    pub score: f64,
    pub set: Vec<usize>,
}

impl Default for Best {
    fn default() -> Self {
        Self {
            score: f64::NEG_INFINITY,
            set: Vec::new(),
        }
    }
}

impl Best {
    /// `make` must return the candidate's members sorted ascending; it is
    /// only called when the candidate can win.
    pub(crate) fn offer(&mut self, score: f64, make: impl FnOnce() -> Vec<usize>) -> bool {
        if score > self.score || self.set.is_empty() {
            self.score = score;
            self.set = make();
            true
        } else if score == self.score {
            let s = make();
            if s < self.set {
                self.set = s;
                return true;
            }
            false
        } else {
            false
        }
    }

    pub(crate) fn merge(mut self, other: Best) -> Best {
        if !other.set.is_empty() {
            let Best { score, set } = other;
            self.offer(score, || set);
        }
        self
    }

    pub(crate) fn is_found(&self) -> bool {
        !self.set.is_empty()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Found {
    pub best: Best,
    pub exact: bool,
    pub evaluations: u64,
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Element orders along which an optimal set is a prefix. For `Gamma` and
/// `Linear` this is the descending order of values; the Poisson score is
/// convex in `(sum C, sum B)` so its optimum sits at a vertex of the
/// zonotope spanned by the points, i.e. a prefix in ascending or descending
/// order of `C_i / B_i`.
fn prefix_orders(obj: &Objective, units: &[usize], weights: &dyn Fn(usize) -> (f64, f64)) -> Vec<Vec<usize>> {
    let by = |desc: bool, key: &dyn Fn(usize) -> f64| {
        let mut o = units.to_vec();
        o.sort_by(|&i, &j| {
            let c = key(i).total_cmp(&key(j));
            (if desc { c.reverse() } else { c }).then(i.cmp(&j))
        });
        o
    };
    match obj {
        Objective::Gamma(_) | Objective::Linear(_) => vec![by(true, &|i| weights(i).0)],
        Objective::Poisson { .. } => {
            let ratio = |i: usize| {
                let (c, b) = weights(i);
                c / b
            };
            vec![by(true, &ratio), by(false, &ratio)]
        }
    }
}

/// Scores every admissible prefix of every order and offers it to `best`.
/// `to_set` maps a prefix of units to the sorted member list.
fn scan_prefixes(
    orders: &[Vec<usize>],
    weights: &dyn Fn(usize) -> (f64, f64),
    admits: &dyn Fn(usize) -> bool,
    score: &dyn Fn(Acc) -> f64,
    to_set: &dyn Fn(&[usize]) -> Vec<usize>,
    best: &mut Best,
) -> u64 {
    let mut evals = 0;
    for order in orders {
        let (mut a, mut b) = (CompensatedSum::default(), CompensatedSum::default());
        // best prefix length of this order; members are built only on ties
        let mut top: Option<(f64, usize)> = None;
        for (j, &u) in order.iter().enumerate() {
            let (wa, wb) = weights(u);
            a.add(wa);
            b.add(wb);
            if !admits(j + 1) {
                continue;
            }
            evals += 1;
            let v = score(Acc {
                a: a.value(),
                b: b.value(),
                k: j + 1,
            });
            top = match top {
                None => Some((v, j + 1)),
                Some((tv, _)) if v > tv => Some((v, j + 1)),
                Some((tv, len)) if v == tv && to_set(&order[..=j]) < to_set(&order[..len]) => Some((v, j + 1)),
                keep => keep,
            };
        }
        if let Some((v, len)) = top {
            best.offer(v, || to_set(&order[..len]));
        }
    }
    evals
}

pub(crate) fn unstructured(obj: &Objective, mode: SizeMode) -> Found {
    let n = obj.len();
    let units: Vec<usize> = (0..n).collect();
    let weights = |i| obj.weight(i);
    let orders = prefix_orders(obj, &units, &weights);
    let mut best = Best::default();
    let evaluations = scan_prefixes(
        &orders,
        &weights,
        &|len| mode.admits(len),
        &|acc| obj.eval(acc),
        &|p| sorted(p.to_vec()),
        &mut best,
    );
    Found {
        best,
        exact: true,
        evaluations,
    }
}

pub(crate) fn interval(obj: &Objective, mode: SizeMode) -> Found {
    let n = obj.len();
    let (mut pa, mut pb) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    let (mut sa, mut sb) = (CompensatedSum::default(), CompensatedSum::default());
    for i in 0..n {
        let (a, b) = obj.weight(i);
        sa.add(a);
        sb.add(b);
        pa[i + 1] = sa.value();
        pb[i + 1] = sb.value();
    }
    let mut best = Best::default();
    let mut evaluations = 0;
    let mut consider = |i: usize, j: usize, best: &mut Best| {
        let acc = Acc {
            a: pa[j] - pa[i],
            b: pb[j] - pb[i],
            k: j - i,
        };
        evaluations += 1;
        best.offer(obj.eval(acc), || (i..j).collect());
    };
    match mode {
        SizeMode::Free => {
            for i in 0..n {
                for j in i + 1..=n {
                    consider(i, j, &mut best);
                }
            }
        }
        SizeMode::Fixed(k) => {
            for i in 0..=n.saturating_sub(k) {
                if k >= 1 && i + k <= n {
                    consider(i, i + k, &mut best);
                }
            }
        }
    }
    Found {
        best,
        exact: true,
        evaluations,
    }
}

pub(crate) fn balls(obj: &Objective, points: &[Vec<f64>], epsilon: f64, mode: SizeMode) -> Found {
    let mut cands: Vec<Vec<usize>> = (0..points.len())
        .map(|c| ball(points, epsilon, c))
        .filter(|b| mode.admits(b.len()))
        .collect();
    cands.sort_unstable();
    cands.dedup();
    let mut best = Best::default();
    for c in &cands {
        best.offer(obj.score_set(c), || c.clone());
    }
    Found {
        best,
        exact: true,
        evaluations: cands.len() as u64,
    }
}

/// Scores every member of the family; fails with `TooLargeToEnumerate`
/// when the member count passes `cap`.
pub(crate) fn exhaustive(family: &FamilySpec, obj: &Objective, mode: SizeMode, cap: u64) -> Result<Found> {
    let size = match mode {
        SizeMode::Free => None,
        SizeMode::Fixed(k) => Some(k),
    };
    let mut best = Best::default();
    let evaluations = family.for_each_member(size, cap, &mut |m| {
        best.offer(obj.score_set(m), || sorted(m.to_vec()));
    })?;
    Ok(Found {
        best,
        exact: true,
        evaluations,
    })
}


/// Exhaustive search on small graphs, annealing otherwise.
fn graph_family(family: &FamilySpec, obj: &Objective, mode: SizeMode, budget: &SearchBudget) -> Result<Found> {
    if family.n <= budget.enum_max_vertices {
        match exhaustive(family, obj, mode, budget.enum_cap) {
            Err(Error::TooLargeToEnumerate { .. }) => {}
            other => return other,
        }
    }
    anneal::anneal(family, obj, mode, budget)
}

/// Maximizes `obj` over the members of `family` admitted by `mode`.
pub(crate) fn solve(
    family: &FamilySpec,
    obj: &Objective,
    mode: SizeMode,
    budget: &SearchBudget,
    penalty: Option<Penalty>,
) -> Result<Found> {
    let found = match &family.kind {
        FamilyKind::Unstructured => unstructured(obj, mode),
        FamilyKind::Interval => interval(obj, mode),
        FamilyKind::EpsilonBall { points, epsilon } => balls(obj, points, *epsilon, mode),
        FamilyKind::Submatrix { rows, cols } => Submatrix {
            obj,
            rows: *rows,
            cols: *cols,
            mode,
            penalty,
        }
        .solve(budget.submatrix_exact_side, budget.submatrix_restarts, budget.seed),
        FamilyKind::Connected { .. } | FamilyKind::GraphCut { .. } | FamilyKind::EdgeDense { .. } => {
            graph_family(family, obj, mode, budget)?
        }
    };
    if !found.best.is_found() {
        return Err(match mode {
            SizeMode::Fixed(k) => Error::NoMemberOfSize {
                size: k,
                reason: format!("search found no {} member of this size", family.kind_name()),
            },
            SizeMode::Free => Error::InvalidFamily(format!("search found no {} member", family.kind_name())),
        });
    }
    Ok(found)
}
