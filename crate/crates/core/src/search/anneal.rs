//! Simulated annealing over feasible vertex sets of a graph family.
//!
//! States are always family members: add, drop and swap moves are only
//! proposed when the result stays feasible. Fixed-size searches use swaps
//! alone. Restarts begin from greedy growth around the highest-scoring
//! vertices, and from the unconstrained optimum when that happens to be a
//! member.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rayon::prelude::*;

use super::{sorted, unstructured, Best, Found, SizeMode};
use crate::error::{Error, Result};
use crate::family::{dense_enough, FamilyKind, FamilySpec};
use crate::graph::Graph;
use crate::objective::{Acc, Objective};
use crate::rng::{self, label, StreamRng};
use crate::sampling::find_feasible;
use crate::scan::SearchBudget;
use crate::subset_state::SubsetState;

const T_END: f64 = 1e-3;

#[derive(Clone, Copy, Debug)]
enum Constraint {
    Connected,
    Cut(usize),
    Dense(f64),
}

impl Constraint {
    fn of(family: &FamilySpec) -> Option<(Self, &Graph)> {
        match &family.kind {
            FamilyKind::Connected { graph } => Some((Constraint::Connected, graph)),
            FamilyKind::GraphCut { graph, rho } => Some((Constraint::Cut(*rho), graph)),
            FamilyKind::EdgeDense { graph, delta } => Some((Constraint::Dense(*delta), graph)),
            _ => None,
        }
    }

    /// Feasibility of the current state. Connectivity is maintained by the
    /// moves themselves.
    fn holds(self, s: &SubsetState) -> bool {
        match self {
            Constraint::Connected => true,
            Constraint::Cut(rho) => s.cut_size() <= rho,
            Constraint::Dense(delta) => dense_enough(s.induced_edges(), s.len(), delta),
        }
    }

    fn allows_insert(self, s: &SubsetState, w: usize) -> bool {
        match self {
            Constraint::Connected => s.nbr_in(w) > 0,
            Constraint::Cut(rho) => s.cut_after_insert(w) <= rho,
            Constraint::Dense(delta) => dense_enough(s.induced_edges() + s.nbr_in(w), s.len() + 1, delta),
        }
    }

    fn allows_remove(self, s: &mut SubsetState, u: usize) -> bool {
        match self {
            Constraint::Connected => s.removal_keeps_connected(u),
            Constraint::Cut(rho) => s.cut_after_remove(u) <= rho,
            Constraint::Dense(delta) => dense_enough(s.induced_edges() - s.nbr_in(u), s.len() - 1, delta),
        }
    }

    fn allows_swap(self, s: &mut SubsetState, u: usize, w: usize) -> bool {
        match self {
            Constraint::Connected => s.swap_keeps_connected(u, w),
            Constraint::Cut(rho) => s.cut_after_swap(u, w) <= rho,
            Constraint::Dense(delta) => dense_enough(s.induced_after_swap(u, w), s.len(), delta),
        }
    }
}

struct Cand {
    key: f64,
    v: usize,
}

impl PartialEq for Cand {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    // max-heap: larger key first, then smaller index
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then(other.v.cmp(&self.v))
    }
}

/// Grows a set from `start`, always adding the most attractive neighbour
/// (or, for non-connectivity constraints, the most attractive outsider once
/// the neighbourhood is exhausted). In free mode returns the best feasible
/// prefix of the growth order; in fixed mode the size-`k` prefix if it is
/// feasible.
fn greedy_grow(graph: &Graph, obj: &Objective, cons: Constraint, start: usize, mode: SizeMode) -> Option<Vec<usize>> {
    let n = graph.n_vertices();
    let limit = match mode {
        SizeMode::Free => n,
        SizeMode::Fixed(k) => k,
    };
    let mut s = SubsetState::new(graph);
    let mut heap = BinaryHeap::new();
    let mut order = Vec::new();
    let mut acc = Acc::default();
    let mut best = (f64::NEG_INFINITY, 0);
    let mut next = Some(start);
    while let Some(v) = next {
        s.insert(v);
        order.push(v);
        acc = acc.plus(obj.weight(v));
        for &w in graph.neighbors(v) {
            if !s.contains(w) {
                heap.push(Cand { key: obj.key(w), v: w });
            }
        }
        if mode == SizeMode::Free && cons.holds(&s) {
            let score = obj.eval(acc);
            if score > best.0 {
                best = (score, order.len());
            }
        }
        if order.len() >= limit {
            break;
        }
        next = None;
        while let Some(c) = heap.pop() {
            if !s.contains(c.v) {
                next = Some(c.v);
                break;
            }
        }
        if next.is_none() && !matches!(cons, Constraint::Connected) {
            next = (0..n)
                .filter(|&w| !s.contains(w))
                .max_by(|&a, &b| obj.key(a).total_cmp(&obj.key(b)).then(b.cmp(&a)));
        }
    }
    match mode {
        SizeMode::Free => (best.1 > 0).then(|| order[..best.1].to_vec()),
        SizeMode::Fixed(k) => (order.len() == k && cons.holds(&s)).then_some(order),
    }
}

fn propose_insert(s: &SubsetState, cons: Constraint, rng: &mut StreamRng) -> Option<usize> {
    let frontier = s.frontier();
    match cons {
        Constraint::Connected => (!frontier.is_empty()).then(|| frontier[rng.random_range(0..frontier.len())]),
        _ => {
            if !frontier.is_empty() && rng.random_bool(0.5) {
                Some(frontier[rng.random_range(0..frontier.len())])
            } else {
                s.random_outsider(rng)
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn chain(
    graph: &Graph,
    obj: &Objective,
    cons: Constraint,
    mode: SizeMode,
    start: &[usize],
    iterations: usize,
    rng: &mut StreamRng,
) -> (Best, u64) {
    let mut s = SubsetState::with_members(graph, start);
    let mut acc = obj.summarize(start);
    let mut cur = obj.eval(acc);
    let mut best = Best::default();
    best.offer(cur, || sorted(start.to_vec()));
    let t0 = obj.temperature_scale().max(T_END);
    let cool = (T_END / t0).powf(1.0 / iterations as f64);
    let mut temp = t0;
    let mut evals = 1;
    for _ in 0..iterations {
        temp *= cool;
        let kind = match mode {
            SizeMode::Fixed(_) => 2,
            SizeMode::Free => rng.random_range(0..3u8),
        };
        let (out, inn) = match kind {
            0 => match propose_insert(&s, cons, rng) {
                Some(w) if cons.allows_insert(&s, w) => (None, Some(w)),
                _ => continue,
            },
            1 => {
                if s.len() <= 1 {
                    continue;
                }
                let u = s.random_member(rng);
                if !cons.allows_remove(&mut s, u) {
                    continue;
                }
                (Some(u), None)
            }
            _ => {
                let u = s.random_member(rng);
                match propose_insert(&s, cons, rng) {
                    Some(w) if cons.allows_swap(&mut s, u, w) => (Some(u), Some(w)),
                    _ => continue,
                }
            }
        };
        let mut next = acc;
        if let Some(u) = out {
            next = next.minus(obj.weight(u));
        }
        if let Some(w) = inn {
            next = next.plus(obj.weight(w));
        }
        let score = obj.eval(next);
        evals += 1;
        let delta = score - cur;
        if delta >= 0.0 || rng.random::<f64>() < (delta / temp).exp() {
            if let Some(u) = out {
                s.remove(u);
            }
            if let Some(w) = inn {
                s.insert(w);
            }
            acc = next;
            cur = score;
            if cur >= best.score {
                best.offer(cur, || s.sorted_members());
            }
        }
    }
    // rescore with compensated sums so restarts compare on exact values
    best.score = obj.score_set(&best.set);
    (best, evals)
}

pub(crate) fn anneal(family: &FamilySpec, obj: &Objective, mode: SizeMode, budget: &SearchBudget) -> Result<Found> {
    let (cons, graph) = Constraint::of(family)
        .ok_or_else(|| Error::InvalidFamily(format!("{} family is not graph-based", family.kind_name())))?;
    let n = graph.n_vertices();
    let iterations = budget.iterations.unwrap_or(200 * n).max(1);
    let restarts = budget.restarts.max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| obj.key(b).total_cmp(&obj.key(a)).then(a.cmp(&b)));
    let warm = {
        let set = unstructured(obj, mode).best.set;
        (!set.is_empty() && family.contains_members(&set)).then_some(set)
    };
    let offset = warm.is_some() as usize;

    let (best, evaluations) = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(budget.seed, &[label::RESTART, r as u64]);
            let start = if r == 0 && warm.is_some() {
                warm.clone()
            } else {
                let first = (r - offset) % n;
                let mut found = greedy_grow(graph, obj, cons, order[first], mode);
                if found.is_none() {
                    if let SizeMode::Fixed(k) = mode {
                        found = match cons {
                            Constraint::Connected => (1..n)
                                .map(|i| order[(first + i) % n])
                                .find_map(|v| greedy_grow(graph, obj, cons, v, mode)),
                            _ => find_feasible(family, k, &mut rng),
                        };
                    }
                }
                found
            };
            match start {
                Some(start) => chain(graph, obj, cons, mode, &start, iterations, &mut rng),
                None => (Best::default(), 0),
            }
        })
        .reduce(
            || (Best::default(), 0),
            |(a, ea), (b, eb)| (a.merge(b), ea + eb),
        );
    Ok(Found {
        best,
        exact: false,
        evaluations,
    })
}
