//! Anomaly families.
//!
//! A family is a collection of admissible anomaly sets over a universe of
//! `n` observations. Every family answers three questions: is a given set a
//! member ([`FamilySpec::contains`]), what are all the members
//! ([`FamilySpec::enumerate`]), and how many members contain a given set
//! ([`FamilySpec::count_supersets`]). The empty set is never a member.

use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::index_set::IndexSet;

/// Largest number of candidate subsets a brute-force subset walk may visit.
pub const SUBSET_WALK_LIMIT: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub n: usize,
    #[serde(flatten)]
    pub kind: FamilyKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// Contiguous runs `{i, ..., j}`.
    Interval,
    /// Row-set x column-set products of a `rows x cols` matrix, linearized
    /// row-major: index `i` is cell `(i / cols, i % cols)`.
    Submatrix { rows: usize, cols: usize },
    /// Vertex sets inducing a connected subgraph.
    Connected { graph: Arc<Graph> },
    /// Vertex sets with at most `rho` edges leaving the set.
    GraphCut { graph: Arc<Graph>, rho: usize },
    /// Vertex sets whose induced edge density is at least `delta`.
    /// Singletons are members.
    EdgeDense { graph: Arc<Graph>, delta: f64 },
    /// Euclidean balls of radius `epsilon` centred on the data points.
    EpsilonBall { points: Vec<Vec<f64>>, epsilon: f64 },
    /// Every nonempty subset.
    Unstructured,
}

impl FamilySpec {
    pub fn interval(n: usize) -> Self {
        Self {
            n,
            kind: FamilyKind::Interval,
        }
    }

    pub fn unstructured(n: usize) -> Self {
        Self {
            n,
            kind: FamilyKind::Unstructured,
        }
    }

    pub fn submatrix(rows: usize, cols: usize) -> Self {
        Self {
            n: rows * cols,
            kind: FamilyKind::Submatrix { rows, cols },
        }
    }

    pub fn connected(graph: impl Into<Arc<Graph>>) -> Self {
        let graph = graph.into();
        Self {
            n: graph.n_vertices(),
            kind: FamilyKind::Connected { graph },
        }
    }

    pub fn graph_cut(graph: impl Into<Arc<Graph>>, rho: usize) -> Self {
        let graph = graph.into();
        Self {
            n: graph.n_vertices(),
            kind: FamilyKind::GraphCut { graph, rho },
        }
    }

    pub fn edge_dense(graph: impl Into<Arc<Graph>>, delta: f64) -> Result<Self> {
        let graph = graph.into();
        let spec = Self {
            n: graph.n_vertices(),
            kind: FamilyKind::EdgeDense { graph, delta },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn epsilon_ball(points: Vec<Vec<f64>>, epsilon: f64) -> Result<Self> {
        let spec = Self {
            n: points.len(),
            kind: FamilyKind::EpsilonBall { points, epsilon },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks that the parameters are consistent with the declared kind.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFamily(msg));
        if self.n == 0 {
            return bad("universe must be nonempty".into());
        }
        match &self.kind {
            FamilyKind::Interval | FamilyKind::Unstructured => Ok(()),
            FamilyKind::Submatrix { rows, cols } => {
                if rows * cols != self.n {
                    bad(format!("submatrix {rows}x{cols} does not cover n = {}", self.n))
                } else {
                    Ok(())
                }
            }
            FamilyKind::Connected { graph } | FamilyKind::GraphCut { graph, .. } => {
                self.check_graph(graph)
            }
            FamilyKind::EdgeDense { graph, delta } => {
                if !(0.0..=1.0).contains(delta) {
                    return bad(format!("edge density threshold {delta} outside [0, 1]"));
                }
                self.check_graph(graph)
            }
            FamilyKind::EpsilonBall { points, epsilon } => {
                if !(*epsilon > 0.0) {
                    return bad(format!("epsilon must be positive, got {epsilon}"));
                }
                if points.len() != self.n {
                    return bad(format!("{} points for n = {}", points.len(), self.n));
                }
                let d = points[0].len();
                if points.iter().any(|p| p.len() != d) {
                    return bad("points have inconsistent dimensions".into());
                }
                Ok(())
            }
        }
    }

    fn check_graph(&self, graph: &Graph) -> Result<()> {
        if graph.n_vertices() != self.n {
            return Err(Error::InvalidFamily(format!(
                "graph has {} vertices, family has n = {}",
                graph.n_vertices(),
                self.n
            )));
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Interval => "interval",
            FamilyKind::Submatrix { .. } => "submatrix",
            FamilyKind::Connected { .. } => "connected",
            FamilyKind::GraphCut { .. } => "graph_cut",
            FamilyKind::EdgeDense { .. } => "edge_dense",
            FamilyKind::EpsilonBall { .. } => "epsilon_ball",
            FamilyKind::Unstructured => "unstructured",
        }
    }

    pub fn graph(&self) -> Option<&Graph> {
        match &self.kind {
            FamilyKind::Connected { graph }
            | FamilyKind::GraphCut { graph, .. }
            | FamilyKind::EdgeDense { graph, .. } => Some(graph),
            _ => None,
        }
    }

    fn check_universe(&self, s: &IndexSet) -> Result<()> {
        if s.universe_size() != self.n {
            return Err(Error::UniverseMismatch {
                expected: self.n,
                got: s.universe_size(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, s: &IndexSet) -> Result<bool> {
        self.check_universe(s)?;
        Ok(!s.is_empty() && self.contains_members(s.as_slice()))
    }

    /// Membership test for a nonempty slice of distinct in-range indices in
    /// any order.
    pub(crate) fn contains_members(&self, members: &[usize]) -> bool {
        if members.is_empty() {
            return false;
        }
        match &self.kind {
            FamilyKind::Unstructured => true,
            FamilyKind::Interval => {
                let lo = members.iter().min().unwrap();
                let hi = members.iter().max().unwrap();
                hi - lo + 1 == members.len()
            }
            FamilyKind::Submatrix { cols, .. } => {
                let mut rows: Vec<usize> = members.iter().map(|i| i / cols).collect();
                let mut cs: Vec<usize> = members.iter().map(|i| i % cols).collect();
                rows.sort_unstable();
                rows.dedup();
                cs.sort_unstable();
                cs.dedup();
                rows.len() * cs.len() == members.len()
            }
            FamilyKind::Connected { graph } => graph.is_connected_subset(members),
            FamilyKind::GraphCut { graph, rho } => graph.cut_size(members) <= *rho,
            FamilyKind::EdgeDense { graph, delta } => {
                dense_enough(graph.induced_edges(members), members.len(), *delta)
            }
            FamilyKind::EpsilonBall { points, epsilon } => {
                let mut sorted = members.to_vec();
                sorted.sort_unstable();
                sorted
                    .iter()
                    .any(|&c| ball(points, *epsilon, c) == sorted)
            }
        }
    }

    /// All members, optionally restricted to size `size`, in lexicographic
    /// order of their index sequences.
    pub fn enumerate(&self, size: Option<usize>, cap: u64) -> Result<Vec<IndexSet>> {
        let mut out = Vec::new();
        self.for_each_member(size, cap, &mut |members| {
            out.push(IndexSet::from_unsorted(self.n, members.to_vec()));
        })?;
        out.sort_unstable();
        Ok(out)
    }

    /// Number of members (optionally of one size), failing once `cap` is
    /// exceeded.
    pub fn count_members(&self, size: Option<usize>, cap: u64) -> Result<u64> {
        self.for_each_member(size, cap, &mut |_| {})
    }

    /// Streams every member to `visit` exactly once. Member slices are in
    /// an unspecified order. Returns the number of members visited.
    pub fn for_each_member(
        &self,
        size: Option<usize>,
        cap: u64,
        visit: &mut dyn FnMut(&[usize]),
    ) -> Result<u64> {
        let mut sink = CappedSink {
            count: 0,
            cap,
            visit,
        };
        let n = self.n;
        if size == Some(0) || size.is_some_and(|k| k > n) {
            return Ok(0);
        }
        match &self.kind {
            FamilyKind::Interval => {
                let mut buf = Vec::with_capacity(n);
                for i in 0..n {
                    buf.clear();
                    for j in i..n {
                        buf.push(j);
                        if size.is_none_or(|k| k == buf.len()) {
                            sink.emit(&buf)?;
                        }
                    }
                }
            }
            FamilyKind::Unstructured => subset_walk(n, size, &mut sink, |_| true)?,
            FamilyKind::Submatrix { rows, cols } => {
                let (rows, cols) = (*rows, *cols);
                check_walk(pow2(rows).saturating_mul(pow2(cols)), cap)?;
                let mut buf = Vec::new();
                for rmask in 1u64..(1u64 << rows) {
                    let p = rmask.count_ones() as usize;
                    for cmask in 1u64..(1u64 << cols) {
                        let q = cmask.count_ones() as usize;
                        if size.is_some_and(|k| k != p * q) {
                            continue;
                        }
                        buf.clear();
                        for r in bits(rmask) {
                            for c in bits(cmask) {
                                buf.push(r * cols + c);
                            }
                        }
                        sink.emit(&buf)?;
                    }
                }
            }
            FamilyKind::EpsilonBall { points, epsilon } => {
                let mut balls: Vec<Vec<usize>> =
                    (0..n).map(|c| ball(points, *epsilon, c)).collect();
                balls.sort_unstable();
                balls.dedup();
                for b in balls.iter().filter(|b| size.is_none_or(|k| b.len() == k)) {
                    sink.emit(b)?;
                }
            }
            FamilyKind::Connected { graph } => {
                let mut esu = Esu::new(graph, size);
                for v in 0..n {
                    esu.root(v, &mut sink)?;
                }
            }
            FamilyKind::GraphCut { graph, rho } => {
                subset_walk(n, size, &mut sink, |m| graph.cut_size(m) <= *rho)?
            }
            FamilyKind::EdgeDense { graph, delta } => subset_walk(n, size, &mut sink, |m| {
                dense_enough(graph.induced_edges(m), m.len(), *delta)
            })?,
        }
        Ok(sink.count)
    }

    /// Number of members containing `a`.
    ///
    /// Closed forms for the unstructured family (`2^(n - |a|)`) and the
    /// interval family (`(min(a) + 1) * (n - max(a))`); enumeration
    /// otherwise.
    pub fn count_supersets(&self, a: &IndexSet, cap: u64) -> Result<BigUint> {
        self.check_universe(a)?;
        if a.is_empty() {
            return Err(Error::EmptySet);
        }
        match self.kind {
            FamilyKind::Unstructured => Ok(BigUint::from(1u8) << (self.n - a.len())),
            FamilyKind::Interval => {
                let (lo, hi) = (a.first().unwrap(), a.last().unwrap());
                Ok(BigUint::from(lo + 1) * BigUint::from(self.n - hi))
            }
            _ => {
                let mask = a.to_mask();
                let mut count = 0u64;
                self.for_each_member(None, cap, &mut |m| {
                    if m.len() >= a.len() && m.iter().filter(|&&i| mask[i]).count() == a.len() {
                        count += 1;
                    }
                })?;
                Ok(BigUint::from(count))
            }
        }
    }
}

pub(crate) fn dense_enough(induced: usize, size: usize, delta: f64) -> bool {
    if size <= 1 {
        return true;
    }
    let pairs = (size * (size - 1) / 2) as f64;
    induced as f64 + 1e-9 >= delta * pairs
}

/// Sorted members of the ball of radius `epsilon` around point `center`.
pub(crate) fn ball(points: &[Vec<f64>], epsilon: f64, center: usize) -> Vec<usize> {
    let c = &points[center];
    let r2 = epsilon * epsilon;
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() <= r2)
        .map(|(i, _)| i)
        .collect()
}

struct CappedSink<'a> {
    count: u64,
    cap: u64,
    visit: &'a mut dyn FnMut(&[usize]),
}

impl CappedSink<'_> {
    fn emit(&mut self, members: &[usize]) -> Result<()> {
        if self.count >= self.cap {
            return Err(Error::TooLargeToEnumerate {
                reached: self.count + 1,
                cap: self.cap,
            });
        }
        self.count += 1;
        (self.visit)(members);
        Ok(())
    }
}

fn pow2(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        1u64 << k
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |b| mask >> b & 1 == 1)
}

fn binomial_saturating(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn check_walk(walk: u64, cap: u64) -> Result<()> {
    if walk > SUBSET_WALK_LIMIT {
        return Err(Error::TooLargeToEnumerate { reached: walk, cap });
    }
    Ok(())
}

/// Visits every nonempty subset (or every `size`-subset) passing `keep`.
fn subset_walk(
    n: usize,
    size: Option<usize>,
    sink: &mut CappedSink<'_>,
    keep: impl Fn(&[usize]) -> bool,
) -> Result<()> {
    let walk = match size {
        Some(k) => binomial_saturating(n, k),
        None => pow2(n),
    };
    check_walk(walk, sink.cap)?;
    match size {
        None => {
            let mut buf = Vec::with_capacity(n);
            for mask in 1u64..(1u64 << n) {
                buf.clear();
                buf.extend(bits(mask));
                if keep(&buf) {
                    sink.emit(&buf)?;
                }
            }
        }
        Some(k) => {
            let mut comb: Vec<usize> = (0..k).collect();
            loop {
                if keep(&comb) {
                    sink.emit(&comb)?;
                }
                // next combination in lexicographic order
                let mut i = k;
                while i > 0 && comb[i - 1] == n - k + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                comb[i - 1] += 1;
                for j in i..k {
                    comb[j] = comb[j - 1] + 1;
                }
            }
        }
    }
    Ok(())
}

/// Connected-set enumeration by exclusive neighbourhood extension: each
/// connected set is produced exactly once, from the root equal to its
/// smallest vertex.
pub(crate) struct Esu<'g> {
    graph: &'g Graph,
    size: Option<usize>,
    cover: Vec<u32>,
    current: Vec<usize>,
}

impl<'g> Esu<'g> {
    pub(crate) fn new(graph: &'g Graph, size: Option<usize>) -> Self {
        Self {
            graph,
            size,
            cover: vec![0; graph.n_vertices()],
            current: Vec::new(),
        }
    }

    fn push(&mut self, w: usize) {
        self.current.push(w);
        self.cover[w] += 1;
        for &u in self.graph.neighbors(w) {
            self.cover[u] += 1;
        }
    }

    fn pop(&mut self) {
        let w = self.current.pop().unwrap();
        self.cover[w] -= 1;
        for &u in self.graph.neighbors(w) {
            self.cover[u] -= 1;
        }
    }

    fn root(&mut self, v: usize, sink: &mut CappedSink<'_>) -> Result<()> {
        let ext: Vec<usize> = self
            .graph
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| u > v)
            .collect();
        self.push(v);
        let res = self.extend(v, ext, sink);
        self.pop();
        res
    }

    fn extend(&mut self, root: usize, mut ext: Vec<usize>, sink: &mut CappedSink<'_>) -> Result<()> {
        let len = self.current.len();
        if self.size.is_none_or(|k| k == len) {
            sink.emit(&self.current)?;
        }
        if self.size.is_some_and(|k| len >= k) {
            return Ok(());
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in self.graph.neighbors(w) {
                if u > root && self.cover[u] == 0 {
                    next.push(u);
                }
            }
            self.push(w);
            let res = self.extend(root, next, sink);
            self.pop();
            res?;
        }
        Ok(())
    }
}
