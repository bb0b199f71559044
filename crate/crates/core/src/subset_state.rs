//! Incrementally maintained vertex subset of a graph.
//!
//! Tracks membership, the frontier (non-members with a neighbour inside),
//! per-vertex counts of neighbours inside, the induced edge count and the
//! cut size, all updated in `O(degree)` per insertion or removal.

use rand::Rng;

use crate::graph::Graph;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub(crate) struct SubsetState<'g> {
    graph: &'g Graph,
    members: Vec<usize>,
    member_pos: Vec<usize>,
    frontier: Vec<usize>,
    frontier_pos: Vec<usize>,
    nbr_in: Vec<u32>,
    induced: usize,
    cut: usize,
    // BFS scratch
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<usize>,
}

impl<'g> SubsetState<'g> {
    pub(crate) fn new(graph: &'g Graph) -> Self {
        let n = graph.n_vertices();
        Self {
            graph,
            members: Vec::new(),
            member_pos: vec![NONE; n],
            frontier: Vec::new(),
            frontier_pos: vec![NONE; n],
            nbr_in: vec![0; n],
            induced: 0,
            cut: 0,
            stamp: vec![0; n],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    pub(crate) fn with_members(graph: &'g Graph, members: &[usize]) -> Self {
        let mut s = Self::new(graph);
        for &v in members {
            s.insert(v);
        }
        s
    }

    pub(crate) fn len(&self) -> usize {
        self.members.len()
    }

    #[cfg(test)]
    pub(crate) fn members(&self) -> &[usize] {
        &self.members
    }

    pub(crate) fn frontier(&self) -> &[usize] {
        &self.frontier
    }

    pub(crate) fn contains(&self, v: usize) -> bool {
        self.member_pos[v] != NONE
    }

    pub(crate) fn nbr_in(&self, v: usize) -> usize {
        self.nbr_in[v] as usize
    }

    pub(crate) fn induced_edges(&self) -> usize {
        self.induced
    }

    pub(crate) fn cut_size(&self) -> usize {
        self.cut
    }

    /// Cut size after inserting `v` (not a member).
    pub(crate) fn cut_after_insert(&self, v: usize) -> usize {
        self.cut + self.graph.degree(v) - 2 * self.nbr_in(v)
    }

    /// Cut size after removing `v` (a member).
    pub(crate) fn cut_after_remove(&self, v: usize) -> usize {
        self.cut + 2 * self.nbr_in(v) - self.graph.degree(v)
    }

    /// Cut size after removing member `u` and inserting non-member `w`.
    pub(crate) fn cut_after_swap(&self, u: usize, w: usize) -> usize {
        let adj = self.graph.has_edge(u, w) as usize;
        let after_remove = self.cut_after_remove(u);
        after_remove + self.graph.degree(w) - 2 * (self.nbr_in(w) - adj)
    }

    pub(crate) fn induced_after_swap(&self, u: usize, w: usize) -> usize {
        let adj = self.graph.has_edge(u, w) as usize;
        self.induced - self.nbr_in(u) + self.nbr_in(w) - adj
    }

    pub(crate) fn insert(&mut self, v: usize) {
        debug_assert!(!self.contains(v));
        self.cut = self.cut_after_insert(v);
        self.induced += self.nbr_in(v);
        self.member_pos[v] = self.members.len();
        self.members.push(v);
        self.frontier_remove(v);
        let graph = self.graph;
        for &x in graph.neighbors(v) {
            self.nbr_in[x] += 1;
            if self.nbr_in[x] == 1 && !self.contains(x) {
                self.frontier_push(x);
            }
        }
    }

    pub(crate) fn remove(&mut self, v: usize) {
        debug_assert!(self.contains(v));
        self.cut = self.cut_after_remove(v);
        self.induced -= self.nbr_in(v);
        let pos = self.member_pos[v];
        let last = self.members.pop().unwrap();
        if last != v {
            self.members[pos] = last;
            self.member_pos[last] = pos;
        }
        self.member_pos[v] = NONE;
        let graph = self.graph;
        for &x in graph.neighbors(v) {
            self.nbr_in[x] -= 1;
            if self.nbr_in[x] == 0 && !self.contains(x) {
                self.frontier_remove(x);
            }
        }
        if self.nbr_in[v] > 0 {
            self.frontier_push(v);
        }
    }

    fn frontier_push(&mut self, v: usize) {
        if self.frontier_pos[v] == NONE {
            self.frontier_pos[v] = self.frontier.len();
            self.frontier.push(v);
        }
    }

    fn frontier_remove(&mut self, v: usize) {
        let pos = self.frontier_pos[v];
        if pos == NONE {
            return;
        }
        let last = self.frontier.pop().unwrap();
        if last != v {
            self.frontier[pos] = last;
            self.frontier_pos[last] = pos;
        }
        self.frontier_pos[v] = NONE;
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Whether the members minus `u` still induce a connected subgraph.
    /// Assumes the current members are connected.
    pub(crate) fn removal_keeps_connected(&mut self, u: usize) -> bool {
        let targets = self.nbr_in(u);
        if self.len() <= 1 {
            return false;
        }
        if self.len() == 2 || targets <= 1 {
            return true;
        }
        let epoch = self.next_epoch();
        let graph = self.graph;
        let start = *graph
            .neighbors(u)
            .iter()
            .find(|&&x| self.contains(x))
            .unwrap();
        self.stamp[u] = epoch;
        self.stamp[start] = epoch;
        self.queue.clear();
        self.queue.push(start);
        let mut found = 1;
        let mut head = 0;
        while head < self.queue.len() {
            let x = self.queue[head];
            head += 1;
            for &y in graph.neighbors(x) {
                if self.stamp[y] != epoch && self.contains(y) {
                    self.stamp[y] = epoch;
                    self.queue.push(y);
                    if graph.has_edge(u, y) {
                        found += 1;
                        if found == targets {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Whether `members - {u} + {w}` is connected.
    pub(crate) fn swap_keeps_connected(&mut self, u: usize, w: usize) -> bool {
        if self.removal_keeps_connected(u) {
            return self.nbr_in(w) > self.graph.has_edge(u, w) as usize;
        }
        // u is a cut vertex; w may still reconnect the pieces
        let epoch = self.next_epoch();
        let graph = self.graph;
        self.stamp[u] = epoch;
        self.stamp[w] = epoch;
        self.queue.clear();
        self.queue.push(w);
        let mut head = 0;
        let mut reached = 1;
        while head < self.queue.len() {
            let x = self.queue[head];
            head += 1;
            for &y in graph.neighbors(x) {
                if self.stamp[y] != epoch && self.contains(y) {
                    self.stamp[y] = epoch;
                    self.queue.push(y);
                    reached += 1;
                }
            }
        }
        reached == self.len()
    }

    pub(crate) fn random_member(&self, rng: &mut impl Rng) -> usize {
        self.members[rng.random_range(0..self.members.len())]
    }

    /// Uniform non-member, or `None` when every vertex is a member.
    pub(crate) fn random_outsider(&self, rng: &mut impl Rng) -> Option<usize> {
        let n = self.graph.n_vertices();
        if self.len() == n {
            return None;
        }
        if self.len() * 2 <= n {
            loop {
                let v = rng.random_range(0..n);
                if !self.contains(v) {
                    return Some(v);
                }
            }
        }
        let idx = rng.random_range(0..n - self.len());
        (0..n).filter(|&v| !self.contains(v)).nth(idx)
    }

    pub(crate) fn sorted_members(&self) -> Vec<usize> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m
    }
}
