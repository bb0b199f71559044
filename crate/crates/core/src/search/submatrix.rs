//! Row-set by column-set search on a row-major matrix.
//!
//! For a fixed set on one side the objective depends on the other side only
//! through per-line aggregates, so the best partner set is a prefix of a
//! sorted order. Exact search enumerates every subset of the shorter side;
//! otherwise alternate between the two sides from random starts.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::{prefix_orders, scan_prefixes, sorted, Best, Found, SizeMode};
use crate::objective::{Acc, CompensatedSum, Objective};
use crate::rng::{self, label};

const MAX_ROUNDS: usize = 100;

pub(crate) type Penalty<'a> = &'a (dyn Fn(usize, usize) -> f64 + Sync);

pub(crate) struct Submatrix<'a> {
    pub obj: &'a Objective<'a>,
    pub rows: usize,
    pub cols: usize,
    pub mode: SizeMode,
    /// Subtracted from the objective of every `p x q` candidate.
    pub penalty: Option<Penalty<'a>>,
}

impl Submatrix<'_> {
    fn cells(&self, rs: &[usize], cs: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(rs.len() * cs.len());
        for &r in rs {
            for &c in cs {
                out.push(r * self.cols + c);
            }
        }
        out
    }

    fn shape_ok(&self, p: usize, q: usize) -> bool {
        match self.mode {
            SizeMode::Free => true,
            SizeMode::Fixed(k) => p * q == k,
        }
    }

    fn score(&self, acc: Acc, p: usize, q: usize) -> f64 {
        let s = self.obj.eval(acc);
        match self.penalty {
            Some(pen) => s - pen(p, q),
            None => s,
        }
    }

    /// Best partner for `chosen` lines on one side (rows when
    /// `chosen_rows`). Every candidate is offered to `global` as a cell set.
    /// Returns the best partner lines with their score.
    fn partner(&self, chosen: &[usize], chosen_rows: bool, global: &mut Best) -> (Option<(Vec<usize>, f64)>, u64) {
        let n_units = if chosen_rows { self.cols } else { self.rows };
        let p = chosen.len();
        let mut ua = vec![0.0; n_units];
        let mut ub = vec![0.0; n_units];
        for u in 0..n_units {
            let (mut a, mut b) = (CompensatedSum::default(), CompensatedSum::default());
            for &c in chosen {
                let idx = if chosen_rows {
                    c * self.cols + u
                } else {
                    u * self.cols + c
                };
                let (wa, wb) = self.obj.weight(idx);
                a.add(wa);
                b.add(wb);
            }
            ua[u] = a.value();
            ub[u] = b.value();
        }
        let weights = |u: usize| (ua[u], ub[u]);
        let units: Vec<usize> = (0..n_units).collect();
        let orders = prefix_orders(self.obj, &units, &weights);
        let shape = |q: usize| if chosen_rows { (p, q) } else { (q, p) };
        // lexicographic order on partner lines agrees with the order on
        // cells once the other side is fixed
        let mut local = Best::default();
        let evals = scan_prefixes(
            &orders,
            &weights,
            &|q| {
                let (r, c) = shape(q);
                self.shape_ok(r, c)
            },
            &|acc| {
                let (r, c) = shape(acc.k);
                self.score(Acc { k: r * c, ..acc }, r, c)
            },
            &|pre| sorted(pre.to_vec()),
            &mut local,
        );
        if !local.is_found() {
            return (None, evals);
        }
        global.offer(local.score, || {
            if chosen_rows {
                self.cells(chosen, &local.set)
            } else {
                self.cells(&local.set, chosen)
            }
        });
        (Some((local.set, local.score)), evals)
    }

    fn exact(&self) -> Found {
        let by_rows = self.rows <= self.cols;
        let side = if by_rows { self.rows } else { self.cols };
        let other = if by_rows { self.cols } else { self.rows };
        let (best, evaluations) = (1u64..1 << side)
            .into_par_iter()
            .fold(
                || (Best::default(), 0u64),
                |(mut best, evals), mask| {
                    let chosen: Vec<usize> = (0..side).filter(|&i| mask >> i & 1 == 1).collect();
                    if let SizeMode::Fixed(k) = self.mode {
                        let p = chosen.len();
                        if k % p != 0 || k / p > other {
                            return (best, evals);
                        }
                    }
                    let (_, e) = self.partner(&chosen, by_rows, &mut best);
                    (best, evals + e)
                },
            )
            .reduce(
                || (Best::default(), 0),
                |(a, ea), (b, eb)| (a.merge(b), ea + eb),
            );
        Found {
            best,
            exact: true,
            evaluations,
        }
    }

    fn alternating(&self, restarts: usize, seed: u64) -> Found {
        let shapes: Vec<(usize, usize)> = match self.mode {
            SizeMode::Free => Vec::new(),
            SizeMode::Fixed(k) => (1..=self.rows.min(k))
                .filter(|p| k % p == 0 && k / p <= self.cols)
                .map(|p| (p, k / p))
                .collect(),
        };
        if matches!(self.mode, SizeMode::Fixed(_)) && shapes.is_empty() {
            return Found {
                best: Best::default(),
                exact: false,
                evaluations: 0,
            };
        }
        let (best, evaluations) = (0..restarts.max(1))
            .into_par_iter()
            .map(|r| {
                let mut rng = rng::stream(seed, &[label::RESTART, r as u64]);
                let mut rows: Vec<usize> = match self.mode {
                    SizeMode::Free if r == 0 => (0..self.rows).collect(),
                    SizeMode::Free => {
                        let v: Vec<usize> = (0..self.rows).filter(|_| rng.random_bool(0.5)).collect();
                        if v.is_empty() {
                            vec![rng.random_range(0..self.rows)]
                        } else {
                            v
                        }
                    }
                    SizeMode::Fixed(_) => {
                        let (p, _) = shapes[r % shapes.len()];
                        sorted(sample(&mut rng, self.rows, p).into_vec())
                    }
                };
                let mut best = Best::default();
                let mut evals = 0;
                let mut prev = f64::NEG_INFINITY;
                for _ in 0..MAX_ROUNDS {
                    let (Some((cols, _)), e1) = self.partner(&rows, true, &mut best) else {
                        break;
                    };
                    let (Some((next_rows, s)), e2) = self.partner(&cols, false, &mut best) else {
                        break;
                    };
                    evals += e1 + e2;
                    if s <= prev {
                        break;
                    }
                    prev = s;
                    rows = next_rows;
                }
                (best, evals)
            })
            .reduce(
                || (Best::default(), 0),
                |(a, ea), (b, eb)| (a.merge(b), ea + eb),
            );
        Found {
            best,
            exact: false,
            evaluations,
        }
    }

    pub(crate) fn solve(&self, exact_side: usize, restarts: usize, seed: u64) -> Found {
        if self.rows.min(self.cols) <= exact_side {
            self.exact()
        } else {
            self.alternating(restarts, seed)
        }
    }
}
