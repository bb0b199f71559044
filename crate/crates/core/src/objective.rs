//! Set objectives that depend on a candidate set only through additive
//! summaries `(sum a_i, sum b_i, |S|)`.

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = CompensatedSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Acc {
    pub a: f64,
    pub b: f64,
    pub k: usize,
}

impl Acc {
    pub(crate) fn plus(self, (a, b): (f64, f64)) -> Acc {
        Acc {
            a: self.a + a,
            b: self.b + b,
            k: self.k + 1,
        }
    }

    pub(crate) fn minus(self, (a, b): (f64, f64)) -> Acc {
        Acc {
            a: self.a - a,
            b: self.b - b,
            k: self.k - 1,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Objective<'a> {
    /// `sum x / sqrt(|S|)`.
    Gamma(&'a [f64]),
    /// Expectation-based Poisson log-likelihood ratio.
    Poisson {
        counts: &'a [f64],
        baselines: &'a [f64],
    },
    /// `sum w`.
    Linear(&'a [f64]),
}

impl Objective<'_> {
    pub(crate) fn len(&self) -> usize {
        match self {
            Objective::Gamma(x) | Objective::Linear(x) => x.len(),
            Objective::Poisson { counts, .. } => counts.len(),
        }
    }

    #[inline]
    pub(crate) fn weight(&self, i: usize) -> (f64, f64) {
        match self {
            Objective::Gamma(x) | Objective::Linear(x) => (x[i], 0.0),
            Objective::Poisson { counts, baselines } => (counts[i], baselines[i]),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, acc: Acc) -> f64 {
        match self {
            Objective::Gamma(_) => acc.a / (acc.k as f64).sqrt(),
            Objective::Linear(_) => acc.a,
            Objective::Poisson { .. } => poisson_score(acc.a, acc.b),
        }
    }

    /// Summary of `members` with compensated sums.
    pub(crate) fn summarize(&self, members: &[usize]) -> Acc {
        let (mut a, mut b) = (CompensatedSum::default(), CompensatedSum::default());
        for &i in members {
            let (wa, wb) = self.weight(i);
            a.add(wa);
            b.add(wb);
        }
        Acc {
            a: a.value(),
            b: b.value(),
            k: members.len(),
        }
    }

    pub(crate) fn score_set(&self, members: &[usize]) -> f64 {
        self.eval(self.summarize(members))
    }

    /// Greedy priority of a single element: larger means more attractive.
    pub(crate) fn key(&self, i: usize) -> f64 {
        match self {
            Objective::Gamma(x) | Objective::Linear(x) => x[i],
            Objective::Poisson { counts, baselines } => counts[i] / baselines[i],
        }
    }

    /// Scale of a single-element score change, used as the initial
    /// annealing temperature.
    pub(crate) fn temperature_scale(&self) -> f64 {
        let m = (0..self.len())
            .map(|i| self.weight(i).0.abs())
            .fold(0.0, f64::max);
        if m > 0.0 {
            2.0 * m
        } else {
            1.0
        }
    }
}

/// `B + C (log C - log B - 1)` with `0 log 0 = 0`.
pub fn poisson_score(count: f64, baseline: f64) -> f64 {
    if count <= 0.0 {
        baseline
    } else {
        baseline + count * (-1.0 + count.ln() - baseline.ln())
    }
}
