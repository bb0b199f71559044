//! Data generation: the anomalous subset distribution, the two-component
//! Gaussian mixture, the Poisson disease-count model, and uniform draws of
//! anomalies from a family.

use rand::seq::index;
use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{dense_enough, FamilyKind, FamilySpec};
use crate::graph::Graph;
use crate::index_set::IndexSet;
use crate::rng::{self, label, StreamRng};
use crate::subset_state::SubsetState;

/// Size-`k` member counts at or below this are sampled exactly from an
/// enumerated list; larger families fall back to a Markov chain.
pub const EXACT_SAMPLING_LIMIT: u64 = 1_000_000;

/// Memory bound on the enumerated list, in stored indices.
const MAX_LISTED_ENTRIES: u64 = 1 << 25;

/// Enumerated size-`k` members when the family is small enough to list,
/// `None` when a chain is needed.
fn try_list(family: &FamilySpec, k: usize) -> Result<Option<Vec<IndexSet>>> {
    match family.count_members(Some(k), EXACT_SAMPLING_LIMIT) {
        Ok(count) if count.saturating_mul(k as u64) <= MAX_LISTED_ENTRIES => {
            Ok(Some(family.enumerate(Some(k), EXACT_SAMPLING_LIMIT)?))
        }
        Ok(_) | Err(Error::TooLargeToEnumerate { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Observations {
    Gaussian { values: Vec<f64> },
    Poisson(PoissonData),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonData {
    counts: Vec<u64>,
    baselines: Vec<f64>,
}

impl PoissonData {
    pub fn new(counts: Vec<u64>, baselines: Vec<f64>) -> Result<Self> {
        if counts.len() != baselines.len() {
            return Err(Error::param(format!(
                "{} counts but {} baselines",
                counts.len(),
                baselines.len()
            )));
        }
        if counts.is_empty() {
            return Err(Error::param("no observations"));
        }
        if let Some(i) = baselines.iter().position(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::param(format!(
                "baseline at index {i} must be positive, got {}",
                baselines[i]
            )));
        }
        Ok(Self { counts, baselines })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn baselines(&self) -> &[f64] {
        &self.baselines
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl Observations {
    pub fn gaussian(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("no observations"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite value at index {i}")));
        }
        Ok(Observations::Gaussian { values })
    }

    pub fn len(&self) -> usize {
        match self {
            Observations::Gaussian { values } => values.len(),
            Observations::Poisson(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            Observations::Gaussian { .. } => "gaussian",
            Observations::Poisson(_) => "poisson",
        }
    }

    pub fn as_gaussian(&self) -> Result<&[f64]> {
        match self {
            Observations::Gaussian { values } => Ok(values),
            _ => Err(Error::WrongMode { kind: "gaussian" }),
        }
    }

    pub fn as_poisson(&self) -> Result<&PoissonData> {
        match self {
            Observations::Poisson(p) => Ok(p),
            _ => Err(Error::WrongMode { kind: "poisson" }),
        }
    }
}

/// `X_i ~ N(mu, 1)` for `i` in `a`, `N(0, 1)` otherwise.
pub fn sample_asd(a: &IndexSet, mu: f64, seed: u64) -> Result<Observations> {
    let mut rng = rng::stream(seed, &[label::NOISE]);
    Observations::gaussian(sample_asd_with(a, mu, &mut rng)?)
}

/// Draws standard normal noise and shifts the anomaly by `mu`, so the same
/// stream gives coupled samples across different means.
pub fn sample_asd_with(a: &IndexSet, mu: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::param(format!("mean must be finite and nonnegative, got {mu}")));
    }
    let mut x = standard_normals(a.universe_size(), rng);
    for i in a.iter() {
        x[i] += mu;
    }
    Ok(x)
}

pub fn standard_normals(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// I.i.d. draws from `alpha N(mu, 1) + (1 - alpha) N(0, 1)` together with the
/// latent component labels.
pub fn sample_gmm(alpha: f64, mu: f64, n: usize, seed: u64) -> Result<(Observations, Vec<bool>)> {
    let mut rng = rng::stream(seed, &[label::LATENT]);
    let (x, z) = sample_gmm_with(alpha, mu, n, &mut rng)?;
    Ok((Observations::gaussian(x)?, z))
}

pub fn sample_gmm_with(
    alpha: f64,
    mu: f64,
    n: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<f64>, Vec<bool>)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("mixture weight {alpha} outside (0, 1)")));
    }
    let z: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < alpha).collect();
    let x = z
        .iter()
        .map(|&zi| rng.sample::<f64, _>(StandardNormal) + if zi { mu } else { 0.0 })
        .collect();
    Ok((x, z))
}

/// `C_i ~ Pois(q_in B_i)` for `i` in `a`, `Pois(B_i)` otherwise.
pub fn sample_poisson_counts(
    a: &IndexSet,
    q_in: f64,
    baselines: &[f64],
    seed: u64,
) -> Result<Observations> {
    let mut rng = rng::stream(seed, &[label::NOISE]);
    Ok(Observations::Poisson(sample_poisson_counts_with(
        a, q_in, baselines, &mut rng,
    )?))
}

pub fn sample_poisson_counts_with(
    a: &IndexSet,
    q_in: f64,
    baselines: &[f64],
    rng: &mut impl Rng,
) -> Result<PoissonData> {
    if a.universe_size() != baselines.len() {
        return Err(Error::UniverseMismatch {
            expected: baselines.len(),
            got: a.universe_size(),
        });
    }
    if !(q_in > 0.0 && q_in.is_finite()) {
        return Err(Error::param(format!("relative risk must be positive, got {q_in}")));
    }
    if let Some(i) = baselines.iter().position(|&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::param(format!("baseline at index {i} must be positive")));
    }
    let mask = a.to_mask();
    let counts = baselines
        .iter()
        .zip(&mask)
        .map(|(&b, &inside)| {
            let rate = if inside { q_in * b } else { b };
            Poisson::new(rate).unwrap().sample(rng) as u64
        })
        .collect();
    PoissonData::new(counts, baselines.to_vec())
}

/// One uniformly random size-`k` member of `family`.
pub fn sample_anomaly(family: &FamilySpec, k: usize, seed: u64) -> Result<IndexSet> {
    let sampler = AnomalySampler::new(family, k, seed)?;
    sampler.sample(&mut rng::stream(seed, &[label::ANOMALY]))
}

/// Prepared sampler for repeated uniform draws of size-`k` members.
///
/// Construction decides once how to sample: closed form (interval,
/// unstructured, submatrix), inverse-CDF over an enumerated list when the
/// member count is at most [`EXACT_SAMPLING_LIMIT`], or a Metropolis chain
/// with symmetric swap proposals otherwise.
#[derive(Clone, Debug)]
pub struct AnomalySampler<'f> {
    family: &'f FamilySpec,
    k: usize,
    strategy: Strategy,
}

#[derive(Clone, Debug)]
enum Strategy {
    Unstructured,
    Interval,
    Submatrix {
        shapes: Vec<(usize, usize)>,
        weights: WeightedIndex<f64>,
    },
    Listed(Vec<IndexSet>),
    ConnectedChain {
        starts: Vec<usize>,
    },
    FeasibleChain {
        seed_set: Vec<usize>,
    },
}

impl<'f> AnomalySampler<'f> {
    /// `seed` only drives the search for a starting member when a chain is
    /// needed; the draws themselves use the generator passed to
    /// [`AnomalySampler::sample`].
    pub fn new(family: &'f FamilySpec, k: usize, seed: u64) -> Result<Self> {
        family.validate()?;
        let n = family.n;
        let none = |reason: &str| Error::NoMemberOfSize {
            size: k,
            reason: reason.to_string(),
        };
        if k == 0 || k > n {
            return Err(none("size outside 1..=n"));
        }
        let strategy = match &family.kind {
            FamilyKind::Unstructured => Strategy::Unstructured,
            FamilyKind::Interval => Strategy::Interval,
            FamilyKind::Submatrix { rows, cols } => {
                let shapes: Vec<(usize, usize)> = (1..=*rows)
                    .filter(|p| k.is_multiple_of(*p) && k / p <= *cols)
                    .map(|p| (p, k / p))
                    .collect();
                if shapes.is_empty() {
                    return Err(none("no row x column shape has this many cells"));
                }
                let weights: Vec<f64> = shapes
                    .iter()
                    .map(|&(p, q)| (ln_binomial(*rows, p) + ln_binomial(*cols, q)).exp())
                    .collect();
                Strategy::Submatrix {
                    shapes,
                    weights: WeightedIndex::new(weights)
                        .map_err(|e| Error::Numerical(e.to_string()))?,
                }
            }
            FamilyKind::EpsilonBall { .. } => {
                let list = family.enumerate(Some(k), EXACT_SAMPLING_LIMIT)?;
                if list.is_empty() {
                    return Err(none("no ball has this many points"));
                }
                Strategy::Listed(list)
            }
            FamilyKind::Connected { .. } => match try_list(family, k)? {
                Some(list) if list.is_empty() => return Err(none("no connected set of this size")),
                Some(list) => Strategy::Listed(list),
                None => chain_strategy(family, k, seed)?,
            },
            FamilyKind::GraphCut { graph, rho } if *rho >= graph.n_edges() => {
                // every subset qualifies
                Strategy::Unstructured
            }
            FamilyKind::GraphCut { .. } | FamilyKind::EdgeDense { .. } => {
                match try_list(family, k)? {
                    Some(list) if list.is_empty() => return Err(none("no feasible set of this size")),
                    Some(list) => Strategy::Listed(list),
                    None => chain_strategy(family, k, seed)?,
                }
            }
        };
        Ok(Self { family, k, strategy })
    }

    /// Forces the Markov-chain path for graph families regardless of how
    /// many members there are. Mostly useful for checking the chain against
    /// exact enumeration on small graphs.
    pub fn markov_chain(family: &'f FamilySpec, k: usize, seed: u64) -> Result<Self> {
        family.validate()?;
        if k == 0 || k > family.n {
            return Err(Error::NoMemberOfSize {
                size: k,
                reason: "size outside 1..=n".into(),
            });
        }
        Ok(Self {
            family,
            k,
            strategy: chain_strategy(family, k, seed)?,
        })
    }

    pub fn size(&self) -> usize {
        self.k
    }

    /// Whether draws are exactly uniform (as opposed to Markov-chain
    /// approximations).
    pub fn is_exact(&self) -> bool {
        !matches!(
            self.strategy,
            Strategy::ConnectedChain { .. } | Strategy::FeasibleChain { .. }
        )
    }

    /// Number of chain steps run per draw on the Markov-chain path.
    pub fn burn_in(&self) -> usize {
        let n = self.family.n.max(2) as f64;
        (50.0 * self.k as f64 * n.ln()).ceil() as usize
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Result<IndexSet> {
        let n = self.family.n;
        let k = self.k;
        let set = match &self.strategy {
            Strategy::Unstructured => IndexSet::from_unsorted(n, index::sample(rng, n, k).into_vec()),
            Strategy::Interval => {
                let start = rng.random_range(0..=n - k);
                IndexSet::range(n, start, start + k)?
            }
            Strategy::Submatrix { shapes, weights } => {
                let FamilyKind::Submatrix { rows, cols } = self.family.kind else {
                    unreachable!()
                };
                let (p, q) = shapes[weights.sample(rng)];
                let rs = index::sample(rng, rows, p).into_vec();
                let cs = index::sample(rng, cols, q).into_vec();
                let cells = rs.iter().flat_map(|&r| cs.iter().map(move |&c| r * cols + c));
                IndexSet::from_unsorted(n, cells.collect())
            }
            Strategy::Listed(list) => list[rng.random_range(0..list.len())].clone(),
            Strategy::ConnectedChain { starts } => {
                let graph = self.family.graph().unwrap();
                let start = starts[rng.random_range(0..starts.len())];
                let members = connected_chain(graph, start, k, self.burn_in(), rng);
                IndexSet::from_unsorted(n, members)
            }
            Strategy::FeasibleChain { seed_set } => {
                let members = feasible_chain(self.family, seed_set, self.burn_in(), rng);
                IndexSet::from_unsorted(n, members)
            }
        };
        debug_assert!(self.family.contains_members(set.as_slice()));
        Ok(set)
    }
}

fn chain_strategy(family: &FamilySpec, k: usize, seed: u64) -> Result<Strategy> {
    let none = |reason: &str| Error::NoMemberOfSize {
        size: k,
        reason: reason.to_string(),
    };
    match &family.kind {
        FamilyKind::Connected { graph } => {
            let starts: Vec<usize> = graph
                .components()
                .into_iter()
                .filter(|c| c.len() >= k)
                .flatten()
                .collect();
            if starts.is_empty() {
                return Err(none("every connected component is smaller"));
            }
            Ok(Strategy::ConnectedChain { starts })
        }
        FamilyKind::GraphCut { .. } | FamilyKind::EdgeDense { .. } => {
            let mut r = rng::stream(seed, &[label::ANOMALY, 0x5EED]);
            let seed_set =
                find_feasible(family, k, &mut r).ok_or_else(|| none("constructive search found no feasible set"))?;
            Ok(Strategy::FeasibleChain { seed_set })
        }
        _ => Err(Error::param(format!("no Markov chain for the {} family", family.kind_name()))),
    }
}

pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// Metropolis chain over connected `k`-sets. A move drops a uniform member
/// `u` and adds a uniform vertex `w` from the outer boundary of the
/// remaining set; the proposal is symmetric, so accepting exactly the
/// connected results leaves the uniform distribution stationary.
fn connected_chain(
    graph: &Graph,
    start: usize,
    k: usize,
    steps: usize,
    rng: &mut StreamRng,
) -> Vec<usize> {
    let mut s = SubsetState::with_members(graph, &[start]);
    while s.len() < k {
        let f = s.frontier()[rng.random_range(0..s.frontier().len())];
        s.insert(f);
    }
    if k == 1 {
        // single vertices: resample directly within the component
        return vec![start];
    }
    for _ in 0..steps {
        let u = s.random_member(rng);
        // boundary of members - {u}: frontier entries still touching the
        // rest, plus u itself when it touches the rest
        let frontier_len = s.frontier().len();
        let w = loop {
            let pick = rng.random_range(0..=frontier_len);
            let w = if pick == frontier_len { u } else { s.frontier()[pick] };
            let touches = if w == u {
                s.nbr_in(u) > 0
            } else {
                s.nbr_in(w) > graph.has_edge(u, w) as usize
            };
            if touches {
                break w;
            }
        };
        if w != u && s.swap_keeps_connected(u, w) {
            s.remove(u);
            s.insert(w);
        }
    }
    s.sorted_members()
}

/// Metropolis chain for graph-cut and edge-dense families: swap a uniform
/// member for a uniform non-member, accept when the result is feasible.
fn feasible_chain(
    family: &FamilySpec,
    seed_set: &[usize],
    steps: usize,
    rng: &mut StreamRng,
) -> Vec<usize> {
    let graph = family.graph().unwrap();
    let mut s = SubsetState::with_members(graph, seed_set);
    if s.len() == graph.n_vertices() {
        return s.sorted_members();
    }
    for _ in 0..steps {
        let u = s.random_member(rng);
        let w = s.random_outsider(rng).unwrap();
        let ok = match &family.kind {
            FamilyKind::GraphCut { rho, .. } => s.cut_after_swap(u, w) <= *rho,
            FamilyKind::EdgeDense { delta, .. } => {
                dense_enough(s.induced_after_swap(u, w), s.len(), *delta)
            }
            _ => unreachable!(),
        };
        if ok {
            s.remove(u);
            s.insert(w);
        }
    }
    s.sorted_members()
}

/// Greedy constructive search for one feasible size-`k` member of a
/// graph-cut or edge-dense family.
pub(crate) fn find_feasible(family: &FamilySpec, k: usize, rng: &mut StreamRng) -> Option<Vec<usize>> {
    let graph = family.graph()?;
    let n = graph.n_vertices();
    let feasible = |s: &SubsetState| match &family.kind {
        FamilyKind::GraphCut { rho, .. } => s.cut_size() <= *rho,
        FamilyKind::EdgeDense { delta, .. } => dense_enough(s.induced_edges(), s.len(), *delta),
        _ => false,
    };
    // low-degree vertices first: corners and leaves minimize cut growth
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| graph.degree(v));
    let tries = 200.min(n);
    for attempt in 0..tries {
        let start = if attempt < tries / 2 {
            by_degree[attempt]
        } else {
            rng.random_range(0..n)
        };
        let mut s = SubsetState::with_members(graph, &[start]);
        while s.len() < k {
            let pool: Vec<usize> = if s.frontier().is_empty() {
                (0..n).filter(|&v| !s.contains(v)).collect()
            } else {
                s.frontier().to_vec()
            };
            // minimize resulting cut / maximize internal edges, random ties
            let best = pool
                .iter()
                .map(|&v| {
                    let key = match family.kind {
                        FamilyKind::GraphCut { .. } => s.cut_after_insert(v) as i64,
                        _ => -(s.nbr_in(v) as i64),
                    };
                    (key, rng.random::<u32>(), v)
                })
                .min()
                .unwrap();
            s.insert(best.2);
        }
        if feasible(&s) {
            return Some(s.sorted_members());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphKind};

    #[test]
    fn asd_shifts_only_the_anomaly() {
        let a = IndexSet::range(10_000, 0, 5_000).unwrap();
        let x = sample_asd(&a, 3.0, 1).unwrap();
        let x = x.as_gaussian().unwrap();
        let inside: f64 = x[..5000].iter().sum::<f64>() / 5000.0;
        let outside: f64 = x[5000..].iter().sum::<f64>() / 5000.0;
        assert!((inside - 3.0).abs() < 0.05, "{inside}");
        assert!(outside.abs() < 0.05, "{outside}");
        assert!(sample_asd(&a, -1.0, 1).is_err());
    }

    #[test]
    fn asd_with_empty_anomaly_is_null() {
        let x = sample_asd(&IndexSet::empty(1000), 5.0, 2).unwrap();
        let mean = x.as_gaussian().unwrap().iter().sum::<f64>() / 1000.0;
        assert!(mean.abs() < 0.15);
    }

    #[test]
    fn gmm_rejects_bad_weight() {
        assert!(sample_gmm(0.0, 1.0, 10, 0).is_err());
        assert!(sample_gmm(1.0, 1.0, 10, 0).is_err());
    }

    #[test]
    fn poisson_validates_baselines() {
        let a = IndexSet::empty(2);
        assert!(sample_poisson_counts(&a, 2.0, &[1.0, 0.0], 0).is_err());
        assert!(PoissonData::new(vec![1, 2], vec![1.0]).is_err());
    }

    #[test]
    fn interval_samples_have_exact_size() {
        let f = FamilySpec::interval(10);
        let s = AnomalySampler::new(&f, 3, 0).unwrap();
        let mut r = rng::stream(0, &[]);
        for _ in 0..100 {
            let a = s.sample(&mut r).unwrap();
            assert_eq!(a.len(), 3);
            assert!(f.contains(&a).unwrap());
        }
    }

    #[test]
    fn submatrix_shape_infeasible_size() {
        let f = FamilySpec::submatrix(4, 4);
        assert!(matches!(
            AnomalySampler::new(&f, 7, 0),
            Err(Error::NoMemberOfSize { .. })
        ));
    }

    #[test]
    fn connected_chain_stays_in_family() {
        let g = generate_graph(&GraphKind::ErdosRenyi { p: 0.02 }, 400, 3).unwrap();
        let f = FamilySpec::connected(g);
        let s = AnomalySampler::new(&f, 20, 0).unwrap();
        assert!(!s.is_exact());
        let mut r = rng::stream(5, &[]);
        for _ in 0..5 {
            let a = s.sample(&mut r).unwrap();
            assert_eq!(a.len(), 20);
            assert!(f.contains(&a).unwrap());
        }
    }

    #[test]
    fn impossible_cut_size_is_reported() {
        let g = generate_graph(&GraphKind::Lattice, 900, 0).unwrap();
        let f = FamilySpec::graph_cut(g, 4);
        assert!(matches!(
            AnomalySampler::new(&f, 45, 0),
            Err(Error::NoMemberOfSize { .. })
        ));
    }
}
