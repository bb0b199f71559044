//! Distributional checks on the samplers: anomaly draws are uniform over
//! same-size members, and the noise models have the right moments.

use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use structscan::family::FamilySpec;
use structscan::graph::{generate_graph, GraphKind};
use structscan::index_set::IndexSet;
use structscan::rng;
use structscan::sampling::{sample_asd, sample_gmm, sample_poisson_counts, AnomalySampler};

/// p-value of Pearson's test that `draws` is uniform over `members`.
fn uniformity_p(members: &[IndexSet], draws: &[IndexSet]) -> f64 {
    let index: HashMap<&[usize], usize> = members.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
    let mut counts = vec![0usize; members.len()];
    for d in draws {
        counts[*index.get(d.as_slice()).expect("draw outside the family")] += 1;
    }
    let expected = draws.len() as f64 / members.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    1.0 - ChiSquared::new((members.len() - 1) as f64).unwrap().cdf(stat)
}

fn draws(sampler: &AnomalySampler, count: usize, seed: u64) -> Vec<IndexSet> {
    let mut r = rng::stream(seed, &[1]);
    (0..count).map(|_| sampler.sample(&mut r).unwrap()).collect()
}

fn check_chain(family: &FamilySpec, k: usize, seed: u64) {
    let members = family.enumerate(Some(k), 1 << 20).unwrap();
    assert!(members.len() > 1);
    let sampler = AnomalySampler::markov_chain(family, k, seed).unwrap();
    assert!(!sampler.is_exact());
    let got = draws(&sampler, 200 * members.len(), seed);
    let p = uniformity_p(&members, &got);
    assert!(p > 0.01, "{} k={k}: chi-square p = {p:.5}", family.kind_name());
}

#[test]
fn connected_chain_is_uniform_on_a_lollipop() {
    let g = generate_graph(
        &GraphKind::Lollipop {
            path_len: 4,
            clique_len: 5,
        },
        8,
        0,
    )
    .unwrap();
    check_chain(&FamilySpec::connected(g), 3, 7);
}

#[test]
fn connected_chain_is_uniform_on_a_lattice() {
    let g = generate_graph(&GraphKind::Lattice, 9, 0).unwrap();
    check_chain(&FamilySpec::connected(g), 4, 11);
}

#[test]
fn graph_cut_chain_is_uniform() {
    let g = generate_graph(&GraphKind::Lattice, 9, 0).unwrap();
    check_chain(&FamilySpec::graph_cut(g, 4), 3, 3);
}

#[test]
fn edge_dense_chain_is_uniform() {
    let g = generate_graph(&GraphKind::ErdosRenyi { p: 0.5 }, 10, 5).unwrap();
    check_chain(&FamilySpec::edge_dense(g, 0.5).unwrap(), 4, 5);
}

#[test]
fn closed_form_samplers_are_uniform() {
    for (family, k) in [
        (FamilySpec::interval(12), 4),
        (FamilySpec::unstructured(7), 3),
        (FamilySpec::submatrix(3, 4), 4),
    ] {
        let members = family.enumerate(Some(k), 1 << 20).unwrap();
        let sampler = AnomalySampler::new(&family, k, 0).unwrap();
        assert!(sampler.is_exact());
        let p = uniformity_p(&members, &draws(&sampler, 200 * members.len(), 9));
        assert!(p > 0.01, "{}: chi-square p = {p:.5}", family.kind_name());
    }
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64)
}

#[test]
fn asd_moments() {
    let n = 40_000;
    let a = IndexSet::range(n, 0, n / 4).unwrap();
    let obs = sample_asd(&a, 2.5, 1).unwrap();
    let x = obs.as_gaussian().unwrap();
    let (m_in, v_in) = mean_var(&x[..n / 4]);
    let (m_out, v_out) = mean_var(&x[n / 4..]);
    // four standard errors
    let se_in = 4.0 / ((n / 4) as f64).sqrt();
    assert!((m_in - 2.5).abs() < se_in, "{m_in}");
    assert!(m_out.abs() < se_in, "{m_out}");
    assert!((v_in - 1.0).abs() < 0.05 && (v_out - 1.0).abs() < 0.05);
}

#[test]
fn gmm_labels_match_the_weight() {
    let n = 50_000;
    let (obs, labels) = sample_gmm(0.2, 3.0, n, 4).unwrap();
    let frac = labels.iter().filter(|&&l| l).count() as f64 / n as f64;
    assert!((frac - 0.2).abs() < 4.0 * (0.2f64 * 0.8 / n as f64).sqrt(), "{frac}");
    let x = obs.as_gaussian().unwrap();
    let (m, _) = mean_var(&x.iter().zip(&labels).filter(|(_, &l)| l).map(|(v, _)| *v).collect::<Vec<_>>());
    assert!((m - 3.0).abs() < 0.05, "{m}");
}

#[test]
fn poisson_rates() {
    let n = 20_000;
    let a = IndexSet::range(n, 0, n / 2).unwrap();
    let baselines = vec![4.0; n];
    let obs = sample_poisson_counts(&a, 2.0, &baselines, 8).unwrap();
    let c = obs.as_poisson().unwrap().counts();
    let inside: Vec<f64> = c[..n / 2].iter().map(|&v| v as f64).collect();
    let outside: Vec<f64> = c[n / 2..].iter().map(|&v| v as f64).collect();
    let (mi, vi) = mean_var(&inside);
    let (mo, vo) = mean_var(&outside);
    assert!((mi - 8.0).abs() < 0.2 && (vi - 8.0).abs() < 0.6, "{mi} {vi}");
    assert!((mo - 4.0).abs() < 0.15 && (vo - 4.0).abs() < 0.4, "{mo} {vo}");
}
