//! Seeded statistical checks of the samplers and the Monte Carlo integrals against exact
//! values. Seeds are fixed, so each run is deterministic.

use matchlab_core::analytic::{
    ie_optimal_probability, inverse_symmetry_gap, mc_permutation_stability, Evaluator, IeValue,
};
use matchlab_core::exact::{exact_permutation_stability, EnumerationBudget, Optimality};
use matchlab_core::fixtures::{example_graph, example_matrix, example_outputs, four_cycle_permutation};
use matchlab_core::market::{AgentId, AlternatingPermutation, Matching};
use matchlab_core::prefdist::{
    graph_to_popularity, list_distribution, pairwise_preference_probability, PopularityMatrix, PreferenceModel,
    ProfileSampler, SeededStream,
};
use matchlab_core::rational;
use num_traits::ToPrimitive;
use std::collections::HashMap;

const SAMPLES: u64 = 100_000;

fn agents(n: usize) -> Vec<AgentId> {
    (0..n).map(AgentId::man).chain((0..n).map(AgentId::woman)).collect()
}

/// Frequencies of every agent's full list over `SAMPLES` profiles.
fn list_frequencies(model: &PreferenceModel, seed: u64) -> HashMap<(AgentId, Vec<usize>), f64> {
    let sampler = ProfileSampler::new(model);
    let mut rng = SeededStream::new(seed, model.name()).rng();
    let mut counts: HashMap<(AgentId, Vec<usize>), u64> = HashMap::new();
    let n = model.shape().0;
    for _ in 0..SAMPLES {
        let p = sampler.sample(&mut rng);
        for a in agents(n) {
            *counts.entry((a, p.list(a).to_vec())).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / SAMPLES as f64))
        .collect()
}

fn se(p: f64) -> f64 {
    (p * (1.0 - p) / SAMPLES as f64).sqrt()
}

#[test]
fn example_matrix_list_frequency() {
    let freq = list_frequencies(&PreferenceModel::SymmetricAntiPopularity(example_matrix()), 11);
    let f = freq[&(AgentId::woman(0), vec![1, 0, 2])];
    let p = 50.0 / 217.0;
    assert!((f - p).abs() < 3.0 * se(p), "frequency {f} vs {p}");
}

#[test]
fn three_samplers_agree_with_exact_list_probabilities() {
    for matrix in [
        example_matrix(),
        PopularityMatrix::ones(3, 3),
        PopularityMatrix::from_integers(&[&[1, 9], &[4, 2]]).unwrap(),
    ] {
        let exact = PreferenceModel::SymmetricAntiPopularity(matrix.clone());
        let samplers = [
            PreferenceModel::SymmetricAntiPopularity(matrix.clone()),
            PreferenceModel::SymmetricPower(matrix.clone()),
            PreferenceModel::ExponentialUtility(matrix.clone()),
        ];
        let tables: Vec<_> = samplers.iter().map(|m| list_frequencies(m, 5)).collect();
        for a in agents(matrix.num_men()) {
            for (list, p) in list_distribution(&exact, a).unwrap() {
                let p = p.to_f64().unwrap();
                let freqs: Vec<f64> = tables
                    .iter()
                    .map(|t| t.get(&(a, list.clone())).copied().unwrap_or(0.0))
                    .collect();
                for f in &freqs {
                    assert!((f - p).abs() < 4.0 * se(p), "{a} {list:?}: {f} vs {p}");
                }
                for i in 0..3 {
                    for j in i + 1..3 {
                        assert!((freqs[i] - freqs[j]).abs() < 4.0 * se(p) * 2f64.sqrt());
                    }
                }
            }
        }
    }
}

#[test]
fn pairwise_frequency_matches() {
    let m = example_matrix();
    let p = pairwise_preference_probability(&m, AgentId::woman(0), AgentId::man(0), AgentId::man(1))
        .unwrap()
        .to_f64()
        .unwrap();
    for model in [
        PreferenceModel::SymmetricAntiPopularity(m.clone()),
        PreferenceModel::SymmetricPower(m.clone()),
        PreferenceModel::ExponentialUtility(m.clone()),
    ] {
        let sampler = ProfileSampler::new(&model);
        let mut rng = SeededStream::new(3, "pairwise").rng();
        let hits = (0..SAMPLES)
            .filter(|_| {
                let prof = sampler.sample(&mut rng);
                prof.woman_rank(0, 0) < prof.woman_rank(0, 1)
            })
            .count();
        let f = hits as f64 / SAMPLES as f64;
        assert!((f - p).abs() < 3.0 * se(p), "{}: {f} vs {p}", model.name());
    }
}

#[test]
fn vertical_sampler_matches_product_matrix() {
    let men = vec![rational(2, 1), rational(1, 2), rational(3, 1)];
    let women = vec![rational(1, 1), rational(5, 1), rational(1, 3)];
    let vertical = PreferenceModel::vertical(men, women).unwrap();
    let product = PreferenceModel::SymmetricAntiPopularity(vertical.popularity().unwrap());
    let freq = list_frequencies(&vertical, 9);
    for a in agents(3) {
        for (list, p) in list_distribution(&product, a).unwrap() {
            let p = p.to_f64().unwrap();
            let f = freq.get(&(a, list.clone())).copied().unwrap_or(0.0);
            assert!((f - p).abs() < 4.0 * se(p), "{a} {list:?}: {f} vs {p}");
        }
    }
}

#[test]
fn graph_uniform_sampler_is_uniform_on_neighbourhoods() {
    let model = PreferenceModel::IncompleteUniform(example_graph());
    let freq = list_frequencies(&model, 4);
    for a in agents(3) {
        for (list, p) in list_distribution(&model, a).unwrap() {
            let p = p.to_f64().unwrap();
            let f = freq.get(&(a, list.clone())).copied().unwrap_or(0.0);
            assert!((f - p).abs() < 4.0 * se(p).max(1e-12), "{a} {list:?}: {f} vs {p}");
        }
    }
}

#[test]
fn integral_matches_exact_two_by_two() {
    let ones = PopularityMatrix::ones(2, 2);
    let id = AlternatingPermutation::new(vec![0, 1], vec![0, 1]).unwrap();
    let e = mc_permutation_stability(&ones, &id, 1_000_000, &SeededStream::new(1, "mc")).unwrap();
    assert!(e.covers(9.0 / 16.0, 4.0), "{e:?}");
}

#[test]
fn integral_matches_exact_for_four_cycle_permutation() {
    let m = example_matrix();
    let sigma = four_cycle_permutation();
    let exact = exact_permutation_stability(
        &PreferenceModel::SymmetricAntiPopularity(m.clone()),
        &sigma,
        EnumerationBudget::default(),
    )
    .unwrap()
    .to_f64()
    .unwrap();
    let e = mc_permutation_stability(&m, &sigma, 1_000_000, &SeededStream::new(2, "mc")).unwrap();
    assert!(e.covers(exact, 4.0), "{e:?} vs {exact}");
}

#[test]
fn inverse_gaps_are_small() {
    let six_cycle = AlternatingPermutation::new(vec![0, 1, 2], vec![1, 2, 0]).unwrap();
    let (_, _, z) = inverse_symmetry_gap(
        &PopularityMatrix::ones(3, 3),
        &six_cycle,
        1_000_000,
        &SeededStream::new(3, "gap"),
    )
    .unwrap();
    assert!(z.abs() < 4.0, "z = {z}");
    let m = PopularityMatrix::from_integers(&[&[3, 1, 4], &[1, 5, 9], &[2, 6, 5]]).unwrap();
    let (a, b, z) =
        inverse_symmetry_gap(&m, &four_cycle_permutation(), 1_000_000, &SeededStream::new(4, "gap")).unwrap();
    assert!(z.abs() < 4.0, "{a:?} {b:?} z = {z}");
}

#[test]
fn monte_carlo_inclusion_exclusion() {
    let id2 = Matching::from_pairs(2, 2, [(0, 0), (1, 1)]).unwrap();
    let v = ie_optimal_probability(
        &PopularityMatrix::ones(2, 2),
        &id2,
        Optimality::WomenOptimal,
        &Evaluator::MonteCarlo {
            samples: 1_000_000,
            stream: SeededStream::new(6, "ie"),
        },
    )
    .unwrap();
    let IeValue::Estimate(e) = v else {
        panic!("expected an estimate")
    };
    assert!(e.covers(0.5, 4.0), "{e:?}");

    // the graph model through a small epsilon: coupling error up to eps * N^3
    let p = graph_to_popularity(&example_graph(), &rational(1, 1000)).unwrap();
    let mu1 = example_outputs()[0].clone();
    let v = ie_optimal_probability(
        &p,
        &mu1,
        Optimality::WomenOptimal,
        &Evaluator::MonteCarlo {
            samples: 1_000_000,
            stream: SeededStream::new(7, "ie"),
        },
    )
    .unwrap();
    let IeValue::Estimate(e) = v else {
        panic!("expected an estimate")
    };
    let target = 19.0 / 48.0;
    assert!((e.mean - target).abs() < (4.0 * e.standard_error).max(1e-2), "{e:?}");
}
