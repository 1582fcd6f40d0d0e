//! Every file the tool writes parses back to the value it came from.

use matchlab::formats::{
    format_rational, parse_comparison_result, parse_exact_result, parse_graph, parse_market_file, parse_popularity,
    parse_profile, parse_rational, parse_vertical, write_comparison_result, write_exact_result, write_graph,
    write_popularity, write_profile, write_vertical, ComparisonResult, ExactResult, MarketFile, ResultHeader,
};
use matchlab::stats::ComparisonStats;
use matchlab_core::exact::{EmpiricalDistribution, ExactDistribution};
use matchlab_core::market::{BipartiteGraph, Matching, PreferenceProfile};
use matchlab_core::prefdist::PopularityMatrix;
use matchlab_core::{rational, Rational};
use proptest::prelude::*;

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..1000, 1i64..50).prop_map(|(n, d)| rational(n, d))
}

fn ordered_subset(n: usize, complete: bool) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec((any::<bool>(), any::<u16>()), n).prop_map(move |row| {
        let mut keep: Vec<(u16, usize)> = row
            .into_iter()
            .enumerate()
            .filter(|(_, (inc, _))| complete || *inc)
            .map(|(j, (_, key))| (key, j))
            .collect();
        keep.sort();
        keep.into_iter().map(|(_, j)| j).collect()
    })
}

fn profile() -> impl Strategy<Value = PreferenceProfile> {
    (1usize..5, 1usize..5).prop_flat_map(|(m, w)| {
        (
            prop::collection::vec(ordered_subset(w, false), m),
            prop::collection::vec(ordered_subset(m, false), w),
        )
            .prop_map(|(men, women)| PreferenceProfile::new(men, women).unwrap())
    })
}

fn matrix() -> impl Strategy<Value = PopularityMatrix> {
    (1usize..5, 1usize..5).prop_flat_map(|(m, w)| {
        prop::collection::vec(prop::collection::vec(positive_rational(), w), m)
            .prop_map(|rows| PopularityMatrix::new(rows).unwrap())
    })
}

fn graph() -> impl Strategy<Value = BipartiteGraph> {
    (1usize..5, 1usize..5).prop_flat_map(|(m, w)| {
        prop::collection::vec(any::<bool>(), m * w).prop_map(move |bits| {
            let edges: Vec<(usize, usize)> = (0..m * w).filter(|&k| bits[k]).map(|k| (k / w, k % w)).collect();
            BipartiteGraph::new(m, w, edges).unwrap()
        })
    })
}

/// Random matchings of a 3x3 market, as wives vectors.
fn matching() -> impl Strategy<Value = Matching> {
    ordered_subset(3, false)
        .prop_map(|wives| Matching::from_pairs(3, 3, wives.into_iter().enumerate().collect::<Vec<_>>()).unwrap())
}

fn tally() -> impl Strategy<Value = EmpiricalDistribution> {
    prop::collection::vec((matching(), 1u64..10_000), 1..6).prop_map(EmpiricalDistribution::from_counts)
}

proptest! {
    #[test]
    fn rationals(n in -10_000i64..10_000, d in 1i64..10_000) {
        let r = rational(n, d);
        prop_assert_eq!(parse_rational(&format_rational(&r)), Some(r));
    }

    #[test]
    fn profiles(p in profile()) {
        let text = write_profile(&p);
        prop_assert_eq!(parse_profile(&text, "t").unwrap(), p.clone());
        prop_assert_eq!(parse_market_file(&text, "t").unwrap(), MarketFile::Profile(p));
    }

    #[test]
    fn popularity_matrices(m in matrix()) {
        prop_assert_eq!(parse_popularity(&write_popularity(&m), "t").unwrap(), m);
    }

    #[test]
    fn graphs(g in graph()) {
        prop_assert_eq!(parse_graph(&write_graph(&g), "t").unwrap(), g);
    }

    #[test]
    fn vertical(men in prop::collection::vec(positive_rational(), 1..5), women in prop::collection::vec(positive_rational(), 1..5)) {
        prop_assert_eq!(parse_vertical(&write_vertical(&men, &women), "t").unwrap(), (men, women));
    }

    #[test]
    fn exact_results(weights in prop::collection::vec((matching(), 1i64..100), 1..6)) {
        let mut entries: std::collections::BTreeMap<Matching, i64> = Default::default();
        for (m, w) in weights {
            *entries.entry(m).or_default() += w;
        }
        let total: i64 = entries.values().sum();
        let distribution =
            ExactDistribution::from_entries(entries.into_iter().map(|(m, w)| (m, rational(w, total)))).unwrap();
        let result = ExactResult { num_men: 3, num_women: 3, procedure: "wpda".into(), distribution };
        prop_assert_eq!(parse_exact_result(&write_exact_result(&result), "t").unwrap(), result);
    }

    #[test]
    fn comparison_results(a in tally(), b in tally(), seed in any::<u64>(), shards in 1usize..8, p in 0.0f64..1.0, with_stats in any::<bool>()) {
        let stats = with_stats.then(|| ComparisonStats {
            total_variation: p / 3.0,
            chi_square: 1.0 / (p + 0.1),
            degrees_of_freedom: 4,
            p_value: p,
            tv_null_p99: p.sqrt(),
            pooled_cells: 2,
        });
        let result = ComparisonResult {
            header: ResultHeader {
                version: "0.1.0".into(),
                config_hash: "ab".repeat(32),
                seed,
                shards,
                model: "antipop".into(),
                num_men: 3,
                num_women: 3,
                samples: a.samples(),
            },
            tallies: vec![("mpda".into(), a), ("wpda".into(), b)],
            stats,
        };
        prop_assert_eq!(parse_comparison_result(&write_comparison_result(&result), "t").unwrap(), result);
    }
}
