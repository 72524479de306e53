mod common;

use std::collections::BTreeMap;

use common::{arb_graph, brute_betweenness, graph_from, interior_mass, key};
use proptest::prelude::*;
use signed_balance::metrics::{
    assortativity, betweenness, correlate, degree, metric_table, Axis, CorrelationMethod, Metric,
    MissingPolicy,
};
use signed_balance::synthetic::{self, SyntheticConfig};
use signed_balance::{EntityId, Exact, Sign::*};

#[test]
fn oracle_known_shapes() {
    // path n00-n01-n02: only the middle vertex lies on the single interior path
    let path = graph_from(key(1, 1), 3, &[(0, 1, Positive), (1, 2, Negative)]);
    let b = brute_betweenness(&path);
    assert_eq!(b.values().copied().collect::<Vec<_>>(), vec![0.into(), 1.into(), 0.into()]);

    // 4-cycle: each opposite pair has two shortest paths, one through each other vertex
    let cycle = graph_from(key(1, 1), 4, &[(0, 1, Positive), (1, 2, Positive), (2, 3, Positive), (0, 3, Positive)]);
    assert!(brute_betweenness(&cycle).values().all(|&v| v == Exact::new(1, 2)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn betweenness_matches_path_enumeration(g in arb_graph(10)) {
        let oracle = brute_betweenness(&g);
        prop_assert_eq!(&betweenness::<Exact>(&g), &oracle);
        for (e, v) in betweenness::<f64>(&g) {
            let exact = *oracle[&e].numer() as f64 / *oracle[&e].denom() as f64;
            prop_assert!((v - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn betweenness_total_is_interior_mass(g in arb_graph(9)) {
        let total: Exact = betweenness::<Exact>(&g).values().copied().sum();
        prop_assert_eq!(total, interior_mass(&g));
    }

    #[test]
    fn assortativity_affine_invariance(g in arb_graph(12), c in 0.01f64..100.0, shift in -50.0f64..50.0) {
        let base: BTreeMap<EntityId, f64> = degree(&g).into_iter().map(|(e, d)| (e, d as f64)).collect();
        let moved: BTreeMap<EntityId, f64> = base.iter().map(|(e, &v)| (e.clone(), c * v + shift)).collect();
        let a = assortativity(&g, &base).unwrap();
        let b = assortativity(&g, &moved).unwrap();
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b),
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

#[test]
fn star_assortativity_is_minus_one() {
    for leaves in 2..9 {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i, Positive)).collect();
        let g = graph_from(key(1, 1), leaves + 1, &edges);
        let r: f64 = signed_balance::metrics::degree_assortativity(&g).unwrap();
        assert!((r + 1.0).abs() < 1e-9);
    }
}

#[test]
fn correlation_matrices_symmetric_unit_diagonal() {
    let cfg = SyntheticConfig { seasons: 2, episodes_per_season: 8, entities: 12, ..Default::default() };
    let series = synthetic::series(&cfg).unwrap();
    let mut checked = 0;
    for metric in [Metric::Degree, Metric::Betweenness] {
        for policy in [MissingPolicy::ZeroFill, MissingPolicy::MarkMissing] {
            let table = metric_table::<f64>(&series, metric, policy);
            for axis in [Axis::ByEntity, Axis::ByEpisode] {
                for method in [CorrelationMethod::Pearson, CorrelationMethod::Spearman] {
                    let Ok(c) = correlate(&table, axis, method) else { continue };
                    checked += 1;
                    let n = c.labels.len();
                    let mut order = c.leaf_order.clone();
                    order.sort();
                    assert_eq!(order, (0..n).collect::<Vec<_>>());
                    for i in 0..n {
                        for j in 0..n {
                            assert_eq!(c.matrix[i][j], c.matrix[j][i]);
                        }
                        if let Some(d) = c.matrix[i][i] {
                            assert_eq!(d, 1.0);
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 0);
}
