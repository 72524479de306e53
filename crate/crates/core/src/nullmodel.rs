//! Sign-shuffle null model for per-entity imbalance.
//!
//! Each randomized snapshot keeps its topology and its multiset of signs; the
//! signs are permuted uniformly over the edges (Fisher-Yates).
//!
//! Randomness comes from ChaCha8. Replicate `r` of episode `i` draws from
//! stream `(r << 32) | i` of a generator seeded with the configured 64-bit
//! seed, so results do not depend on execution order.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EntityId, EpisodeSeries, Sign, SignedGraph};
use crate::scalar::Real;
use crate::triads::{average_memberships, imbalanced_memberships, Averaging};

pub const DEFAULT_REPLICATES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShuffleConfig {
    pub replicates: usize,
    pub seed: u64,
    pub averaging: Averaging,
}

impl Default for ShuffleConfig {
    fn default() -> Self {
        ShuffleConfig {
            replicates: DEFAULT_REPLICATES,
            seed: 0,
            averaging: Averaging::default(),
        }
    }
}

/// Generator for one `(replicate, episode)` cell.
pub fn substream(seed: u64, replicate: usize, episode_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((replicate as u64) << 32) | episode_index as u64);
    rng
}

pub fn shuffle_signs<R: Rng + ?Sized>(graph: &SignedGraph, rng: &mut R) -> SignedGraph {
    let mut signs: Vec<Sign> = graph.edge_map().values().copied().collect();
    signs.shuffle(rng);
    graph.with_signs(&signs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullDistribution<T> {
    pub mean: T,
    /// Sample standard deviation (divisor `replicates - 1`).
    pub sd: T,
}

/// Per-replicate averages, `[replicate][entity]` with entities in universe order.
pub fn replicate_averages<T: Real>(
    series: &EpisodeSeries,
    config: &ShuffleConfig,
) -> Vec<BTreeMap<EntityId, T>> {
    (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let per_episode: Vec<_> = series
                .snapshots()
                .iter()
                .enumerate()
                .map(|(i, g)| imbalanced_memberships(&shuffle_signs(g, &mut substream(config.seed, r, i))))
                .collect();
            average_memberships(series.entity_universe().iter().cloned(), &per_episode, config.averaging)
        })
        .collect()
}

pub fn expected_imbalance<T: Real>(
    series: &EpisodeSeries,
    config: &ShuffleConfig,
) -> Result<BTreeMap<EntityId, NullDistribution<T>>> {
    if config.replicates < 2 {
        return Err(Error::Config(format!(
            "at least 2 replicates are needed for a standard deviation, got {}",
            config.replicates
        )));
    }
    let replicates = replicate_averages::<T>(series, config);
    let n = T::from_count(replicates.len());
    Ok(series
        .entity_universe()
        .iter()
        .map(|e| {
            let values: Vec<T> = replicates.iter().map(|r| r[e]).collect();
            let mean = values.iter().copied().sum::<T>() / n;
            let ss = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
            let sd = (ss / (n - T::one())).sqrt();
            // keep the mean inside the observed range despite rounding
            let lo = values.iter().copied().fold(T::infinity(), T::min);
            let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
            (e.clone(), NullDistribution { mean: mean.max(lo).min(hi), sd })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EpisodeKey, Sign::*};

    fn key(e: u32) -> EpisodeKey {
        EpisodeKey::new(1, e).unwrap()
    }

    fn negatives(g: &SignedGraph) -> usize {
        g.edge_map().values().filter(|&&s| s == Negative).count()
    }

    #[test]
    fn uniform_signs_are_fixed_points() {
        let g = SignedGraph::from_edges(key(1), [("A", "B", Positive), ("B", "C", Positive), ("A", "C", Positive)], [])
            .unwrap();
        let mut rng = substream(7, 0, 0);
        assert_eq!(shuffle_signs(&g, &mut rng), g);

        let single = SignedGraph::from_edges(key(1), [("A", "B", Negative)], ["C"]).unwrap();
        assert_eq!(shuffle_signs(&single, &mut rng), single);
    }

    #[test]
    fn shuffle_preserves_topology_and_sign_counts() {
        let g = SignedGraph::from_edges(
            key(1),
            [("A", "B", Positive), ("B", "C", Negative), ("C", "D", Positive), ("A", "D", Negative), ("A", "C", Positive)],
            ["E"],
        )
        .unwrap();
        for r in 0..50 {
            let s = shuffle_signs(&g, &mut substream(1, r, 0));
            assert_eq!(s.nodes(), g.nodes());
            assert!(s.edge_map().keys().eq(g.edge_map().keys()));
            assert_eq!(negatives(&s), negatives(&g));
        }
    }

    #[test]
    fn negative_frequency_matches_one_third() {
        let g = SignedGraph::from_edges(key(1), [("A", "B", Positive), ("B", "C", Positive), ("A", "C", Negative)], [])
            .unwrap();
        let trials = 20_000;
        let mut rng = substream(42, 0, 0);
        let mut hits = [0usize; 3];
        for _ in 0..trials {
            let s = shuffle_signs(&g, &mut rng);
            for (i, sign) in s.edge_map().values().enumerate() {
                if *sign == Negative {
                    hits[i] += 1;
                }
            }
        }
        let p = 1.0 / 3.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for h in hits {
            let freq = h as f64 / trials as f64;
            assert!((freq - p).abs() < 3.0 * sigma, "{freq}");
        }
    }

    #[test]
    fn config_requires_two_replicates() {
        let series = EpisodeSeries::new(vec![SignedGraph::from_edges(key(1), [("A", "B", Positive)], []).unwrap()]).unwrap();
        let cfg = ShuffleConfig { replicates: 1, ..Default::default() };
        assert!(matches!(expected_imbalance::<f64>(&series, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn single_mixed_triangle_is_always_imbalanced() {
        let g = SignedGraph::from_edges(key(1), [("A", "B", Positive), ("B", "C", Positive), ("A", "C", Negative)], ["Z"])
            .unwrap();
        let series = EpisodeSeries::new(vec![g]).unwrap();
        let cfg = ShuffleConfig { replicates: 30, seed: 3, ..Default::default() };
        let null = expected_imbalance::<f64>(&series, &cfg).unwrap();
        for name in ["A", "B", "C"] {
            let d = null[&EntityId::new(name).unwrap()];
            assert_eq!((d.mean, d.sd), (1.0, 0.0));
        }
        let z = null[&EntityId::new("Z").unwrap()];
        assert_eq!((z.mean, z.sd), (0.0, 0.0));
    }
}
