//! Seeded generator for synthetic signed-network series and responses, used
//! for fixtures, benchmarks and demos.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{EntityId, EpisodeKey, EpisodeSeries, Pair, Sign, SignedEdge, SignedGraph};
use crate::responses::{ResponseRecord, ResponseSeries};
use crate::triads::balance_summary;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub seasons: u32,
    pub episodes_per_season: u32,
    pub entities: usize,
    /// Chance that an absent entity appears in the next episode.
    pub join: f64,
    /// Chance that a present entity stays for the next episode.
    pub stay: f64,
    /// Chance that a new edge forms between two present entities.
    pub density: f64,
    pub negative: f64,
    /// Chance that an existing edge survives to the next episode.
    pub persistence: f64,
    /// Chance that a surviving edge changes sign.
    pub flip: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seasons: 6,
            episodes_per_season: 10,
            entities: 25,
            join: 0.3,
            stay: 0.9,
            density: 0.15,
            negative: 0.3,
            persistence: 0.8,
            flip: 0.1,
            seed: 1,
        }
    }
}

fn entity_name(i: usize) -> String {
    format!("E{i:02}")
}

pub fn series(config: &SyntheticConfig) -> Result<EpisodeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ids: Vec<EntityId> = (0..config.entities)
        .map(|i| EntityId::new(&entity_name(i)))
        .collect::<Result<_>>()?;
    let mut present: Vec<bool> = (0..config.entities).map(|_| rng.random_bool(0.5)).collect();
    let mut edges: BTreeMap<(usize, usize), Sign> = BTreeMap::new();
    let mut snapshots = Vec::new();
    for season in 1..=config.seasons {
        for episode in 1..=config.episodes_per_season {
            if !snapshots.is_empty() {
                for p in present.iter_mut() {
                    *p = rng.random_bool(if *p { config.stay } else { config.join });
                }
            }
            let mut next = BTreeMap::new();
            for a in 0..config.entities {
                for b in a + 1..config.entities {
                    if !(present[a] && present[b]) {
                        continue;
                    }
                    let sign = match edges.get(&(a, b)) {
                        Some(&s) if rng.random_bool(config.persistence) => {
                            Some(if rng.random_bool(config.flip) { s.flipped() } else { s })
                        }
                        Some(_) => None,
                        None if rng.random_bool(config.density) => Some(
                            if rng.random_bool(config.negative) { Sign::Negative } else { Sign::Positive },
                        ),
                        None => None,
                    };
                    if let Some(s) = sign {
                        next.insert((a, b), s);
                    }
                }
            }
            edges = next;
            let nodes = (0..config.entities).filter(|&i| present[i]).map(|i| ids[i].clone());
            let signed = edges
                .iter()
                .map(|(&(a, b), &s)| Ok(SignedEdge { pair: Pair::new(ids[a].clone(), ids[b].clone())?, sign: s }))
                .collect::<Result<Vec<_>>>()?;
            snapshots.push(SignedGraph::new(EpisodeKey::new(season, episode)?, nodes, signed)?);
        }
    }
    EpisodeSeries::new(snapshots)
}

/// Responses loosely driven by the imbalanced fraction, with noise.
pub fn responses(series: &EpisodeSeries, seed: u64) -> Result<ResponseSeries<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = series
        .snapshots()
        .iter()
        .map(|g| {
            let fraction: f64 = balance_summary(g).imbalanced_fraction().unwrap_or(0.0);
            let base = 1000.0 * (1.0 + 0.2 * g.key().season as f64);
            ResponseRecord {
                key: g.key(),
                votes: (base * (1.0 + fraction + rng.random_range(-0.2..0.2))).round(),
                rating: (7.5 + fraction + rng.random_range(-0.5..0.5)).clamp(0.0, 10.0),
            }
        })
        .collect();
    ResponseSeries::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let cfg = SyntheticConfig::default();
        let a = series(&cfg).unwrap();
        assert_eq!(a.len(), 60);
        assert!(a.entity_universe().len() <= 25);
        assert_eq!(a, series(&cfg).unwrap());
        let r = responses(&a, 2).unwrap();
        r.check_aligned(&a).unwrap();
    }
}
