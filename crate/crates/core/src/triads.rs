//! Triangle enumeration, signed triad typing and structural balance.
//!
//! A triad is a closed triangle. Its type is the number of negative edges plus
//! one, and it is balanced when the product of its three signs is `+1`:
//!
//! | type | negatives | balanced |
//! |------|-----------|----------|
//! | 1    | 0         | yes      |
//! | 2    | 1         | no       |
//! | 3    | 2         | yes      |
//! | 4    | 3         | no       |

use std::collections::BTreeMap;
use std::fmt;

use crate::graph::{EntityId, EpisodeKey, EpisodeSeries, Sign, SignedGraph};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TriadType {
    Type1,
    Type2,
    Type3,
    Type4,
}

impl TriadType {
    pub const ALL: [TriadType; 4] = [
        TriadType::Type1,
        TriadType::Type2,
        TriadType::Type3,
        TriadType::Type4,
    ];

    pub fn from_negative_count(negatives: usize) -> Self {
        match negatives {
            0 => TriadType::Type1,
            1 => TriadType::Type2,
            2 => TriadType::Type3,
            3 => TriadType::Type4,
            _ => panic!("a triad has at most 3 negative edges, got {negatives}"),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_balanced(self) -> bool {
        matches!(self, TriadType::Type1 | TriadType::Type3)
    }
}

impl fmt::Display for TriadType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type{}", self.index() + 1)
    }
}

pub fn classify_triad(signs: [Sign; 3]) -> (TriadType, bool) {
    let negatives = signs.iter().filter(|&&s| s == Sign::Negative).count();
    let product: i8 = signs.iter().map(|s| s.value()).product();
    (TriadType::from_negative_count(negatives), product == 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriadRecord {
    /// Sorted member triple.
    pub members: [EntityId; 3],
    /// Signs of the pairs (0,1), (0,2), (1,2).
    pub signs: [Sign; 3],
    pub triad_type: TriadType,
    pub balanced: bool,
}

impl TriadRecord {
    pub fn contains(&self, entity: &EntityId) -> bool {
        self.members.contains(entity)
    }
}

/// Every closed triangle once, in lexicographic member order.
pub fn enumerate_triads(graph: &SignedGraph) -> Vec<TriadRecord> {
    let adj = graph.adjacency();
    let mut out = Vec::new();
    for u in 0..adj.len() {
        let higher_u: Vec<(usize, Sign)> =
            adj.neighbors[u].iter().copied().filter(|&(v, _)| v > u).collect();
        for (i, &(v, s_uv)) in higher_u.iter().enumerate() {
            // neighbor lists are sorted, so merge-intersect the tails above v
            let mut tail_u = higher_u[i + 1..].iter().peekable();
            let mut tail_v = adj.neighbors[v].iter().filter(|&&(w, _)| w > v).peekable();
            while let (Some(&&(a, s_uw)), Some(&&(b, s_vw))) = (tail_u.peek(), tail_v.peek()) {
                match a.cmp(&b) {
                    std::cmp::Ordering::Less => {
                        tail_u.next();
                    }
                    std::cmp::Ordering::Greater => {
                        tail_v.next();
                    }
                    std::cmp::Ordering::Equal => {
                        let signs = [s_uv, s_uw, s_vw];
                        let (triad_type, balanced) = classify_triad(signs);
                        out.push(TriadRecord {
                            members: [
                                adj.entities[u].clone(),
                                adj.entities[v].clone(),
                                adj.entities[a].clone(),
                            ],
                            signs,
                            triad_type,
                            balanced,
                        });
                        tail_u.next();
                        tail_v.next();
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BalanceSummary {
    pub key: EpisodeKey,
    /// Indexed by [`TriadType::index`].
    pub counts: [usize; 4],
}

impl BalanceSummary {
    pub fn from_triads(key: EpisodeKey, triads: &[TriadRecord]) -> Self {
        let mut counts = [0; 4];
        for t in triads {
            counts[t.triad_type.index()] += 1;
        }
        BalanceSummary { key, counts }
    }

    pub fn count(&self, t: TriadType) -> usize {
        self.counts[t.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn imbalanced_count(&self) -> usize {
        self.count(TriadType::Type2) + self.count(TriadType::Type4)
    }

    /// `None` when the snapshot has no triads.
    pub fn imbalanced_fraction<T: Scalar>(&self) -> Option<T> {
        let total = self.total();
        (total > 0).then(|| T::from_count(self.imbalanced_count()) / T::from_count(total))
    }
}

pub fn balance_summary(graph: &SignedGraph) -> BalanceSummary {
    BalanceSummary::from_triads(graph.key(), &enumerate_triads(graph))
}

/// Number of imbalanced triads each node of `graph` belongs to (0 included).
pub fn imbalanced_memberships(graph: &SignedGraph) -> BTreeMap<EntityId, usize> {
    let mut out: BTreeMap<EntityId, usize> = graph.nodes().iter().map(|n| (n.clone(), 0)).collect();
    for t in enumerate_triads(graph).iter().filter(|t| !t.balanced) {
        for m in &t.members {
            *out.get_mut(m).expect("member in node set") += 1;
        }
    }
    out
}

/// Denominator for per-entity averages over a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Episodes in which the entity is present.
    #[default]
    PresenceEpisodes,
    /// Every episode of the series.
    AllEpisodes,
}

pub(crate) fn average_memberships<T: Scalar>(
    universe: impl IntoIterator<Item = EntityId>,
    per_episode: &[BTreeMap<EntityId, usize>],
    averaging: Averaging,
) -> BTreeMap<EntityId, T> {
    universe
        .into_iter()
        .map(|entity| {
            let (sum, present) = per_episode
                .iter()
                .filter_map(|m| m.get(&entity))
                .fold((0usize, 0usize), |(s, p), &c| (s + c, p + 1));
            let denom = match averaging {
                Averaging::PresenceEpisodes => present,
                Averaging::AllEpisodes => per_episode.len(),
            };
            let avg = if denom == 0 {
                T::zero()
            } else {
                T::from_count(sum) / T::from_count(denom)
            };
            (entity, avg)
        })
        .collect()
}

/// Mean number of imbalanced triads containing each entity, per episode.
pub fn per_entity_imbalance<T: Scalar>(
    series: &EpisodeSeries,
    averaging: Averaging,
) -> BTreeMap<EntityId, T> {
    let per_episode: Vec<_> = series.snapshots().iter().map(imbalanced_memberships).collect();
    average_memberships(series.entity_universe().iter().cloned(), &per_episode, averaging)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Sign::*;
    use num_rational::Ratio;

    fn key(e: u32) -> EpisodeKey {
        EpisodeKey::new(1, e).unwrap()
    }

    fn graph(e: u32, edges: &[(&'static str, &'static str, Sign)], isolated: &[&'static str]) -> SignedGraph {
        SignedGraph::from_edges(key(e), edges.iter().copied(), isolated.iter().copied()).unwrap()
    }

    fn k4(sign: Sign) -> SignedGraph {
        graph(
            1,
            &[("A", "B", sign), ("A", "C", sign), ("A", "D", sign), ("B", "C", sign), ("B", "D", sign), ("C", "D", sign)],
            &[],
        )
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_triad([Positive; 3]), (TriadType::Type1, true));
        assert_eq!(classify_triad([Positive, Negative, Negative]), (TriadType::Type3, true));
        assert_eq!(classify_triad([Negative; 3]), (TriadType::Type4, false));
        assert_eq!(classify_triad([Negative, Positive, Positive]), (TriadType::Type2, false));
    }

    #[test]
    fn enumerate_k4_and_open_path() {
        let triads = enumerate_triads(&k4(Positive));
        assert_eq!(triads.len(), 4);
        let names: Vec<String> = triads
            .iter()
            .map(|t| t.members.iter().map(|m| m.as_str()).collect())
            .collect();
        assert_eq!(names, vec!["ABC", "ABD", "ACD", "BCD"]);

        let path = graph(1, &[("A", "B", Positive), ("B", "C", Negative)], &[]);
        assert!(enumerate_triads(&path).is_empty());
    }

    #[test]
    fn triad_signs_follow_member_pairs() {
        let g = graph(1, &[("C", "A", Negative), ("A", "B", Positive), ("B", "C", Positive)], &[]);
        let t = &enumerate_triads(&g)[0];
        // pairs AB, AC, BC
        assert_eq!(t.signs, [Positive, Negative, Positive]);
        assert_eq!(t.triad_type, TriadType::Type2);
    }

    #[test]
    fn summary_examples() {
        let s = balance_summary(&k4(Positive));
        assert_eq!(s.counts, [4, 0, 0, 0]);
        assert_eq!(s.imbalanced_fraction::<f64>(), Some(0.0));

        let tri = graph(1, &[("A", "B", Positive), ("B", "C", Positive), ("A", "C", Negative)], &[]);
        let s = balance_summary(&tri);
        assert_eq!(s.counts, [0, 1, 0, 0]);
        assert_eq!(s.imbalanced_fraction::<f64>(), Some(1.0));

        let none = balance_summary(&graph(1, &[("A", "B", Negative)], &["C"]));
        assert_eq!(none.counts, [0; 4]);
        assert_eq!(none.imbalanced_fraction::<f64>(), None);
    }

    #[test]
    fn per_entity_examples() {
        let imb = [("A", "B", Positive), ("B", "C", Positive), ("A", "C", Negative)];
        let g1 = graph(1, &imb, &["Z"]);
        let g2 = graph(2, &imb, &[]);
        let g3 = graph(3, &[("A", "B", Positive)], &["C", "Z"]);
        let series = EpisodeSeries::new(vec![g1, g2, g3]).unwrap();

        let avg = per_entity_imbalance::<Ratio<i64>>(&series, Averaging::PresenceEpisodes);
        let get = |n: &str| avg[&EntityId::new(n).unwrap()];
        // present in 3 episodes, memberships (1,1,0)
        assert_eq!(get("A"), Ratio::new(2, 3));
        assert_eq!(get("Z"), Ratio::from_integer(0));

        let two = EpisodeSeries::new(vec![graph(1, &imb, &[]), graph(2, &imb, &[])]).unwrap();
        let avg = per_entity_imbalance::<f64>(&two, Averaging::PresenceEpisodes);
        assert_eq!(avg[&EntityId::new("B").unwrap()], 1.0);
    }

    #[test]
    fn per_entity_presence_vs_all_episodes() {
        // D present in episodes 1 and 2 only, memberships (2, 0)
        let e1 = graph(
            1,
            &[("A", "B", Positive), ("B", "D", Positive), ("A", "D", Negative), ("C", "D", Positive), ("B", "C", Negative)],
            &[],
        );
        assert_eq!(imbalanced_memberships(&e1)[&EntityId::new("D").unwrap()], 2);
        let e2 = graph(2, &[("A", "D", Positive)], &[]);
        let e3 = graph(3, &[("A", "B", Positive)], &[]);
        let series = EpisodeSeries::new(vec![e1, e2, e3]).unwrap();
        let d = EntityId::new("D").unwrap();
        assert_eq!(per_entity_imbalance::<f64>(&series, Averaging::PresenceEpisodes)[&d], 1.0);
        assert_eq!(
            per_entity_imbalance::<Ratio<i64>>(&series, Averaging::AllEpisodes)[&d],
            Ratio::new(2, 3)
        );
    }
}
