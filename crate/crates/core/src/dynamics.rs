//! Episode-to-episode differencing: edge changes, triad transitions,
//! imbalance attribution and the unpredictability score.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::graph::{EntityId, EpisodeKey, EpisodeSeries, Pair, Sign, SignedGraph};
use crate::scalar::Scalar;
use crate::triads::{enumerate_triads, BalanceSummary, TriadType};

/// State of an entity pair in one snapshot; `Absent` is written `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeState {
    Positive,
    Negative,
    Absent,
}

impl EdgeState {
    pub const ALL: [EdgeState; 3] = [EdgeState::Positive, EdgeState::Negative, EdgeState::Absent];

    pub fn symbol(self) -> char {
        match self {
            EdgeState::Positive => '+',
            EdgeState::Negative => '-',
            EdgeState::Absent => '0',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(EdgeState::Positive),
            '-' => Some(EdgeState::Negative),
            '0' => Some(EdgeState::Absent),
            _ => None,
        }
    }
}

impl From<Option<Sign>> for EdgeState {
    fn from(sign: Option<Sign>) -> Self {
        match sign {
            Some(Sign::Positive) => EdgeState::Positive,
            Some(Sign::Negative) => EdgeState::Negative,
            None => EdgeState::Absent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChangeCategory {
    Establishment,
    Flipping,
    Disruption,
}

impl ChangeCategory {
    /// Category of a state change; `None` when the state is unchanged.
    pub fn of(from: EdgeState, to: EdgeState) -> Option<Self> {
        match (from, to) {
            _ if from == to => None,
            (EdgeState::Absent, _) => Some(ChangeCategory::Establishment),
            (_, EdgeState::Absent) => Some(ChangeCategory::Disruption),
            _ => Some(ChangeCategory::Flipping),
        }
    }
}

/// Whether the endpoints of a changed pair exist on both sides of the change.
///
/// Reports split changes two ways, "between existing entities" versus
/// "involving a non-existing entity"; the last two variants both fall in the
/// second class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeContext {
    BothNodesPersist,
    /// A disruption where an endpoint is gone from the later snapshot.
    NodeEliminated,
    /// An establishment where an endpoint was missing from the earlier snapshot.
    NodeIntroduced,
}

impl NodeContext {
    pub fn involves_nonexisting_entity(self) -> bool {
        self != NodeContext::BothNodesPersist
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeChange {
    pub pair: Pair,
    pub from: EdgeState,
    pub to: EdgeState,
    pub category: ChangeCategory,
    pub node_context: NodeContext,
}

/// One change per pair whose state differs, in pair order.
pub fn edge_diff(before: &SignedGraph, after: &SignedGraph) -> Vec<EdgeChange> {
    let pairs: BTreeSet<&Pair> = before.edge_map().keys().chain(after.edge_map().keys()).collect();
    pairs
        .into_iter()
        .filter_map(|pair| {
            let from = EdgeState::from(before.sign(pair));
            let to = EdgeState::from(after.sign(pair));
            let category = ChangeCategory::of(from, to)?;
            let missing_from = |g: &SignedGraph| {
                !g.contains_node(pair.first()) || !g.contains_node(pair.second())
            };
            let node_context = match category {
                ChangeCategory::Establishment if missing_from(before) => NodeContext::NodeIntroduced,
                ChangeCategory::Disruption if missing_from(after) => NodeContext::NodeEliminated,
                _ => NodeContext::BothNodesPersist,
            };
            Some(EdgeChange {
                pair: pair.clone(),
                from,
                to,
                category,
                node_context,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ChangeCounts {
    pub establishment: usize,
    /// Establishments touching an entity absent from the earlier snapshot.
    pub establishment_new_entity: usize,
    pub flipping: usize,
    pub disruption: usize,
    /// Disruptions where an endpoint is eliminated.
    pub disruption_eliminated: usize,
}

impl ChangeCounts {
    pub fn from_changes(changes: &[EdgeChange]) -> Self {
        let mut c = ChangeCounts::default();
        for change in changes {
            match change.category {
                ChangeCategory::Establishment => {
                    c.establishment += 1;
                    if change.node_context.involves_nonexisting_entity() {
                        c.establishment_new_entity += 1;
                    }
                }
                ChangeCategory::Flipping => c.flipping += 1,
                ChangeCategory::Disruption => {
                    c.disruption += 1;
                    if change.node_context.involves_nonexisting_entity() {
                        c.disruption_eliminated += 1;
                    }
                }
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.establishment + self.flipping + self.disruption
    }

    fn add(&mut self, other: &ChangeCounts) {
        self.establishment += other.establishment;
        self.establishment_new_entity += other.establishment_new_entity;
        self.flipping += other.flipping;
        self.disruption += other.disruption;
        self.disruption_eliminated += other.disruption_eliminated;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChangeStatistics {
    /// Keyed by the later episode of each consecutive pair.
    pub per_episode: Vec<(EpisodeKey, ChangeCounts)>,
    pub totals: ChangeCounts,
}

impl ChangeStatistics {
    fn share(part: usize, whole: usize) -> Option<f64> {
        (whole > 0).then(|| part as f64 / whole as f64)
    }

    pub fn establishment_share(&self) -> Option<f64> {
        Self::share(self.totals.establishment, self.totals.total())
    }

    pub fn flipping_share(&self) -> Option<f64> {
        Self::share(self.totals.flipping, self.totals.total())
    }

    pub fn disruption_share(&self) -> Option<f64> {
        Self::share(self.totals.disruption, self.totals.total())
    }

    /// Fraction of establishments formed between entities that already existed.
    pub fn establishment_existing_share(&self) -> Option<f64> {
        Self::share(
            self.totals.establishment - self.totals.establishment_new_entity,
            self.totals.establishment,
        )
    }

    /// Fraction of disruptions caused by an endpoint being eliminated.
    pub fn disruption_eliminated_share(&self) -> Option<f64> {
        Self::share(self.totals.disruption_eliminated, self.totals.disruption)
    }
}

pub fn change_statistics(series: &EpisodeSeries) -> ChangeStatistics {
    let per_episode: Vec<(EpisodeKey, ChangeCounts)> = series
        .transitions()
        .map(|(b, a)| (a.key(), ChangeCounts::from_changes(&edge_diff(b, a))))
        .collect();
    let mut totals = ChangeCounts::default();
    for (_, c) in &per_episode {
        totals.add(c);
    }
    ChangeStatistics {
        per_episode,
        totals,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionKind {
    Formation,
    Disappearance,
    StateChange,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriadTransition {
    pub members: [EntityId; 3],
    /// `None` is the absent state.
    pub from: Option<TriadType>,
    pub to: Option<TriadType>,
    pub kind: TransitionKind,
}

fn triad_map(graph: &SignedGraph) -> BTreeMap<[EntityId; 3], TriadType> {
    enumerate_triads(graph)
        .into_iter()
        .map(|t| (t.members, t.triad_type))
        .collect()
}

/// Triads matched by member triple; unchanged triads are omitted.
pub fn triad_transitions(before: &SignedGraph, after: &SignedGraph) -> Vec<TriadTransition> {
    let old = triad_map(before);
    let new = triad_map(after);
    let members: BTreeSet<&[EntityId; 3]> = old.keys().chain(new.keys()).collect();
    members
        .into_iter()
        .filter_map(|m| {
            let (from, to) = (old.get(m).copied(), new.get(m).copied());
            let kind = match (from, to) {
                (None, Some(_)) => TransitionKind::Formation,
                (Some(_), None) => TransitionKind::Disappearance,
                (Some(a), Some(b)) if a != b => TransitionKind::StateChange,
                _ => return None,
            };
            Some(TriadTransition {
                members: m.clone(),
                from,
                to,
                kind,
            })
        })
        .collect()
}

/// Counts of triad transitions by `(from, to)` state, index 0 being absent
/// and `1..=4` the triad types.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub counts: [[usize; 5]; 5],
}

impl TransitionMatrix {
    pub const STATE_LABELS: [&'static str; 5] = ["Absent", "Type1", "Type2", "Type3", "Type4"];

    fn slot(state: Option<TriadType>) -> usize {
        state.map_or(0, |t| t.index() + 1)
    }

    pub fn record(&mut self, t: &TriadTransition) {
        self.counts[Self::slot(t.from)][Self::slot(t.to)] += 1;
    }

    pub fn from_series(series: &EpisodeSeries) -> Self {
        let mut m = TransitionMatrix::default();
        for (b, a) in series.transitions() {
            for t in triad_transitions(b, a) {
                m.record(&t);
            }
        }
        m
    }

    pub fn get(&self, from: Option<TriadType>, to: Option<TriadType>) -> usize {
        self.counts[Self::slot(from)][Self::slot(to)]
    }

    pub fn formations(&self) -> usize {
        self.counts[0][1..].iter().sum()
    }

    pub fn disappearances(&self) -> usize {
        (1..5).map(|i| self.counts[i][0]).sum()
    }

    pub fn state_changes(&self) -> usize {
        (1..5).flat_map(|i| (1..5).map(move |j| (i, j))).map(|(i, j)| self.counts[i][j]).sum()
    }

    /// Share of formations producing a type-3 triad.
    pub fn type3_formation_share(&self) -> Option<f64> {
        let total = self.formations();
        (total > 0).then(|| self.get(None, Some(TriadType::Type3)) as f64 / total as f64)
    }

    /// Share of state changes entering or leaving type 3.
    pub fn type3_state_change_share(&self) -> Option<f64> {
        let total = self.state_changes();
        let t3 = TransitionMatrix::slot(Some(TriadType::Type3));
        let involved: usize = (1..5)
            .flat_map(|i| (1..5).map(move |j| (i, j)))
            .filter(|&(i, j)| i == t3 || j == t3)
            .map(|(i, j)| self.counts[i][j])
            .sum();
        (total > 0).then(|| involved as f64 / total as f64)
    }

    /// Share of disappearances of a type-3 triad.
    pub fn type3_disappearance_share(&self) -> Option<f64> {
        let total = self.disappearances();
        (total > 0).then(|| self.get(Some(TriadType::Type3), None) as f64 / total as f64)
    }
}

/// Before/after edge states of a change, e.g. `+>-` or `0>-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub from: EdgeState,
    pub to: EdgeState,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.from.symbol(), self.to.symbol())
    }
}

impl std::str::FromStr for Signature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next(), chars.next(), chars.next()) {
            (Some(a), Some('>'), Some(b), None) => Ok(Signature {
                from: EdgeState::from_symbol(a).ok_or_else(|| format!("bad state `{a}`"))?,
                to: EdgeState::from_symbol(b).ok_or_else(|| format!("bad state `{b}`"))?,
            }),
            _ => Err(format!("bad signature `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImbalanceAttribution {
    pub pair: Pair,
    pub signature: Signature,
    /// Change in the number of imbalanced triads when this edge change was applied.
    pub delta: i64,
}

/// Mutable signed adjacency used to replay edge changes.
struct Replay {
    adj: BTreeMap<EntityId, BTreeMap<EntityId, Sign>>,
}

impl Replay {
    fn new(graph: &SignedGraph) -> Self {
        let mut adj: BTreeMap<EntityId, BTreeMap<EntityId, Sign>> = BTreeMap::new();
        for (pair, &sign) in graph.edge_map() {
            adj.entry(pair.first().clone()).or_default().insert(pair.second().clone(), sign);
            adj.entry(pair.second().clone()).or_default().insert(pair.first().clone(), sign);
        }
        Replay { adj }
    }

    fn imbalanced_through(&self, pair: &Pair) -> i64 {
        let (a, b) = (pair.first(), pair.second());
        let (Some(na), Some(nb)) = (self.adj.get(a), self.adj.get(b)) else {
            return 0;
        };
        let Some(&s_ab) = na.get(b) else { return 0 };
        na.iter()
            .filter_map(|(c, &s_ac)| nb.get(c).map(|&s_bc| s_ab.value() * s_ac.value() * s_bc.value()))
            .filter(|&p| p == -1)
            .count() as i64
    }

    fn set(&mut self, pair: &Pair, state: EdgeState) {
        let (a, b) = (pair.first(), pair.second());
        let sign = match state {
            EdgeState::Positive => Some(Sign::Positive),
            EdgeState::Negative => Some(Sign::Negative),
            EdgeState::Absent => None,
        };
        for (x, y) in [(a, b), (b, a)] {
            match sign {
                Some(s) => {
                    self.adj.entry(x.clone()).or_default().insert(y.clone(), s);
                }
                None => {
                    if let Some(n) = self.adj.get_mut(x) {
                        n.remove(y);
                    }
                }
            }
        }
    }
}

/// Credits each edge change with the imbalanced-triad delta it causes when the
/// changes are applied one at a time in pair order. The deltas sum to the net
/// change in imbalanced triads between the snapshots.
pub fn imbalance_attribution(before: &SignedGraph, after: &SignedGraph) -> Vec<ImbalanceAttribution> {
    let mut replay = Replay::new(before);
    edge_diff(before, after)
        .into_iter()
        .map(|change| {
            let old = replay.imbalanced_through(&change.pair);
            replay.set(&change.pair, change.to);
            let new = replay.imbalanced_through(&change.pair);
            ImbalanceAttribution {
                signature: Signature {
                    from: change.from,
                    to: change.to,
                },
                pair: change.pair,
                delta: new - old,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignatureTotals {
    /// Sum of positive deltas.
    pub increase: u64,
    /// Sum of the magnitudes of negative deltas.
    pub decrease: u64,
    pub changes: usize,
}

/// Aggregated attribution over a whole series, by signature.
pub fn attribution_table(series: &EpisodeSeries) -> BTreeMap<Signature, SignatureTotals> {
    let mut table: BTreeMap<Signature, SignatureTotals> = BTreeMap::new();
    for (b, a) in series.transitions() {
        for item in imbalance_attribution(b, a) {
            let entry = table.entry(item.signature).or_default();
            entry.changes += 1;
            if item.delta > 0 {
                entry.increase += item.delta as u64;
            } else {
                entry.decrease += item.delta.unsigned_abs();
            }
        }
    }
    table
}

impl BalanceSummary {
    /// Fraction of triads of type 2 or 3; `None` without triads.
    pub fn unpredictability<T: Scalar>(&self) -> Option<T> {
        let total = self.total();
        let open = self.count(TriadType::Type2) + self.count(TriadType::Type3);
        (total > 0).then(|| T::from_count(open) / T::from_count(total))
    }
}

pub fn unpredictability<T: Scalar>(graph: &SignedGraph) -> Option<T> {
    crate::triads::balance_summary(graph).unpredictability()
}
