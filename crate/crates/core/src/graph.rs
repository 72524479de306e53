//! Signed temporal network data model.
//!
//! A [`SignedGraph`] is one episode snapshot: a set of entities and a set of
//! undirected, signed edges between them. An [`EpisodeSeries`] is the ordered
//! sequence of snapshots. Both are immutable once constructed, and every
//! constructor validates that edge endpoints belong to the node set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical entity label, trimmed of surrounding whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EntityId(String);

impl EntityId {
    pub fn new(name: &str) -> Result<Self> {
        let trimmed = name.trim();
        if trimmed.is_empty() {
            return Err(Error::Validation("empty entity name".into()));
        }
        Ok(EntityId(trimmed.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for EntityId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        EntityId::new(&value)
    }
}

impl From<EntityId> for String {
    fn from(value: EntityId) -> Self {
        value.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Relationship polarity. There is no zero sign: a missing edge means no interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn from_value(value: i64) -> Option<Self> {
        match value {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

impl FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "+" | "+1" => Ok(Sign::Positive),
            "-" | "-1" => Ok(Sign::Negative),
            other => Err(format!("unknown sign token `{other}`")),
        }
    }
}

/// Unordered entity pair, stored with the lexicographically smaller endpoint first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair(EntityId, EntityId);

impl Pair {
    /// Fails on self-loops.
    pub fn new(a: EntityId, b: EntityId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Pair(a, b)),
            std::cmp::Ordering::Greater => Ok(Pair(b, a)),
            std::cmp::Ordering::Equal => Err(Error::Validation(format!("self-loop on {a}"))),
        }
    }

    pub fn first(&self) -> &EntityId {
        &self.0
    }

    pub fn second(&self) -> &EntityId {
        &self.1
    }

    pub fn contains(&self, entity: &EntityId) -> bool {
        &self.0 == entity || &self.1 == entity
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedEdge {
    pub pair: Pair,
    pub sign: Sign,
}

impl SignedEdge {
    pub fn new(a: EntityId, b: EntityId, sign: Sign) -> Result<Self> {
        Ok(SignedEdge {
            pair: Pair::new(a, b)?,
            sign,
        })
    }
}

/// `(season, episode)`, ordered season-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpisodeKey {
    pub season: u32,
    pub episode: u32,
}

impl EpisodeKey {
    pub fn new(season: u32, episode: u32) -> Result<Self> {
        if season == 0 || episode == 0 {
            return Err(Error::Validation(format!(
                "season and episode must be positive, got ({season},{episode})"
            )));
        }
        Ok(EpisodeKey { season, episode })
    }

    /// Column label used in reports, e.g. `S2E7`.
    pub fn label(&self) -> String {
        format!("S{}E{}", self.season, self.episode)
    }

    pub fn parse_label(label: &str) -> Option<Self> {
        let rest = label.strip_prefix('S')?;
        let (season, episode) = rest.split_once('E')?;
        EpisodeKey::new(season.parse().ok()?, episode.parse().ok()?).ok()
    }
}

impl fmt::Display for EpisodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.season, self.episode)
    }
}

/// One episode snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    key: EpisodeKey,
    nodes: BTreeSet<EntityId>,
    edges: BTreeMap<Pair, Sign>,
}

impl SignedGraph {
    /// Builds a snapshot from an explicit node set and edge list. Every edge
    /// endpoint must be listed in `nodes`, and each pair may appear once.
    pub fn new(
        key: EpisodeKey,
        nodes: impl IntoIterator<Item = EntityId>,
        edges: impl IntoIterator<Item = SignedEdge>,
    ) -> Result<Self> {
        let nodes: BTreeSet<EntityId> = nodes.into_iter().collect();
        let mut edge_map = BTreeMap::new();
        for edge in edges {
            for endpoint in [edge.pair.first(), edge.pair.second()] {
                if !nodes.contains(endpoint) {
                    return Err(Error::Validation(format!(
                        "edge {} in {key} has endpoint {endpoint} outside the node set",
                        edge.pair
                    )));
                }
            }
            if edge_map.insert(edge.pair.clone(), edge.sign).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate edge {} in {key}",
                    edge.pair
                )));
            }
        }
        Ok(SignedGraph {
            key,
            nodes,
            edges: edge_map,
        })
    }

    /// Convenience constructor: endpoints are added to the node set, plus any
    /// `isolated` entities.
    pub fn from_edges<'a>(
        key: EpisodeKey,
        edges: impl IntoIterator<Item = (&'a str, &'a str, Sign)>,
        isolated: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut nodes = BTreeSet::new();
        let mut signed = Vec::new();
        for (a, b, sign) in edges {
            let (a, b) = (EntityId::new(a)?, EntityId::new(b)?);
            nodes.insert(a.clone());
            nodes.insert(b.clone());
            signed.push(SignedEdge::new(a, b, sign)?);
        }
        for name in isolated {
            nodes.insert(EntityId::new(name)?);
        }
        SignedGraph::new(key, nodes, signed)
    }

    pub fn key(&self) -> EpisodeKey {
        self.key
    }

    pub fn nodes(&self) -> &BTreeSet<EntityId> {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_node(&self, entity: &EntityId) -> bool {
        self.nodes.contains(entity)
    }

    pub fn sign(&self, pair: &Pair) -> Option<Sign> {
        self.edges.get(pair).copied()
    }

    pub fn edge_map(&self) -> &BTreeMap<Pair, Sign> {
        &self.edges
    }

    /// Edges in canonical (lexicographic pair) order.
    pub fn edges(&self) -> impl Iterator<Item = SignedEdge> + '_ {
        self.edges.iter().map(|(pair, &sign)| SignedEdge {
            pair: pair.clone(),
            sign,
        })
    }

    /// Same topology, new signs in canonical edge order.
    pub(crate) fn with_signs(&self, signs: &[Sign]) -> SignedGraph {
        debug_assert_eq!(signs.len(), self.edges.len());
        SignedGraph {
            key: self.key,
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .keys()
                .cloned()
                .zip(signs.iter().copied())
                .collect(),
        }
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self)
    }
}

/// Dense index over a snapshot: node `i` is the `i`-th entity in lexicographic
/// order, and neighbor lists are sorted by index.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub entities: Vec<EntityId>,
    pub neighbors: Vec<Vec<(usize, Sign)>>,
}

impl Adjacency {
    fn new(graph: &SignedGraph) -> Self {
        let entities: Vec<EntityId> = graph.nodes.iter().cloned().collect();
        let index: BTreeMap<&EntityId, usize> =
            entities.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut neighbors = vec![Vec::new(); entities.len()];
        for (pair, &sign) in &graph.edges {
            let (a, b) = (index[pair.first()], index[pair.second()]);
            neighbors[a].push((b, sign));
            neighbors[b].push((a, sign));
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Adjacency {
            entities,
            neighbors,
        }
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

/// Snapshots in strictly increasing episode order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EpisodeSeries {
    snapshots: Vec<SignedGraph>,
    universe: BTreeSet<EntityId>,
}

impl EpisodeSeries {
    /// Snapshots may arrive in any order; duplicate keys are rejected.
    pub fn new(mut snapshots: Vec<SignedGraph>) -> Result<Self> {
        snapshots.sort_by_key(|g| g.key);
        if let Some(w) = snapshots.windows(2).find(|w| w[0].key == w[1].key) {
            return Err(Error::Validation(format!(
                "duplicate episode key {}",
                w[0].key
            )));
        }
        let universe = snapshots
            .iter()
            .flat_map(|g| g.nodes.iter().cloned())
            .collect();
        Ok(EpisodeSeries {
            snapshots,
            universe,
        })
    }

    pub fn snapshots(&self) -> &[SignedGraph] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = EpisodeKey> + '_ {
        self.snapshots.iter().map(|g| g.key)
    }

    pub fn entity_universe(&self) -> &BTreeSet<EntityId> {
        &self.universe
    }

    pub fn episode_graph(&self, season: u32, episode: u32) -> Result<&SignedGraph> {
        let key = EpisodeKey { season, episode };
        self.snapshots
            .binary_search_by_key(&key, |g| g.key)
            .map(|i| &self.snapshots[i])
            .map_err(|_| Error::NotFound(key))
    }

    /// 1-based position of `key` in the series, for plotting on a flat axis.
    pub fn flat_index(&self, key: EpisodeKey) -> Option<usize> {
        self.snapshots
            .binary_search_by_key(&key, |g| g.key)
            .ok()
            .map(|i| i + 1)
    }

    /// Consecutive `(before, after)` snapshot pairs.
    pub fn transitions(&self) -> impl Iterator<Item = (&SignedGraph, &SignedGraph)> + '_ {
        self.snapshots.windows(2).map(|w| (&w[0], &w[1]))
    }
}

/// Entity × episode presence grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresenceMatrix {
    pub entities: Vec<EntityId>,
    pub episodes: Vec<EpisodeKey>,
    /// `present[entity][episode]`.
    pub present: Vec<Vec<bool>>,
}

impl PresenceMatrix {
    pub fn row_sum(&self, row: usize) -> usize {
        self.present[row].iter().filter(|&&p| p).count()
    }
}

pub fn presence_matrix(series: &EpisodeSeries) -> PresenceMatrix {
    let entities: Vec<EntityId> = series.universe.iter().cloned().collect();
    let present = entities
        .iter()
        .map(|e| series.snapshots.iter().map(|g| g.contains_node(e)).collect())
        .collect();
    PresenceMatrix {
        entities,
        episodes: series.keys().collect(),
        present,
    }
}
