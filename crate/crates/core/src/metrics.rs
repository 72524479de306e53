//! Per-snapshot topology and cross-entity / cross-episode correlation.
//!
//! All measures here ignore edge sign.

use std::collections::{BTreeMap, VecDeque};
use std::str::FromStr;

use crate::cluster::average_linkage_order;
use crate::error::{Error, Result};
use crate::graph::{EntityId, EpisodeKey, EpisodeSeries, SignedGraph};
use crate::scalar::{Real, Scalar};
use crate::stats::{pearson, ranks};

pub fn degree(graph: &SignedGraph) -> BTreeMap<EntityId, usize> {
    let mut out: BTreeMap<EntityId, usize> = graph.nodes().iter().map(|n| (n.clone(), 0)).collect();
    for pair in graph.edge_map().keys() {
        *out.get_mut(pair.first()).expect("endpoint in node set") += 1;
        *out.get_mut(pair.second()).expect("endpoint in node set") += 1;
    }
    out
}

/// Unnormalized shortest-path betweenness with fractional counting over
/// equally short paths (Brandes accumulation, undirected, unweighted).
pub fn betweenness<T: Scalar>(graph: &SignedGraph) -> BTreeMap<EntityId, T> {
    let adj = graph.adjacency();
    let n = adj.len();
    let mut score = vec![T::zero(); n];

    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![T::zero(); n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![T::zero(); n];

    for s in 0..n {
        order.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = T::zero();
            dist[v] = usize::MAX;
            delta[v] = T::zero();
        }
        sigma[s] = T::one();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in &adj.neighbors[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] = sigma[w] + sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = order.pop() {
            for &v in &preds[w] {
                delta[v] = delta[v] + sigma[v] / sigma[w] * (T::one() + delta[w]);
            }
            if w != s {
                score[w] = score[w] + delta[w];
            }
        }
    }

    // every unordered pair was visited from both ends
    let two = T::from_count(2);
    adj.entities
        .into_iter()
        .zip(score)
        .map(|(e, b)| (e, b / two))
        .collect()
}

/// Pearson correlation of `attribute` across edge endpoints, each edge counted
/// in both orientations. `Ok(None)` marks an undefined result: no edges, or
/// zero variance among endpoint values.
pub fn assortativity<T: Real>(
    graph: &SignedGraph,
    attribute: &BTreeMap<EntityId, T>,
) -> Result<Option<T>> {
    let mut xs = Vec::with_capacity(2 * graph.edge_count());
    let mut ys = Vec::with_capacity(2 * graph.edge_count());
    let lookup = |e: &EntityId| {
        attribute
            .get(e)
            .copied()
            .ok_or_else(|| Error::Validation(format!("attribute missing for {e}")))
    };
    for pair in graph.edge_map().keys() {
        let (a, b) = (lookup(pair.first())?, lookup(pair.second())?);
        xs.extend([a, b]);
        ys.extend([b, a]);
    }
    Ok(pearson(&xs, &ys))
}

pub fn degree_assortativity<T: Real>(graph: &SignedGraph) -> Option<T> {
    let attr = degree(graph)
        .into_iter()
        .map(|(e, d)| (e, T::from_count(d)))
        .collect();
    assortativity(graph, &attr).expect("degree defined on every node")
}

pub fn betweenness_assortativity<T: Real>(graph: &SignedGraph) -> Option<T> {
    assortativity(graph, &betweenness::<T>(graph)).expect("betweenness defined on every node")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Degree,
    Betweenness,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Degree => "degree",
            Metric::Betweenness => "betweenness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Absent entities get value 0.
    #[default]
    ZeroFill,
    MarkMissing,
}

impl FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "zero_fill" | "zero-fill" => Ok(MissingPolicy::ZeroFill),
            "mark_missing" | "mark-missing" => Ok(MissingPolicy::MarkMissing),
            other => Err(format!("unknown missing policy `{other}`")),
        }
    }
}

/// Entity × episode table of a per-node metric. `None` is a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable<T> {
    pub metric_name: String,
    pub entities: Vec<EntityId>,
    pub episodes: Vec<EpisodeKey>,
    pub values: Vec<Vec<Option<T>>>,
    pub missing_policy: MissingPolicy,
}

impl<T: Copy> MetricTable<T> {
    pub fn row(&self, i: usize) -> Vec<Option<T>> {
        self.values[i].clone()
    }

    pub fn column(&self, j: usize) -> Vec<Option<T>> {
        self.values.iter().map(|r| r[j]).collect()
    }
}

pub fn metric_table<T: Scalar>(
    series: &EpisodeSeries,
    metric: Metric,
    missing_policy: MissingPolicy,
) -> MetricTable<T> {
    let columns: Vec<BTreeMap<EntityId, T>> = series
        .snapshots()
        .iter()
        .map(|g| match metric {
            Metric::Degree => degree(g)
                .into_iter()
                .map(|(e, d)| (e, T::from_count(d)))
                .collect(),
            Metric::Betweenness => betweenness(g),
        })
        .collect();
    let entities: Vec<EntityId> = series.entity_universe().iter().cloned().collect();
    let values = entities
        .iter()
        .map(|e| {
            columns
                .iter()
                .map(|col| match (col.get(e), missing_policy) {
                    (Some(&v), _) => Some(v),
                    (None, MissingPolicy::ZeroFill) => Some(T::zero()),
                    (None, MissingPolicy::MarkMissing) => None,
                })
                .collect()
        })
        .collect();
    MetricTable {
        metric_name: metric.name().to_owned(),
        entities,
        episodes: series.keys().collect(),
        values,
        missing_policy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Correlate entity rows across episodes.
    ByEntity,
    /// Correlate episode columns across entities.
    ByEpisode,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::ByEntity => "by_entity",
            Axis::ByEpisode => "by_episode",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

impl CorrelationMethod {
    pub fn name(self) -> &'static str {
        match self {
            CorrelationMethod::Pearson => "pearson",
            CorrelationMethod::Spearman => "spearman",
        }
    }
}

impl FromStr for CorrelationMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            other => Err(format!("unknown correlation method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult<T> {
    pub labels: Vec<String>,
    /// Symmetric; `None` where the correlation is undefined.
    pub matrix: Vec<Vec<Option<T>>>,
    pub axis: Axis,
    pub method: CorrelationMethod,
    /// Permutation of `labels` from average-linkage clustering on `1 - r`.
    pub leaf_order: Vec<usize>,
}

/// Correlation of two vectors on their pairwise-complete entries. `None` when
/// fewer than 3 complete points remain or either side has zero variance.
pub fn pairwise_correlation<T: Real>(
    x: &[Option<T>],
    y: &[Option<T>],
    method: CorrelationMethod,
) -> Option<T> {
    let (xs, ys): (Vec<T>, Vec<T>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .unzip();
    if xs.len() < 3 {
        return None;
    }
    match method {
        CorrelationMethod::Pearson => pearson(&xs, &ys),
        CorrelationMethod::Spearman => pearson(&ranks(&xs), &ranks(&ys)),
    }
    .map(|r| r.max(-T::one()).min(T::one()))
}

pub fn correlate<T: Real>(
    table: &MetricTable<T>,
    axis: Axis,
    method: CorrelationMethod,
) -> Result<CorrelationResult<T>> {
    let (labels, vectors): (Vec<String>, Vec<Vec<Option<T>>>) = match axis {
        Axis::ByEntity => (
            table.entities.iter().map(|e| e.to_string()).collect(),
            (0..table.entities.len()).map(|i| table.row(i)).collect(),
        ),
        Axis::ByEpisode => (
            table.episodes.iter().map(|k| k.label()).collect(),
            (0..table.episodes.len()).map(|j| table.column(j)).collect(),
        ),
    };
    if vectors.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 vectors along {}, got {}",
            axis.name(),
            vectors.len()
        )));
    }
    let len = vectors[0].len();
    if len < 3 {
        return Err(Error::InsufficientData(format!(
            "correlated vectors have length {len}, need at least 3"
        )));
    }

    let n = vectors.len();
    let mut matrix = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let r = if i == j {
                pairwise_correlation(&vectors[i], &vectors[i], method).map(|_| T::one())
            } else {
                pairwise_correlation(&vectors[i], &vectors[j], method)
            };
            matrix[i][j] = r;
            matrix[j][i] = r;
        }
    }
    let valid = (0..n).filter(|&i| matrix[i][i].is_some()).count();
    if valid < 2 {
        return Err(Error::InsufficientData(format!(
            "only {valid} vector(s) along {} have nonzero variance",
            axis.name()
        )));
    }

    let distance: Vec<Vec<Option<T>>> = matrix
        .iter()
        .map(|row| row.iter().map(|r| r.map(|r| T::one() - r)).collect())
        .collect();
    let leaf_order = average_linkage_order(&labels, &distance);
    Ok(CorrelationResult {
        labels,
        matrix,
        axis,
        method,
        leaf_order,
    })
}
