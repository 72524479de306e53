//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signed_balance::triads::TriadType;
use signed_balance::{EntityId, EpisodeKey, Exact, Pair, Sign, SignedEdge, SignedGraph};

pub fn key(season: u32, episode: u32) -> EpisodeKey {
    EpisodeKey::new(season, episode).unwrap()
}

pub fn id(name: &str) -> EntityId {
    EntityId::new(name).unwrap()
}

pub fn name(i: usize) -> String {
    format!("n{i:02}")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds a graph on nodes `n00..` from `(i, j, sign)` triples.
pub fn graph_from(k: EpisodeKey, n: usize, edges: &[(usize, usize, Sign)]) -> SignedGraph {
    let nodes = (0..n).map(|i| id(&name(i)));
    let edges = edges
        .iter()
        .map(|&(a, b, s)| SignedEdge::new(id(&name(a)), id(&name(b)), s).unwrap());
    SignedGraph::new(k, nodes, edges).unwrap()
}

pub fn random_graph(rng: &mut impl Rng, k: EpisodeKey, n: usize, density: f64, negative: f64) -> SignedGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(density) {
                let s = if rng.random_bool(negative) { Sign::Negative } else { Sign::Positive };
                edges.push((a, b, s));
            }
        }
    }
    graph_from(k, n, &edges)
}

/// Mutates `g`: flips, removes and adds edges, and may drop or add nodes.
pub fn perturb(rng: &mut impl Rng, g: &SignedGraph, k: EpisodeKey, n_max: usize) -> SignedGraph {
    let mut nodes: BTreeSet<usize> = g
        .nodes()
        .iter()
        .map(|e| e.as_str()[1..].parse().unwrap())
        .filter(|_| rng.random_bool(0.9))
        .collect();
    for i in 0..n_max {
        if rng.random_bool(0.15) {
            nodes.insert(i);
        }
    }
    let mut edges = Vec::new();
    for &a in &nodes {
        for &b in nodes.range(a + 1..) {
            let pair = Pair::new(id(&name(a)), id(&name(b))).unwrap();
            let next = match g.sign(&pair) {
                Some(s) if rng.random_bool(0.7) => Some(if rng.random_bool(0.2) { s.flipped() } else { s }),
                Some(_) => None,
                None if rng.random_bool(0.25) => {
                    Some(if rng.random_bool(0.4) { Sign::Negative } else { Sign::Positive })
                }
                None => None,
            };
            if let Some(s) = next {
                edges.push(SignedEdge::new(id(&name(a)), id(&name(b)), s).unwrap());
            }
        }
    }
    SignedGraph::new(k, nodes.into_iter().map(|i| id(&name(i))), edges).unwrap()
}

pub fn arb_sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Positive), Just(Sign::Negative)]
}

/// Random signed graph on up to `max_n` nodes.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = SignedGraph> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (Just(n), prop::collection::vec(prop::option::weighted(0.4, arb_sign()), pairs))
        })
        .prop_map(|(n, slots)| {
            let mut edges = Vec::new();
            let mut it = slots.into_iter();
            for a in 0..n {
                for b in a + 1..n {
                    if let Some(s) = it.next().unwrap() {
                        edges.push((a, b, s));
                    }
                }
            }
            graph_from(key(1, 1), n, &edges)
        })
}

fn distances(g: &SignedGraph) -> (Vec<EntityId>, Vec<Vec<Option<usize>>>) {
    let nodes: Vec<EntityId> = g.nodes().iter().cloned().collect();
    let n = nodes.len();
    let idx: BTreeMap<&EntityId, usize> = nodes.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for pair in g.edge_map().keys() {
        let (a, b) = (idx[pair.first()], idx[pair.second()]);
        d[a][b] = Some(1);
        d[b][a] = Some(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|cur| x + y < cur) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    (nodes, d)
}

fn connected(g: &SignedGraph, a: &EntityId, b: &EntityId) -> bool {
    Pair::new(a.clone(), b.clone()).is_ok_and(|p| g.sign(&p).is_some())
}

/// Every shortest path from `s` to `t`, listed explicitly as vertex sequences.
pub fn all_shortest_paths(g: &SignedGraph, s: usize, t: usize) -> Vec<Vec<usize>> {
    let (nodes, d) = distances(g);
    let Some(len) = d[s][t] else { return Vec::new() };
    let mut out = Vec::new();
    let mut stack = vec![vec![s]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        if path.len() == len + 1 {
            if last == t {
                out.push(path);
            }
            continue;
        }
        for next in 0..nodes.len() {
            if !path.contains(&next) && connected(g, &nodes[last], &nodes[next]) {
                let mut p = path.clone();
                p.push(next);
                stack.push(p);
            }
        }
    }
    out
}

/// Betweenness by enumerating every shortest path between every unordered pair.
pub fn brute_betweenness(g: &SignedGraph) -> BTreeMap<EntityId, Exact> {
    let nodes: Vec<EntityId> = g.nodes().iter().cloned().collect();
    let mut b: Vec<Exact> = vec![Exact::from_integer(0); nodes.len()];
    for s in 0..nodes.len() {
        for t in s + 1..nodes.len() {
            let paths = all_shortest_paths(g, s, t);
            let total = paths.len() as i64;
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    b[v] += Exact::new(1, total);
                }
            }
        }
    }
    nodes.into_iter().zip(b).collect()
}

/// Mean over shortest paths of interior vertex count, summed over pairs.
pub fn interior_mass(g: &SignedGraph) -> Exact {
    let n = g.node_count();
    let mut total = Exact::from_integer(0);
    for s in 0..n {
        for t in s + 1..n {
            let paths = all_shortest_paths(g, s, t);
            if paths.is_empty() {
                continue;
            }
            let interior: usize = paths.iter().map(|p| p.len() - 2).sum();
            total += Exact::new(interior as i64, paths.len() as i64);
        }
    }
    total
}

/// Triangles by checking all node triples.
pub fn brute_triangles(g: &SignedGraph) -> Vec<([EntityId; 3], [Sign; 3])> {
    let nodes: Vec<EntityId> = g.nodes().iter().cloned().collect();
    let sign = |a: &EntityId, b: &EntityId| g.sign(&Pair::new(a.clone(), b.clone()).unwrap());
    let mut out = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            for k in j + 1..nodes.len() {
                let (a, b, c) = (&nodes[i], &nodes[j], &nodes[k]);
                if let (Some(x), Some(y), Some(z)) = (sign(a, b), sign(a, c), sign(b, c)) {
                    out.push(([a.clone(), b.clone(), c.clone()], [x, y, z]));
                }
            }
        }
    }
    out
}

pub fn brute_type_counts(g: &SignedGraph) -> [usize; 4] {
    let mut counts = [0; 4];
    for (_, signs) in brute_triangles(g) {
        let negatives = signs.iter().filter(|&&s| s == Sign::Negative).count();
        counts[negatives] += 1;
    }
    counts
}

pub fn brute_imbalanced(g: &SignedGraph) -> usize {
    let c = brute_type_counts(g);
    c[1] + c[3]
}

pub fn type_of(negatives: usize) -> TriadType {
    TriadType::ALL[negatives]
}

/// Exact expected per-entity imbalanced-triad count under a uniform
/// permutation of the sign multiset, by enumerating all edge orderings.
pub fn exhaustive_null_mean(g: &SignedGraph) -> BTreeMap<EntityId, f64> {
    let pairs: Vec<Pair> = g.edge_map().keys().cloned().collect();
    let signs: Vec<Sign> = g.edge_map().values().copied().collect();
    let mut sums: BTreeMap<EntityId, u64> = g.nodes().iter().map(|e| (e.clone(), 0)).collect();
    let mut perm: Vec<usize> = (0..signs.len()).collect();
    let mut count = 0u64;
    loop {
        let edges = pairs
            .iter()
            .zip(&perm)
            .map(|(p, &i)| SignedEdge { pair: p.clone(), sign: signs[i] });
        let shuffled = SignedGraph::new(g.key(), g.nodes().iter().cloned(), edges).unwrap();
        for (members, s) in brute_triangles(&shuffled) {
            let product: i8 = s.iter().map(|x| x.value()).product();
            if product < 0 {
                for m in members {
                    *sums.get_mut(&m).unwrap() += 1;
                }
            }
        }
        count += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    sums.into_iter().map(|(e, s)| (e, s as f64 / count as f64)).collect()
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
