//! Agglomerative clustering for ordering correlation heatmaps.

use std::cmp::Ordering;

use crate::scalar::Real;

#[derive(Debug, Clone)]
enum Tree {
    Leaf(usize),
    Merge(Box<Tree>, Box<Tree>),
}

#[derive(Debug, Clone)]
struct Cluster {
    tree: Tree,
    size: usize,
    first_label: usize,
}

/// Average-linkage clustering over a symmetric distance matrix where `None`
/// marks an undefined distance. Undefined pairs are left out of the cluster
/// averages; cluster pairs with no defined distance merge after all others.
///
/// Returns the dendrogram leaf order. At every merge the smaller child is
/// placed first, ties going to the child whose lexicographically first label
/// sorts first. Equal merge distances are broken the same way.
pub fn average_linkage_order<T: Real>(labels: &[String], distance: &[Vec<Option<T>>]) -> Vec<usize> {
    let n = labels.len();
    debug_assert!(distance.len() == n && distance.iter().all(|r| r.len() == n));
    if n == 0 {
        return Vec::new();
    }

    let mut by_label: Vec<usize> = (0..n).collect();
    by_label.sort_by(|&a, &b| labels[a].cmp(&labels[b]).then(a.cmp(&b)));
    let mut label_rank = vec![0; n];
    for (rank, &i) in by_label.iter().enumerate() {
        label_rank[i] = rank;
    }

    let mut clusters: Vec<Option<Cluster>> = (0..n)
        .map(|i| {
            Some(Cluster {
                tree: Tree::Leaf(i),
                size: 1,
                first_label: label_rank[i],
            })
        })
        .collect();
    // running sum and count of defined leaf distances between clusters
    let mut sum = vec![vec![T::zero(); n]; n];
    let mut count = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            if let Some(d) = distance[i][j].filter(|d| !d.is_nan()) {
                sum[i][j] = d;
                count[i][j] = 1;
            }
        }
    }

    for _ in 1..n {
        let mut best: Option<(usize, usize, Option<T>, (usize, usize))> = None;
        for a in 0..n {
            let Some(ca) = &clusters[a] else { continue };
            for b in (a + 1)..n {
                let Some(cb) = &clusters[b] else { continue };
                let d = (count[a][b] > 0).then(|| sum[a][b] / T::from_count(count[a][b]));
                let tie = (
                    ca.first_label.min(cb.first_label),
                    ca.first_label.max(cb.first_label),
                );
                let better = match &best {
                    None => true,
                    Some((_, _, bd, btie)) => match compare(d, *bd) {
                        Ordering::Less => true,
                        Ordering::Equal => tie < *btie,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((a, b, d, tie));
                }
            }
        }
        let (a, b, _, _) = best.expect("at least two clusters remain");
        let ca = clusters[a].take().expect("live cluster");
        let cb = clusters[b].take().expect("live cluster");
        for c in 0..n {
            if c != a && clusters[c].is_some() {
                sum[a][c] = sum[a][c] + sum[b][c];
                count[a][c] += count[b][c];
                sum[c][a] = sum[a][c];
                count[c][a] = count[a][c];
            }
        }
        let (first, second) = if (ca.size, ca.first_label) <= (cb.size, cb.first_label) {
            (ca, cb)
        } else {
            (cb, ca)
        };
        clusters[a] = Some(Cluster {
            size: first.size + second.size,
            first_label: first.first_label.min(second.first_label),
            tree: Tree::Merge(Box::new(first.tree), Box::new(second.tree)),
        });
    }

    let root = clusters.into_iter().flatten().next().expect("root cluster");
    let mut order = Vec::with_capacity(n);
    collect_leaves(&root.tree, &mut order);
    order
}

fn compare<T: Real>(a: Option<T>, b: Option<T>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

fn collect_leaves(tree: &Tree, out: &mut Vec<usize>) {
    match tree {
        Tree::Leaf(i) => out.push(*i),
        Tree::Merge(l, r) => {
            collect_leaves(l, out);
            collect_leaves(r, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("L{i}")).collect()
    }

    fn full(d: &[&[f64]]) -> Vec<Vec<Option<f64>>> {
        d.iter().map(|r| r.iter().map(|&x| Some(x)).collect()).collect()
    }

    #[test]
    fn two_tight_groups() {
        let d = full(&[
            &[0.0, 0.1, 0.9, 0.8],
            &[0.1, 0.0, 0.85, 0.95],
            &[0.9, 0.85, 0.0, 0.2],
            &[0.8, 0.95, 0.2, 0.0],
        ]);
        assert_eq!(average_linkage_order(&labels(4), &d), vec![0, 1, 2, 3]);
    }

    #[test]
    fn smaller_cluster_goes_first() {
        // 1 and 2 merge first; 0 joins them last and is the smaller child
        let d = full(&[&[0.0, 0.9, 0.9], &[0.9, 0.0, 0.1], &[0.9, 0.1, 0.0]]);
        assert_eq!(average_linkage_order(&labels(3), &d), vec![0, 1, 2]);
        let d = full(&[&[0.0, 0.1, 0.9], &[0.1, 0.0, 0.9], &[0.9, 0.9, 0.0]]);
        assert_eq!(average_linkage_order(&labels(3), &d), vec![2, 0, 1]);
    }

    #[test]
    fn undefined_distances_merge_last() {
        let mut d = full(&[&[0.0, 0.5, 0.1], &[0.5, 0.0, 0.6], &[0.1, 0.6, 0.0]]);
        d[1] = vec![None; 3];
        for row in &mut d {
            row[1] = None;
        }
        assert_eq!(average_linkage_order(&labels(3), &d), vec![1, 0, 2]);
    }

    #[test]
    fn average_linkage_uses_mean_distance() {
        // {0,1} merge at 0.1. Then to 2: mean(0.3, 0.7)=0.5; to 3: mean(0.45,0.45)=0.45,
        // and 2-3 is 0.48, so 3 joins {0,1} before 2 does.
        let d = full(&[
            &[0.0, 0.1, 0.3, 0.45],
            &[0.1, 0.0, 0.7, 0.45],
            &[0.3, 0.7, 0.0, 0.48],
            &[0.45, 0.45, 0.48, 0.0],
        ]);
        assert_eq!(average_linkage_order(&labels(4), &d), vec![2, 3, 0, 1]);
    }
}
