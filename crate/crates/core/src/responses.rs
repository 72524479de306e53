//! Viewer responses against per-episode network properties.
//!
//! Responses are normalized by their season mean; properties are reduced to a
//! per-episode vector; partial rank correlations are computed through the
//! inverse of the rank correlation matrix.

use std::collections::BTreeMap;
use std::io::Read;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::edge_diff;
use crate::error::{Error, Result};
use crate::graph::{EpisodeKey, EpisodeSeries};
use crate::metrics::degree_assortativity;
use crate::scalar::{mean, Real, Scalar};
use crate::stats::{correlation_p_value, invert, pearson, ranks};
use crate::triads::balance_summary;

pub const RESPONSE_HEADER: [&str; 4] = ["season", "episode", "votes", "rating"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseRecord<T> {
    pub key: EpisodeKey,
    pub votes: T,
    pub rating: T,
}

/// Per-episode responses in episode order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseSeries<T> {
    records: Vec<ResponseRecord<T>>,
}

impl<T: Scalar> ResponseSeries<T> {
    pub fn new(mut records: Vec<ResponseRecord<T>>) -> Result<Self> {
        records.sort_by_key(|r| r.key);
        if let Some(w) = records.windows(2).find(|w| w[0].key == w[1].key) {
            return Err(Error::Validation(format!("duplicate response for {}", w[0].key)));
        }
        Ok(ResponseSeries { records })
    }

    pub fn records(&self) -> &[ResponseRecord<T>] {
        &self.records
    }

    pub fn get(&self, key: EpisodeKey) -> Option<&ResponseRecord<T>> {
        self.records
            .binary_search_by_key(&key, |r| r.key)
            .ok()
            .map(|i| &self.records[i])
    }

    /// Fails unless the episode keys match `series` one to one.
    pub fn check_aligned(&self, series: &EpisodeSeries) -> Result<()> {
        let ours: Vec<EpisodeKey> = self.records.iter().map(|r| r.key).collect();
        let theirs: Vec<EpisodeKey> = series.keys().collect();
        if ours == theirs {
            return Ok(());
        }
        let missing: Vec<String> = theirs
            .iter()
            .filter(|k| self.get(**k).is_none())
            .map(|k| k.to_string())
            .collect();
        let extra: Vec<String> = ours
            .iter()
            .filter(|k| series.flat_index(**k).is_none())
            .map(|k| k.to_string())
            .collect();
        Err(Error::Validation(format!(
            "responses do not match the network episodes (no response for [{}]; no network for [{}])",
            missing.join(" "),
            extra.join(" ")
        )))
    }

    pub fn votes(&self) -> Vec<T> {
        self.records.iter().map(|r| r.votes).collect()
    }

    pub fn ratings(&self) -> Vec<T> {
        self.records.iter().map(|r| r.rating).collect()
    }
}

pub fn parse_responses(input: impl Read) -> Result<ResponseSeries<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut seen_header = false;
    let err = |line: u64, message: String| Error::Parse { line, message };
    loop {
        let more = reader
            .read_record(&mut record)
            .map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if !seen_header {
            if record.iter().map(str::trim).ne(RESPONSE_HEADER) {
                return Err(err(line, format!("expected header `{}`", RESPONSE_HEADER.join(","))));
            }
            seen_header = true;
            continue;
        }
        if record.len() != 4 {
            return Err(err(line, format!("expected 4 columns, found {}", record.len())));
        }
        let int = |i: usize, what: &str| {
            record[i]
                .trim()
                .parse::<u32>()
                .map_err(|_| err(line, format!("bad {what} `{}`", &record[i])))
        };
        let real = |i: usize, what: &str| {
            record[i]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line, format!("bad {what} `{}`", &record[i])))
        };
        let key = EpisodeKey::new(int(0, "season")?, int(1, "episode")?)
            .map_err(|e| err(line, e.to_string()))?;
        let votes = real(2, "votes")?;
        let rating = real(3, "rating")?;
        if votes <= 0.0 {
            return Err(err(line, format!("votes must be positive, got {votes}")));
        }
        if !(0.0..=10.0).contains(&rating) {
            return Err(err(line, format!("rating must lie in [0, 10], got {rating}")));
        }
        records.push(ResponseRecord { key, votes, rating });
    }
    ResponseSeries::new(records)
}

/// Divides votes and ratings by their season means.
pub fn season_normalize<T: Scalar>(series: &ResponseSeries<T>) -> Result<ResponseSeries<T>> {
    let mut by_season: BTreeMap<u32, (Vec<T>, Vec<T>)> = BTreeMap::new();
    for r in &series.records {
        let entry = by_season.entry(r.key.season).or_default();
        entry.0.push(r.votes);
        entry.1.push(r.rating);
    }
    let mut means = BTreeMap::new();
    for (season, (votes, ratings)) in by_season {
        let mv = mean(&votes).expect("season has records");
        let mr = mean(&ratings).expect("season has records");
        if mv.is_zero() {
            return Err(Error::ZeroSeasonMean(season, "votes"));
        }
        if mr.is_zero() {
            return Err(Error::ZeroSeasonMean(season, "rating"));
        }
        means.insert(season, (mv, mr));
    }
    Ok(ResponseSeries {
        records: series
            .records
            .iter()
            .map(|r| {
                let (mv, mr) = means[&r.key.season];
                ResponseRecord {
                    key: r.key,
                    votes: r.votes / mv,
                    rating: r.rating / mr,
                }
            })
            .collect(),
    })
}

/// `(x - min) / (max - min)`.
pub fn min_max_scale<T: Scalar>(values: &[T]) -> Result<Vec<T>> {
    let mut it = values.iter().copied();
    let first = it.next().ok_or(Error::DegenerateScale(0))?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), v| {
        (if v < lo { v } else { lo }, if v > hi { v } else { hi })
    });
    if !(hi > lo) {
        return Err(Error::DegenerateScale(values.len()));
    }
    let span = hi - lo;
    Ok(values.iter().map(|&v| (v - lo) / span).collect())
}

/// Min-max scaling that leaves missing entries missing.
pub fn min_max_scale_missing<T: Scalar>(values: &[Option<T>]) -> Result<Vec<Option<T>>> {
    let present: Vec<T> = values.iter().flatten().copied().collect();
    let scaled = min_max_scale(&present)?;
    let mut it = scaled.into_iter();
    Ok(values.iter().map(|v| v.and_then(|_| it.next())).collect())
}

fn complete_pairs<T: Real>(x: &[Option<T>], y: &[Option<T>]) -> Result<(Vec<T>, Vec<T>)> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "vectors differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let pairs: (Vec<T>, Vec<T>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .unzip();
    if pairs.0.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} complete pair(s), need at least 3",
            pairs.0.len()
        )));
    }
    Ok(pairs)
}

/// Spearman's rho with pairwise deletion of missing entries.
pub fn spearman<T: Real>(x: &[Option<T>], y: &[Option<T>]) -> Result<T> {
    let (xs, ys) = complete_pairs(x, y)?;
    pearson(&ranks(&xs), &ranks(&ys))
        .ok_or_else(|| Error::InsufficientData("a ranked vector has zero variance".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlMode {
    /// Each property against the response, controlling for all other properties.
    #[default]
    Simultaneous,
    /// Each property against the response with no controls.
    Pairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PValueMethod {
    /// Student t with `n - 2 - k` degrees of freedom.
    #[default]
    TApproximation,
    /// Two-sided permutation test shuffling the response ranks.
    Permutation { permutations: usize, seed: u64 },
}

impl PValueMethod {
    pub fn name(&self) -> &'static str {
        match self {
            PValueMethod::TApproximation => "t",
            PValueMethod::Permutation { .. } => "permutation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PartialOptions {
    pub controls: ControlMode,
    pub p_value: PValueMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialCorrelation<T> {
    pub property: String,
    /// `None` when undefined (see [`partial_spearman`]).
    pub coefficient: Option<T>,
    pub p_value: Option<T>,
    pub n_effective: usize,
}

/// Partial correlations of column 0 with every other column of a rank matrix
/// (`columns[var][row]`), from the inverse correlation matrix.
///
/// When column 0 is perfectly monotone in some column `j`, the coefficient for
/// `j` is `±1` and the others are undefined (`None`): nothing is left of
/// column 0 once `j` is controlled for.
fn partial_from_ranks<T: Real>(columns: &[Vec<T>], names: &[&str]) -> Result<Vec<Option<T>>> {
    let m = columns.len();
    let mut corr = vec![vec![T::one(); m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let r = pearson(&columns[i], &columns[j])
                .ok_or_else(|| Error::Collinear(names[i].to_owned(), names[j].to_owned()))?;
            corr[i][j] = r;
            corr[j][i] = r;
        }
    }
    let tol = T::from_f64_lossy(1e-10);
    let collinear = |from: usize| {
        let mut worst = (from, from + 1);
        for i in from..m {
            for j in (i + 1)..m {
                if corr[i][j].abs() > corr[worst.0][worst.1].abs() {
                    worst = (i, j);
                }
            }
        }
        Error::Collinear(names[worst.0].to_owned(), names[worst.1].to_owned())
    };
    if m > 2 {
        let controls: Vec<Vec<T>> = corr[1..].iter().map(|row| row[1..].to_vec()).collect();
        if invert(&controls, tol).is_none() {
            return Err(collinear(1));
        }
    }
    let perfect = T::one() - T::from_f64_lossy(1e-12);
    if (1..m).any(|j| corr[0][j].abs() >= perfect) {
        return Ok((1..m)
            .map(|j| (corr[0][j].abs() >= perfect).then(|| corr[0][j].signum()))
            .collect());
    }
    let precision = invert(&corr, tol).ok_or_else(|| collinear(0))?;
    Ok((1..m)
        .map(|j| {
            let r = -precision[0][j] / (precision[0][0] * precision[j][j]).sqrt();
            Some(r.max(-T::one()).min(T::one()))
        })
        .collect())
}

fn permutation_p<T: Real>(
    columns: &[Vec<T>],
    names: &[&str],
    observed: &[Option<T>],
    permutations: usize,
    seed: u64,
) -> Result<Vec<Option<T>>> {
    if permutations == 0 {
        return Err(Error::Config("permutation count must be positive".into()));
    }
    let exceed: Vec<Vec<bool>> = (0..permutations)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut cols = columns.to_vec();
            cols[0].shuffle(&mut rng);
            let tol = T::from_f64_lossy(1e-12);
            partial_from_ranks(&cols, names).map(|rs| {
                rs.iter()
                    .zip(observed)
                    .map(|(r, o)| match (r, o) {
                        (Some(r), Some(o)) => r.abs() >= o.abs() - tol,
                        _ => false,
                    })
                    .collect()
            })
        })
        .collect::<Result<_>>()?;
    let denom = T::from_count(permutations + 1);
    Ok((0..observed.len())
        .map(|j| {
            observed[j]?;
            Some(T::from_count(1 + exceed.iter().filter(|e| e[j]).count()) / denom)
        })
        .collect())
}

/// Partial Spearman correlation of `response` with each named property.
///
/// In simultaneous mode, rows with any missing value are dropped (listwise)
/// and each coefficient controls for every other property. In pairwise mode
/// each property is correlated with the response alone.
///
/// If the response is a perfectly monotone function of one property, that
/// property gets `±1` and the remaining coefficients are undefined.
pub fn partial_spearman<T: Real>(
    target: &str,
    response: &[Option<T>],
    properties: &[(String, Vec<Option<T>>)],
    options: &PartialOptions,
) -> Result<Vec<PartialCorrelation<T>>> {
    if properties.is_empty() {
        return Err(Error::InsufficientData("no properties given".into()));
    }
    if let Some((name, _)) = properties.iter().find(|(_, v)| v.len() != response.len()) {
        return Err(Error::Validation(format!(
            "property {name} has a different length from {target}"
        )));
    }
    match options.controls {
        ControlMode::Simultaneous => {
            let mut vars: Vec<&[Option<T>]> = vec![response];
            vars.extend(properties.iter().map(|(_, v)| v.as_slice()));
            let mut names: Vec<&str> = vec![target];
            names.extend(properties.iter().map(|(n, _)| n.as_str()));
            let rows: Vec<usize> = (0..response.len())
                .filter(|&i| vars.iter().all(|v| v[i].is_some_and(|x| !x.is_nan())))
                .collect();
            estimate(&vars, &names, &rows, &options.p_value)
        }
        ControlMode::Pairwise => properties
            .iter()
            .map(|(name, values)| {
                let vars = [response, values.as_slice()];
                let rows: Vec<usize> = (0..response.len())
                    .filter(|&i| vars.iter().all(|v| v[i].is_some_and(|x| !x.is_nan())))
                    .collect();
                estimate(&vars, &[target, name.as_str()], &rows, &options.p_value)
                    .map(|mut out| out.remove(0))
            })
            .collect(),
    }
}

fn estimate<T: Real>(
    vars: &[&[Option<T>]],
    names: &[&str],
    rows: &[usize],
    p_method: &PValueMethod,
) -> Result<Vec<PartialCorrelation<T>>> {
    let n = rows.len();
    let k = vars.len() - 2;
    if n < k + 3 {
        return Err(Error::InsufficientData(format!(
            "{n} complete row(s) for {} controls, need at least {}",
            k,
            k + 3
        )));
    }
    let columns: Vec<Vec<T>> = vars
        .iter()
        .map(|v| {
            let xs: Vec<T> = rows.iter().map(|&i| v[i].expect("complete row")).collect();
            ranks(&xs)
        })
        .collect();
    let coefficients = partial_from_ranks(&columns, names)?;
    let p_values = match *p_method {
        PValueMethod::TApproximation => coefficients
            .iter()
            .map(|r| {
                r.and_then(|r| correlation_p_value(r.to_f64_lossy(), n, k))
                    .map(T::from_f64_lossy)
            })
            .collect(),
        PValueMethod::Permutation { permutations, seed } => {
            permutation_p(&columns, names, &coefficients, permutations, seed)?
        }
    };
    Ok(names[1..]
        .iter()
        .zip(coefficients.into_iter().zip(p_values))
        .map(|(name, (coefficient, p_value))| PartialCorrelation {
            property: (*name).to_owned(),
            coefficient,
            p_value,
            n_effective: n,
        })
        .collect())
}

pub const PROPERTY_NAMES: [&str; 6] = [
    "node_count",
    "edge_count",
    "edge_change_count",
    "imbalanced_fraction",
    "triad_count",
    "assortativity_by_degree",
];

/// Per-episode network properties. Missing entries are `None`: the first
/// episode's change count, imbalanced fraction without triads, and undefined
/// assortativity.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyVector<T> {
    pub keys: Vec<EpisodeKey>,
    pub node_count: Vec<Option<T>>,
    pub edge_count: Vec<Option<T>>,
    pub edge_change_count: Vec<Option<T>>,
    pub imbalanced_fraction: Vec<Option<T>>,
    pub triad_count: Vec<Option<T>>,
    pub assortativity_by_degree: Vec<Option<T>>,
}

impl<T: Real> PropertyVector<T> {
    /// Columns in [`PROPERTY_NAMES`] order.
    pub fn columns(&self) -> Vec<(String, Vec<Option<T>>)> {
        [
            &self.node_count,
            &self.edge_count,
            &self.edge_change_count,
            &self.imbalanced_fraction,
            &self.triad_count,
            &self.assortativity_by_degree,
        ]
        .into_iter()
        .zip(PROPERTY_NAMES)
        .map(|(v, name)| (name.to_owned(), v.clone()))
        .collect()
    }
}

pub fn property_vector<T: Real>(series: &EpisodeSeries) -> PropertyVector<T> {
    let graphs = series.snapshots();
    let summaries: Vec<_> = graphs.iter().map(balance_summary).collect();
    let count = |n: usize| Some(T::from_count(n));
    PropertyVector {
        keys: series.keys().collect(),
        node_count: graphs.iter().map(|g| count(g.node_count())).collect(),
        edge_count: graphs.iter().map(|g| count(g.edge_count())).collect(),
        edge_change_count: std::iter::once(None)
            .chain(series.transitions().map(|(b, a)| count(edge_diff(b, a).len())))
            .take(graphs.len())
            .collect(),
        imbalanced_fraction: summaries.iter().map(|s| s.imbalanced_fraction()).collect(),
        triad_count: summaries.iter().map(|s| count(s.total())).collect(),
        assortativity_by_degree: graphs.iter().map(degree_assortativity).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseTarget {
    Votes,
    Rating,
}

impl ResponseTarget {
    pub fn name(self) -> &'static str {
        match self {
            ResponseTarget::Votes => "votes",
            ResponseTarget::Rating => "rating",
        }
    }
}

/// Season-normalizes `responses` and correlates the chosen target with the
/// network properties of `series`.
pub fn response_correlations<T: Real>(
    series: &EpisodeSeries,
    responses: &ResponseSeries<T>,
    target: ResponseTarget,
    options: &PartialOptions,
) -> Result<Vec<PartialCorrelation<T>>> {
    responses.check_aligned(series)?;
    let normalized = season_normalize(responses)?;
    let values: Vec<Option<T>> = match target {
        ResponseTarget::Votes => normalized.votes(),
        ResponseTarget::Rating => normalized.ratings(),
    }
    .into_iter()
    .map(Some)
    .collect();
    partial_spearman(target.name(), &values, &property_vector(series).columns(), options)
}
