//! Report files and the end-to-end pipeline.
//!
//! Every report is rendered in memory first, so a failing analysis writes
//! nothing. Files written by a run are listed with their SHA-256 in
//! `manifest.json`. Output bytes depend only on the inputs and the
//! configuration.
//!
//! | file                        | stage     | layout |
//! |-----------------------------|-----------|--------|
//! | `presence.csv`              | metrics   | `entity,S1E1,...` with `1`/`0` |
//! | `degree.csv`                | metrics   | `entity,S1E1,...`, empty cell = missing |
//! | `betweenness.csv`           | metrics   | as `degree.csv` |
//! | `correlations.json`         | metrics   | [`CorrelationReport`] |
//! | `assortativity.csv`         | metrics   | [`AssortativityRow`] |
//! | `balance.csv`               | triads    | [`BalanceRow`] |
//! | `edge_changes.csv`          | dynamics  | [`EdgeChangeRow`] |
//! | `imbalance_attribution.csv` | dynamics  | [`AttributionRow`] |
//! | `dynamics_summary.json`     | dynamics  | [`DynamicsSummary`] |
//! | `nullmodel.csv`             | nullmodel | [`NullModelRow`], seed in a `#` header row |
//! | `properties.csv`            | correlate | [`PropertyRow`] |
//! | `partial_correlation.csv`   | correlate | [`PartialCorrelationRow`] |
//!
//! Metric tables also carry a `# metric=...,missing=...` header row.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{attribution_table, change_statistics, ChangeCounts, TransitionMatrix};
use crate::error::{Error, Result};
use crate::graph::{presence_matrix, EntityId, EpisodeKey, EpisodeSeries, PresenceMatrix};
use crate::ingest::{parse_edge_list, EdgeListFormat, Ingested};
use crate::metrics::{
    betweenness_assortativity, correlate, degree_assortativity, metric_table, Axis,
    CorrelationMethod, CorrelationResult, Metric, MetricTable, MissingPolicy,
};
use crate::nullmodel::{expected_imbalance, ShuffleConfig, DEFAULT_REPLICATES};
use crate::responses::{
    min_max_scale_missing, parse_responses, property_vector, response_correlations,
    season_normalize, ControlMode, PValueMethod, PartialOptions, ResponseSeries, ResponseTarget,
    PROPERTY_NAMES,
};
use crate::triads::{balance_summary, per_entity_imbalance, Averaging};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Metrics,
    Triads,
    Dynamics,
    NullModel,
    Correlate,
    All,
}

impl Stage {
    fn includes(self, other: Stage) -> bool {
        self == Stage::All || self == other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_network_path: PathBuf,
    pub input_response_path: Option<PathBuf>,
    pub output_directory: PathBuf,
    pub seed: u64,
    pub replicates: usize,
    pub correlation_method: CorrelationMethod,
    pub missing_policy: MissingPolicy,
    pub averaging: Averaging,
    pub partial: PartialOptions,
    pub overwrite: bool,
    pub keep_partial: bool,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        RunConfig {
            input_network_path: input.into(),
            input_response_path: None,
            output_directory: output.into(),
            seed: 0,
            replicates: DEFAULT_REPLICATES,
            correlation_method: CorrelationMethod::default(),
            missing_policy: MissingPolicy::default(),
            averaging: Averaging::default(),
            partial: PartialOptions::default(),
            overwrite: false,
            keep_partial: false,
        }
    }
}

/// A rendered report: file name and exact bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub replicates: usize,
    pub files: Vec<ManifestEntry>,
}

fn in_file(path: &Path, err: Error) -> Error {
    match err {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        Error::Conflict { .. } | Error::Validation(_) => {
            Error::Validation(format!("{}: {err}", path.display()))
        }
        other => other,
    }
}

pub fn load_network(path: &Path) -> Result<Ingested> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(std::io::BufReader::new(file), EdgeListFormat::from_path(path))
        .map_err(|e| in_file(path, e))
}

pub fn load_responses(path: &Path) -> Result<ResponseSeries<f64>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_responses(std::io::BufReader::new(file)).map_err(|e| in_file(path, e))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish_csv(name: &str, header: Option<String>, writer: csv::Writer<Vec<u8>>) -> Result<ReportFile> {
    let body = writer
        .into_inner()
        .map_err(|e| Error::io(name, std::io::Error::other(e.to_string())))?;
    let mut bytes = header.map(|h| format!("# {h}\n").into_bytes()).unwrap_or_default();
    bytes.extend(body);
    Ok(ReportFile {
        name: name.to_owned(),
        bytes,
    })
}

fn csv_err(name: &str) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::io(name, std::io::Error::other(e.to_string()))
}

/// CSV report from serializable rows, with an optional `#` header row.
pub fn write_rows<R: Serialize>(name: &str, header: Option<String>, rows: &[R]) -> Result<ReportFile> {
    let mut w = csv_writer();
    for row in rows {
        w.serialize(row).map_err(csv_err(name))?;
    }
    finish_csv(name, header, w)
}

/// Pretty-printed JSON report with a trailing newline.
pub fn write_json<V: Serialize>(name: &str, value: &V) -> Result<ReportFile> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| Error::Json {
        context: name.to_owned(),
        source,
    })?;
    bytes.push(b'\n');
    Ok(ReportFile {
        name: name.to_owned(),
        bytes,
    })
}

/// Reads rows of a CSV report, skipping `#` header rows.
pub fn read_rows<R: DeserializeOwned>(bytes: &[u8]) -> Result<Vec<R>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(bytes)
        .deserialize()
        .map(|r| {
            r.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_json<V: DeserializeOwned>(bytes: &[u8]) -> Result<V> {
    serde_json::from_slice(bytes).map_err(|source| Error::Json {
        context: "report".into(),
        source,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn missing_name(policy: MissingPolicy) -> &'static str {
    match policy {
        MissingPolicy::ZeroFill => "zero_fill",
        MissingPolicy::MarkMissing => "mark_missing",
    }
}

/// Entity-by-episode CSV for a metric table.
pub fn metric_table_csv(name: &str, table: &MetricTable<f64>) -> Result<ReportFile> {
    let mut w = csv_writer();
    let header: Vec<String> = std::iter::once("entity".to_owned())
        .chain(table.episodes.iter().map(|k| k.label()))
        .collect();
    w.write_record(&header).map_err(csv_err(name))?;
    for (entity, row) in table.entities.iter().zip(&table.values) {
        let record: Vec<String> = std::iter::once(entity.to_string())
            .chain(row.iter().map(|v| fmt_opt(*v)))
            .collect();
        w.write_record(&record).map_err(csv_err(name))?;
    }
    finish_csv(
        name,
        Some(format!(
            "metric={},missing={}",
            table.metric_name,
            missing_name(table.missing_policy)
        )),
        w,
    )
}

fn read_grid(bytes: &[u8]) -> Result<(Vec<String>, Vec<EpisodeKey>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(bytes);
    let parse = |e: csv::Error| Error::Parse {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    };
    let headers = reader.headers().map_err(parse)?.clone();
    let episodes = headers
        .iter()
        .skip(1)
        .map(|h| {
            EpisodeKey::parse_label(h).ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("bad episode column `{h}`"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut labels = Vec::new();
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record.map_err(parse)?;
        labels.push(record[0].to_owned());
        cells.push(record.iter().skip(1).map(str::to_owned).collect());
    }
    Ok((labels, episodes, cells))
}

pub fn read_metric_table_csv(bytes: &[u8]) -> Result<MetricTable<f64>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let meta: BTreeMap<&str, &str> = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .map(|l| l.split(',').filter_map(|kv| kv.split_once('=')).collect())
        .unwrap_or_default();
    let (labels, episodes, cells) = read_grid(bytes)?;
    let values = cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>().map(Some).map_err(|e| Error::Parse {
                            line: 0,
                            message: e.to_string(),
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricTable {
        metric_name: meta.get("metric").unwrap_or(&"").to_string(),
        entities: labels.iter().map(|l| EntityId::new(l)).collect::<Result<_>>()?,
        episodes,
        values,
        missing_policy: meta
            .get("missing")
            .and_then(|m| m.parse().ok())
            .unwrap_or_default(),
    })
}

pub fn presence_csv(name: &str, matrix: &PresenceMatrix) -> Result<ReportFile> {
    let mut w = csv_writer();
    let header: Vec<String> = std::iter::once("entity".to_owned())
        .chain(matrix.episodes.iter().map(|k| k.label()))
        .collect();
    w.write_record(&header).map_err(csv_err(name))?;
    for (entity, row) in matrix.entities.iter().zip(&matrix.present) {
        let record: Vec<String> = std::iter::once(entity.to_string())
            .chain(row.iter().map(|&p| if p { "1" } else { "0" }.to_owned()))
            .collect();
        w.write_record(&record).map_err(csv_err(name))?;
    }
    finish_csv(name, None, w)
}

pub fn read_presence_csv(bytes: &[u8]) -> Result<PresenceMatrix> {
    let (labels, episodes, cells) = read_grid(bytes)?;
    let present = cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| match c.as_str() {
                    "1" => Ok(true),
                    "0" => Ok(false),
                    other => Err(Error::Parse {
                        line: 0,
                        message: format!("bad presence cell `{other}`"),
                    }),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PresenceMatrix {
        entities: labels.iter().map(|l| EntityId::new(l)).collect::<Result<_>>()?,
        episodes,
        present,
    })
}

/// Square correlation matrix as CSV with a leading label column.
pub fn correlation_csv(name: &str, result: &CorrelationResult<f64>) -> Result<ReportFile> {
    let mut w = csv_writer();
    let header: Vec<&str> = std::iter::once("label")
        .chain(result.labels.iter().map(String::as_str))
        .collect();
    w.write_record(&header).map_err(csv_err(name))?;
    for (label, row) in result.labels.iter().zip(&result.matrix) {
        let record: Vec<String> = std::iter::once(label.clone())
            .chain(row.iter().map(|v| fmt_opt(*v)))
            .collect();
        w.write_record(&record).map_err(csv_err(name))?;
    }
    finish_csv(name, None, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub metric: String,
    pub axis: String,
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<Option<f64>>>,
    pub leaf_order: Vec<usize>,
    /// Set instead of the matrix when the correlation could not be computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub method: String,
    pub missing_policy: String,
    pub correlations: Vec<CorrelationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssortativityRow {
    pub season: u32,
    pub episode: u32,
    pub by_degree: Option<f64>,
    pub by_betweenness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceRow {
    pub season: u32,
    pub episode: u32,
    pub type1: usize,
    pub type2: usize,
    pub type3: usize,
    pub type4: usize,
    pub imbalanced: usize,
    pub fraction: Option<f64>,
}

/// Change counts against the previous episode (empty on the first row) and
/// the unpredictability score of the episode itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeChangeRow {
    pub season: u32,
    pub episode: u32,
    pub establishment: Option<usize>,
    pub flipping: Option<usize>,
    pub disruption: Option<usize>,
    pub disruption_eliminated: Option<usize>,
    #[serde(rename = "U")]
    pub unpredictability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRow {
    /// e.g. `+>-`; `0` marks an absent edge.
    pub signature: String,
    pub changes: usize,
    pub increase: u64,
    pub decrease: u64,
    pub net: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeSummary {
    pub totals: ChangeTotals,
    pub establishment_share: Option<f64>,
    pub flipping_share: Option<f64>,
    pub disruption_share: Option<f64>,
    pub establishment_existing_share: Option<f64>,
    pub disruption_eliminated_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeTotals {
    pub establishment: usize,
    pub establishment_new_entity: usize,
    pub flipping: usize,
    pub disruption: usize,
    pub disruption_eliminated: usize,
}

impl From<ChangeCounts> for ChangeTotals {
    fn from(c: ChangeCounts) -> Self {
        ChangeTotals {
            establishment: c.establishment,
            establishment_new_entity: c.establishment_new_entity,
            flipping: c.flipping,
            disruption: c.disruption,
            disruption_eliminated: c.disruption_eliminated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Type3Involvement {
    pub formation: Option<f64>,
    pub state_change: Option<f64>,
    pub disappearance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsSummary {
    pub changes: ChangeSummary,
    /// `from -> to -> count`, states `Absent` and `Type1`..`Type4`.
    pub triad_transitions: BTreeMap<String, BTreeMap<String, usize>>,
    pub type3_involvement: Type3Involvement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullModelRow {
    pub entity: String,
    pub observed_mean: f64,
    pub null_mean: f64,
    pub null_sd: f64,
    pub replicates: usize,
    pub seed: u64,
}

/// Season-normalized responses and min-max scaled properties. A property
/// with a single distinct value is left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyRow {
    pub season: u32,
    pub episode: u32,
    pub votes: f64,
    pub rating: f64,
    pub node_count: Option<f64>,
    pub edge_count: Option<f64>,
    pub edge_change_count: Option<f64>,
    pub imbalanced_fraction: Option<f64>,
    pub triad_count: Option<f64>,
    pub assortativity_by_degree: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialCorrelationRow {
    pub property: String,
    pub target: String,
    pub coefficient: Option<f64>,
    pub p_value: Option<f64>,
    pub n_effective: usize,
    pub method: String,
}

fn metrics_reports(series: &EpisodeSeries, config: &RunConfig) -> Result<Vec<ReportFile>> {
    let degree = metric_table::<f64>(series, Metric::Degree, config.missing_policy);
    let betweenness = metric_table::<f64>(series, Metric::Betweenness, config.missing_policy);
    let mut correlations = Vec::new();
    for table in [&degree, &betweenness] {
        for axis in [Axis::ByEntity, Axis::ByEpisode] {
            let entry = match correlate(table, axis, config.correlation_method) {
                Ok(r) => CorrelationEntry {
                    metric: table.metric_name.clone(),
                    axis: axis.name().to_owned(),
                    labels: r.labels,
                    matrix: r.matrix,
                    leaf_order: r.leaf_order,
                    error: None,
                },
                Err(e @ Error::InsufficientData(_)) => CorrelationEntry {
                    metric: table.metric_name.clone(),
                    axis: axis.name().to_owned(),
                    labels: Vec::new(),
                    matrix: Vec::new(),
                    leaf_order: Vec::new(),
                    error: Some(e.to_string()),
                },
                Err(e) => return Err(e),
            };
            correlations.push(entry);
        }
    }
    let assortativity: Vec<AssortativityRow> = series
        .snapshots()
        .iter()
        .map(|g| AssortativityRow {
            season: g.key().season,
            episode: g.key().episode,
            by_degree: degree_assortativity(g),
            by_betweenness: betweenness_assortativity(g),
        })
        .collect();
    Ok(vec![
        presence_csv("presence.csv", &presence_matrix(series))?,
        metric_table_csv("degree.csv", &degree)?,
        metric_table_csv("betweenness.csv", &betweenness)?,
        write_json(
            "correlations.json",
            &CorrelationReport {
                method: config.correlation_method.name().to_owned(),
                missing_policy: missing_name(config.missing_policy).to_owned(),
                correlations,
            },
        )?,
        write_rows("assortativity.csv", None, &assortativity)?,
    ])
}

fn triads_reports(series: &EpisodeSeries) -> Result<Vec<ReportFile>> {
    let rows: Vec<BalanceRow> = series
        .snapshots()
        .iter()
        .map(|g| {
            let s = balance_summary(g);
            BalanceRow {
                season: s.key.season,
                episode: s.key.episode,
                type1: s.counts[0],
                type2: s.counts[1],
                type3: s.counts[2],
                type4: s.counts[3],
                imbalanced: s.imbalanced_count(),
                fraction: s.imbalanced_fraction(),
            }
        })
        .collect();
    Ok(vec![write_rows("balance.csv", None, &rows)?])
}

fn dynamics_reports(series: &EpisodeSeries) -> Result<Vec<ReportFile>> {
    let stats = change_statistics(series);
    let by_key: BTreeMap<EpisodeKey, ChangeCounts> = stats.per_episode.iter().copied().collect();
    let change_rows: Vec<EdgeChangeRow> = series
        .snapshots()
        .iter()
        .map(|g| {
            let c = by_key.get(&g.key());
            EdgeChangeRow {
                season: g.key().season,
                episode: g.key().episode,
                establishment: c.map(|c| c.establishment),
                flipping: c.map(|c| c.flipping),
                disruption: c.map(|c| c.disruption),
                disruption_eliminated: c.map(|c| c.disruption_eliminated),
                unpredictability: balance_summary(g).unpredictability(),
            }
        })
        .collect();

    let attribution: Vec<AttributionRow> = attribution_table(series)
        .into_iter()
        .map(|(sig, t)| AttributionRow {
            signature: sig.to_string(),
            changes: t.changes,
            increase: t.increase,
            decrease: t.decrease,
            net: t.increase as i64 - t.decrease as i64,
        })
        .collect();

    let matrix = TransitionMatrix::from_series(series);
    let labels = TransitionMatrix::STATE_LABELS;
    let triad_transitions = labels
        .iter()
        .enumerate()
        .map(|(i, from)| {
            let row = labels
                .iter()
                .enumerate()
                .map(|(j, to)| (to.to_string(), matrix.counts[i][j]))
                .collect();
            (from.to_string(), row)
        })
        .collect();
    let summary = DynamicsSummary {
        changes: ChangeSummary {
            totals: stats.totals.into(),
            establishment_share: stats.establishment_share(),
            flipping_share: stats.flipping_share(),
            disruption_share: stats.disruption_share(),
            establishment_existing_share: stats.establishment_existing_share(),
            disruption_eliminated_share: stats.disruption_eliminated_share(),
        },
        triad_transitions,
        type3_involvement: Type3Involvement {
            formation: matrix.type3_formation_share(),
            state_change: matrix.type3_state_change_share(),
            disappearance: matrix.type3_disappearance_share(),
        },
    };

    Ok(vec![
        write_rows("edge_changes.csv", None, &change_rows)?,
        write_rows("imbalance_attribution.csv", None, &attribution)?,
        write_json("dynamics_summary.json", &summary)?,
    ])
}

fn averaging_name(a: Averaging) -> &'static str {
    match a {
        Averaging::PresenceEpisodes => "presence",
        Averaging::AllEpisodes => "all",
    }
}

fn nullmodel_reports(series: &EpisodeSeries, config: &RunConfig) -> Result<Vec<ReportFile>> {
    let shuffle = ShuffleConfig {
        replicates: config.replicates,
        seed: config.seed,
        averaging: config.averaging,
    };
    let null = expected_imbalance::<f64>(series, &shuffle)?;
    let observed = per_entity_imbalance::<f64>(series, config.averaging);
    let rows: Vec<NullModelRow> = null
        .iter()
        .map(|(entity, d)| NullModelRow {
            entity: entity.to_string(),
            observed_mean: observed[entity],
            null_mean: d.mean,
            null_sd: d.sd,
            replicates: config.replicates,
            seed: config.seed,
        })
        .collect();
    let header = format!(
        "seed={},replicates={},averaging={},rng=chacha8",
        config.seed,
        config.replicates,
        averaging_name(config.averaging)
    );
    Ok(vec![write_rows("nullmodel.csv", Some(header), &rows)?])
}

fn correlate_reports(
    series: &EpisodeSeries,
    responses: &ResponseSeries<f64>,
    config: &RunConfig,
) -> Result<Vec<ReportFile>> {
    responses.check_aligned(series)?;
    let normalized = season_normalize(responses)?;
    let properties = property_vector::<f64>(series).columns();
    let scaled: Vec<Vec<Option<f64>>> = properties
        .iter()
        .map(|(_, v)| match min_max_scale_missing(v) {
            Ok(s) => Ok(s),
            Err(Error::DegenerateScale(_)) => Ok(vec![None; v.len()]),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let property_rows: Vec<PropertyRow> = normalized
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| PropertyRow {
            season: r.key.season,
            episode: r.key.episode,
            votes: r.votes,
            rating: r.rating,
            node_count: scaled[0][i],
            edge_count: scaled[1][i],
            edge_change_count: scaled[2][i],
            imbalanced_fraction: scaled[3][i],
            triad_count: scaled[4][i],
            assortativity_by_degree: scaled[5][i],
        })
        .collect();

    let method = format!(
        "{}_{}",
        match config.partial.controls {
            ControlMode::Simultaneous => "partial_spearman",
            ControlMode::Pairwise => "spearman",
        },
        config.partial.p_value.name()
    );
    let mut rows = Vec::new();
    for target in [ResponseTarget::Votes, ResponseTarget::Rating] {
        for pc in response_correlations(series, responses, target, &config.partial)? {
            rows.push(PartialCorrelationRow {
                property: pc.property,
                target: target.name().to_owned(),
                coefficient: pc.coefficient,
                p_value: pc.p_value,
                n_effective: pc.n_effective,
                method: method.clone(),
            });
        }
    }
    let header = match config.partial.p_value {
        PValueMethod::Permutation { permutations, seed } => {
            Some(format!("seed={seed},permutations={permutations},rng=chacha8"))
        }
        PValueMethod::TApproximation => None,
    };
    debug_assert_eq!(PROPERTY_NAMES.len(), scaled.len());
    Ok(vec![
        write_rows("properties.csv", None, &property_rows)?,
        write_rows("partial_correlation.csv", header, &rows)?,
    ])
}

/// Renders the reports of `stage` in memory. Response-based reports are
/// produced only when `responses` is given.
pub fn render_reports(
    series: &EpisodeSeries,
    responses: Option<&ResponseSeries<f64>>,
    config: &RunConfig,
    stage: Stage,
) -> Result<Vec<ReportFile>> {
    if series.is_empty() {
        return Err(Error::Validation("the network contains no episodes".into()));
    }
    let mut files = Vec::new();
    if stage.includes(Stage::Metrics) {
        files.extend(metrics_reports(series, config)?);
    }
    if stage.includes(Stage::Triads) {
        files.extend(triads_reports(series)?);
    }
    if stage.includes(Stage::Dynamics) {
        files.extend(dynamics_reports(series)?);
    }
    if stage.includes(Stage::NullModel) {
        files.extend(nullmodel_reports(series, config)?);
    }
    if stage.includes(Stage::Correlate) {
        match responses {
            Some(r) => files.extend(correlate_reports(series, r, config)?),
            None if stage == Stage::Correlate => {
                return Err(Error::Config("the correlate stage needs a response file".into()))
            }
            None => {}
        }
    }
    Ok(files)
}

pub fn manifest(files: &[ReportFile], config: &RunConfig) -> Manifest {
    Manifest {
        seed: config.seed,
        replicates: config.replicates,
        files: files
            .iter()
            .map(|f| ManifestEntry {
                name: f.name.clone(),
                sha256: hex::encode(Sha256::digest(&f.bytes)),
                bytes: f.bytes.len(),
            })
            .collect(),
    }
}

/// Writes `files` plus the manifest into `dir`. Existing files are replaced
/// only with `overwrite`; on a write failure, files from this call are removed
/// unless `keep_partial`.
pub fn write_reports(
    dir: &Path,
    files: &[ReportFile],
    manifest: &Manifest,
    overwrite: bool,
    keep_partial: bool,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest_file = write_json(MANIFEST_FILE, manifest)?;
    let all: Vec<&ReportFile> = files.iter().chain(std::iter::once(&manifest_file)).collect();
    if !overwrite {
        if let Some(existing) = all.iter().map(|f| dir.join(&f.name)).find(|p| p.exists()) {
            return Err(Error::io(
                existing,
                std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    "file exists (use overwrite to replace it)",
                ),
            ));
        }
    }
    let mut written: Vec<PathBuf> = Vec::new();
    for file in all {
        let path = dir.join(&file.name);
        let result = fs::File::create(&path).and_then(|mut f| f.write_all(&file.bytes));
        if let Err(e) = result {
            if !keep_partial {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                let _ = fs::remove_file(&path);
            }
            return Err(Error::io(path, e));
        }
        written.push(path);
    }
    Ok(())
}

/// Loads the inputs named in `config`, renders `stage` and writes the reports.
pub fn run_pipeline(config: &RunConfig, stage: Stage) -> Result<Manifest> {
    let network = load_network(&config.input_network_path)?;
    let responses = config
        .input_response_path
        .as_deref()
        .map(load_responses)
        .transpose()?;
    let files = render_reports(&network.series, responses.as_ref(), config, stage)?;
    let manifest = manifest(&files, config);
    write_reports(
        &config.output_directory,
        &files,
        &manifest,
        config.overwrite,
        config.keep_partial,
    )?;
    Ok(manifest)
}
