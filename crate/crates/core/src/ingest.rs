//! Edge-list ingestion and canonical serialization.
//!
//! CSV layout (UTF-8, header required when any rows are present):
//!
//! ```text
//! season,episode,source,target,sign
//! 1,1,Alder,Birch,+
//! 1,1,Night's Watch,,
//! ```
//!
//! `sign` is one of `+`, `-`, `+1`, `-1`. A row with empty `target` and empty
//! `sign` declares a node with no edges in that episode.
//!
//! JSON layout: an array of `{season, episode, nodes: [...], edges: [{source,
//! target, sign}]}` with `sign` in `{1, -1}`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EntityId, EpisodeKey, EpisodeSeries, Pair, Sign, SignedEdge, SignedGraph};

pub const CSV_HEADER: [&str; 5] = ["season", "episode", "source", "target", "sign"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    Csv,
    Json,
}

impl FromStr for EdgeListFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(EdgeListFormat::Csv),
            "json" => Ok(EdgeListFormat::Json),
            other => Err(format!("unknown edge-list format `{other}`")),
        }
    }
}

impl EdgeListFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => EdgeListFormat::Json,
            _ => EdgeListFormat::Csv,
        }
    }
}

/// A repeated row that agreed with an earlier one and was dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestWarning {
    /// CSV line number, or 1-based snapshot ordinal for JSON input.
    pub line: u64,
    pub episode: EpisodeKey,
    pub pair: Pair,
}

impl std::fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "line {}: duplicate edge {} in {} dropped",
            self.line, self.pair, self.episode
        )
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub series: EpisodeSeries,
    pub warnings: Vec<IngestWarning>,
}

#[derive(Default)]
struct SnapshotBuilder {
    nodes: BTreeSet<EntityId>,
    edges: BTreeMap<Pair, Sign>,
}

impl SnapshotBuilder {
    fn add_edge(
        &mut self,
        line: u64,
        key: EpisodeKey,
        a: EntityId,
        b: EntityId,
        sign: Sign,
        warnings: &mut Vec<IngestWarning>,
    ) -> Result<()> {
        let pair = Pair::new(a, b).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        self.nodes.insert(pair.first().clone());
        self.nodes.insert(pair.second().clone());
        match self.edges.get(&pair) {
            Some(&existing) if existing != sign => Err(Error::Conflict {
                line,
                episode: key,
                first: pair.first().to_string(),
                second: pair.second().to_string(),
            }),
            Some(_) => {
                warnings.push(IngestWarning {
                    line,
                    episode: key,
                    pair,
                });
                Ok(())
            }
            None => {
                self.edges.insert(pair, sign);
                Ok(())
            }
        }
    }

    fn build(self, key: EpisodeKey) -> Result<SignedGraph> {
        SignedGraph::new(
            key,
            self.nodes,
            self.edges
                .into_iter()
                .map(|(pair, sign)| SignedEdge { pair, sign }),
        )
    }
}

fn finish(builders: BTreeMap<EpisodeKey, SnapshotBuilder>) -> Result<EpisodeSeries> {
    let snapshots = builders
        .into_iter()
        .map(|(key, b)| b.build(key))
        .collect::<Result<Vec<_>>>()?;
    EpisodeSeries::new(snapshots)
}

pub fn parse_edge_list(input: impl Read, format: EdgeListFormat) -> Result<Ingested> {
    match format {
        EdgeListFormat::Csv => parse_csv(input),
        EdgeListFormat::Json => parse_json(input),
    }
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_positive(field: &str, what: &str, line: u64) -> Result<u32> {
    match field.trim().parse::<u32>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(parse_error(
            line,
            format!("{what} must be a positive integer, got `{field}`"),
        )),
    }
}

fn parse_csv(input: impl Read) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut builders: BTreeMap<EpisodeKey, SnapshotBuilder> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut seen_header = false;

    loop {
        let more = reader.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if !seen_header {
            let header: Vec<&str> = record.iter().map(str::trim).collect();
            if header != CSV_HEADER {
                return Err(parse_error(
                    line,
                    format!("expected header `{}`", CSV_HEADER.join(",")),
                ));
            }
            seen_header = true;
            continue;
        }
        if record.len() != CSV_HEADER.len() {
            return Err(parse_error(
                line,
                format!("expected 5 columns, found {}", record.len()),
            ));
        }
        let season = parse_positive(&record[0], "season", line)?;
        let episode = parse_positive(&record[1], "episode", line)?;
        let key = EpisodeKey { season, episode };
        let source =
            EntityId::new(&record[2]).map_err(|_| parse_error(line, "empty source entity"))?;
        let (target, sign) = (record[3].trim(), record[4].trim());
        let builder = builders.entry(key).or_default();
        match (target.is_empty(), sign.is_empty()) {
            (true, true) => {
                builder.nodes.insert(source);
            }
            (false, false) => {
                let sign: Sign = sign.parse().map_err(|m: String| parse_error(line, m))?;
                let target = EntityId::new(target).map_err(|e| parse_error(line, e.to_string()))?;
                builder.add_edge(line, key, source, target, sign, &mut warnings)?;
            }
            (true, false) => return Err(parse_error(line, "sign given without a target")),
            (false, true) => return Err(parse_error(line, "target given without a sign")),
        }
    }

    Ok(Ingested {
        series: finish(builders)?,
        warnings,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonSnapshot {
    season: u32,
    episode: u32,
    #[serde(default)]
    nodes: Vec<String>,
    #[serde(default)]
    edges: Vec<JsonEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonEdge {
    source: String,
    target: String,
    sign: i64,
}

fn parse_json(mut input: impl Read) -> Result<Ingested> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| parse_error(0, e.to_string()))?;
    if text.trim().is_empty() {
        return Ok(Ingested {
            series: EpisodeSeries::default(),
            warnings: Vec::new(),
        });
    }
    let records: Vec<JsonSnapshot> = serde_json::from_str(&text)
        .map_err(|e| parse_error(e.line() as u64, e.to_string()))?;

    let mut builders: BTreeMap<EpisodeKey, SnapshotBuilder> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (ordinal, snap) in records.into_iter().enumerate() {
        let line = ordinal as u64 + 1;
        let key = EpisodeKey::new(snap.season, snap.episode)
            .map_err(|e| parse_error(line, e.to_string()))?;
        if builders.contains_key(&key) {
            return Err(Error::Validation(format!("duplicate episode key {key}")));
        }
        let mut builder = SnapshotBuilder::default();
        for name in &snap.nodes {
            let node = EntityId::new(name).map_err(|e| parse_error(line, e.to_string()))?;
            builder.nodes.insert(node);
        }
        for edge in snap.edges {
            let sign = Sign::from_value(edge.sign)
                .ok_or_else(|| parse_error(line, format!("unknown sign value {}", edge.sign)))?;
            let a = EntityId::new(&edge.source).map_err(|e| parse_error(line, e.to_string()))?;
            let b = EntityId::new(&edge.target).map_err(|e| parse_error(line, e.to_string()))?;
            builder.add_edge(line, key, a, b, sign, &mut warnings)?;
        }
        builders.insert(key, builder);
    }
    Ok(Ingested {
        series: finish(builders)?,
        warnings,
    })
}

/// Writes `series` in canonical order: snapshots by key; in CSV, node-only rows
/// for isolated entities first, then edges by pair.
pub fn write_edge_list(
    series: &EpisodeSeries,
    format: EdgeListFormat,
    out: impl Write,
) -> Result<()> {
    match format {
        EdgeListFormat::Csv => write_csv(series, out),
        EdgeListFormat::Json => write_json(series, out),
    }
}

fn write_csv(series: &EpisodeSeries, out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("<edge list>", e.into());
    writer.write_record(CSV_HEADER).map_err(io)?;
    for graph in series.snapshots() {
        let key = graph.key();
        let (season, episode) = (key.season.to_string(), key.episode.to_string());
        let linked: BTreeSet<&EntityId> = graph
            .edge_map()
            .keys()
            .flat_map(|p| [p.first(), p.second()])
            .collect();
        for node in graph.nodes().iter().filter(|n| !linked.contains(n)) {
            writer
                .write_record([season.as_str(), episode.as_str(), node.as_str(), "", ""])
                .map_err(io)?;
        }
        for (pair, sign) in graph.edge_map() {
            let sign = sign.symbol().to_string();
            writer
                .write_record([
                    season.as_str(),
                    episode.as_str(),
                    pair.first().as_str(),
                    pair.second().as_str(),
                    sign.as_str(),
                ])
                .map_err(io)?;
        }
    }
    writer
        .flush()
        .map_err(|e| Error::io("<edge list>", e))
}

fn write_json(series: &EpisodeSeries, mut out: impl Write) -> Result<()> {
    let records: Vec<JsonSnapshot> = series
        .snapshots()
        .iter()
        .map(|g| JsonSnapshot {
            season: g.key().season,
            episode: g.key().episode,
            nodes: g.nodes().iter().map(|n| n.to_string()).collect(),
            edges: g
                .edge_map()
                .iter()
                .map(|(pair, sign)| JsonEdge {
                    source: pair.first().to_string(),
                    target: pair.second().to_string(),
                    sign: i64::from(sign.value()),
                })
                .collect(),
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &records).map_err(|source| Error::Json {
        context: "edge list".into(),
        source,
    })?;
    out.write_all(b"\n").map_err(|e| Error::io("<edge list>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Result<Ingested> {
        parse_edge_list(text.as_bytes(), EdgeListFormat::Csv)
    }

    #[test]
    fn two_rows_one_snapshot() {
        let got = csv("season,episode,source,target,sign\n1,1,Alder,Birch,+\n1,1,Alder,Cedar_East,-\n")
            .unwrap();
        assert_eq!(got.series.len(), 1);
        let g = got.series.episode_graph(1, 1).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        assert!(got.warnings.is_empty());
    }

    #[test]
    fn empty_input_gives_empty_series() {
        assert!(csv("").unwrap().series.is_empty());
        assert!(csv("season,episode,source,target,sign\n").unwrap().series.is_empty());
        assert!(parse_edge_list(&b""[..], EdgeListFormat::Json).unwrap().series.is_empty());
    }

    #[test]
    fn conflicting_duplicate_is_rejected_at_second_row() {
        let err = csv("season,episode,source,target,sign\n1,1,A,B,+\n1,1,B,A,-\n").unwrap_err();
        assert!(matches!(err, Error::Conflict { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn agreeing_duplicate_is_deduplicated_with_warning() {
        let got = csv("season,episode,source,target,sign\n1,1,A,B,+1\n1,1,B,A,+\n").unwrap();
        assert_eq!(got.series.episode_graph(1, 1).unwrap().edge_count(), 1);
        assert_eq!(got.warnings.len(), 1);
        assert_eq!(got.warnings[0].line, 3);
    }

    #[test]
    fn node_rows_make_isolated_nodes() {
        let got = csv("season,episode,source,target,sign\n1,1,A,B,-\n1,1, Night's Watch ,,\n").unwrap();
        let g = got.series.episode_graph(1, 1).unwrap();
        assert!(g.contains_node(&EntityId::new("Night's Watch").unwrap()));
        assert_eq!(g.node_count(), 3);
    }

    #[test]
    fn malformed_rows_carry_line_numbers() {
        let h = "season,episode,source,target,sign\n";
        for (body, line) in [
            ("1,1,A,B\n", 2),
            ("1,1,A,B,+\n1,1,A,C,x\n", 3),
            ("1,1,,B,+\n", 2),
            ("1,1,A,B,\n", 2),
            ("1,1,A,,+\n", 2),
            ("0,1,A,B,+\n", 2),
            ("1,1,A,A,+\n", 2),
        ] {
            match csv(&format!("{h}{body}")) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{body}"),
                other => panic!("{body}: {other:?}"),
            }
        }
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(
            csv("s,e,a,b,c\n1,1,A,B,+\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn json_round_trip_and_sign_check() {
        let text = r#"[{"season":1,"episode":2,"nodes":["C"],"edges":[{"source":"B","target":"A","sign":-1}]}]"#;
        let got = parse_edge_list(text.as_bytes(), EdgeListFormat::Json).unwrap();
        let g = got.series.episode_graph(1, 2).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 1));

        let mut buf = Vec::new();
        write_edge_list(&got.series, EdgeListFormat::Json, &mut buf).unwrap();
        let again = parse_edge_list(&buf[..], EdgeListFormat::Json).unwrap();
        assert_eq!(again.series, got.series);

        let bad = r#"[{"season":1,"episode":1,"edges":[{"source":"A","target":"B","sign":0}]}]"#;
        assert!(matches!(
            parse_edge_list(bad.as_bytes(), EdgeListFormat::Json),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn canonical_csv_output() {
        let got = csv("season,episode,source,target,sign\n2,1,Z,Y,-\n1,1,B,A,+\n1,1,Q,,\n").unwrap();
        let mut buf = Vec::new();
        write_edge_list(&got.series, EdgeListFormat::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "season,episode,source,target,sign\n1,1,Q,,\n1,1,A,B,+\n2,1,Y,Z,-\n"
        );
    }
}
