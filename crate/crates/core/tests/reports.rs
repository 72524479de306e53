use signed_balance::report::{
    manifest, metric_table_csv, presence_csv, read_json, read_metric_table_csv, read_presence_csv,
    read_rows, render_reports, write_json, write_rows, AssortativityRow, AttributionRow, BalanceRow,
    CorrelationReport, DynamicsSummary, EdgeChangeRow, NullModelRow, PartialCorrelationRow,
    PropertyRow, ReportFile, RunConfig, Stage,
};
use signed_balance::responses::{PValueMethod, PartialOptions};
use signed_balance::synthetic::{self, SyntheticConfig};
use signed_balance::triads::balance_summary;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn render() -> Vec<ReportFile> {
    let cfg = SyntheticConfig { seasons: 3, episodes_per_season: 6, entities: 14, density: 0.3, ..Default::default() };
    let series = synthetic::series(&cfg).unwrap();
    let responses = synthetic::responses(&series, 4).unwrap();
    let mut config = RunConfig::new("network.csv", "out");
    config.seed = 21;
    config.replicates = 12;
    config.partial = PartialOptions {
        p_value: PValueMethod::Permutation { permutations: 500, seed: 21 },
        ..Default::default()
    };
    render_reports(&series, Some(&responses), &config, Stage::All).unwrap()
}

fn header(bytes: &[u8]) -> Option<String> {
    let text = std::str::from_utf8(bytes).unwrap();
    text.lines().next().and_then(|l| l.strip_prefix("# ")).map(str::to_owned)
}

fn rows_round_trip<R: Serialize + DeserializeOwned>(file: &ReportFile) {
    let rows: Vec<R> = read_rows(&file.bytes).unwrap();
    assert!(!rows.is_empty(), "{}", file.name);
    let again = write_rows(&file.name, header(&file.bytes), &rows).unwrap();
    assert_eq!(again.bytes, file.bytes, "{}", file.name);
}

fn json_round_trip<V: Serialize + DeserializeOwned>(file: &ReportFile) {
    let value: V = read_json(&file.bytes).unwrap();
    let again = write_json(&file.name, &value).unwrap().bytes;
    assert_eq!(String::from_utf8(again).unwrap(), String::from_utf8(file.bytes.clone()).unwrap());
}

#[test]
fn every_report_parses_back_to_identical_bytes() {
    let files = render();
    assert_eq!(files.len(), 12);
    for file in &files {
        match file.name.as_str() {
            "presence.csv" => {
                let p = read_presence_csv(&file.bytes).unwrap();
                assert_eq!(presence_csv(&file.name, &p).unwrap().bytes, file.bytes);
            }
            "degree.csv" | "betweenness.csv" => {
                let t = read_metric_table_csv(&file.bytes).unwrap();
                assert_eq!(metric_table_csv(&file.name, &t).unwrap().bytes, file.bytes);
            }
            "correlations.json" => json_round_trip::<CorrelationReport>(file),
            "dynamics_summary.json" => json_round_trip::<DynamicsSummary>(file),
            "assortativity.csv" => rows_round_trip::<AssortativityRow>(file),
            "balance.csv" => rows_round_trip::<BalanceRow>(file),
            "edge_changes.csv" => rows_round_trip::<EdgeChangeRow>(file),
            "imbalance_attribution.csv" => rows_round_trip::<AttributionRow>(file),
            "nullmodel.csv" => rows_round_trip::<NullModelRow>(file),
            "properties.csv" => rows_round_trip::<PropertyRow>(file),
            "partial_correlation.csv" => rows_round_trip::<PartialCorrelationRow>(file),
            other => panic!("unexpected report {other}"),
        }
    }
}

#[test]
fn rendering_is_byte_deterministic() {
    let a = render();
    let b = render();
    assert_eq!(a, b);
    let config = RunConfig::new("network.csv", "out");
    assert_eq!(manifest(&a, &config), manifest(&b, &config));
}

#[test]
fn stochastic_reports_carry_their_seed() {
    let files = render();
    for name in ["nullmodel.csv", "partial_correlation.csv"] {
        let f = files.iter().find(|f| f.name == name).unwrap();
        assert!(header(&f.bytes).unwrap().starts_with("seed=21,"), "{name}");
    }
}

#[test]
fn balance_rows_match_summaries() {
    let cfg = SyntheticConfig { seasons: 1, episodes_per_season: 5, entities: 10, ..Default::default() };
    let series = synthetic::series(&cfg).unwrap();
    let files = render_reports(&series, None, &RunConfig::new("n.csv", "o"), Stage::Triads).unwrap();
    let rows: Vec<BalanceRow> = read_rows(&files[0].bytes).unwrap();
    for (row, g) in rows.iter().zip(series.snapshots()) {
        let s = balance_summary(g);
        assert_eq!([row.type1, row.type2, row.type3, row.type4], s.counts);
        assert_eq!(row.imbalanced, s.imbalanced_count());
        assert_eq!(row.fraction, s.imbalanced_fraction());
    }
}
