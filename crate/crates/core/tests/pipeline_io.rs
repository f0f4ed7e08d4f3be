use std::path::{Path, PathBuf};

use topowarn::clustering::ClusterModel;
use topowarn::io::{read_price_csv, read_series_csv, write_clusters, write_outputs, write_series};
use topowarn::pipeline::{run_full, FeatureTable, PipelineConfig, PipelineResult, RunMetadata, TdaInput};
use topowarn::simulate::{sweep_series, SweepConfig};
use topowarn::TimeSeries;

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic_prices.csv")
}

#[test]
fn fixture_loads() {
    let prices = read_price_csv(fixture_path()).unwrap();
    assert_eq!(prices.len(), 200);
    assert_eq!(prices.timestamps()[0].to_string(), "2016-01-01");
    assert!(prices.values().iter().all(|&p| p > 0.0));
}

#[test]
fn raw_input_run_has_148_rows() {
    let prices = read_price_csv(fixture_path()).unwrap();
    let mut config = PipelineConfig::assets().with_k(3);
    config.tda_input = TdaInput::Raw;
    let result = run_full(&prices, &config).unwrap();
    assert_eq!(result.norm_series.len(), 148);
    assert_eq!(result.table.rows.len(), 148);
    assert_eq!(result.norm_diffs.len(), 147);
}

#[test]
fn asset_preset_rows_are_aligned_and_normalized() {
    let prices = read_price_csv(fixture_path()).unwrap();
    let result = run_full(&prices, &PipelineConfig::assets().with_restarts(10)).unwrap();
    assert_eq!(result.norm_series.len(), 147);
    assert_eq!(result.table.timestamps, result.norm_series.timestamps());
    for row in &result.table.rows {
        assert_eq!(row.len(), 3);
        assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
    }
    assert_eq!(result.model.k, 18);
    assert_eq!(result.model.assignments.len(), 147);
}

#[test]
fn identical_config_gives_identical_result() {
    let prices = read_price_csv(fixture_path()).unwrap();
    let config = PipelineConfig::assets().with_restarts(5).with_seed(3);
    assert_eq!(run_full(&prices, &config).unwrap(), run_full(&prices, &config).unwrap());
    assert_eq!(
        run_full(&prices, &config).unwrap(),
        run_full(&prices, &config.clone().serial()).unwrap()
    );
}

#[test]
fn lorenz_preset_clusters_on_two_features() {
    let mut sweep = SweepConfig::standard(1);
    sweep.n_steps = 400;
    let series = sweep_series(&sweep).unwrap();
    let result = run_full(&series, &PipelineConfig::lorenz().with_restarts(5)).unwrap();
    assert_eq!(result.norm_series.len(), 400 - 4 - 100 + 2);
    assert!(result.table.rows.iter().all(|r| r.len() == 2));
    assert!(result.model.assignments.iter().all(|&c| c < 8));
}

#[test]
fn output_files_follow_schema() {
    let prices = read_price_csv(fixture_path()).unwrap();
    let mut config = PipelineConfig::assets().with_restarts(5);
    config.diagram_windows = vec![0, 146];
    let result = run_full(&prices, &config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = write_outputs(&result, dir.path()).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        ["norms.csv", "clusters.csv", "diagram_2016-02-23.csv", "diagram_2016-07-18.csv", "metadata.txt"]
    );

    let norms = std::fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    let lines: Vec<&str> = norms.lines().collect();
    assert_eq!(lines[0], "date,l1_norm,l1_diff");
    assert_eq!(lines.len(), 148);
    assert!(lines[1].starts_with("2016-02-23,") && lines[1].ends_with(','));
    assert!(lines[2..].iter().all(|l| l.split(',').all(|f| !f.is_empty())));

    let diagram = std::fs::read_to_string(dir.path().join("diagram_2016-02-23.csv")).unwrap();
    assert_eq!(diagram.lines().next(), Some("dimension,birth,death"));
    assert!(diagram.lines().any(|l| l.starts_with("0,0,inf")));

    let metadata = std::fs::read_to_string(dir.path().join("metadata.txt")).unwrap();
    for line in ["window = 50", "embed_dim = 4", "k = 18", "f1 = log_price", "f2 = log_return", "f3 = l1_norm"] {
        assert!(metadata.lines().any(|l| l == line), "missing `{line}` in\n{metadata}");
    }
}

#[test]
fn empty_cluster_table_writes_header_only() {
    let empty = TimeSeries::new(Vec::new(), Vec::new()).unwrap();
    let result = PipelineResult {
        norm_series: empty.clone(),
        norm_diffs: empty,
        table: FeatureTable {
            features: PipelineConfig::lorenz().features,
            timestamps: Vec::new(),
            rows: Vec::new(),
        },
        model: ClusterModel {
            k: 8,
            centroids: Vec::new(),
            assignments: Vec::new(),
            sse: 0.0,
            seed: 0,
            restarts: 1,
            best_restart: 0,
            converged: true,
            sse_traces: Vec::new(),
        },
        diagrams: Vec::new(),
        metadata: RunMetadata::default(),
    };
    let mut buf = Vec::new();
    write_clusters(&result, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "date,f1,f2,cluster\n");
}

#[test]
fn simulated_series_round_trips_through_a_file() {
    let series = sweep_series(&SweepConfig::standard(5)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    write_series(&series, ("index", "x"), std::fs::File::create(&path).unwrap()).unwrap();
    let back = read_series_csv(&path).unwrap();
    assert_eq!(back.timestamps(), series.timestamps());
    for (a, b) in back.values().iter().zip(series.values()) {
        assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-300));
    }
}
