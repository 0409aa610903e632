//! End-to-end tests of the `beliefsim` binary. The file name sorts before
//! `acceptance` so these still run when a full-scale criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;

use beliefsim::cli_io::csv::parse_timeseries_csv;
use beliefsim::cli_io::svg;
use beliefsim::experiment::{run_sweep, SweepConfig};
use beliefsim::SimConfig;

const BIN: &str = env!("CARGO_BIN_EXE_beliefsim");

fn beliefsim(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn small_run_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut args = vec!["run", "--steps", "30000", "--seed", "5", "--out", out];
    args.extend_from_slice(extra);
    args
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn polyline_points(svg: &str) -> Vec<(f64, f64)> {
    let start = svg.find("<polyline").expect("has a polyline");
    let rest = &svg[start..];
    let attr = rest.find("points=\"").unwrap() + 8;
    let end = rest[attr..].find('"').unwrap();
    rest[attr..attr + end]
        .split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn run_writes_listed_files_and_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = beliefsim(&small_run_args(out.to_str().unwrap(), &[]));
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let m = manifest(&out);
    let files: Vec<String> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap().to_string()).collect();
    let mut on_disk: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    on_disk.sort();
    let mut listed = files.clone();
    listed.sort();
    assert_eq!(listed, on_disk);
    assert_eq!(m["seed"], 5);
    assert_eq!(m["config"]["steps"], 30000);
    assert_eq!(m["config"]["alpha"], 1.0);

    // 0, 10000, 20000, 30000
    let text = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().next(), Some("step,P_O,P_A,mean_dissonance"));
    let rows = parse_timeseries_csv(&text).unwrap();
    assert_eq!(rows.iter().map(|r| r.step).collect::<Vec<_>>(), vec![0, 10_000, 20_000, 30_000]);

    let config = SimConfig {
        steps: 30_000,
        seed: 5,
        ..SimConfig::default()
    };
    let direct = beliefsim::run_simulation(&config).unwrap();
    for (row, sample) in rows.iter().zip(direct.series.samples()) {
        assert_eq!(row.opinion_polarization, sample.opinion_polarization);
        assert_eq!(row.affective_polarization, sample.affective_polarization);
        assert_eq!(row.mean_dissonance, sample.mean_dissonance);
    }

    // the emitted config reproduces the run
    let again = dir.path().join("again");
    let status = beliefsim(&[
        "run",
        "--config",
        out.join("config.toml").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert_eq!(fs::read(out.join("timeseries.csv")).unwrap(), fs::read(again.join("timeseries.csv")).unwrap());
}

#[test]
fn outputs_are_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(beliefsim(&small_run_args(out.to_str().unwrap(), &["--mode", "reinforcing", "--alpha", "0.4"]))
            .status
            .success());
    }
    let files = manifest(&a)["files"].as_array().unwrap().clone();
    assert_eq!(files, manifest(&b)["files"].as_array().unwrap().clone());
    for f in files {
        let name = f.as_str().unwrap();
        if name == "manifest.json" {
            continue;
        }
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
    let config = fs::read_to_string(a.join("config.toml")).unwrap();
    assert!(config.contains("influence_mode = \"reinforcing\""));
    assert!(config.contains("alpha = 0.4"));
}

#[test]
fn flags_override_file_and_bad_configs_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "alpha = 1\nbeta = 0.5\nsteps = 20000\nseed = 2\n").unwrap();
    let out = dir.path().join("o");
    let status = beliefsim(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--alpha",
        "0.3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let m = manifest(&out);
    assert_eq!(m["config"]["alpha"], 0.3);
    assert_eq!(m["config"]["beta"], 0.5);

    let status = beliefsim(&["run", "--alpha", "1.5", "--out", out.to_str().unwrap()]);
    assert!(!status.status.success());
    assert!(String::from_utf8_lossy(&status.stderr).contains("`alpha`"));

    fs::write(&cfg, "sigmaa = 0.1\n").unwrap();
    let status = beliefsim(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!status.status.success());
    assert!(String::from_utf8_lossy(&status.stderr).contains("`sigmaa`"));

    let status = beliefsim(&["run", "--mode", "sideways"]);
    assert!(!status.status.success());
}

#[test]
fn sweep_heatmaps_have_one_cell_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    fs::write(&cfg, "n_agents = 10\nn_edges = 20\nsteps = 200\nsample_interval = 100\nruns_per_cell = 1\nbase_seed = 4\n").unwrap();
    let out = dir.path().join("sweep");
    let status = Command::new(BIN)
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("BELIEFSIM_THREADS", "2")
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for name in ["heatmap_P_O.svg", "heatmap_P_A.svg"] {
        let svg = fs::read_to_string(out.join(name)).unwrap();
        assert_eq!(svg.matches(r#"class="cell""#).count(), 121, "{name}");
    }
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",mean,")).count(), 121);

    let sweep = SweepConfig {
        runs_per_cell: 1,
        base_seed: 4,
        template: SimConfig {
            n_agents: 10,
            n_edges: 20,
            steps: 200,
            sample_interval: 100,
            ..SimConfig::default()
        },
        ..SweepConfig::default()
    };
    let grid = run_sweep(&sweep, 1).unwrap();
    assert_eq!(csv, beliefsim::cli_io::csv::sweep_csv(&grid));

    let status = Command::new(BIN)
        .args(["sweep", "--out", out.to_str().unwrap()])
        .env("BELIEFSIM_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!status.status.success());
}

#[test]
fn decreasing_series_plots_as_monotone_polyline() {
    let points: Vec<(f64, f64)> = (0..250).map(|i| (i as f64 * 10_000.0, -0.9 * (1.0 - (-(i as f64) / 40.0).exp()))).collect();
    let chart = svg::line_plot("d", "time step", "dissonance", &points, (-1.0, 0.0)).unwrap();
    assert!(chart.contains(">time step<") && chart.contains(">dissonance<"));
    let coords = polyline_points(&chart);
    assert_eq!(coords.len(), 250);
    assert!(coords.windows(2).all(|w| w[1].0 > w[0].0));
    // lower values sit lower on the page, which is larger y in SVG
    assert!(coords.windows(2).all(|w| w[1].1 >= w[0].1));
    assert!(coords.last().unwrap().1 > coords[0].1);
}

#[test]
fn validate_exits_zero_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let status = beliefsim(&["validate", "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    let text = String::from_utf8(status.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS ") || l.starts_with("summary: ")));
    assert!(text.ends_with("summary: 7 checks, 0 failed, PASS\n"));
    assert_eq!(fs::read_to_string(out.join("validation.txt")).unwrap(), text);
}
