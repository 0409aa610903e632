//! File outputs behind the `beliefsim` binary: config resolution, CSV
//! tables, SVG charts, and a manifest for every output directory.
//!
//! Every file except `manifest.json` is a pure function of the resolved
//! config. The manifest also records wall-clock start and end times.

pub mod config;
pub mod csv;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{run_simulation, run_sweep_with_progress, SimConfig, SweepConfig, SweepGrid};
use crate::metrics::{HistogramSet, MetricsSeries};
use crate::validation::ValidationReport;

pub use config::{resolve_run, resolve_sweep, FileConfig, Overrides};

pub const THREADS_ENV: &str = "BELIEFSIM_THREADS";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved config in the same flat form the config file accepts.
    pub config: FileConfig,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    /// Paths relative to the output directory, in write order; includes the manifest.
    pub files: Vec<String>,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Collects the names of files written into one directory.
struct OutputSet {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputSet {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, command: &str, config: FileConfig, seed: u64, started: u128) -> Result<RunManifest> {
        self.files.push(MANIFEST.to_string());
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seed,
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
            files: self.files,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        std::fs::write(self.dir.join(MANIFEST), json + "\n")?;
        Ok(manifest)
    }
}

/// Worker count for sweeps: available cores, capped by `BELIEFSIM_THREADS`.
pub fn sweep_threads(env_value: Option<&str>) -> Result<usize> {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match env_value {
        None => Ok(cores),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(cap) if cap >= 1 => Ok(cap.min(cores).max(1)),
            _ => Err(Error::config(THREADS_ENV, format!("`{s}` is not a positive integer"))),
        },
    }
}

fn timeseries_plots(series: &MetricsSeries) -> Result<Vec<(String, String)>> {
    let pick = |f: fn(&crate::metrics::MetricsSample) -> f64| -> Vec<(f64, f64)> {
        series.samples().iter().map(|s| (s.step as f64, f(s))).collect()
    };
    Ok(vec![
        (
            "opinion_polarization.svg".into(),
            svg::line_plot("Opinion polarization", "time step", "P_O", &pick(|s| s.opinion_polarization), (0.0, 2.0))?,
        ),
        (
            "affective_polarization.svg".into(),
            svg::line_plot("Affective polarization", "time step", "P_A", &pick(|s| s.affective_polarization), (0.0, 2.0))?,
        ),
        (
            "mean_dissonance.svg".into(),
            svg::line_plot("Mean internal dissonance", "time step", "dissonance", &pick(|s| s.mean_dissonance), (-1.0, 0.0))?,
        ),
    ])
}

fn histogram_axis_label(name: &str) -> &'static str {
    match name {
        "latte_group_a" => "belief self-latte (Group A members)",
        "latte_group_b" => "belief self-latte (Group B members)",
        "group_a_latte" => "belief GroupA-latte",
        "ingroup" => "belief toward ingroup neighbors",
        _ => "belief toward outgroup neighbors",
    }
}

fn write_histograms(out: &mut OutputSet, label: &str, set: &HistogramSet) -> Result<()> {
    out.write(&format!("histograms_{label}.csv"), &csv::histogram_csv(set))?;
    for (name, h) in set.named() {
        let title = format!("{name} ({label})");
        out.write(
            &format!("histogram_{label}_{name}.svg"),
            &svg::histogram_chart(&title, histogram_axis_label(name), h)?,
        )?;
    }
    Ok(())
}

/// Runs one simulation and writes its outputs into `out_dir`.
pub fn execute_run(config: &SimConfig, out_dir: &Path) -> Result<RunManifest> {
    let started = now_ms();
    let flat = FileConfig::from_sim(config);
    let config_text = flat.to_toml()?;
    let run = run_simulation(config)?;
    let mut out = OutputSet::create(out_dir)?;
    out.write("config.toml", &config_text)?;
    out.write("timeseries.csv", &csv::timeseries_csv(&run.series)?)?;
    for (name, svg) in timeseries_plots(&run.series)? {
        out.write(&name, &svg)?;
    }
    write_histograms(&mut out, "initial", &run.initial_histograms)?;
    write_histograms(&mut out, "final", &run.final_histograms)?;
    out.finish("run", flat, config.seed, started)
}

/// Runs a sweep on `threads` workers and writes its outputs into `out_dir`.
pub fn execute_sweep<F>(sweep: &SweepConfig, threads: usize, out_dir: &Path, progress: F) -> Result<(SweepGrid, RunManifest)>
where
    F: Fn(usize, usize) + Sync,
{
    let started = now_ms();
    let flat = FileConfig::from_sweep(sweep);
    let config_text = flat.to_toml()?;
    let grid = run_sweep_with_progress(sweep, threads, progress)?;
    let mut out = OutputSet::create(out_dir)?;
    out.write("config.toml", &config_text)?;
    out.write("sweep.csv", &csv::sweep_csv(&grid))?;
    out.write(
        "heatmap_P_O.svg",
        &svg::heatmap("Mean opinion polarization", &grid, |a, b| grid.cell(a, b).mean_opinion_polarization)?,
    )?;
    out.write(
        "heatmap_P_A.svg",
        &svg::heatmap("Mean affective polarization", &grid, |a, b| grid.cell(a, b).mean_affective_polarization)?,
    )?;
    let manifest = out.finish("sweep", flat, sweep.base_seed, started)?;
    Ok((grid, manifest))
}

/// Plain-text report, one `PASS`/`FAIL` line per check plus a summary line.
pub fn format_report(report: &ValidationReport) -> String {
    let mut text = String::new();
    for c in &report.checks {
        text.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    text.push_str(&format!(
        "summary: {} checks, {} failed, {}\n",
        report.checks.len(),
        failed,
        if failed == 0 { "PASS" } else { "FAIL" }
    ));
    text
}

/// Writes the validation report as text and JSON into `out_dir`.
pub fn write_validation(report: &ValidationReport, out_dir: &Path) -> Result<RunManifest> {
    let started = now_ms();
    let mut out = OutputSet::create(out_dir)?;
    out.write("validation.txt", &format_report(report))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    out.write("validation.json", &(json + "\n"))?;
    out.finish("validate", FileConfig::default(), 0, started)
}
