//! CSV tables. Reals are written in the shortest positional form that
//! parses back to the identical `f64`, zero-padded to at least 9
//! significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::SweepGrid;
use crate::metrics::{HistogramSet, MetricsSeries};

pub const TIMESERIES_HEADER: &str = "step,P_O,P_A,mean_dissonance";

pub const MIN_SIGNIFICANT_DIGITS: usize = 9;

/// Positional decimal, exact on parse-back.
pub fn fmt_real(v: f64) -> String {
    let mut s = format!("{v}");
    if !v.is_finite() {
        return s;
    }
    if !s.contains('.') {
        s.push_str(".0");
    }
    let digits = significant_digits(&s);
    if v != 0.0 && digits < MIN_SIGNIFICANT_DIGITS {
        s.extend(std::iter::repeat_n('0', MIN_SIGNIFICANT_DIGITS - digits));
    }
    s
}

fn significant_digits(s: &str) -> usize {
    s.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count()
}

pub fn timeseries_csv(series: &MetricsSeries) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("time series is empty".into()));
    }
    let mut out = String::from(TIMESERIES_HEADER);
    out.push('\n');
    for s in series.samples() {
        writeln!(
            out,
            "{},{},{},{}",
            s.step,
            fmt_real(s.opinion_polarization),
            fmt_real(s.affective_polarization),
            fmt_real(s.mean_dissonance)
        )
        .unwrap();
    }
    Ok(out)
}

pub fn emit_timeseries_csv(series: &MetricsSeries, path: &Path) -> Result<()> {
    std::fs::write(path, timeseries_csv(series)?)?;
    Ok(())
}

/// One row of a parsed time-series file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeseriesRow {
    pub step: u64,
    pub opinion_polarization: f64,
    pub affective_polarization: f64,
    pub mean_dissonance: f64,
}

pub fn parse_timeseries_csv(text: &str) -> Result<Vec<TimeseriesRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(TIMESERIES_HEADER) {
        return Err(Error::InvalidArgument("missing time-series header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::InvalidArgument(format!("malformed row {}: {line}", i + 1));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(bad());
            }
            let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
            Ok(TimeseriesRow {
                step: cols[0].parse().map_err(|_| bad())?,
                opinion_polarization: real(cols[1])?,
                affective_polarization: real(cols[2])?,
                mean_dissonance: real(cols[3])?,
            })
        })
        .collect()
}

/// Long format: `histogram,bin,lower,upper,count`.
pub fn histogram_csv(set: &HistogramSet) -> String {
    let mut out = String::from("histogram,bin,lower,upper,count\n");
    for (name, h) in set.named() {
        for (i, &count) in h.counts.iter().enumerate() {
            let (lo, hi) = h.bin_edges(i);
            writeln!(out, "{name},{i},{},{},{count}", fmt_real(lo), fmt_real(hi)).unwrap();
        }
    }
    out
}

/// One row per cell with its means, then one row per run.
pub fn sweep_csv(grid: &SweepGrid) -> String {
    let mut out = String::from("alpha,beta,run,P_O,P_A,mean_dissonance\n");
    for cell in &grid.cells {
        let n = cell.runs.len() as f64;
        let mean_d = cell.runs.iter().map(|r| r.mean_dissonance).sum::<f64>() / n;
        writeln!(
            out,
            "{},{},mean,{},{},{}",
            fmt_real(cell.alpha),
            fmt_real(cell.beta),
            fmt_real(cell.mean_opinion_polarization),
            fmt_real(cell.mean_affective_polarization),
            fmt_real(mean_d)
        )
        .unwrap();
        for (r, run) in cell.runs.iter().enumerate() {
            writeln!(
                out,
                "{},{},{r},{},{},{}",
                fmt_real(cell.alpha),
                fmt_real(cell.beta),
                fmt_real(run.opinion_polarization),
                fmt_real(run.affective_polarization),
                fmt_real(run.mean_dissonance)
            )
            .unwrap();
        }
    }
    out
}
