//! Self-contained SVG charts: line plots, histograms over `[-1, 1]`, and
//! α×β heatmaps. Output depends only on the input data.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::experiment::SweepGrid;
use crate::metrics::Histogram;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

/// Heatmap color scale bounds.
pub const SCALE_MIN: f64 = 0.0;
pub const SCALE_MAX: f64 = 2.0;

/// Viridis anchors, evenly spaced over the scale.
const PALETTE: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Linear map of `[lo, hi]` onto `[a, b]`.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi == lo {
        return (a + b) / 2.0;
    }
    a + (v - lo) / (hi - lo) * (b - a)
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{:.0}", v)
    } else {
        let s = format!("{v:.2}");
        if s == "-0.00" { "0.00".into() } else { s }
    }
}

/// RGB color for `value`, clamped to the scale.
pub fn color(value: f64) -> String {
    let t = ((value - SCALE_MIN) / (SCALE_MAX - SCALE_MIN)).clamp(0.0, 1.0);
    let pos = t * (PALETTE.len() - 1) as f64;
    let i = (pos.floor() as usize).min(PALETTE.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (PALETTE[i], PALETTE[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

struct Frame {
    out: String,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(
            out,
            r#"<text class="title" x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="x-label" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            HEIGHT - 15.0,
            escape(x_label)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="y-label" x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
            TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
            escape(y_label)
        )
        .unwrap();
        Frame { out, x, y }
    }

    fn px(&self, v: f64) -> f64 {
        scale(v, self.x.0, self.x.1, LEFT, WIDTH - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        scale(v, self.y.0, self.y.1, HEIGHT - BOTTOM, TOP)
    }

    fn axes(&mut self) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        writeln!(
            self.out,
            r#"<path class="axes" d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        for i in 0..TICKS {
            let f = i as f64 / (TICKS - 1) as f64;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (px, py) = (self.px(xv), self.py(yv));
            writeln!(
                self.out,
                r#"<line x1="{px:.3}" y1="{y0}" x2="{px:.3}" y2="{}" stroke="black"/><text x="{px:.3}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 20.0,
                tick_label(xv)
            )
            .unwrap();
            writeln!(
                self.out,
                r#"<line x1="{}" y1="{py:.3}" x2="{x0}" y2="{py:.3}" stroke="black"/><text x="{}" y="{:.3}" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                py + 4.0,
                tick_label(yv)
            )
            .unwrap();
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn check_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} contains a non-finite value")))
    }
}

/// Line plot of `points` (x ascending). The y axis spans `y_range`, widened
/// to cover the data if needed.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)], y_range: (f64, f64)) -> Result<String> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("line plot needs at least one point".into()));
    }
    check_finite(points.iter().flat_map(|&(x, y)| [x, y]), "line plot")?;
    let x = (points[0].0, points[points.len() - 1].0);
    let y = points
        .iter()
        .fold(y_range, |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
    let mut frame = Frame::new(title, x_label, y_label, x, y);
    frame.axes();
    let coords: Vec<String> = points
        .iter()
        .map(|&(xv, yv)| format!("{:.3},{:.3}", frame.px(xv), frame.py(yv)))
        .collect();
    writeln!(
        frame.out,
        r##"<polyline class="series" points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##,
        coords.join(" ")
    )
    .unwrap();
    Ok(frame.finish())
}

/// Bar chart of a histogram whose bins evenly cover `[-1, 1]`.
pub fn histogram_chart(title: &str, x_label: &str, hist: &Histogram) -> Result<String> {
    if hist.counts.is_empty() {
        return Err(Error::InvalidArgument("histogram has no bins".into()));
    }
    let top = hist.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut frame = Frame::new(title, x_label, "count", (-1.0, 1.0), (0.0, top));
    frame.axes();
    for (i, &count) in hist.counts.iter().enumerate() {
        let (lo, hi) = hist.bin_edges(i);
        let (x0, x1) = (frame.px(lo), frame.px(hi));
        let (y0, y1) = (frame.py(0.0), frame.py(count as f64));
        writeln!(
            frame.out,
            r##"<rect class="bar" x="{x0:.3}" y="{y1:.3}" width="{:.3}" height="{:.3}" fill="#4a7fc1" stroke="white"><title>[{lo:.2}, {hi:.2}): {count}</title></rect>"##,
            x1 - x0,
            y0 - y1
        )
        .unwrap();
    }
    Ok(frame.finish())
}

/// Heatmap of one metric over the sweep grid: α on the x axis, β on the y
/// axis, one cell per grid point, colors spanning `[0, 2]`.
pub fn heatmap(title: &str, grid: &SweepGrid, value: impl Fn(usize, usize) -> f64) -> Result<String> {
    let (na, nb) = (grid.alpha_values.len(), grid.beta_values.len());
    if na == 0 || nb == 0 || grid.cells.len() != na * nb {
        return Err(Error::InvalidArgument("heatmap grid is empty or ragged".into()));
    }
    let legend = 70.0;
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT - legend, HEIGHT - BOTTOM, TOP);
    let (cw, ch) = ((x1 - x0) / na as f64, (y0 - y1) / nb as f64);
    let mut frame = Frame::new(title, "alpha", "beta", (0.0, 1.0), (0.0, 1.0));
    for ai in 0..na {
        for bi in 0..nb {
            let v = value(ai, bi);
            let (x, y) = (x0 + ai as f64 * cw, y0 - (bi + 1) as f64 * ch);
            writeln!(
                frame.out,
                r#"<rect class="cell" x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{ch:.3}" fill="{}"><title>alpha={} beta={}: {v:.4}</title></rect>"#,
                color(v),
                grid.alpha_values[ai],
                grid.beta_values[bi]
            )
            .unwrap();
        }
    }
    for ai in 0..na {
        writeln!(
            frame.out,
            r#"<text x="{:.3}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + (ai as f64 + 0.5) * cw,
            y0 + 18.0,
            tick_label(grid.alpha_values[ai])
        )
        .unwrap();
    }
    for bi in 0..nb {
        writeln!(
            frame.out,
            r#"<text x="{}" y="{:.3}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y0 - (bi as f64 + 0.5) * ch + 4.0,
            tick_label(grid.beta_values[bi])
        )
        .unwrap();
    }
    let steps = 40;
    let (lx, lw, lh) = (WIDTH - RIGHT - legend + 20.0, 16.0, (y0 - y1) / steps as f64);
    for k in 0..steps {
        let v = SCALE_MIN + (k as f64 + 0.5) / steps as f64 * (SCALE_MAX - SCALE_MIN);
        writeln!(
            frame.out,
            r#"<rect class="scale" x="{lx}" y="{:.3}" width="{lw}" height="{lh:.3}" fill="{}"/>"#,
            y0 - (k + 1) as f64 * lh,
            color(v)
        )
        .unwrap();
    }
    for (v, y) in [(SCALE_MIN, y0), (SCALE_MAX, y1)] {
        writeln!(frame.out, r#"<text x="{}" y="{:.3}">{}</text>"#, lx + lw + 4.0, y + 4.0, tick_label(v)).unwrap();
    }
    Ok(frame.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{RunSummary, SweepCell};

    #[test]
    fn color_scale_endpoints() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(2.0), "#fde725");
        assert_eq!(color(-1.0), color(0.0));
        assert_eq!(color(9.0), color(2.0));
        assert_eq!(color(1.0), "#21918c");
    }

    #[test]
    fn line_plot_has_labels_and_points() {
        let svg = line_plot("t", "time step", "P_O", &[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)], (0.0, 2.0)).unwrap();
        assert!(svg.contains(">time step<") && svg.contains(">P_O<"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("80.000,360.000"));
        assert!(line_plot("t", "x", "y", &[], (0.0, 1.0)).is_err());
        assert!(line_plot("t", "x", "y", &[(0.0, f64::NAN)], (0.0, 1.0)).is_err());
    }

    #[test]
    fn histogram_bars() {
        let mut h = Histogram::new(4).unwrap();
        for v in [-1.0, -0.2, 0.9, 1.0] {
            h.add(v);
        }
        let svg = histogram_chart("h", "belief", &h).unwrap();
        assert_eq!(svg.matches(r#"class="bar""#).count(), 4);
        assert!(histogram_chart("h", "belief", &Histogram { counts: vec![] }).is_err());
    }

    #[test]
    fn heatmap_cells() {
        let values = [0.0, 0.5, 1.0];
        let cells = values
            .iter()
            .flat_map(|&a| {
                values.iter().map(move |&b| SweepCell {
                    alpha: a,
                    beta: b,
                    mean_opinion_polarization: a + b,
                    mean_affective_polarization: 0.0,
                    runs: vec![RunSummary {
                        opinion_polarization: a + b,
                        affective_polarization: 0.0,
                        mean_dissonance: 0.0,
                    }],
                })
            })
            .collect();
        let grid = SweepGrid {
            alpha_values: values.to_vec(),
            beta_values: values.to_vec(),
            cells,
        };
        let svg = heatmap("P_O", &grid, |a, b| grid.cell(a, b).mean_opinion_polarization).unwrap();
        assert_eq!(svg.matches(r#"class="cell""#).count(), 9);
        assert!(svg.contains(&format!(r#"fill="{}""#, color(2.0))));
        let ragged = SweepGrid { cells: vec![], ..grid.clone() };
        assert!(heatmap("P_O", &ragged, |_, _| 0.0).is_err());
    }
}
