//! Minimal standalone SVG figures.

use std::f64::consts::TAU;
use std::fmt::Write;

use crate::linmod::Correlogram;
use crate::nnts::NntsParams;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Points,
    Stems,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Figure {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub series: Vec<Series>,
    /// Dashed horizontal reference lines.
    pub hlines: Vec<f64>,
}

/// Density curves sampled at `samples + 1` equispaced points over `[0, 2π]`.
pub fn density_figure(title: &str, densities: &[(String, NntsParams)], samples: usize) -> Figure {
    let series = densities
        .iter()
        .map(|(label, p)| Series {
            label: label.clone(),
            points: (0..=samples)
                .map(|i| {
                    let t = TAU * i as f64 / samples as f64;
                    (t, p.density(t))
                })
                .collect(),
            style: Style::Line,
        })
        .collect();
    Figure {
        title: title.into(),
        xlabel: "angle (rad)".into(),
        ylabel: "density".into(),
        series,
        hlines: vec![1.0 / TAU],
    }
}

pub fn function_figure(title: &str, xlabel: &str, ylabel: &str, points: Vec<(f64, f64)>) -> Figure {
    Figure {
        title: title.into(),
        xlabel: xlabel.into(),
        ylabel: ylabel.into(),
        series: vec![Series {
            label: ylabel.into(),
            points,
            style: Style::Line,
        }],
        hlines: vec![],
    }
}

pub fn scatter_figure(title: &str, xlabel: &str, ylabel: &str, points: Vec<(f64, f64)>) -> Figure {
    Figure {
        title: title.into(),
        xlabel: xlabel.into(),
        ylabel: ylabel.into(),
        series: vec![Series {
            label: ylabel.into(),
            points,
            style: Style::Points,
        }],
        hlines: vec![],
    }
}

/// Stem plot of the ACF (`partial = false`) or PACF with its ±band.
pub fn correlogram_figure(title: &str, corr: &Correlogram, partial: bool) -> Figure {
    let (values, label, first_lag) = if partial {
        (&corr.pacf, "PACF", 1)
    } else {
        (&corr.acf, "ACF", 0)
    };
    let points = values
        .iter()
        .enumerate()
        .map(|(k, v)| ((k + first_lag) as f64, *v))
        .collect();
    Figure {
        title: title.into(),
        xlabel: "lag".into(),
        ylabel: label.into(),
        series: vec![Series {
            label: label.into(),
            points,
            style: Style::Stems,
        }],
        hlines: vec![0.0, corr.band, -corr.band],
    }
}

/// Trapezoid integral of a series, as plotted.
pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

impl Figure {
    pub fn to_svg(&self) -> String {
        let (x0, x1) = range(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let stems = self.series.iter().any(|s| s.style == Style::Stems);
        let (y0, y1) = range(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1))
                .chain(self.hlines.iter().copied())
                .chain(stems.then_some(0.0)),
        );
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                sx(fx),
                HEIGHT - MARGIN_BOTTOM + 16.0,
                tick_label(fx)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 6.0,
                sy(fy) + 4.0,
                tick_label(fy)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 10.0,
            escape(&self.xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            MARGIN_TOP + ph / 2.0,
            escape(&self.ylabel)
        );
        for h in &self.hlines {
            let _ = writeln!(
                s,
                r##"<line x1="{MARGIN_LEFT}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
                MARGIN_LEFT + pw,
                sy(*h),
                sy(*h)
            );
        }
        for (k, series) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts = series.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite());
            match series.style {
                Style::Line => {
                    let path: Vec<String> = pts.map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                        path.join(" ")
                    );
                }
                Style::Points => {
                    for p in pts {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                            sx(p.0),
                            sy(p.1)
                        );
                    }
                }
                Style::Stems => {
                    for p in pts {
                        let _ = writeln!(
                            s,
                            r#"<line x1="{x:.2}" x2="{x:.2}" y1="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                            sy(0.0),
                            sy(p.1),
                            x = sx(p.0)
                        );
                    }
                }
            }
            if self.series.len() > 1 {
                let ly = MARGIN_TOP + 14.0 + 14.0 * k as f64;
                let lx = MARGIN_LEFT + pw - 150.0;
                let _ = writeln!(
                    s,
                    r#"<line x1="{lx:.2}" x2="{:.2}" y1="{ly:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                    lx + 18.0,
                    lx + 24.0,
                    ly + 4.0,
                    escape(&series.label)
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}
