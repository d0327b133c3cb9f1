//! Learning-curve aggregation and SVG rendering.
//!
//! Smoothing follows the TensorBoard convention: the weight multiplies the
//! running value, `s_t = w s_(t-1) + (1 - w) x_t`, with `s_0 = x_0`.
//! Smoothing happens only here; stored metrics stay raw.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::metrics::{completed_episodes, read_metrics, MetricsRow};
use super::train::{CONFIG_FILE, METRICS_FILE};
use super::RunConfig;
use crate::error::{Error, Result};

pub const EMA_WEIGHT: f64 = 0.6;
const GRID_POINTS: usize = 200;

pub fn ema(xs: &[f64], weight: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut s = match xs.first() {
        Some(&x) => x,
        None => return out,
    };
    for &x in xs {
        s = weight * s + (1.0 - weight) * x;
        out.push(s);
    }
    out
}

/// Piecewise-linear interpolation of `(xs, ys)` at `x`, clamped to the ends.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|v| *v <= x);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

/// One raw learning curve: cumulative episode reward against global step.
#[derive(Debug, Clone, PartialEq)]
pub struct RunCurve {
    pub steps: Vec<f64>,
    pub rewards: Vec<f64>,
}

impl RunCurve {
    pub fn from_rows(rows: &[MetricsRow]) -> Self {
        Self {
            steps: rows.iter().map(|r| r.global_step as f64).collect(),
            rewards: rows.iter().map(|r| r.reward).collect(),
        }
    }
}

/// Mean (and, for more than one run, standard deviation) of smoothed runs
/// on a shared step grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub steps: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Option<Vec<f64>>,
}

impl Curve {
    /// First grid step at which the mean curve reaches `level`.
    pub fn first_step_reaching(&self, level: f64) -> Option<f64> {
        self.steps
            .iter()
            .zip(&self.mean)
            .find(|(_, m)| **m >= level)
            .map(|(s, _)| *s)
    }

    pub fn final_mean(&self) -> Option<f64> {
        self.mean.last().copied()
    }
}

/// Smooths each run and averages across runs. Runs that share the same
/// step grid are averaged point by point; otherwise all runs are resampled
/// onto a uniform grid spanning the range every run covers.
pub fn aggregate(label: &str, runs: &[RunCurve], weight: f64) -> Result<Curve> {
    let runs: Vec<&RunCurve> = runs.iter().filter(|r| !r.steps.is_empty()).collect();
    if runs.is_empty() {
        return Err(Error::Config(format!("no data for curve {label}")));
    }
    let smoothed: Vec<Vec<f64>> = runs.iter().map(|r| ema(&r.rewards, weight)).collect();
    let shared = runs.iter().all(|r| r.steps == runs[0].steps);
    let (steps, series): (Vec<f64>, Vec<Vec<f64>>) = if shared {
        (runs[0].steps.clone(), smoothed)
    } else {
        log::warn!("{label}: runs have different step grids, resampling to {GRID_POINTS} points");
        let lo = runs
            .iter()
            .map(|r| r.steps[0])
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = runs
            .iter()
            .map(|r| *r.steps.last().unwrap())
            .fold(f64::INFINITY, f64::min);
        let hi = hi.max(lo);
        let grid: Vec<f64> = (0..GRID_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
            .collect();
        let series = runs
            .iter()
            .zip(&smoothed)
            .map(|(r, s)| grid.iter().map(|&x| interpolate(&r.steps, s, x)).collect())
            .collect();
        (grid, series)
    };
    let n = series.len() as f64;
    let mean: Vec<f64> = (0..steps.len())
        .map(|i| series.iter().map(|s| s[i]).sum::<f64>() / n)
        .collect();
    let std = (series.len() > 1).then(|| {
        (0..steps.len())
            .map(|i| {
                let var = series.iter().map(|s| (s[i] - mean[i]).powi(2)).sum::<f64>() / (n - 1.0);
                var.sqrt()
            })
            .collect()
    });
    Ok(Curve {
        label: label.to_string(),
        steps,
        mean,
        std,
    })
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Renders curves as a standalone SVG document. Output depends only on the
/// input values.
pub fn render_svg(curves: &[Curve], title: &str) -> String {
    let (w, h) = (800.0, 500.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let mut x_max: f64 = 1.0;
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in curves {
        x_max = x_max.max(c.steps.iter().copied().fold(0.0, f64::max));
        for (i, m) in c.mean.iter().enumerate() {
            let s = c.std.as_ref().map_or(0.0, |s| s[i]);
            y_min = y_min.min(m - s);
            y_max = y_max.max(m + s);
        }
    }
    if !y_min.is_finite() {
        (y_min, y_max) = (0.0, 1.0);
    }
    if y_max - y_min < 1e-9 {
        y_max = y_min + 1.0;
    }
    let sx = |x: f64| left + pw * x / x_max;
    let sy = |y: f64| top + ph * (1.0 - (y - y_min) / (y_max - y_min));

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let fx = x_max * i as f64 / 5.0;
        let fy = y_min + (y_max - y_min) * i as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.0}</text>"#,
            sx(fx),
            top + ph + 18.0,
            fx
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.1}</text>"#,
            left - 6.0,
            sy(fy) + 4.0,
            fy
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">step</text>"#,
        left + pw / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">episode reward</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (k, c) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if let Some(std) = &c.std {
            let mut pts: Vec<String> = c
                .steps
                .iter()
                .zip(&c.mean)
                .zip(std)
                .map(|((x, m), s)| format!("{:.2},{:.2}", sx(*x), sy(m + s)))
                .collect();
            pts.extend(
                c.steps
                    .iter()
                    .zip(&c.mean)
                    .zip(std)
                    .rev()
                    .map(|((x, m), s)| format!("{:.2},{:.2}", sx(*x), sy(m - s))),
            );
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                pts.join(" ")
            );
        }
        let pts: Vec<String> = c
            .steps
            .iter()
            .zip(&c.mean)
            .map(|(x, m)| format!("{:.2},{:.2}", sx(*x), sy(*m)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2.5"/>"#,
            pts.join(" ")
        );
        let ly = top + 16.0 + 20.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2.5"/>"#,
            w - right + 15.0,
            w - right + 40.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            w - right + 46.0,
            ly + 4.0,
            escape(&c.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Reads run directories, groups them by action-space model (and reward
/// variant) and renders one curve per group.
pub fn plot_runs(run_dirs: &[impl AsRef<Path>], title: &str) -> Result<(Vec<Curve>, String)> {
    let mut groups: BTreeMap<String, Vec<RunCurve>> = BTreeMap::new();
    for dir in run_dirs {
        let dir = dir.as_ref();
        let cfg = RunConfig::load(&dir.join(CONFIG_FILE))?;
        let rows = read_metrics(&dir.join(METRICS_FILE))?;
        let mut label = cfg.env.control.model.to_string();
        if !cfg.env.reward.penalize_collision {
            label.push_str(" (no penalty)");
        }
        groups
            .entry(label)
            .or_default()
            .push(RunCurve::from_rows(completed_episodes(
                &rows,
                cfg.env.episode.max_steps,
            )));
    }
    let curves = groups
        .iter()
        .map(|(label, runs)| aggregate(label, runs, EMA_WEIGHT))
        .collect::<Result<Vec<_>>>()?;
    let svg = render_svg(&curves, title);
    Ok((curves, svg))
}
