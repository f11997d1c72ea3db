//! Figure presets and a minimal SVG line chart.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::rows::Row;
use super::sweep::{log_grid, SweepSpec, DEFAULT_GRID_HIGH, DEFAULT_GRID_LOW, DEFAULT_GRID_POINTS};
use crate::age::Metric;
use crate::error::{Error, Result};
use crate::service::ServiceFamily;
use crate::sim::Discipline;

/// Upper grid end for the FCFS preset, which needs `lambda < mu = 1`.
pub const FCFS_GRID_HIGH: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// FCFS M/M/1: classical age against relative age.
    Fig6,
    /// M/M/1/1 and M/M/1/2*: classical age against relative age.
    Fig7,
    /// First moment of relative age, every discipline and family.
    Fig8,
    /// Second moment of relative age, managed disciplines.
    Fig9,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig6, Preset::Fig7, Preset::Fig8, Preset::Fig9];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Preset::Fig6 => "M/M/1 FCFS: E[Delta_R] and E[Gamma] vs lambda (mu = 1)",
            Preset::Fig7 => "M/M/1/1 and M/M/1/2*: E[Delta_R] and E[Gamma] vs lambda (mu = 1)",
            Preset::Fig8 => "E[Gamma] vs lambda (mu = 1)",
            Preset::Fig9 => "E[Gamma^2] vs lambda (mu = 1)",
        }
    }

    pub fn spec(self, n_packets: usize, base_seed: u64) -> SweepSpec {
        let exp_only = vec![ServiceFamily::Exponential];
        let both_metrics = vec![(Metric::DeltaR, 1), (Metric::Gamma, 1)];
        let mut spec = SweepSpec {
            n_packets,
            base_seed,
            ..SweepSpec::new()
        };
        match self {
            Preset::Fig6 => {
                spec.lambdas = log_grid(DEFAULT_GRID_LOW, FCFS_GRID_HIGH, DEFAULT_GRID_POINTS);
                spec.grid_note = format!(
                    "log-spaced lambda grid {DEFAULT_GRID_LOW}..{FCFS_GRID_HIGH}, {DEFAULT_GRID_POINTS} points (FCFS needs lambda < mu)"
                );
                spec.disciplines = vec![Discipline::FcfsUnbounded];
                spec.families = exp_only;
                spec.quantities = both_metrics;
            }
            Preset::Fig7 => {
                spec.disciplines = vec![Discipline::BlockingSingle, Discipline::ReplaceBuffer];
                spec.families = exp_only;
                spec.quantities = both_metrics;
            }
            Preset::Fig8 => {}
            Preset::Fig9 => {
                spec.disciplines = Discipline::MANAGED.to_vec();
                spec.quantities = vec![(Metric::Gamma, 2)];
            }
        }
        debug_assert!(spec
            .lambdas
            .iter()
            .all(|l| (DEFAULT_GRID_LOW..=DEFAULT_GRID_HIGH).contains(l)));
        spec
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown figure preset `{s}` (expected fig6|fig7|fig8|fig9)")))
    }
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];
const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 260.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

struct Series {
    points: Vec<(f64, f64)>,
    markers: bool,
}

/// Log-x line chart: one line per formula id, simulation points as markers.
/// The y axis turns logarithmic when the positive values span more than two
/// decades.
pub fn render_svg(title: &str, rows: &[Row]) -> String {
    let mut series: BTreeMap<String, Series> = BTreeMap::new();
    for r in rows {
        if let (Some(v), Some(id)) = (r.analytic_value, r.formula_id) {
            series
                .entry(id.to_string())
                .or_insert(Series {
                    points: Vec::new(),
                    markers: false,
                })
                .points
                .push((r.lambda, v));
        }
        if let Some(v) = r.sim_value {
            let key = format!("sim {}-{} {}^{}", r.discipline, r.service, r.metric, r.k);
            series
                .entry(key)
                .or_insert(Series {
                    points: Vec::new(),
                    markers: true,
                })
                .points
                .push((r.lambda, v));
        }
    }
    let all: Vec<(f64, f64)> = series
        .values()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| *x > 0.0 && y.is_finite())
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="25" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    if all.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut x0, mut x1) = bounds(all.iter().map(|p| p.0.log10()));
    let ys: Vec<f64> = all.iter().map(|p| p.1).collect();
    let positive = ys.iter().all(|y| *y > 0.0);
    let (lo, hi) = bounds(ys.iter().copied());
    let log_y = positive && hi / lo > 100.0;
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let (mut y0, mut y1) = if log_y {
        (lo.log10(), hi.log10())
    } else {
        (lo.min(0.0), hi)
    };
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x.log10() - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| TOP + plot_h - (ty(y) - y0) / (y1 - y0) * plot_h;

    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for d in (x0.floor() as i32)..=(x1.ceil() as i32) {
        let v = f64::from(d);
        if v < x0 - 1e-9 || v > x1 + 1e-9 {
            continue;
        }
        let x = LEFT + (v - x0) / (x1 - x0) * plot_w;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{}" stroke="lightgray"/><text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 18.0,
            format_tick(10f64.powi(d))
        );
    }
    for i in 0..=5 {
        let v = y0 + (y1 - y0) * f64::from(i) / 5.0;
        let y = TOP + plot_h - f64::from(i) / 5.0 * plot_h;
        let label = if log_y {
            format_tick(10f64.powf(v))
        } else {
            format_tick(v)
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="lightgray"/><text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">lambda (log scale)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );

    for (n, (name, s)) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && y.is_finite() && (!log_y || *y > 0.0))
            .map(|&(x, y)| (px(x), py(y)))
            .collect();
        if s.markers {
            for (x, y) in &pts {
                let _ = writeln!(svg, r#"<circle cx="{x:.1}" cy="{y:.1}" r="2.5" fill="{color}"/>"#);
            }
        } else {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        let ly = TOP + 10.0 + 16.0 * n as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx}" y="{:.1}" width="12" height="4" fill="{color}"/><text x="{}" y="{ly:.1}">{}</text>"#,
            ly - 5.0,
            lx + 18.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn format_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        format!("{}", (v * 1000.0).round() / 1000.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
