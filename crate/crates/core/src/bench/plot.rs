//! Minimal SVG charts: error versus size, solution overlay, and stacked
//! cost bars. Output is plain text and deterministic.

use std::fmt::Write;

use super::stats::GroupStats;
use super::Showcase;
use crate::cost::{Breakdown, CostReport};
use crate::matgen::MatrixKind;
use crate::solver::SolverKind;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn solver_color(s: SolverKind) -> &'static str {
    match s {
        SolverKind::Original => PALETTE[0],
        SolverKind::OneStage => PALETTE[1],
        SolverKind::TwoStage => PALETTE[2],
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(body, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, esc(title));
        Svg { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(self.body, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, esc(s));
    }

    fn vtext(&mut self, x: f64, y: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle" transform="rotate(-90 {x:.2} {y:.2})">{}</text>"#,
            esc(s)
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#);
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        let p: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            p.join(" ")
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = TOP + 14.0 + 16.0 * i as f64;
            self.rect(W - RIGHT - 130.0, y - 9.0, 10.0, 10.0, color);
            self.text(W - RIGHT - 115.0, y, "start", label);
        }
    }

    fn axes(&mut self, xlabel: &str, ylabel: &str) {
        self.line(LEFT, H - BOTTOM, W - RIGHT, H - BOTTOM, "black", 1.0);
        self.line(LEFT, TOP, LEFT, H - BOTTOM, "black", 1.0);
        self.text((LEFT + W - RIGHT) / 2.0, H - 12.0, "middle", xlabel);
        self.vtext(18.0, (TOP + H - BOTTOM) / 2.0, ylabel);
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Linear map from `[lo, hi]` onto `[a, b]`.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

/// Mean relative error against size on log-log axes, one line per solver,
/// with interquartile whiskers.
pub fn error_vs_size(stats: &[GroupStats], kind: MatrixKind) -> String {
    let rows: Vec<&GroupStats> = stats.iter().filter(|s| s.matrix == kind).collect();
    let mut svg = Svg::new(&format!("Relative error vs size ({})", kind.as_str()));
    svg.axes("matrix size n", "relative error");
    let positive = |v: f64| v > 0.0 && v.is_finite();
    let ys: Vec<f64> = rows.iter().flat_map(|s| [s.mean, s.q25, s.q75]).filter(|&v| positive(v)).collect();
    if rows.is_empty() || ys.is_empty() {
        svg.text(W / 2.0, H / 2.0, "middle", "no data");
        return svg.finish();
    }
    let xs: Vec<f64> = rows.iter().map(|s| (s.size as f64).log2()).collect();
    let (x0, x1) = (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let y0 = ys.iter().cloned().fold(f64::INFINITY, f64::min).log10().floor();
    let y1 = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max).log10().ceil().max(y0 + 1.0);
    let px = |n: usize| scale((n as f64).log2(), x0 - 0.3, x1 + 0.3, LEFT, W - RIGHT);
    let py = |v: f64| scale(v.log10(), y0, y1, H - BOTTOM, TOP);

    let mut sizes: Vec<usize> = rows.iter().map(|s| s.size).collect();
    sizes.dedup();
    for &n in &sizes {
        svg.line(px(n), H - BOTTOM, px(n), H - BOTTOM + 5.0, "black", 1.0);
        svg.text(px(n), H - BOTTOM + 18.0, "middle", &n.to_string());
    }
    for e in (y0 as i32)..=(y1 as i32) {
        let y = py(10f64.powi(e));
        svg.line(LEFT - 5.0, y, LEFT, y, "black", 1.0);
        svg.line(LEFT, y, W - RIGHT, y, "#dddddd", 0.5);
        svg.text(LEFT - 8.0, y + 4.0, "end", &format!("1e{e}"));
    }

    let mut legend = Vec::new();
    for solver in SolverKind::ALL {
        let pts: Vec<&&GroupStats> = rows.iter().filter(|s| s.solver == solver && positive(s.mean)).collect();
        if pts.is_empty() {
            continue;
        }
        let color = solver_color(solver);
        svg.polyline(&pts.iter().map(|s| (px(s.size), py(s.mean))).collect::<Vec<_>>(), color);
        for s in &pts {
            if positive(s.q25) && positive(s.q75) {
                svg.line(px(s.size), py(s.q25), px(s.size), py(s.q75), color, 1.0);
            }
            svg.circle(px(s.size), py(s.mean), 3.5, color);
        }
        legend.push((solver.as_str(), color));
    }
    svg.legend(&legend);
    svg.finish()
}

/// Element-wise comparison of solver outputs with the reference solution.
pub fn overlay(sc: &Showcase) -> String {
    let title = format!("Solution overlay ({} {}x{}, trial {})", sc.matrix.as_str(), sc.size, sc.size, sc.trial);
    let mut svg = Svg::new(&title);
    svg.axes("element index", "x_i");
    let all = sc.x_ref.iter().chain(sc.solutions.iter().flat_map(|(_, v)| v.iter()));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in all {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    let pad = 0.05 * (hi - lo).max(1e-12);
    let (lo, hi) = (lo - pad, hi + pad);
    let n = sc.x_ref.len();
    let px = |i: usize| scale(i as f64, 0.0, (n.max(2) - 1) as f64, LEFT + 5.0, W - RIGHT - 5.0);
    let py = |v: f64| scale(v, lo, hi, H - BOTTOM, TOP);
    for t in 0..=4 {
        let v = lo + (hi - lo) * t as f64 / 4.0;
        svg.line(LEFT - 5.0, py(v), LEFT, py(v), "black", 1.0);
        svg.text(LEFT - 8.0, py(v) + 4.0, "end", &fmt_tick(v));
    }
    for t in 0..=4 {
        let i = (n.saturating_sub(1)) * t / 4;
        svg.text(px(i), H - BOTTOM + 18.0, "middle", &i.to_string());
    }
    svg.polyline(&sc.x_ref.iter().enumerate().map(|(i, &v)| (px(i), py(v))).collect::<Vec<_>>(), "black");
    let mut legend = vec![("reference", "black")];
    for (solver, v) in &sc.solutions {
        let color = solver_color(*solver);
        for (i, &x) in v.iter().enumerate() {
            if x.is_finite() {
                svg.circle(px(i), py(x), 2.0, color);
            }
        }
        legend.push((solver.as_str(), color));
    }
    svg.legend(&legend);
    svg.finish()
}

/// Stacked OPA/DAC/ADC/RRAM bars for area (left) and power (right).
pub fn cost_bars(reports: &[CostReport]) -> String {
    let n = reports.first().map_or(0, |r| r.n);
    let mut svg = Svg::new(&format!("Area and power breakdown (n = {n})"));
    let parts = ["OPA", "DAC", "ADC", "RRAM"];
    let colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#8c564b"];
    let panel_w = (W - LEFT - RIGHT - 150.0) / 2.0;
    let panels: [(&str, fn(&CostReport) -> Breakdown); 2] =
        [("area (mm²)", |r| r.area_mm2), ("power (W)", |r| r.power_w)];
    for (p, (label, get)) in panels.iter().enumerate() {
        let x_left = LEFT + p as f64 * (panel_w + 40.0);
        let max = reports.iter().map(|r| get(r).total).fold(0.0, f64::max);
        let py = |v: f64| scale(v, 0.0, if max > 0.0 { max } else { 1.0 }, H - BOTTOM, TOP + 10.0);
        svg.line(x_left, H - BOTTOM, x_left + panel_w, H - BOTTOM, "black", 1.0);
        svg.line(x_left, TOP + 10.0, x_left, H - BOTTOM, "black", 1.0);
        svg.text(x_left + panel_w / 2.0, H - 12.0, "middle", label);
        for t in 0..=4 {
            let v = max * t as f64 / 4.0;
            svg.text(x_left - 4.0, py(v) + 4.0, "end", &fmt_tick(v));
        }
        let bar_w = panel_w / (reports.len().max(1) as f64 * 1.6);
        for (i, r) in reports.iter().enumerate() {
            let b = get(r);
            let x = x_left + (i as f64 + 0.3) * panel_w / reports.len().max(1) as f64;
            let mut base = 0.0;
            for (v, color) in [b.opa, b.dac, b.adc, b.rram].iter().zip(colors) {
                svg.rect(x, py(base + v), bar_w, py(base) - py(base + v), color);
                base += v;
            }
            svg.text(x + bar_w / 2.0, H - BOTTOM + 16.0, "middle", r.solver.as_str());
        }
    }
    let legend: Vec<(&str, &str)> = parts.iter().copied().zip(colors).collect();
    svg.legend(&legend);
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{cost_reports, CostConfig};

    #[test]
    fn charts_are_well_formed() {
        let stats = vec![GroupStats {
            matrix: MatrixKind::Wishart,
            size: 8,
            solver: SolverKind::Original,
            count: 1,
            failed: 0,
            mean: 0.1,
            std: 0.0,
            min: 0.1,
            q25: 0.1,
            median: 0.1,
            q75: 0.1,
            max: 0.1,
        }];
        for svg in [
            error_vs_size(&stats, MatrixKind::Wishart),
            error_vs_size(&[], MatrixKind::Toeplitz),
            cost_bars(&cost_reports(512, None, &CostConfig::calibrated())),
        ] {
            assert!(svg.starts_with("<svg"));
            assert!(svg.trim_end().ends_with("</svg>"));
        }
    }
}
