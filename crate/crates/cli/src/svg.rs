//! Static 800×600 line plots written as plain SVG.

use std::fmt::Write as _;

use infohopf::Trajectory;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
/// Polylines are thinned to roughly this many vertices.
const MAX_POINTS: usize = 4000;

pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1e-3);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(x: f64) -> String {
    let text = format!("{x:.6}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text == "-0" {
        "0".into()
    } else {
        text.into()
    }
}

impl LinePlot<'_> {
    pub fn render(&self) -> String {
        let (x0, x1) = range(self.points.iter().map(|p| p.0));
        let (y0, y1) = range(self.points.iter().map(|p| p.1));
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for t in ticks(x0, x1) {
            let x = sx(t);
            let yb = MARGIN_TOP + ph;
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{yb}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
                yb + 5.0,
                yb + 20.0,
                label(t)
            );
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{}</text>"#,
                MARGIN_LEFT - 5.0,
                MARGIN_LEFT - 8.0,
                y + 4.0,
                label(t)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 15.0,
            escape(self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="20" y="{:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {:.2})">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            MARGIN_TOP + ph / 2.0,
            escape(self.y_label)
        );

        let stride = self.points.len().div_ceil(MAX_POINTS).max(1);
        let mut path = String::new();
        for (i, &(x, y)) in self.points.iter().enumerate() {
            if i % stride != 0 && i + 1 != self.points.len() {
                continue;
            }
            let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1" points="{}"/>"#,
            path.trim_end()
        );
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// The five panels: three waveforms, the `(u, v)` phase portrait and an
/// oblique projection of the `(u, v, w)` orbit. Returns `(file name, svg)`.
pub fn trajectory_panels(traj: &Trajectory<f64>) -> Vec<(&'static str, String)> {
    let series = |f: fn(&infohopf::State<f64>) -> f64| -> Vec<(f64, f64)> {
        traj.states
            .iter()
            .enumerate()
            .map(|(i, x)| (traj.time(i), f(x)))
            .collect()
    };
    let waveform = |name: &'static str, var: &'static str, f: fn(&infohopf::State<f64>) -> f64| {
        let plot = LinePlot {
            title: var,
            x_label: "t",
            y_label: var,
            points: series(f),
        };
        (name, plot.render())
    };
    // cabinet-style projection: w recedes along the diagonal
    let (c, s) = (
        0.5 * std::f64::consts::FRAC_PI_6.cos(),
        0.5 * std::f64::consts::FRAC_PI_6.sin(),
    );
    vec![
        waveform("waveform_u.svg", "u", |x| x.u),
        waveform("waveform_v.svg", "v", |x| x.v),
        waveform("waveform_w.svg", "w", |x| x.w),
        (
            "phase_uv.svg",
            LinePlot {
                title: "phase portrait",
                x_label: "u",
                y_label: "v",
                points: traj.states.iter().map(|x| (x.u, x.v)).collect(),
            }
            .render(),
        ),
        (
            "phase_uvw_projection.svg",
            LinePlot {
                title: "(u, v, w) projection",
                x_label: "u + 0.43 w",
                y_label: "v + 0.25 w",
                points: traj.states.iter().map(|x| (x.u + c * x.w, x.v + s * x.w)).collect(),
            }
            .render(),
        ),
    ]
}
