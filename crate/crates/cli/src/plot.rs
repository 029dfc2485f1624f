//! Static SVG charts of a recorded trajectory against its fitted bounds.

use std::fmt::Write as _;

use mixbound::bounds::{self, check};
use mixbound::{BoundKind, DiagnosticRecord};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Points,
    Line,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub style: Style,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Chart data derived from the records, independent of rendering.
pub fn panels(records: &[DiagnosticRecord]) -> Result<Vec<Panel>, CliError> {
    if records.is_empty() {
        return Err(CliError::Records("no records to plot".into()));
    }
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let series_of = |f: &dyn Fn(&DiagnosticRecord) -> f64| -> Vec<(f64, f64)> {
        records.iter().map(|r| (r.t, f(r))).collect()
    };
    let fitted = |kind: BoundKind| check(records, kind).ok().filter(|r| r.lambda_fit.is_finite());

    let ln_h0 = (records[0].hm1_theta.powi(2)).ln();
    let mut mixing = vec![Series {
        label: "ln |θ|²_{H⁻¹}".into(),
        style: Style::Points,
        color: "#1f4e9c",
        points: series_of(&|r| (r.hm1_theta.powi(2)).ln()),
    }];
    if records.len() > 1 {
        let bmo_int = bounds::bmo_integral(records);
        let sup_int = bounds::sup_integral(records);
        if let Some(rep) = fitted(BoundKind::MixingBmo) {
            mixing.push(Series {
                label: format!("BMO bound, λ = {:.4}", rep.lambda_ref),
                style: Style::Line,
                color: "#c0392b",
                points: times.iter().zip(&bmo_int).map(|(&t, b)| (t, ln_h0 - rep.lambda_ref * b)).collect(),
            });
        }
        if let Some(rep) = fitted(BoundKind::MixingSup) {
            mixing.push(Series {
                label: format!("L∞ bound, λ = {:.4}", rep.lambda_ref),
                style: Style::Line,
                color: "#7f8c8d",
                points: times.iter().zip(&sup_int).map(|(&t, b)| (t, ln_h0 - rep.lambda_ref * b)).collect(),
            });
        }
    }

    let g0 = records[0].grad_l2_theta;
    let mut gradient = vec![Series {
        label: "ln |∇θ|²_{L²}".into(),
        style: Style::Points,
        color: "#1f4e9c",
        points: series_of(&|r| (r.grad_l2_theta.powi(2)).ln()),
    }];
    if records.len() > 1 && g0 > 0.0 {
        if let Some(rep) = fitted(BoundKind::GradientTheta) {
            let sup_int = bounds::sup_integral(records);
            gradient.push(Series {
                label: format!("upper bound, λ = {:.4}", rep.lambda_ref),
                style: Style::Line,
                color: "#c0392b",
                points: times
                    .iter()
                    .zip(&sup_int)
                    .map(|(&t, b)| (t, (g0 * g0).ln() + rep.lambda_ref * b))
                    .collect(),
            });
        }
    }

    Ok(vec![
        Panel {
            title: "Mix-norm decay".into(),
            y_label: "ln |θ|²_{H⁻¹}".into(),
            series: mixing,
        },
        Panel {
            title: "Scalar gradient growth".into(),
            y_label: "ln |∇θ|²_{L²}".into(),
            series: gradient,
        },
    ])
}

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 320.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 45.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs()) * 1e-3;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn render_panel(out: &mut String, panel: &Panel, y_offset: f64) {
    let all = || panel.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = extent(all().map(|p| p.0));
    let (y0, y1) = extent(all().map(|p| p.1));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| y_offset + MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h;

    let top = y_offset + MARGIN_TOP;
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"##,
        MARGIN_LEFT + plot_w / 2.0,
        top - 10.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN_LEFT:.1}" y="{top:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#333"/>"##
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{:.3}</text>"##,
            sx(xv),
            top + plot_h + 14.0,
            xv
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{:.3}</text>"##,
            MARGIN_LEFT - 4.0,
            sy(yv) + 3.0,
            yv
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">t</text>"##,
        MARGIN_LEFT + plot_w / 2.0,
        top + plot_h + 32.0
    );
    let _ = writeln!(
        out,
        r##"<text x="14" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"##,
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(&panel.y_label)
    );

    for (idx, s) in panel.series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s.points.iter().filter(|p| p.1.is_finite()).map(|&(x, y)| (sx(x), sy(y))).collect();
        match s.style {
            Style::Line => {
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    out,
                    r##"<polyline class="bound" fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="6 3" points="{}"/>"##,
                    s.color,
                    path.join(" ")
                );
            }
            Style::Points => {
                for (x, y) in pts {
                    let _ = writeln!(
                        out,
                        r##"<circle class="sample" cx="{x:.2}" cy="{y:.2}" r="2.2" fill="{}"/>"##,
                        s.color
                    );
                }
            }
        }
        let ly = top + 14.0 + 14.0 * idx as f64;
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{ly:.1}" font-size="10" text-anchor="end" fill="{}">{}</text>"##,
            MARGIN_LEFT + plot_w - 6.0,
            s.color,
            escape(&s.label)
        );
    }
}

pub fn render(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"##
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##);
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, i as f64 * PANEL_HEIGHT);
    }
    out.push_str("</svg>\n");
    out
}
