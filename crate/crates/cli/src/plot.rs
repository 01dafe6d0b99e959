//! Static SVG line charts.
//!
//! Output depends only on the input data: fixed canvas, fixed palette,
//! fixed number formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fedclip_core::harness::RoundRecord;
use fedclip_core::Trajectory;

use crate::error::CliError;

const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.into() }
    } else {
        format!("{v:.2e}")
    }
}

/// Finite data range, widened when degenerate.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn draw_panel(out: &mut String, panel: &Panel, top: f64) {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let (x0, x1) = range(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(panel.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| top + MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        top + 24.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN_LEFT:.2}" y="{:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#444"/>"##,
        top + MARGIN_TOP
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#444"/><text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"##,
            top + MARGIN_TOP + plot_h,
            top + MARGIN_TOP + plot_h + 5.0,
            top + MARGIN_TOP + plot_h + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT:.2}" y2="{py:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"##,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">round</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        top + PANEL_HEIGHT - 8.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 18 {:.2})">{}</text>"#,
        top + MARGIN_TOP + plot_h / 2.0,
        top + MARGIN_TOP + plot_h / 2.0,
        escape(&panel.y_label)
    );

    for (k, s) in panel.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = write!(points, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let ly = top + MARGIN_TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
}

/// Stacks the panels vertically in one SVG document.
pub fn render(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, panel) in panels.iter().enumerate() {
        draw_panel(&mut out, panel, k as f64 * PANEL_HEIGHT);
    }
    out.push_str("</svg>\n");
    out
}

/// Loss and gradient-norm panels for labelled record sets.
pub fn trajectory_panels(runs: &[(String, &[RoundRecord])]) -> Vec<Panel> {
    let series = |metric: fn(&RoundRecord) -> f64| {
        runs.iter()
            .map(|(label, records)| Series {
                label: label.clone(),
                points: records.iter().map(|r| (r.round as f64, metric(r))).collect(),
            })
            .collect()
    };
    vec![
        Panel {
            title: "Global loss".into(),
            y_label: "f(x)".into(),
            series: series(|r| r.loss),
        },
        Panel {
            title: "Global gradient norm".into(),
            y_label: "||grad f(x)||".into(),
            series: series(|r| r.grad_norm),
        },
    ]
}

/// Renders a trajectory CSV to SVG. The default output sits next to the CSV
/// with an `.svg` extension. Nothing is written if the CSV is rejected.
pub fn emit_plot(csv_path: &Path, output: Option<PathBuf>) -> Result<PathBuf, CliError> {
    let text = fs::read_to_string(csv_path).map_err(|e| CliError::Read {
        path: csv_path.to_owned(),
        message: e.to_string(),
    })?;
    let records = Trajectory::records_from_csv(&text).map_err(|e| CliError::Config {
        path: csv_path.to_owned(),
        message: e.to_string(),
    })?;
    let label = csv_path
        .file_stem()
        .map_or_else(|| "trajectory".to_string(), |s| s.to_string_lossy().into_owned());
    let svg = render(&trajectory_panels(&[(label, &records)]));
    let out = output.unwrap_or_else(|| csv_path.with_extension("svg"));
    fs::write(&out, svg).map_err(|e| CliError::write(&out, e))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(round: usize, loss: f64) -> RoundRecord {
        RoundRecord {
            round,
            loss,
            grad_norm: loss.abs(),
            clipped: false,
            max_discrepancy: 0.0,
            elapsed_ms: 0.0,
        }
    }

    #[test]
    fn two_points_per_series() {
        let records = [record(0, 1.0), record(1, 0.5)];
        let svg = render(&trajectory_panels(&[("run".into(), &records)]));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        for line in svg.lines().filter(|l| l.starts_with("<polyline")) {
            let points = line.split("points=\"").nth(1).unwrap();
            assert_eq!(points.trim_end_matches("\"/>").split(' ').count(), 2);
        }
    }

    #[test]
    fn constant_series_and_labels() {
        let records = [record(0, 0.0), record(1, 0.0)];
        let svg = render(&trajectory_panels(&[("a<b".into(), &records)]));
        assert!(svg.contains("a&lt;b"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn tick_labels() {
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(2.5), "2.5");
        assert_eq!(tick_label(-0.0001), "-1.00e-4");
        assert_eq!(tick_label(123456.0), "1.23e5");
    }
}
