//! CSV and SVG output for episode logs.

use std::fmt::Write as _;
use std::io;

use crate::harness::EpisodeLog;
use crate::trajectory::TrajectorySpec;

const BASE_COLUMNS: [&str; 9] = ["episode", "k", "t", "r", "x", "u", "e", "K", "N"];
const ASE_COLUMNS: [&str; 4] = ["branch_tag", "omega", "xi", "omega_draw"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One row per step. The four diagnostic columns are added when
/// `with_ase` is set and left blank on steps without an evaluation.
pub fn write_csv<W: io::Write>(out: W, logs: &[EpisodeLog], with_ase: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = BASE_COLUMNS.to_vec();
    if with_ase {
        header.extend(ASE_COLUMNS);
    }
    w.write_record(&header)?;
    for log in logs {
        for s in &log.records {
            let mut row = vec![
                s.episode.to_string(),
                s.k.to_string(),
                fmt_f64(s.t),
                fmt_f64(s.r),
                fmt_f64(s.x),
                fmt_f64(s.u),
                fmt_f64(s.e),
                fmt_f64(s.gain_k),
                fmt_f64(s.gain_n),
            ];
            if with_ase {
                match &s.ase {
                    Some(trace) => row.extend([
                        trace.branch.tag().to_string(),
                        fmt_opt(trace.omega),
                        fmt_opt(trace.xi),
                        fmt_opt(trace.draw),
                    ]),
                    None => row.extend(std::iter::repeat_n(String::new(), 4)),
                }
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `k,t,r` rows for the first `steps` samples of a trajectory.
pub fn write_trajectory_csv<W: io::Write>(out: W, spec: &TrajectorySpec, steps: u64) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "t", "r"])?;
    for k in 0..steps {
        let t = k as f64 * spec.sample_period();
        w.write_record([k.to_string(), fmt_f64(t), fmt_f64(spec.sample(k))])?;
    }
    w.flush()?;
    Ok(())
}

/// Legend label, stroke colour, points.
type Series<'a> = (&'a str, &'a str, Vec<(f64, f64)>);

struct Panel<'a> {
    title: &'a str,
    x_label: &'a str,
    series: Vec<Series<'a>>,
}

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 220.0;
const MARGIN: f64 = 50.0;

/// Three stacked panels: reference and state against time, control input
/// against time, and end-of-episode gains against episode number.
pub fn render_svg(logs: &[EpisodeLog]) -> String {
    let records = || logs.iter().flat_map(|l| l.records.iter());
    let stride = (records().count() / 4000).max(1);
    let thin = |f: fn(&crate::harness::StepRecord) -> f64| -> Vec<(f64, f64)> {
        records().step_by(stride).map(|s| (s.t, f(s))).collect()
    };
    let gains_end = |f: fn((f64, f64)) -> f64| -> Vec<(f64, f64)> {
        logs.iter()
            .filter_map(|l| l.final_gains().map(|g| (l.episode as f64, f(g))))
            .collect()
    };
    let panels = [
        Panel {
            title: "response",
            x_label: "t [s]",
            series: vec![("r", "#888888", thin(|s| s.r)), ("x", "#1f77b4", thin(|s| s.x))],
        },
        Panel {
            title: "control output",
            x_label: "t [s]",
            series: vec![("u", "#d62728", thin(|s| s.u))],
        },
        Panel {
            title: "gains",
            x_label: "episode",
            series: vec![
                ("K", "#2ca02c", gains_end(|g| g.0)),
                ("N", "#9467bd", gains_end(|g| g.1)),
            ],
        },
    ];

    let height = panels.len() as f64 * (PANEL_HEIGHT + MARGIN) + MARGIN;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        let top = MARGIN + i as f64 * (PANEL_HEIGHT + MARGIN);
        draw_panel(&mut svg, panel, top);
    }
    svg.push_str("</svg>\n");
    svg
}

fn draw_panel(svg: &mut String, panel: &Panel<'_>, top: f64) {
    let left = MARGIN + 20.0;
    let plot_w = WIDTH - left - MARGIN;
    let points = panel.series.iter().flat_map(|s| s.2.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| top + PANEL_HEIGHT - (y - y0) / (y1 - y0) * PANEL_HEIGHT;

    let _ = writeln!(
        svg,
        r##"<rect x="{left}" y="{top}" width="{plot_w}" height="{PANEL_HEIGHT}" fill="none" stroke="#444"/>"##
    );
    let _ = writeln!(svg, r#"<text x="{left}" y="{}">{}</text>"#, top - 8.0, panel.title);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        left + plot_w,
        top + PANEL_HEIGHT + 16.0,
        panel.x_label
    );
    let _ = writeln!(svg, r#"<text x="4" y="{}">{:.3}</text>"#, top + 10.0, y1);
    let _ = writeln!(svg, r#"<text x="4" y="{}">{:.3}</text>"#, top + PANEL_HEIGHT, y0);
    for (j, (name, color, pts)) in panel.series.iter().enumerate() {
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            left + plot_w - 60.0 + 30.0 * j as f64,
            top - 8.0
        );
    }
}
