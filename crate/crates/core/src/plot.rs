//! SVG line charts of flesh-point trajectories.

use std::fmt::Write as _;

use crate::fleshpoints::{FleshPoint, FleshPointTrajectorySet};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

pub fn color(p: FleshPoint) -> &'static str {
    match p {
        FleshPoint::UpperLip => "green",
        FleshPoint::LowerLip => "red",
        FleshPoint::TongueTip => "orange",
        FleshPoint::TongueDorsum => "blue",
        FleshPoint::Jaw => "magenta",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn y_range(trajs: &[&FleshPointTrajectorySet]) -> (f64, f64) {
    let (lo, hi) = trajs
        .iter()
        .flat_map(|t| t.series.values().flatten())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Draws one chart into `svg` inside the box at (`x`, `y`) of size `w` x `h`.
fn chart(
    svg: &mut String,
    trajs: &FleshPointTrajectorySet,
    x_span: (f64, f64),
    y_span: (f64, f64),
    title: &str,
    (x, y, w, h): (f64, f64, f64, f64),
) {
    let (x0, x1) = x_span;
    let (y0, y1) = y_span;
    let sx = |t: f64| x + (t - x0) / (x1 - x0) * w;
    let sy = |v: f64| y + h - (v - y0) / (y1 - y0) * h;

    let _ = write!(
        svg,
        r#"<g class="chart"><text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        x + w / 2.0,
        y - 12.0,
        escape(title)
    );
    let _ = write!(
        svg,
        r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#999"/>"##
    );
    let _ = write!(
        svg,
        r#"<g class="x-axis" data-min="{x0}" data-max="{x1}" font-family="sans-serif" font-size="11">"#
    );
    for i in 0..=4 {
        let t = x0 + (x1 - x0) * i as f64 / 4.0;
        let _ = write!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(t),
            y + h + 16.0,
            (t * 10.0).round() / 10.0
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t (ms)</text></g>"#,
        x + w / 2.0,
        y + h + 34.0
    );
    for p in FleshPoint::ALL {
        let pts: Vec<String> = trajs
            .get(p)
            .iter()
            .enumerate()
            .map(|(k, &v)| format!("{:.2},{:.2}", sx(trajs.time_ms(k)), sy(v)))
            .collect();
        let _ = write!(
            svg,
            r#"<polyline class="series" data-point="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            p.column(),
            color(p),
            pts.join(" ")
        );
    }
    svg.push_str("</g>");
}

fn legend(svg: &mut String, x: f64, y: f64) {
    svg.push_str(r#"<g class="legend" font-family="sans-serif" font-size="12">"#);
    for (i, p) in FleshPoint::ALL.into_iter().enumerate() {
        let ly = y + i as f64 * 18.0;
        let _ = write!(
            svg,
            r#"<g class="legend-entry"><line x1="{x:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            x + 20.0,
            color(p),
            x + 26.0,
            ly + 4.0,
            p.label()
        );
    }
    svg.push_str("</g>");
}

fn x_span(trajs: &FleshPointTrajectorySet) -> (f64, f64) {
    (trajs.t0_ms, trajs.t0_ms + trajs.duration_ms())
}

/// Line chart with one polyline per flesh point. The x axis spans exactly the
/// time covered by `trajs`.
pub fn line_chart_svg(trajs: &FleshPointTrajectorySet, title: &str) -> String {
    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}"><rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    chart(
        &mut svg,
        trajs,
        x_span(trajs),
        y_range(&[trajs]),
        title,
        (MARGIN_LEFT, MARGIN_TOP, plot_w, plot_h),
    );
    legend(&mut svg, WIDTH - MARGIN_RIGHT + 15.0, MARGIN_TOP + 10.0);
    svg.push_str("</svg>\n");
    svg
}

/// Grid of charts sharing one y scale, filled row-major with `columns` per row.
pub fn panel_svg(panels: &[(String, FleshPointTrajectorySet)], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let (cell_w, cell_h) = (260.0, 200.0);
    let width = columns as f64 * cell_w + 150.0;
    let height = rows as f64 * cell_h + 20.0;
    let all: Vec<&FleshPointTrajectorySet> = panels.iter().map(|(_, t)| t).collect();
    let y_span = y_range(&all);

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}"><rect width="{width}" height="{height}" fill="white"/>"#
    );
    for (i, (title, trajs)) in panels.iter().enumerate() {
        let (r, c) = (i / columns, i % columns);
        let bx = c as f64 * cell_w + 40.0;
        let by = r as f64 * cell_h + 40.0;
        chart(
            &mut svg,
            trajs,
            x_span(trajs),
            y_span,
            title,
            (bx, by, cell_w - 60.0, cell_h - 90.0),
        );
    }
    legend(&mut svg, columns as f64 * cell_w + 10.0, 50.0);
    svg.push_str("</svg>\n");
    svg
}
