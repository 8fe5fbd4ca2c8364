//! Static SVG learning-curve plots with a logarithmic MSE axis.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, ScmError};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One labelled polyline: `(t, mse)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the series as a standalone SVG document.
pub fn render_svg(series: &[PlotSeries], title: &str) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(ScmError::EmptyPlot);
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    let t_max = all().map(|p| p.0).fold(0.0f64, f64::max);
    let t_max = if t_max > 0.0 { t_max } else { 1.0 };
    let positive = || all().map(|p| p.1).filter(|y| y.is_finite() && *y > 0.0);
    let y_lo = positive().fold(f64::INFINITY, f64::min);
    let y_hi = positive().fold(0.0f64, f64::max);
    // Decade bounds; values that are not positive are drawn on the floor.
    let (dec_lo, dec_hi) = if y_lo.is_finite() {
        let lo = y_lo.log10().floor();
        let hi = y_hi.log10().ceil();
        (lo, if hi > lo { hi } else { lo + 1.0 })
    } else {
        (-1.0, 0.0)
    };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + plot_w * t / t_max;
    let sy = |y: f64| {
        let d = if y.is_finite() && y > 0.0 {
            y.log10()
        } else {
            dec_lo
        };
        TOP + plot_h * (1.0 - (d - dec_lo) / (dec_hi - dec_lo))
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    // y ticks at each decade
    let mut d = dec_lo;
    while d <= dec_hi + 1e-9 {
        let y = sy(10f64.powf(d));
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            d as i64
        );
        d += 1.0;
    }
    for i in 0..=5 {
        let t = t_max * i as f64 / 5.0;
        let x = sx(t);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 18.0,
            format_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t = m/N</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">MSE</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(t, y)| format!("{:.2},{:.2}", sx(t), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            coords.join(" "),
            escape(&s.label)
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn format_tick(t: f64) -> String {
    if t == t.round() {
        format!("{t:.0}")
    } else {
        format!("{t:.2}")
    }
}

/// Writes [`render_svg`] to `path`.
pub fn emit_svg_plot(series: &[PlotSeries], title: &str, path: &Path) -> Result<()> {
    let text = render_svg(series, title)?;
    std::fs::write(path, text).map_err(|e| ScmError::io(path, e))
}
