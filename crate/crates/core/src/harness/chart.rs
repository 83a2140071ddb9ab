use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::aggregate::{AggregateTable, MeanStd, Metric};
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ChartFiles {
    pub svg: PathBuf,
    pub csv: PathBuf,
}

/// Data bounds of a chart: x over iterations, y over `mean +/- std`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartBounds {
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

pub fn chart_bounds(series: &[MeanStd]) -> ChartBounds {
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for v in series {
        y_min = y_min.min(v.mean - v.std);
        y_max = y_max.max(v.mean + v.std);
    }
    if !y_min.is_finite() || !y_max.is_finite() {
        (y_min, y_max) = (0.0, 1.0);
    }
    if y_max - y_min < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    ChartBounds {
        x_max: series.len().saturating_sub(1).max(1) as f64,
        y_min,
        y_max,
    }
}

/// Line chart (mean with a +/-1 std band) as SVG text.
pub fn render_svg(series: &[MeanStd], title: &str, y_label: &str) -> String {
    let b = chart_bounds(series);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |i: f64| LEFT + i / b.x_max * plot_w;
    let py = |y: f64| TOP + (b.y_max - y) / (b.y_max - b.y_min) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    for k in 0..=TICKS {
        let frac = k as f64 / TICKS as f64;
        let y = b.y_min + frac * (b.y_max - b.y_min);
        let x = frac * b.x_max;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#ddd"/><text x="{2:.2}" y="{3:.2}" text-anchor="end">{4}</text>"##,
            py(y),
            WIDTH - RIGHT,
            LEFT - 6.0,
            py(y) + 4.0,
            tick_label(y)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(x),
            HEIGHT - BOTTOM + 18.0,
            tick_label(x)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Iteration</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0:.1}" text-anchor="middle" transform="rotate(-90 16 {0:.1})">{1}</text>"#,
        TOP + plot_h / 2.0,
        escape(y_label)
    );

    if !series.is_empty() {
        let mut band = String::new();
        for (i, v) in series.iter().enumerate() {
            let _ = write!(band, "{:.2},{:.2} ", px(i as f64), py(v.mean + v.std));
        }
        for (i, v) in series.iter().enumerate().rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(i as f64), py(v.mean - v.std));
        }
        let _ = writeln!(
            s,
            r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.25" stroke="none"/>"##,
            band.trim_end()
        );
        let mut line = String::new();
        for (i, v) in series.iter().enumerate() {
            let _ = write!(line, "{:.2},{:.2} ", px(i as f64), py(v.mean));
        }
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
            line.trim_end()
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes `path` (SVG) and a sibling `.csv` with the plotted columns.
pub fn emit_chart(table: &AggregateTable, metric: &str, path: &Path) -> Result<ChartFiles> {
    if metric.trim().is_empty() {
        return Err(Error::Config("empty metric name".into()));
    }
    let metric: Metric = metric.parse()?;
    let series = table.series(metric);
    let title = format!(
        "{} ({} run{})",
        metric.label(),
        table.runs,
        if table.runs == 1 { "" } else { "s" }
    );
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, render_svg(&series, &title, metric.label()))?;

    let csv_path = path.with_extension("csv");
    let mut csv = format!("iter,{0}_mean,{0}_std\n", metric.column());
    for (i, v) in series.iter().enumerate() {
        let _ = writeln!(csv, "{i},{},{}", v.mean, v.std);
    }
    fs::write(&csv_path, csv)?;
    Ok(ChartFiles {
        svg: path.to_path_buf(),
        csv: csv_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> Vec<MeanStd> {
        vec![
            MeanStd {
                mean: 1.0,
                std: 0.5,
            },
            MeanStd {
                mean: 4.0,
                std: 2.0,
            },
            MeanStd {
                mean: -1.0,
                std: 0.25,
            },
        ]
    }

    #[test]
    fn bounds_cover_band() {
        let b = chart_bounds(&series());
        assert_eq!(b.y_min, -1.25);
        assert_eq!(b.y_max, 6.0);
        assert_eq!(b.x_max, 2.0);
        let flat = chart_bounds(&[MeanStd {
            mean: 3.0,
            std: 0.0,
        }]);
        assert!(flat.y_min < 3.0 && flat.y_max > 3.0);
    }

    #[test]
    fn svg_is_deterministic() {
        let a = render_svg(&series(), "t", "y");
        let b = render_svg(&series(), "t", "y");
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("<polyline"));
        assert!(a.trim_end().ends_with("</svg>"));
    }
}
