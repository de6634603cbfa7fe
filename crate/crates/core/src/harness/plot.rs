//! Standalone SVG training curves: mean return per policy against iteration.

use std::fmt::Write as _;
use std::path::Path;

use super::metrics::MetricsTable;
use crate::error::{Error, Result};

pub const SVG_WIDTH: f64 = 800.0;
pub const SVG_HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 140.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Data range and pixel box of the plot area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotFrame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl PlotFrame {
    /// Frame covering all points, with 5% vertical padding; degenerate ranges
    /// are widened so the transform stays finite.
    pub fn fit(series: &[Vec<(f64, f64)>]) -> Result<Self> {
        let pts = series.iter().flatten();
        let (mut x_min, mut x_max, mut y_min, mut y_max) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Format(format!("non-finite point ({x}, {y})")));
            }
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        if !x_min.is_finite() {
            return Err(Error::Format("no data rows to plot".into()));
        }
        if x_max == x_min {
            x_min -= 0.5;
            x_max += 0.5;
        }
        if y_max == y_min {
            y_min -= 1.0;
            y_max += 1.0;
        } else {
            let pad = 0.05 * (y_max - y_min);
            y_min -= pad;
            y_max += pad;
        }
        Ok(PlotFrame { x_min, x_max, y_min, y_max })
    }

    pub fn plot_width() -> f64 {
        SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    pub fn plot_height() -> f64 {
        SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    /// Pixel coordinates of a data point.
    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * Self::plot_width();
        let py = MARGIN_TOP + (self.y_max - y) / (self.y_max - self.y_min) * Self::plot_height();
        (px, py)
    }
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// SVG document for the given per-policy series.
pub fn render_svg(series: &[Vec<(f64, f64)>], title: &str) -> Result<String> {
    let frame = PlotFrame::fit(series)?;
    let (x0, y0) = (MARGIN_LEFT, MARGIN_TOP + PlotFrame::plot_height());
    let (x1, y1) = (MARGIN_LEFT + PlotFrame::plot_width(), MARGIN_TOP);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
    );
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let xv = frame.x_min + f * (frame.x_max - frame.x_min);
        let (px, _) = frame.map(xv, frame.y_min);
        let _ = writeln!(
            s,
            r#"<line class="tick" x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 20.0,
            tick_label(xv)
        );
        let yv = frame.y_min + f * (frame.y_max - frame.y_min);
        let (_, py) = frame.map(frame.x_min, yv);
        let _ = writeln!(
            s,
            r#"<line class="tick" x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Iteration</text>"#,
        (x0 + x1) / 2.0,
        SVG_HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">Mean return</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    for (i, pts) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if pts.len() == 1 {
            let (px, py) = frame.map(pts[0].0, pts[0].1);
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}"/>"#);
        } else if !pts.is_empty() {
            let coords: Vec<String> = pts
                .iter()
                .map(|&(x, y)| {
                    let (px, py) = frame.map(x, y);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = MARGIN_TOP + 10.0 + 20.0 * i as f64;
        let lx = x1 + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">Policy {}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            i + 1
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads a metrics CSV and writes the training-curve SVG.
pub fn emit_plot(csv: impl AsRef<Path>, svg: impl AsRef<Path>) -> Result<()> {
    let table = MetricsTable::load(csv.as_ref())?;
    let series = table.series("mean_return")?;
    let doc = render_svg(&series, "Training progress")?;
    let svg = svg.as_ref();
    std::fs::write(svg, doc).map_err(|e| Error::io(svg, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_gets_marker() {
        let svg = render_svg(&[vec![(1.0, -3.0)]], "t").unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert!(svg.contains("Policy 1"));
    }

    #[test]
    fn frame_maps_corners() {
        let f = PlotFrame {
            x_min: 0.0,
            x_max: 10.0,
            y_min: -1.0,
            y_max: 1.0,
        };
        assert_eq!(f.map(0.0, 1.0), (MARGIN_LEFT, MARGIN_TOP));
        let (px, py) = f.map(10.0, -1.0);
        assert!((px - (SVG_WIDTH - MARGIN_RIGHT)).abs() < 1e-9);
        assert!((py - (SVG_HEIGHT - MARGIN_BOTTOM)).abs() < 1e-9);
    }

    #[test]
    fn empty_input_is_format_error() {
        assert!(matches!(render_svg(&[], "t"), Err(Error::Format(_))));
    }
}
