//! Minimal SVG line charts: stacked panels of polylines over a shared x axis.

use std::fmt::Write;

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;
/// Buckets per series; each bucket contributes its min and max point.
const MAX_BUCKETS: usize = 1500;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub y: &'a [f64],
}

pub struct Panel<'a> {
    pub title: String,
    pub y_label: &'a str,
    pub series: Vec<Series<'a>>,
}

/// Reduces a series to per-bucket extremes so switching bands stay visible.
fn envelope(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len().min(y.len());
    if n <= 2 * MAX_BUCKETS {
        return x.iter().zip(y).map(|(a, b)| (*a, *b)).collect();
    }
    let size = n.div_ceil(MAX_BUCKETS);
    let mut out = Vec::with_capacity(2 * MAX_BUCKETS);
    for start in (0..n).step_by(size) {
        let end = (start + size).min(n);
        let (mut lo, mut hi) = (start, start);
        for i in start..end {
            if y[i] < y[lo] {
                lo = i;
            }
            if y[i] > y[hi] {
                hi = i;
            }
        }
        let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        out.push((x[a], y[a]));
        if b != a {
            out.push((x[b], y[b]));
        }
    }
    out
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

pub fn render(x: &[f64], x_label: &str, panels: &[Panel<'_>]) -> String {
    let height = PANEL_HEIGHT * panels.len() as f64;
    let (x0, x1) = range(x.iter().copied());
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (p, panel) in panels.iter().enumerate() {
        let top = p as f64 * PANEL_HEIGHT + MARGIN_TOP;
        let (y0, y1) = range(panel.series.iter().flat_map(|s| s.y.iter().copied()));
        let sx = |v: f64| MARGIN_LEFT + (v - x0) / (x1 - x0) * plot_w;
        let sy = |v: f64| top + plot_h - (v - y0) / (y1 - y0) * plot_h;

        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_LEFT}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, top - 10.0, panel.title);
        for k in 0..=4 {
            let v = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text>"#, MARGIN_LEFT - 5.0, sy(v) + 4.0);
            let u = x0 + (x1 - x0) * k as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">{u:.2}</text>"#,
                sx(u),
                top + plot_h + 15.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="15" y="{:.1}" transform="rotate(-90 15 {:.1})" text-anchor="middle">{}</text>"#,
            top + plot_h / 2.0,
            top + plot_h / 2.0,
            panel.y_label
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            top + plot_h + 32.0
        );

        for (i, series) in panel.series.iter().enumerate() {
            let mut pts = String::new();
            for (a, b) in envelope(x, series.y) {
                let _ = write!(pts, "{:.2},{:.2} ", sx(a), sy(b));
            }
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>"#,
                series.color,
                pts.trim_end()
            );
            let ly = top + 14.0 + 14.0 * i as f64;
            let lx = MARGIN_LEFT + plot_w - 120.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 18.0,
                series.color,
                lx + 24.0,
                ly + 4.0,
                series.label
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_keeps_extremes() {
        let x: Vec<f64> = (0..100_000).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..100_000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let e = envelope(&x, &y);
        assert!(e.len() <= 2 * MAX_BUCKETS);
        assert!(e.iter().any(|p| p.1 == 1.0) && e.iter().any(|p| p.1 == -1.0));
    }

    #[test]
    fn renders_one_polyline_per_series() {
        let x = [0.0, 1.0, 2.0];
        let a = [0.0, 1.0, 0.0];
        let b = [1.0, 1.0, 1.0];
        let svg = render(
            &x,
            "t (s)",
            &[Panel {
                title: "demo".into(),
                y_label: "y",
                series: vec![
                    Series { label: "a", color: "red", y: &a },
                    Series { label: "b", color: "blue", y: &b },
                ],
            }],
        );
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
