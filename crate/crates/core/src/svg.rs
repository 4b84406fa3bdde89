//! Minimal SVG plots: log-log scaling curves and normal QQ plots.

use crate::stats::quantile_sorted;
use statrs::distribution::{ContinuousCDF, Normal};
use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(pts: impl Iterator<Item = (f64, f64)> + Clone) -> Frame {
        let ext = |v: Vec<f64>| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        Frame {
            x: ext(pts.clone().map(|p| p.0).collect()),
            y: ext(pts.map(|p| p.1).collect()),
        }
    }
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * PAD)
    }
    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * PAD)
    }
}

fn open(s: &mut String, title: &str, xl: &str, yl: &str, f: &Frame) {
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>
<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>
"#,
        W / 2.0,
        escape(title),
        W - 2.0 * PAD,
        H - 2.0 * PAD,
        W / 2.0,
        H - 10.0,
        escape(xl),
        H / 2.0,
        H / 2.0,
        escape(yl)
    );
    for (v, x) in [(f.x.0, PAD), (f.x.1, W - PAD)] {
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">{v:.3}</text>"#, H - PAD + 14.0);
    }
    for (v, y) in [(f.y.0, H - PAD), (f.y.1, PAD)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{v:.3}</text>"#, PAD - 4.0);
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A named series of `(x, y)` values, plotted on natural-log axes.
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
    /// Optional fitted line `ln y = intercept + slope·ln x`.
    pub fit: Option<(f64, f64)>,
}

/// Log-log plot; non-positive values are skipped.
pub fn loglog(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let logs: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|p| p.0 > 0.0 && p.1 > 0.0)
                .map(|p| (p.0.ln(), p.1.ln()))
                .collect()
        })
        .collect();
    let f = Frame::new(logs.iter().flatten().copied());
    let mut s = String::new();
    open(&mut s, title, &format!("ln {x_label}"), &format!("ln {y_label}"), &f);
    for (k, (ser, pts)) in series.iter().zip(&logs).enumerate() {
        let c = COLORS[k % COLORS.len()];
        for p in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, f.px(p.0), f.py(p.1));
        }
        if let Some((slope, icpt)) = ser.fit {
            let (a, b) = (f.x.0, f.x.1);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{c}"/>"#,
                f.px(a),
                f.py(icpt + slope * a),
                f.px(b),
                f.py(icpt + slope * b)
            );
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{c}">{}</text>"#, PAD + 6.0, PAD + 14.0 * (k + 1) as f64, escape(ser.name));
    }
    s.push_str("</svg>\n");
    s
}

/// Normal QQ plot of standardized values against `Φ^{-1}` plotting positions.
pub fn qq(title: &str, values: &[f64]) -> String {
    let n = values.len();
    let m = crate::stats::mean(values);
    let sd = crate::stats::variance(values).sqrt();
    let mut z: Vec<f64> = values.iter().map(|v| if sd > 0.0 { (v - m) / sd } else { 0.0 }).collect();
    z.sort_by(f64::total_cmp);
    let norm = Normal::new(0.0, 1.0).expect("standard normal");
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| (norm.inverse_cdf((i as f64 + 0.5) / n as f64), quantile_sorted(&z, (i as f64 + 0.5) / n as f64)))
        .collect();
    let f = Frame::new(pts.iter().copied().chain([(-3.0, -3.0), (3.0, 3.0)]));
    let mut s = String::new();
    open(&mut s, title, "normal quantile", "sample quantile", &f);
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray"/>"#,
        f.px(-3.0),
        f.py(-3.0),
        f.px(3.0),
        f.py(3.0)
    );
    for p in pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}"/>"#, f.px(p.0), f.py(p.1), COLORS[0]);
    }
    s.push_str("</svg>\n");
    s
}
