//! Minimal SVG charts: axes with ticks, line and marker series, shaded
//! bands and bars.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

pub const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Clone, Debug)]
pub enum Layer {
    Line { label: String, color: String, points: Vec<(f64, f64)> },
    Markers { label: String, color: String, points: Vec<(f64, f64)> },
    /// `(x, lower, upper)`.
    Band { label: String, color: String, points: Vec<(f64, f64, f64)> },
    /// `(lo, hi, height)`.
    Bars { color: String, bars: Vec<(f64, f64, f64)> },
}

impl Layer {
    fn label(&self) -> Option<(&str, &str)> {
        match self {
            Layer::Line { label, color, .. } | Layer::Markers { label, color, .. } | Layer::Band { label, color, .. } => {
                Some((label, color))
            }
            Layer::Bars { .. } => None,
        }
    }

    fn extent(&self) -> Vec<(f64, f64)> {
        match self {
            Layer::Line { points, .. } | Layer::Markers { points, .. } => points.clone(),
            Layer::Band { points, .. } => points.iter().flat_map(|&(x, a, b)| [(x, a), (x, b)]).collect(),
            Layer::Bars { bars, .. } => bars.iter().flat_map(|&(a, b, h)| [(a, 0.0), (b, h)]).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub layers: Vec<Layer>,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    mag * if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5_f64.max(lo.abs() * 0.05), hi + 0.5_f64.max(hi.abs() * 0.05));
    }
    let step = nice_step(hi - lo);
    ((lo / step).floor() * step, (hi / step).ceil() * step)
}

fn num(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Chart { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), layers: Vec::new() }
    }

    pub fn layer(mut self, l: Layer) -> Self {
        self.layers.push(l);
        self
    }

    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self.layers.iter().flat_map(Layer::extent).collect();
        let (x0, x1) = range(pts.iter().map(|p| p.0));
        let (y0, y1) = range(pts.iter().map(|p| p.1));
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, esc(&self.title));

        for (lo, hi, horizontal) in [(x0, x1, true), (y0, y1, false)] {
            let step = nice_step(hi - lo);
            let mut t = (lo / step).ceil() * step;
            while t <= hi + step * 1e-9 {
                if horizontal {
                    let x = sx(t);
                    let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP, TOP + ph);
                    let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, num(t));
                } else {
                    let y = sy(t);
                    let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
                    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, num(t));
                }
                t += step;
            }
        }
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 12.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );

        for l in &self.layers {
            match l {
                Layer::Bars { color, bars } => {
                    for &(a, b, h) in bars {
                        let _ = writeln!(
                            s,
                            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" stroke="white"/>"#,
                            sx(a),
                            sy(h),
                            (sx(b) - sx(a)).max(1.0),
                            sy(0.0_f64.max(y0)) - sy(h)
                        );
                    }
                }
                Layer::Band { color, points, .. } => {
                    let upper = points.iter().map(|&(x, _, b)| format!("{:.2},{:.2}", sx(x), sy(b)));
                    let lower = points.iter().rev().map(|&(x, a, _)| format!("{:.2},{:.2}", sx(x), sy(a)));
                    let poly: Vec<String> = upper.chain(lower).collect();
                    let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.25" stroke="none"/>"#, poly.join(" "));
                }
                Layer::Line { color, points, .. } => {
                    let poly: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, poly.join(" "));
                }
                Layer::Markers { color, points, .. } => {
                    for &(x, y) in points {
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
                    }
                }
            }
        }

        let mut seen = Vec::new();
        for (label, color) in self.layers.iter().filter_map(Layer::label) {
            if seen.contains(&label) {
                continue;
            }
            let y = TOP + 10.0 + 18.0 * seen.len() as f64;
            let x = W - RIGHT + 14.0;
            let _ = writeln!(s, r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{color}"/>"#, y - 10.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, x + 18.0, esc(label));
            seen.push(label);
        }
        s.push_str("</svg>\n");
        s
    }
}
