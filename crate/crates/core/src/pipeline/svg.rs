//! Minimal static SVG rendering of the plot data.

use std::fmt::Write as _;

use super::analysis::{PlotData, Scatter};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        Frame { x: padded_range(xs), y: padded_range(ys) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        let pad = 0.02 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(title: &str, frame: &Frame, x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title));
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#, HEIGHT / 2.0, HEIGHT / 2.0, escape(y_label));
    for (v, anchor, x, y) in [
        (frame.x.0, "start", l, b + 14.0),
        (frame.x.1, "end", r, b + 14.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for (v, y) in [(frame.y.0, b), (frame.y.1, t + 8.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{v:.3}</text>"#, l - 4.0);
    }
    s
}

fn polyline(s: &mut String, frame: &Frame, points: impl Iterator<Item = (f64, f64)>, color: &str) {
    let coords: Vec<String> = points.map(|(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
}

fn histogram(p: &PlotData) -> String {
    let h = &p.histogram;
    let dens = h.densities();
    let frame = Frame::new(h.edges.iter().copied(), dens.iter().copied().chain([0.0]));
    let mut s = open("gain histogram", &frame, "gain", "density");
    for (i, d) in dens.iter().enumerate() {
        let (x0, x1) = (frame.px(h.edges[i]), frame.px(h.edges[i + 1]));
        let (y0, y1) = (frame.py(*d), frame.py(0.0));
        let _ = writeln!(s, r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="#3182bd"/>"##, x1 - x0, y1 - y0);
    }
    s.push_str("</svg>\n");
    s
}

fn kde(p: &PlotData) -> String {
    let k = &p.kde;
    let frame = Frame::new(k.grid.iter().copied(), k.density.iter().copied().chain([0.0]));
    let mut s = open("gain density", &frame, "gain", "density");
    polyline(&mut s, &frame, k.grid.iter().copied().zip(k.density.iter().copied()), PALETTE[0]);
    s.push_str("</svg>\n");
    s
}

fn qq(p: &PlotData) -> String {
    let q = &p.qq;
    let frame = Frame::new(q.theoretical_quantiles.iter().copied(), q.sample_quantiles.iter().copied());
    let mut s = open("normal quantile plot", &frame, "theoretical quantile", "gain");
    for (t, v) in q.theoretical_quantiles.iter().zip(&q.sample_quantiles) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}"/>"#, frame.px(*t), frame.py(*v), PALETTE[0]);
    }
    s.push_str("</svg>\n");
    s
}

fn overlay(p: &PlotData) -> String {
    let o = &p.overlay;
    let frame = Frame::new(o.grid.iter().copied(), o.series.iter().flat_map(|(_, _, d)| d.iter().copied()).chain([0.0]));
    let mut s = open("gain density by cohort", &frame, "gain", "density");
    for (k, (label, _, d)) in o.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        polyline(&mut s, &frame, o.grid.iter().copied().zip(d.iter().copied()), color);
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, WIDTH - MARGIN - 80.0, MARGIN + 14.0 * (k as f64 + 1.0), escape(label));
    }
    s.push_str("</svg>\n");
    s
}

fn scatter(sc: &Scatter) -> String {
    let frame = Frame::new(sc.points.iter().map(|p| p.x), sc.points.iter().map(|p| p.y));
    let title = match &sc.fit {
        Some(f) => format!("{} vs {} (r² = {:.2})", sc.y_name, sc.x_name, f.r_squared),
        None => format!("{} vs {}", sc.y_name, sc.x_name),
    };
    let mut s = open(&title, &frame, sc.x_name, sc.y_name);
    for p in &sc.points {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}" fill-opacity="0.7"/>"#, frame.px(p.x), frame.py(p.y), PALETTE[0]);
    }
    if let Some(f) = &sc.fit {
        let steps = 100;
        let xs = (0..=steps).map(|i| frame.x.0 + (frame.x.1 - frame.x.0) * i as f64 / steps as f64);
        let line = xs.map(|x| (x, f.predict(x))).filter(|&(_, y)| y >= frame.y.0 && y <= frame.y.1);
        polyline(&mut s, &frame, line, PALETTE[1]);
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_all(p: &PlotData) -> Vec<(&'static str, String)> {
    vec![
        ("gain_histogram", histogram(p)),
        ("gain_kde", kde(p)),
        ("gain_qq", qq(p)),
        ("cohort_kde_overlay", overlay(p)),
        ("gain_vs_initial_scatter", scatter(&p.gain_vs_initial)),
        ("increase_vs_initial_scatter", scatter(&p.increase_vs_initial)),
    ]
}
