//! Minimal SVG plots of traces, capability spaces and thrust distributions.

use std::fmt::Write as _;

use nalgebra::Vector3;

use super::metrics::PoseSample;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 36.0;

struct Frame {
    lo: [f64; 2],
    scale: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = [f64; 2]>) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if !lo[0].is_finite() {
            return Self { lo: [0.0, 0.0], scale: 1.0 };
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let scale = ((W - 2.0 * PAD).min(H - 2.0 * PAD)) / span;
        Self { lo, scale }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (PAD + (p[0] - self.lo[0]) * self.scale, H - PAD - (p[1] - self.lo[1]) * self.scale)
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{PAD}" y="20" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(s: &mut String, frame: &Frame, pts: &[[f64; 2]], stroke: &str, dash: bool) {
    let mut d = String::new();
    for p in pts {
        let (x, y) = frame.map(*p);
        let _ = write!(d, "{x:.2},{y:.2} ");
    }
    let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"{dash}/>"#, d.trim_end());
}

/// Top view of a tracked trace (solid) over its reference (dashed).
pub fn trajectory_svg(title: &str, trace: &[PoseSample], reference: &[PoseSample]) -> String {
    let xy = |s: &[PoseSample]| s.iter().map(|p| [p.position.x, p.position.y]).collect::<Vec<_>>();
    let (a, b) = (xy(trace), xy(reference));
    let frame = Frame::fit(a.iter().chain(&b).copied());
    let mut s = open(title);
    polyline(&mut s, &frame, &b, "#888888", true);
    polyline(&mut s, &frame, &a, "#1f5fbf", false);
    s.push_str("</svg>\n");
    s
}

/// Scatter of space boundary points projected onto the x-y plane.
pub fn space_svg(title: &str, points: &[Vector3<f64>]) -> String {
    let pts: Vec<[f64; 2]> = points.iter().map(|p| [p.x, p.y]).collect();
    let frame = Frame::fit(pts.iter().copied());
    let mut s = open(title);
    for p in &pts {
        let (x, y) = frame.map(*p);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="1.5" fill="#bf3f1f"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

/// One mirrored histogram per series, side by side.
pub fn violin_svg(title: &str, series: &[Vec<f64>]) -> String {
    const BINS: usize = 24;
    let mut s = open(title);
    let max = series.iter().flatten().cloned().fold(0.0_f64, f64::max).max(1e-12);
    let n = series.len().max(1) as f64;
    let slot = (W - 2.0 * PAD) / n;
    for (i, values) in series.iter().enumerate() {
        let mut counts = [0usize; BINS];
        for &v in values {
            counts[((v / max * BINS as f64) as usize).min(BINS - 1)] += 1;
        }
        let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let cx = PAD + slot * (i as f64 + 0.5);
        let bin_h = (H - 2.0 * PAD) / BINS as f64;
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (b, &c) in counts.iter().enumerate() {
            let y = H - PAD - (b as f64 + 0.5) * bin_h;
            let half = 0.45 * slot * c as f64 / peak;
            left.push((cx - half, y));
            right.push((cx + half, y));
        }
        right.reverse();
        let mut d = String::new();
        for (x, y) in left.iter().chain(&right) {
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(s, r##"<polygon points="{}" fill="#7fa7df" stroke="#1f5fbf"/>"##, d.trim_end());
        let _ = writeln!(s, r#"<text x="{cx:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{i}</text>"#, H - PAD + 14.0);
    }
    s.push_str("</svg>\n");
    s
}
