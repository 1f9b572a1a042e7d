//! Hand-written SVG spectral portraits: thresholds as dots, rays as clipped
//! lines, eigenvalues as crosses. Drawing coordinates are μ-plane coordinates
//! with the imaginary axis flipped.

use std::fmt::Write as _;

use crate::spectral::{SpectrumReport, Tag, Window};
use crate::C64;

#[derive(Debug, Clone)]
pub struct Portrait<'a> {
    pub lambda: C64,
    pub thresholds: &'a [f64],
    pub ray_angle: f64,
    pub truncation_angle: Option<f64>,
    pub report: &'a SpectrumReport,
    pub window: Window,
}

/// Viewport covering thresholds and eigenvalues with a margin.
pub fn auto_window(thresholds: &[f64], eigs: &[C64]) -> Window {
    let mut re_min = 0.0f64;
    let mut re_max = thresholds.iter().copied().fold(1.0, f64::max);
    let mut im_min = -1.0f64;
    let mut im_max = 1.0f64;
    for z in eigs {
        re_min = re_min.min(z.re);
        re_max = re_max.max(z.re);
        im_min = im_min.min(z.im);
        im_max = im_max.max(z.im);
    }
    let pad_re = 0.05 * (re_max - re_min);
    let pad_im = 0.05 * (im_max - im_min).max(re_max - re_min) * 0.2;
    Window {
        re_min: re_min - pad_re,
        re_max: re_max + pad_re,
        im_min: im_min - pad_im,
        im_max: im_max + pad_im,
    }
}

/// Liang–Barsky clip of the ray `p + t·d`, `t ≥ 0`, to the window.
fn clip_ray(p: C64, d: C64, w: &Window) -> Option<(C64, C64)> {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for (q, dq, lo, hi) in [(p.re, d.re, w.re_min, w.re_max), (p.im, d.im, w.im_min, w.im_max)] {
        if dq == 0.0 {
            if q < lo || q > hi {
                return None;
            }
            continue;
        }
        let (a, b) = ((lo - q) / dq, (hi - q) / dq);
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    (t0 <= t1 && t1.is_finite()).then(|| (p + d * t0, p + d * t1))
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

pub fn render(p: &Portrait) -> String {
    let w = &p.window;
    let width = w.re_max - w.re_min;
    let height = w.im_max - w.im_min;
    let mark = 0.008 * width.max(height);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="800" height="{}" viewBox="{} {} {} {}" preserveAspectRatio="none">"#,
        (800.0 * (height / width).clamp(0.25, 1.0)).round(),
        num(w.re_min),
        num(-w.im_max),
        num(width),
        num(height)
    );
    let _ = writeln!(
        s,
        r#"<metadata>{{"lambda":[{},{}],"ray_angle":{},"truncation_angle":{}}}</metadata>"#,
        p.lambda.re,
        p.lambda.im,
        p.ray_angle,
        p.truncation_angle.map_or("null".to_string(), |a| a.to_string())
    );
    let _ = writeln!(s, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#, num(w.re_min), num(-w.im_max), num(width), num(height));
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{}" y1="0" x2="{}" y2="0" stroke="#999" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
        num(w.re_min),
        num(w.re_max)
    );
    let dir = C64::from_polar(1.0, p.ray_angle);
    for (j, &nu) in p.thresholds.iter().enumerate() {
        if let Some((a, b)) = clip_ray(C64::new(nu, 0.0), dir, w) {
            let _ = writeln!(
                s,
                r##"<line class="ray" data-index="{}" data-angle="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1f77b4" stroke-width="1.5" vector-effect="non-scaling-stroke"/>"##,
                j + 1,
                p.ray_angle,
                num(a.re),
                num(-a.im),
                num(b.re),
                num(-b.im)
            );
        }
    }
    for &nu in p.thresholds {
        if nu >= w.re_min && nu <= w.re_max {
            let _ = writeln!(
                s,
                r##"<circle class="threshold" cx="{}" cy="0" r="{}" fill="#d62728"/>"##,
                num(nu),
                num(1.2 * mark)
            );
        }
    }
    for e in &p.report.entries {
        let color = match e.tag {
            Tag::Ray => "#555555",
            Tag::Discrete => "#2ca02c",
            Tag::Resonance => "#9467bd",
            Tag::Unresolved => "#ff7f0e",
        };
        let (x, y) = (e.mu.re, -e.mu.im);
        let _ = writeln!(
            s,
            r#"<path class="eigenvalue {}" d="M{} {}L{} {}M{} {}L{} {}" stroke="{color}" stroke-width="1" vector-effect="non-scaling-stroke"/>"#,
            e.tag.as_str(),
            num(x - mark),
            num(y - mark),
            num(x + mark),
            num(y + mark),
            num(x - mark),
            num(y + mark),
            num(x + mark),
            num(y - mark)
        );
    }
    s.push_str("</svg>\n");
    s
}
