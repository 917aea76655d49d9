//! Minimal SVG rendering of a log N-log S plot: empirical points, the
//! fitted piecewise-linear overlay, and dashed vertical lines at the
//! estimated breakpoints. Static output only.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - 2.0 * MARGIN)
    }
}

pub fn render(
    empirical: &[(f64, f64)],
    overlay: &[(f64, f64)],
    breakpoints: &[f64],
) -> String {
    let all: Vec<(f64, f64)> = empirical.iter().chain(overlay).copied().collect();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad_x = 0.05 * (x_hi - x_lo).max(1e-9);
    let pad_y = 0.05 * (y_hi - y_lo).max(1e-9);
    let f = Frame {
        x_lo: x_lo - pad_x,
        x_hi: x_hi + pad_x,
        y_lo: y_lo - pad_y,
        y_hi: y_hi + pad_y,
    };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // axes
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
        MARGIN,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
        MARGIN,
        MARGIN,
        MARGIN,
        HEIGHT - MARGIN
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = f.x_lo + t * (f.x_hi - f.x_lo);
        let yv = f.y_lo + t * (f.y_hi - f.y_lo);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{:.2}</text>"#,
            f.x(xv),
            HEIGHT - MARGIN + 16.0,
            xv
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{:.2}</text>"#,
            MARGIN - 6.0,
            f.y(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">log10 S</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">log10 N(&gt;S)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for &bx in breakpoints {
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#4477cc" stroke-width="1" stroke-dasharray="5,4"/>"##,
            f.x(bx),
            MARGIN,
            f.x(bx),
            HEIGHT - MARGIN
        );
    }

    if overlay.len() >= 2 {
        let pts: Vec<String> = overlay
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", f.x(x), f.y(y)))
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#cc3333" stroke-width="2"/>"##,
            pts.join(" ")
        );
    }

    for &(x, y) in empirical {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="black"/>"#,
            f.x(x),
            f.y(y)
        );
    }

    s.push_str("</svg>\n");
    s
}
