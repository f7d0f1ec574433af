//! Deterministic SVG rendering for the growth-share matrix and the life-cycle curve.
//!
//! Canvases have fixed sizes, coordinates are printed with two decimals and
//! elements are emitted in field-id order, so identical inputs give identical bytes.

use std::fmt::Write as _;

use crate::trends::lifecycle::{logistic, LifecyclePoint};
use crate::trends::matrix::{MatrixResult, Quadrant};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 70.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn color(q: Quadrant) -> &'static str {
    match q {
        Quadrant::TrendingStar => "#d62728",
        Quadrant::Foundational => "#1f77b4",
        Quadrant::RisingQuestionMark => "#ff7f0e",
        Quadrant::Niche => "#7f7f7f",
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn padded(values: impl Iterator<Item = f64>, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if !(hi > lo) {
            lo -= 1.0;
            hi += 1.0;
        }
        let pad = 0.08 * (hi - lo);
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"30.00\" font-size=\"18\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
}

fn frame(s: &mut String, x_label: &str, y_label: &str) {
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN:.2}\" y=\"{MARGIN:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#000000\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - MARGIN / 2.0 + 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        "<text x=\"20.00\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20.00 {:.2})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

/// Scatter of transformed total (x) against transformed growth (y), split into quadrants.
pub fn matrix_svg(matrix: &MatrixResult) -> String {
    let x = Axis::padded(matrix.points.iter().map(|p| p.tf_total), MARGIN, WIDTH - MARGIN);
    let y = Axis::padded(matrix.points.iter().map(|p| p.tf_growth), HEIGHT - MARGIN, MARGIN);
    let mut s = String::new();
    header(&mut s, "Growth-share matrix");
    frame(&mut s, "total papers (Yeo-Johnson transformed)", "growth rate (Yeo-Johnson transformed)");

    let sx = x.map(matrix.total_split);
    let sy = y.map(matrix.growth_split);
    let _ = writeln!(
        s,
        "<line class=\"split\" x1=\"{sx:.2}\" y1=\"{MARGIN:.2}\" x2=\"{sx:.2}\" y2=\"{:.2}\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>",
        HEIGHT - MARGIN
    );
    let _ = writeln!(
        s,
        "<line class=\"split\" x1=\"{MARGIN:.2}\" y1=\"{sy:.2}\" x2=\"{:.2}\" y2=\"{sy:.2}\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>",
        WIDTH - MARGIN
    );
    let corners = [
        (Quadrant::RisingQuestionMark, MARGIN + 10.0, MARGIN + 20.0, "start"),
        (Quadrant::TrendingStar, WIDTH - MARGIN - 10.0, MARGIN + 20.0, "end"),
        (Quadrant::Niche, MARGIN + 10.0, HEIGHT - MARGIN - 10.0, "start"),
        (Quadrant::Foundational, WIDTH - MARGIN - 10.0, HEIGHT - MARGIN - 10.0, "end"),
    ];
    for (q, cx, cy, anchor) in corners {
        let _ = writeln!(
            s,
            "<text class=\"quadrant-label\" x=\"{cx:.2}\" y=\"{cy:.2}\" font-size=\"14\" fill=\"{}\" text-anchor=\"{anchor}\">{}</text>",
            color(q),
            q.as_str()
        );
    }

    let mut points: Vec<_> = matrix.points.iter().collect();
    points.sort_by(|a, b| a.field_id.cmp(&b.field_id));
    for p in points {
        let (px, py) = (x.map(p.tf_total), y.map(p.tf_growth));
        let id = escape(&p.field_id);
        let _ = writeln!(
            s,
            "<g class=\"field\" data-field=\"{id}\" data-quadrant=\"{}\"><circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"5\" fill=\"{}\"/><text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">{id}</text></g>",
            p.quadrant.as_str(),
            color(p.quadrant),
            px + 7.0,
            py + 3.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Logistic curve over [-6, 6] with a marker per field at (x_norm, y).
pub fn lifecycle_svg(points: &[LifecyclePoint]) -> String {
    let x = Axis {
        lo: -6.0,
        hi: 6.0,
        px_lo: MARGIN,
        px_hi: WIDTH - MARGIN,
    };
    let y = Axis {
        lo: -0.05,
        hi: 1.05,
        px_lo: HEIGHT - MARGIN,
        px_hi: MARGIN,
    };
    let mut s = String::new();
    header(&mut s, "Innovation life cycle");
    frame(&mut s, "normalised position", "cumulative adoption");

    let curve: Vec<String> = (0..=240)
        .map(|i| {
            let xv = -6.0 + 0.05 * i as f64;
            format!("{:.2},{:.2}", x.map(xv), y.map(logistic(xv)))
        })
        .collect();
    let _ = writeln!(
        s,
        "<polyline class=\"curve\" points=\"{}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"2\"/>",
        curve.join(" ")
    );
    let ix = x.map(0.0);
    let _ = writeln!(
        s,
        "<line class=\"inflection\" x1=\"{ix:.2}\" y1=\"{MARGIN:.2}\" x2=\"{ix:.2}\" y2=\"{:.2}\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>",
        HEIGHT - MARGIN
    );

    let mut sorted: Vec<_> = points.iter().collect();
    sorted.sort_by(|a, b| a.field_id.cmp(&b.field_id));
    for p in sorted {
        let (px, py) = (x.map(p.x_norm), y.map(p.y));
        let id = escape(&p.field_id);
        let _ = writeln!(
            s,
            "<g class=\"field\" data-field=\"{id}\" data-x-norm=\"{:.4}\" data-y=\"{:.4}\"><circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"4\" fill=\"#1f77b4\"/><text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">{id}</text></g>",
            p.x_norm,
            p.y,
            px + 6.0,
            py - 6.0
        );
    }
    s.push_str("</svg>\n");
    s
}
