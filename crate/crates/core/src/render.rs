//! Deterministic SVG pictures of diagrams.
//!
//! - y-up coordinates; the viewBox is the feature bounding box plus a 10%
//!   margin, so the same diagram always frames itself the same way.
//! - Rays are arrows clipped to the frame, nodes are crosses labeled with
//!   their total multiplicity, and traced geodesics can be overlaid as
//!   polylines.
//! - Output is a pure function of the inputs: rendering twice gives
//!   byte-identical files.

use crate::atlas::GeodesicPath;
use crate::diagram::EigenrayDiagram;
use crate::exact::Rat;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::fmt::Write as _;

fn qf(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(0.0)
}

/// Normalized fixed-point coordinate text; folds `-0` into `0`.
fn fmt(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.4}")
}

struct Frame {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl Frame {
    fn diagonal(&self) -> f64 {
        let w = self.max_x - self.min_x;
        let h = self.max_y - self.min_y;
        (w * w + h * h).sqrt()
    }

    /// Largest `t ≥ 0` with `base + t·dir` still inside the frame.
    fn exit_time(&self, base: (f64, f64), dir: (f64, f64)) -> f64 {
        let mut t = f64::INFINITY;
        if dir.0 > 0.0 {
            t = t.min((self.max_x - base.0) / dir.0);
        } else if dir.0 < 0.0 {
            t = t.min((self.min_x - base.0) / dir.0);
        }
        if dir.1 > 0.0 {
            t = t.min((self.max_y - base.1) / dir.1);
        } else if dir.1 < 0.0 {
            t = t.min((self.min_y - base.1) / dir.1);
        }
        t.max(0.0)
    }
}

fn line(out: &mut String, class: &str, a: (f64, f64), b: (f64, f64), width: f64) {
    let _ = writeln!(
        out,
        "  <line class=\"{class}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke-width=\"{}\"/>",
        fmt(a.0),
        fmt(-a.1),
        fmt(b.0),
        fmt(-b.1),
        fmt(width)
    );
}

/// Renders a diagram, with optional traced geodesics overlaid, to SVG text.
pub fn render_svg(diagram: &EigenrayDiagram, overlays: &[GeodesicPath]) -> String {
    // Feature points: ray bases, overlay vertices, and the origin.
    let mut xs = vec![0.0f64];
    let mut ys = vec![0.0f64];
    for e in diagram.elements() {
        xs.push(qf(&e.base.x));
        ys.push(qf(&e.base.y));
    }
    for path in overlays {
        for seg in &path.segments {
            let end = seg.end();
            xs.push(qf(&seg.start.x));
            ys.push(qf(&seg.start.y));
            xs.push(qf(&end.x));
            ys.push(qf(&end.y));
        }
    }
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in &xs {
        min_x = min_x.min(*x);
        max_x = max_x.max(*x);
    }
    for y in &ys {
        min_y = min_y.min(*y);
        max_y = max_y.max(*y);
    }
    // Degenerate extents widen to a unit box before the margin.
    if max_x - min_x < 2.0 {
        let pad = (2.0 - (max_x - min_x)) / 2.0;
        min_x -= pad;
        max_x += pad;
    }
    if max_y - min_y < 2.0 {
        let pad = (2.0 - (max_y - min_y)) / 2.0;
        min_y -= pad;
        max_y += pad;
    }
    let margin = 0.10 * (max_x - min_x).max(max_y - min_y);
    let frame = Frame {
        min_x: min_x - margin,
        min_y: min_y - margin,
        max_x: max_x + margin,
        max_y: max_y + margin,
    };
    let diag = frame.diagonal();
    let thin = 0.0015 * diag;
    let thick = 0.004 * diag;
    let cross = 0.018 * diag;
    let head = 0.03 * diag;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" stroke=\"black\" fill=\"none\">",
        fmt(frame.min_x),
        fmt(-frame.max_y),
        fmt(frame.max_x - frame.min_x),
        fmt(frame.max_y - frame.min_y)
    );

    // Axes.
    if frame.min_y <= 0.0 && frame.max_y >= 0.0 {
        line(&mut out, "axis", (frame.min_x, 0.0), (frame.max_x, 0.0), thin);
    }
    if frame.min_x <= 0.0 && frame.max_x >= 0.0 {
        line(&mut out, "axis", (0.0, frame.min_y), (0.0, frame.max_y), thin);
    }

    // Rays as arrows clipped to the frame.
    for e in diagram.elements() {
        let base = (qf(&e.base.x), qf(&e.base.y));
        let dx = e.dir.x.to_f64().unwrap_or(0.0);
        let dy = e.dir.y.to_f64().unwrap_or(0.0);
        let t = frame.exit_time(base, (dx, dy));
        let tip = (base.0 + t * dx, base.1 + t * dy);
        line(&mut out, "ray", base, tip, thick);
        let norm = (dx * dx + dy * dy).sqrt();
        let u = (dx / norm, dy / norm);
        let w = (-u.1, u.0);
        for side in [1.0, -1.0] {
            let back = (
                tip.0 - head * u.0 + side * 0.5 * head * w.0,
                tip.1 - head * u.1 + side * 0.5 * head * w.1,
            );
            line(&mut out, "arrowhead", tip, back, thick);
        }
    }

    // Nodes: one cross per distinct base point, labeled with the summed
    // multiplicity of the sub-rays planted there.
    let mut nodes: BTreeMap<(Rat, Rat), u32> = BTreeMap::new();
    for e in diagram.elements() {
        *nodes.entry((e.base.x.clone(), e.base.y.clone())).or_insert(0) += e.mult;
    }
    for ((x, y), mult) in &nodes {
        let c = (qf(x), qf(y));
        let _ = writeln!(out, "  <g class=\"node\">");
        line(&mut out, "cross", (c.0 - cross, c.1 - cross), (c.0 + cross, c.1 + cross), thick);
        line(&mut out, "cross", (c.0 - cross, c.1 + cross), (c.0 + cross, c.1 - cross), thick);
        let _ = writeln!(
            out,
            "    <text x=\"{}\" y=\"{}\" font-size=\"{}\" stroke=\"none\" fill=\"black\">{mult}</text>",
            fmt(c.0 + 1.4 * cross),
            fmt(-(c.1 + 1.4 * cross)),
            fmt(2.0 * cross)
        );
        let _ = writeln!(out, "  </g>");
    }

    // Geodesic overlays.
    for path in overlays {
        if path.segments.is_empty() {
            continue;
        }
        let mut points = String::new();
        for seg in &path.segments {
            let _ = write!(points, "{},{} ", fmt(qf(&seg.start.x)), fmt(-qf(&seg.start.y)));
        }
        let last = path.segments.last().unwrap().end();
        let _ = write!(points, "{},{}", fmt(qf(&last.x)), fmt(-qf(&last.y)));
        let _ = writeln!(
            out,
            "  <polyline class=\"geodesic\" points=\"{points}\" stroke-width=\"{}\" stroke-dasharray=\"{} {}\"/>",
            fmt(thick),
            fmt(2.0 * thick),
            fmt(2.0 * thick)
        );
    }

    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::Vec2Q;
    use crate::atlas::ChartAtlas;
    use crate::exact::{rat, rat_int};

    #[test]
    fn empty_diagram_renders_axes_only() {
        let svg = render_svg(&EigenrayDiagram::empty(), &[]);
        assert_eq!(svg.matches("class=\"axis\"").count(), 2);
        assert!(!svg.contains("class=\"ray\""));
        assert!(!svg.contains("class=\"node\""));
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn five_charts_renders_two_arrows_and_two_crosses() {
        let d = EigenrayDiagram::five_charts();
        let svg = render_svg(&d, &[]);
        assert_eq!(svg.matches("class=\"ray\"").count(), 2);
        assert_eq!(svg.matches("class=\"node\"").count(), 2);
        assert_eq!(svg.matches(">1</text>").count(), 2);
        // Deterministic down to the bytes.
        assert_eq!(svg, render_svg(&d, &[]));
        let reparsed = EigenrayDiagram::from_json_str(&d.to_json_string()).unwrap();
        assert_eq!(svg, render_svg(&reparsed, &[]));
    }

    #[test]
    fn overlays_draw_polylines() {
        let d = EigenrayDiagram::five_charts();
        let atlas = ChartAtlas::new(d.clone());
        let path = atlas
            .trace_geodesic(
                &Vec2Q::new(rat(-1, 2), rat(1, 3)),
                &Vec2Q::new(rat_int(1), rat_int(1)),
                &rat_int(4),
            )
            .unwrap();
        let svg = render_svg(&d, &[path]);
        assert_eq!(svg.matches("class=\"geodesic\"").count(), 1);
    }
}
