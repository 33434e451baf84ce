//! Static SVG trajectory plots.
//!
//! Starts are drawn as filled circles of the agent radius, targets as
//! crosses, and paths as polylines. Reflection traces use two colors (one per
//! side), circle traces one color per ring, anything else an evenly spaced
//! hue per agent. Output depends only on the trace, so it is byte-stable.

use std::fmt::Write as _;

use lacnav_core::{ScenarioKind, SimTrace, Vec2};

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 20.0;
/// Polylines are thinned to at most this many points per agent.
const MAX_POINTS: usize = 2000;

fn hue_to_hex(h: f64) -> String {
    // HSL with s = 0.65, l = 0.45
    let (s, l) = (0.65, 0.45);
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let hp = (h.rem_euclid(1.0)) * 6.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

fn palette(trace: &SimTrace) -> Vec<String> {
    const SIDES: [&str; 2] = ["#1f77b4", "#d62728"];
    match trace.meta.scenario {
        ScenarioKind::Reflection => trace
            .agents
            .iter()
            .map(|a| SIDES[(a.group % 2) as usize].to_string())
            .collect(),
        ScenarioKind::Circle => {
            let rings = trace.agents.iter().map(|a| a.group + 1).max().unwrap_or(1);
            trace
                .agents
                .iter()
                .map(|a| hue_to_hex(f64::from(a.group) / f64::from(rings)))
                .collect()
        }
        _ => {
            let n = trace.agents.len().max(1) as f64;
            (0..trace.agents.len()).map(|i| hue_to_hex(i as f64 / n)).collect()
        }
    }
}

struct Frame {
    min: Vec2,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = Vec2>, pad: f64) -> Frame {
        let mut bounds: Option<[f64; 4]> = None;
        for p in points {
            let b = bounds.get_or_insert([p.x, p.y, p.x, p.y]);
            *b = [b[0].min(p.x), b[1].min(p.y), b[2].max(p.x), b[3].max(p.y)];
        }
        let [x0, y0, x1, y1] = bounds.unwrap_or([-1.0, -1.0, 1.0, 1.0]);
        let lo = Vec2::new(x0 - pad, y0 - pad);
        let hi = Vec2::new(x1 + pad, y1 + pad);
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        let scale = (CANVAS - 2.0 * MARGIN) / span;
        Frame {
            min: lo,
            scale,
            width: (hi.x - lo.x) * scale + 2.0 * MARGIN,
            height: (hi.y - lo.y) * scale + 2.0 * MARGIN,
        }
    }

    /// SVG coordinates; y grows downward, so world y is flipped.
    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            self.height - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

/// Renders the trace as an SVG document.
pub fn render_svg(trace: &SimTrace) -> String {
    let r = trace.meta.r;
    let frame = Frame::fit(
        trace
            .agents
            .iter()
            .flat_map(|a| [a.start, a.target])
            .chain(trace.steps.iter().flat_map(|s| s.agents.iter().map(|a| a.position))),
        r,
    );
    let colors = palette(trace);
    let stride = trace.steps.len().div_ceil(MAX_POINTS).max(1);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#,
        w = frame.width,
        h = frame.height
    );
    let _ = writeln!(
        svg,
        "<title>{} / {}: {} agents, {}</title>",
        trace.meta.scenario,
        trace.meta.policy,
        trace.agents.len(),
        trace.termination.as_str()
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    for i in 0..trace.agents.len() {
        let mut pts: Vec<Vec2> = trace
            .steps
            .iter()
            .step_by(stride)
            .filter_map(|s| s.agents.get(i).map(|rec| rec.position))
            .collect();
        if let Some(last) = trace.steps.last().and_then(|s| s.agents.get(i)) {
            if pts.last() != Some(&last.position) {
                pts.push(last.position);
            }
        }
        if pts.len() < 2 {
            continue;
        }
        let _ = write!(svg, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"", colors[i]);
        for (k, p) in pts.iter().enumerate() {
            let (x, y) = frame.map(*p);
            let sep = if k == 0 { "" } else { " " };
            let _ = write!(svg, "{sep}{x:.2},{y:.2}");
        }
        svg.push_str("\"/>\n");
    }

    let radius = r * frame.scale;
    for (i, a) in trace.agents.iter().enumerate() {
        let (x, y) = frame.map(a.start);
        let _ = writeln!(
            svg,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{radius:.2}\" fill=\"{}\" fill-opacity=\"0.35\" stroke=\"{}\"/>",
            colors[i], colors[i]
        );
        let (x, y) = frame.map(a.target);
        let arm = (radius * 0.7).max(2.0);
        let _ = writeln!(
            svg,
            "<path d=\"M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            x - arm,
            y - arm,
            x + arm,
            y + arm,
            x - arm,
            y + arm,
            x + arm,
            y - arm,
            colors[i]
        );
    }
    svg.push_str("</svg>\n");
    svg
}
