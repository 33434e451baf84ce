//! Buffered Voronoi cell baseline.
//!
//! The agent moves toward the point of its buffered Voronoi cell closest to
//! the target. In displacement coordinates `x = p - p_i` the cell is
//! `x · u_ij ≤ ‖p_ij‖/2 - r` for every neighbor, and the projection of the
//! goal onto this polygon is found exactly by enumerating candidates: the
//! goal itself, its projection onto each edge line, and every pairwise
//! line intersection.
//!
//! Pure closest-point motion deadlocks whenever agents block each other
//! symmetrically (two agents head-on is enough). Like the original BVC
//! controller, a stuck agent falls back to the right-hand rule: it slides
//! along its most goal-facing active edge, toward its right.

use alloc::vec::Vec;

use crate::cell::{bvc_bound, AgentSnapshot, LacError, LacParams, SafeHalfPlane};
use crate::geom::Vec2;

/// One constraint `x · normal ≤ offset` in displacement space.
#[derive(Debug, Clone, Copy)]
struct Edge {
    normal: Vec2,
    offset: f64,
}

impl Edge {
    fn feasible(&self, x: Vec2) -> bool {
        x.dot(self.normal) <= self.offset + 1e-9 * self.offset.abs().max(1.0)
    }

    fn active(&self, x: Vec2) -> bool {
        (x.dot(self.normal) - self.offset).abs() <= 1e-9 * self.offset.abs().max(1.0)
    }
}

/// Below this fraction of its speed cap an agent on an active edge counts
/// as stuck and switches to the right-hand rule.
pub const STUCK_SPEED_FRACTION: f64 = 0.1;

/// Closest point to `goal` inside the intersection of `edges`.
fn project_onto_cell(goal: Vec2, edges: &[Edge]) -> Option<Vec2> {
    let mut best: Option<(f64, Vec2)> = None;
    let mut consider = |x: Vec2| {
        if !x.is_finite() || !edges.iter().all(|e| e.feasible(x)) {
            return;
        }
        let d = (x - goal).norm_sq();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, x));
        }
    };

    consider(goal);
    for e in edges {
        consider(goal - e.normal * (goal.dot(e.normal) - e.offset));
    }
    for (i, a) in edges.iter().enumerate() {
        for b in &edges[i + 1..] {
            let det = a.normal.cross(b.normal);
            if det.abs() < 1e-12 {
                continue;
            }
            // Cramer's rule on [a.n; b.n] x = [a.o; b.o]
            let x = (a.offset * b.normal.y - b.offset * a.normal.y) / det;
            let y = (a.normal.x * b.offset - b.normal.x * a.offset) / det;
            consider(Vec2::new(x, y));
        }
    }
    best.map(|(_, x)| x)
}

pub fn bvc_select(
    me: &AgentSnapshot,
    target: Vec2,
    neighbors: &[AgentSnapshot],
    params: &LacParams,
) -> Result<Vec2, LacError> {
    let mut edges = Vec::with_capacity(neighbors.len());
    let mut planes = Vec::with_capacity(neighbors.len());
    for n in neighbors {
        let (u, c) = bvc_bound(me.position, n.position, params).map_err(|o| LacError::Overlap {
            a: me.id,
            b: n.id,
            distance: o.distance,
            min_distance: 2.0 * params.r,
        })?;
        edges.push(Edge {
            normal: u,
            offset: c * params.delta,
        });
        planes.push(SafeHalfPlane {
            normal: u,
            bound: c,
            source: n.id,
        });
    }
    let empty = LacError::InvalidParam {
        field: "neighbors",
        reason: "buffered Voronoi cell is empty",
    };
    let goal = target - me.position;
    let mut point = project_onto_cell(goal, &edges).ok_or(empty.clone())?;
    let cap = params.v_max.min(goal.norm() / params.delta);
    if point.norm() < STUCK_SPEED_FRACTION * cap * params.delta {
        let blocking = edges
            .iter()
            .filter(|e| e.active(point))
            .max_by(|a, b| a.normal.dot(goal).total_cmp(&b.normal.dot(goal)));
        if let Some(edge) = blocking {
            let right = Vec2::new(edge.normal.y, -edge.normal.x);
            let detour = point + right * (params.v_max * params.delta);
            point = project_onto_cell(detour, &edges).ok_or(empty)?;
        }
    }
    let v = (point / params.delta).clamp_norm(params.v_max);
    // rounding in the candidate solve can leave v a hair outside; pull it in
    let scale = planes.iter().map(|p| p.max_scale(v)).fold(1.0f64, f64::min);
    Ok(v * scale)
}
