//! Local action cells.
//!
//! Every neighbor `j` of agent `i` contributes a velocity half-plane
//! `v · u_ij ≤ c_ij` with `c_ij = (‖p_ij‖ - 2r) / 2δ`. Staying inside all of
//! them keeps the agent within its buffered Voronoi cell for the next update.
//! The half-plane is then pulled toward the origin by `1 - λ + θ_ij λ`, where
//! the risk scale `θ_ij` shrinks as the neighbor closes in within the
//! look-ahead horizon `τ`. The cell itself is a fan of `n` rays around the
//! goal direction, each clipped to the longest prefix that satisfies every
//! safe half-plane.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geom::{rho, Angle, Vec2};

pub type AgentId = u32;

/// Absolute distance slack (world units) tolerated below `2r` before two
/// agents count as overlapping. Absorbs floating point rounding of agents
/// that were driven exactly onto a constraint boundary.
pub const OVERLAP_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LacError {
    #[error("agents {a} and {b} overlap: center distance {distance} < 2r = {min_distance}")]
    Overlap {
        a: AgentId,
        b: AgentId,
        distance: f64,
        min_distance: f64,
    },
    #[error("agent {0} is already at its target; no goal direction")]
    AtTarget(AgentId),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam {
        field: &'static str,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub id: AgentId,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LacParams {
    /// Agent radius (world units).
    pub r: f64,
    /// Maximum speed (units/s).
    pub v_max: f64,
    /// Update interval (s).
    pub delta: f64,
    /// Look-ahead horizon for the risk scale (s).
    pub tau: f64,
    /// Relax factor.
    pub lambda: f64,
    pub n_actions: usize,
}

impl Default for LacParams {
    fn default() -> Self {
        LacParams {
            r: 10.0,
            v_max: 50.0,
            delta: 0.01,
            tau: 0.05,
            lambda: 0.5,
            n_actions: 8,
        }
    }
}

impl LacParams {
    pub fn validate(&self) -> Result<(), LacError> {
        let invalid = |field, reason| Err(LacError::InvalidParam { field, reason });
        if !(self.r.is_finite() && self.r > 0.0) {
            return invalid("r", "must be finite and > 0");
        }
        if !(self.v_max.is_finite() && self.v_max > 0.0) {
            return invalid("v_max", "must be finite and > 0");
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return invalid("delta", "must be finite and > 0");
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return invalid("tau", "must be finite and > 0");
        }
        if self.tau < self.delta {
            return invalid("tau", "must be >= delta for the neighbor cutoff to be sound");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return invalid("lambda", "must lie in [0, 1]");
        }
        if self.n_actions < 4 {
            return invalid("n_actions", "must be >= 4");
        }
        Ok(())
    }
}

/// Neighbors farther than this never constrain a cell.
pub fn neighbor_cutoff(params: &LacParams) -> f64 {
    2.0 * params.v_max * params.tau + 2.0 * params.r
}

/// Center distance at which [`bvc_bound`] reports an overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub distance: f64,
}

/// Unit normal `u_ij` and bound `c_ij` of the velocity half-plane that keeps
/// agent `i` inside its buffered Voronoi cell with respect to `j`.
pub fn bvc_bound(p_i: Vec2, p_j: Vec2, params: &LacParams) -> Result<(Vec2, f64), Overlap> {
    let offset = p_j - p_i;
    let distance = offset.norm();
    let min_distance = 2.0 * params.r;
    if distance < min_distance - OVERLAP_SLACK || distance == 0.0 {
        return Err(Overlap { distance });
    }
    let u = offset / distance;
    let c = ((distance - min_distance) / (2.0 * params.delta)).max(0.0);
    Ok((u, c))
}

/// Risk scale `θ_ij ∈ [0, 1]`; `1` means no approach risk within `τ`.
///
/// The closing speed `max{0, c_ij - v_j · u_ij}` may be zero, in which case
/// the neighbor cannot reach the shared boundary and the scale is `1`.
pub fn risk_scale(c: f64, u: Vec2, v_j: Vec2, p_dist: f64, params: &LacParams) -> f64 {
    let closing = (c - v_j.dot(u)).max(0.0);
    if closing == 0.0 {
        return 1.0;
    }
    let gap = (p_dist - 2.0 * params.r).max(0.0);
    (gap / (closing * params.tau)).min(1.0)
}

/// `{v : v · normal ≤ bound}` in velocity space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafeHalfPlane {
    pub normal: Vec2,
    pub bound: f64,
    pub source: AgentId,
}

impl SafeHalfPlane {
    /// `bound - v · normal`; non-negative inside the half-plane.
    #[inline]
    pub fn slack(&self, v: Vec2) -> f64 {
        self.bound - v.dot(self.normal)
    }

    /// Largest `s ∈ [0, 1]` with `s · v` inside the half-plane.
    #[inline]
    pub fn max_scale(&self, v: Vec2) -> f64 {
        let proj = v.dot(self.normal);
        if proj <= 0.0 {
            1.0
        } else {
            (self.bound / proj).clamp(0.0, 1.0)
        }
    }
}

/// The BVC half-plane scaled by `1 - λ + θ λ` for a given risk scale.
pub fn depressed_half_plane(
    normal: Vec2,
    c: f64,
    theta: f64,
    lambda: f64,
    source: AgentId,
) -> SafeHalfPlane {
    SafeHalfPlane {
        normal,
        bound: (1.0 - lambda + theta * lambda) * c,
        source,
    }
}

pub fn safe_half_plane(
    me: &AgentSnapshot,
    other: &AgentSnapshot,
    params: &LacParams,
) -> Result<SafeHalfPlane, LacError> {
    let (u, c) = bvc_bound(me.position, other.position, params).map_err(|o| LacError::Overlap {
        a: me.id,
        b: other.id,
        distance: o.distance,
        min_distance: 2.0 * params.r,
    })?;
    let theta = risk_scale(c, u, other.velocity, me.position.distance(other.position), params);
    Ok(depressed_half_plane(u, c, theta, params.lambda, other.id))
}

/// The finite set of candidate velocities of one agent.
///
/// `actions[k]` lies on the ray at `goal_dir + k·2π/n` (counterclockwise)
/// and has length at most `max_speed`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionCell {
    pub actions: Vec<Vec2>,
    pub goal_dir: Angle,
    pub max_speed: f64,
}

impl ActionCell {
    #[inline]
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Counterclockwise offset of action `k` from the goal direction.
    #[inline]
    pub fn offset_angle(&self, k: usize) -> f64 {
        action_offset(k, self.len())
    }

    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.actions.iter().map(|a| a.norm())
    }
}

#[inline]
pub fn action_offset(k: usize, n: usize) -> f64 {
    k as f64 * TAU / n as f64
}

/// Speed cap `min{v_max, ‖d - p‖/δ}`: never overshoot the target.
#[inline]
pub fn speed_cap(position: Vec2, target: Vec2, params: &LacParams) -> f64 {
    params.v_max.min((target - position).norm() / params.delta)
}

/// Builds the fan of `n` rays of length `max_speed` around `goal` and clips
/// each against every half-plane. Clipping composes as the minimum scale.
pub fn cell_from_planes(
    goal: Vec2,
    max_speed: f64,
    planes: &[SafeHalfPlane],
    n: usize,
) -> Option<ActionCell> {
    let goal_unit = goal.normalized()?;
    let goal_dir = rho(goal).ok()?;
    let actions = (0..n)
        .map(|k| {
            let dir = if k == 0 {
                goal_unit
            } else {
                goal_unit.rotated(action_offset(k, n))
            };
            let ray = dir * max_speed;
            let scale = planes
                .iter()
                .map(|p| p.max_scale(ray))
                .fold(1.0f64, f64::min);
            ray * scale
        })
        .collect();
    Some(ActionCell {
        actions,
        goal_dir,
        max_speed,
    })
}

/// The local action cell of `me` heading for `target` among `neighbors`.
///
/// `neighbors` must not contain `me`; whether it is pre-filtered to the
/// [`neighbor_cutoff`] radius does not change the result.
pub fn build_cell(
    me: &AgentSnapshot,
    target: Vec2,
    neighbors: &[AgentSnapshot],
    params: &LacParams,
) -> Result<ActionCell, LacError> {
    let planes = neighbors
        .iter()
        .map(|other| safe_half_plane(me, other, params))
        .collect::<Result<Vec<_>, _>>()?;
    let goal = target - me.position;
    cell_from_planes(goal, speed_cap(me.position, target, params), &planes, params.n_actions)
        .ok_or(LacError::AtTarget(me.id))
}
