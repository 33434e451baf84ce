//! Velocity selection from a local action cell.
//!
//! * [`select_vel`]: the action of largest penalized length (LAC-Nav).
//! * [`learn::learn_step`]: win-stay/lose-shift bandit over the same actions
//!   (LAC-Learn).
//! * [`bvc::bvc_select`]: the buffered Voronoi cell baseline, which ignores
//!   the cell and heads for the closest safe point to the target.

pub mod bvc;
pub mod learn;

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cell::ActionCell;
use crate::geom::{angular_distance, Angle, Vec2};

pub use bvc::bvc_select;
pub use learn::{learn_step, select_act, wucb_scores, LearnParams, LearnerState};

/// Relative tolerance under which two scores count as tied.
pub const SCORE_TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    LacNav,
    LacLearn,
    Bvc,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::LacNav, PolicyKind::LacLearn, PolicyKind::Bvc];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::LacNav => "lac_nav",
            PolicyKind::LacLearn => "lac_learn",
            PolicyKind::Bvc => "bvc",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown policy (expected one of lac_nav, lac_learn, bvc)")]
pub struct UnknownPolicy;

impl FromStr for PolicyKind {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lac_nav" => Ok(PolicyKind::LacNav),
            "lac_learn" => Ok(PolicyKind::LacLearn),
            "bvc" => Ok(PolicyKind::Bvc),
            _ => Err(UnknownPolicy),
        }
    }
}

/// How the angle between an action and the goal direction is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyAngleMode {
    /// Shortest angular distance in `[0, π]`.
    #[default]
    Symmetric,
    /// Counterclockwise offset in `[0, 2π)`; action `n - 1` is penalized the most.
    Literal,
}

impl FromStr for PenaltyAngleMode {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symmetric" => Ok(PenaltyAngleMode::Symmetric),
            "literal" => Ok(PenaltyAngleMode::Literal),
            _ => Err("expected `symmetric` or `literal`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyParams {
    /// Penalty base in `(0, 1]`.
    pub zeta: f64,
    pub angle_mode: PenaltyAngleMode,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        PenaltyParams {
            zeta: 0.95,
            angle_mode: PenaltyAngleMode::Symmetric,
        }
    }
}

impl PenaltyParams {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.zeta > 0.0 && self.zeta <= 1.0 {
            Ok(())
        } else {
            Err("zeta must lie in (0, 1]")
        }
    }

    /// `ζ^{4a/π}` for an action at counterclockwise offset `offset` from the goal.
    pub fn factor(&self, offset: f64) -> f64 {
        let a = Angle::new(offset);
        let angle = match self.angle_mode {
            PenaltyAngleMode::Symmetric => angular_distance(a, Angle::ZERO),
            PenaltyAngleMode::Literal => a.radians(),
        };
        libm::pow(self.zeta, 4.0 * angle / PI)
    }
}

/// Penalized length of every action.
pub fn action_weights(cell: &ActionCell, params: &PenaltyParams) -> Vec<f64> {
    cell.actions
        .iter()
        .enumerate()
        .map(|(k, a)| params.factor(cell.offset_angle(k)) * a.norm())
        .collect()
}

/// Index of the largest score; near-ties (within [`SCORE_TIE_EPS`]) go to
/// the smallest index.
pub fn argmax(scores: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.into_iter().enumerate() {
        match best {
            None => best = Some((k, s)),
            Some((_, b)) if s > b + SCORE_TIE_EPS * b.abs().max(1.0) => best = Some((k, s)),
            _ => {}
        }
    }
    best.map(|(k, _)| k)
}

/// Index of the action with the largest penalized length.
pub fn select_index(cell: &ActionCell, params: &PenaltyParams) -> usize {
    argmax(action_weights(cell, params)).unwrap_or(0)
}

pub fn select_vel(cell: &ActionCell, params: &PenaltyParams) -> Vec2 {
    cell.actions[select_index(cell, params)]
}

/// Reward of the last performed action: total penalized length of the
/// resulting cell.
pub fn reward_of_cell(weights: &[f64]) -> f64 {
    weights.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{build_cell, cell_from_planes, AgentSnapshot, LacParams};
    use core::f64::consts::FRAC_PI_2;

    fn free_cell(len: f64) -> ActionCell {
        cell_from_planes(Vec2::new(1.0, 0.0), len, &[], 8).unwrap()
    }

    #[test]
    fn penalty_factors() {
        let p = PenaltyParams::default();
        assert!((p.factor(FRAC_PI_2) - 0.9025).abs() < 1e-12);
        assert!((p.factor(PI) - 0.81450625).abs() < 1e-12);
        assert_eq!(p.factor(0.0), 1.0);
        // symmetric: the right turn weighs the same as the left turn
        assert!((p.factor(3.0 * FRAC_PI_2) - 0.9025).abs() < 1e-12);

        let lit = PenaltyParams { angle_mode: PenaltyAngleMode::Literal, ..p };
        assert!((lit.factor(3.0 * FRAC_PI_2) - libm::pow(0.95, 6.0)).abs() < 1e-12);
    }

    #[test]
    fn weights_scale_with_length() {
        let w = action_weights(&free_cell(50.0), &PenaltyParams::default());
        assert!((w[0] - 50.0).abs() < 1e-12);
        assert!((w[2] - 0.9025 * 50.0).abs() < 1e-9);
        assert!((w[4] - 0.81450625 * 50.0).abs() < 1e-9);
        for k in 1..8 {
            assert!((w[k] - w[8 - k]).abs() < 1e-9);
        }
    }

    #[test]
    fn unconstrained_selects_goal_action() {
        let cell = free_cell(50.0);
        assert_eq!(select_index(&cell, &PenaltyParams::default()), 0);
        assert_eq!(select_vel(&cell, &PenaltyParams::default()), cell.actions[0]);
    }

    #[test]
    fn clipped_goal_action_prefers_detour() {
        let lac = LacParams::default();
        let me = AgentSnapshot { id: 0, position: Vec2::ZERO, velocity: Vec2::ZERO, radius: 10.0 };
        let other = AgentSnapshot { id: 1, position: Vec2::new(20.4, 0.0), ..me };
        let cell = build_cell(&me, Vec2::new(1000.0, 0.0), &[other], &lac).unwrap();
        let w = action_weights(&cell, &PenaltyParams::default());
        assert!((w[0] - 14.0).abs() < 1e-9);
        // the diagonal k = 1 is clipped too (to 14√2), so the orthogonal detour wins
        assert!((w[2] - 0.9025 * 50.0).abs() < 1e-9);
        let k = select_index(&cell, &PenaltyParams::default());
        assert_eq!(k, 2);
        assert!(w[k] > 14.0);
    }

    #[test]
    fn short_goal_action_loses_to_first_diagonal() {
        let mut cell = free_cell(50.0);
        cell.actions[0] = Vec2::new(14.0, 0.0);
        let w = action_weights(&cell, &PenaltyParams::default());
        assert!((w[1] - 47.5).abs() < 1e-9);
        assert_eq!(select_index(&cell, &PenaltyParams::default()), 1);
    }

    #[test]
    fn ties_break_to_smallest_index() {
        let mut cell = free_cell(50.0);
        cell.actions[0] = Vec2::ZERO;
        // k = 1 and k = 7 are mirror images
        assert_eq!(select_index(&cell, &PenaltyParams::default()), 1);
        assert_eq!(argmax([1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax([f64::INFINITY, f64::INFINITY]), Some(0));
        assert_eq!(argmax(core::iter::empty()), None);
    }

    #[test]
    fn select_is_scale_invariant() {
        let lac = LacParams::default();
        let me = AgentSnapshot { id: 0, position: Vec2::ZERO, velocity: Vec2::ZERO, radius: 10.0 };
        let other = AgentSnapshot { id: 1, position: Vec2::new(21.0, 3.0), velocity: Vec2::new(-5.0, 0.0), ..me };
        let cell = build_cell(&me, Vec2::new(400.0, 30.0), &[other], &lac).unwrap();
        let p = PenaltyParams::default();
        let k = select_index(&cell, &p);
        for s in [0.1, 0.5, 3.0, 17.0] {
            let mut scaled = cell.clone();
            scaled.actions.iter_mut().for_each(|a| *a = *a * s);
            assert_eq!(select_index(&scaled, &p), k);
        }
    }

    #[test]
    fn reward_examples() {
        let w = action_weights(&free_cell(50.0), &PenaltyParams::default());
        let expected = 50.0 * (1.0 + 2.0 * 0.95 + 2.0 * 0.9025 + 2.0 * 0.857375 + 0.81450625);
        assert!((reward_of_cell(&w) - expected).abs() < 1e-9);
        assert!((expected - 361.713).abs() < 1e-3);
        assert_eq!(reward_of_cell(&[0.0; 8]), 0.0);
        assert_eq!(reward_of_cell(&[0.0, 0.0, 4.5, 0.0]), 4.5);
    }

    #[test]
    fn policy_names_round_trip() {
        for p in PolicyKind::ALL {
            assert_eq!(p.as_str().parse::<PolicyKind>(), Ok(p));
        }
        assert!("orca".parse::<PolicyKind>().is_err());
    }
}
