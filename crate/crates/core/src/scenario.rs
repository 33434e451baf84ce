//! Benchmark layouts: reflection, circle, crowd, and explicit custom lists.
//!
//! Generators are pure functions of their parameters and seed. Every
//! generated start set, and every target set, keeps pairwise center
//! distance of at least `2r + clearance`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::rng::unit_draw;

/// Default clearance as a fraction of the agent radius.
pub const DEFAULT_CLEARANCE_FRACTION: f64 = 0.1;

/// Placement attempts per crowd agent before giving up.
pub const CROWD_RETRY_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("infeasible {kind} layout: {reason}")]
    Infeasible { kind: ScenarioKind, reason: String },
    #[error("crowd sampling gave up after placing {placed} of {requested} {what} (density {density:.4})")]
    RetryBudget {
        what: &'static str,
        placed: usize,
        requested: usize,
        density: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Reflection,
    Circle,
    Crowd,
    Custom,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Reflection => "reflection",
            ScenarioKind::Circle => "circle",
            ScenarioKind::Crowd => "crowd",
            ScenarioKind::Custom => "custom",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for ScenarioKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "reflection" => Ok(ScenarioKind::Reflection),
            "circle" => Ok(ScenarioKind::Circle),
            "crowd" => Ok(ScenarioKind::Crowd),
            "custom" => Ok(ScenarioKind::Custom),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoints {
    pub start: Vec2,
    pub target: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Layout {
    /// Two mirrored grids facing each other across a vertical centerline.
    Reflection {
        n_per_side: usize,
        rows: usize,
        spacing: f64,
        gap: f64,
    },
    /// Concentric rings around the origin; targets are antipodal.
    Circle {
        n_agents: usize,
        n_rings: usize,
        base_radius: f64,
        ring_gap: f64,
    },
    /// Random starts and targets in a square centered at the origin.
    Crowd { n_agents: usize, area_side: f64 },
    Custom { agents: Vec<Endpoints> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub layout: Layout,
    #[serde(default)]
    pub seed: u64,
    /// Extra spacing beyond `2r`; defaults to `0.1 r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearance: Option<f64>,
}

/// A generated layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub agents: Vec<Endpoints>,
    /// Coloring group of each agent: side for reflection, ring for circle.
    pub groups: Vec<u32>,
}

impl ScenarioSpec {
    pub fn reflection(n_per_side: usize, r: f64) -> Self {
        ScenarioSpec {
            layout: Layout::Reflection {
                n_per_side,
                rows: n_per_side.clamp(1, 5),
                spacing: 2.5 * r,
                gap: 20.0 * r,
            },
            seed: 0,
            clearance: None,
        }
    }

    pub fn circle(n_agents: usize, r: f64) -> Self {
        ScenarioSpec {
            layout: Layout::Circle {
                n_agents,
                n_rings: n_agents.div_ceil(24).max(1),
                base_radius: 10.0 * r,
                ring_gap: 3.0 * r,
            },
            seed: 0,
            clearance: None,
        }
    }

    pub fn crowd(n_agents: usize, seed: u64) -> Self {
        ScenarioSpec {
            layout: Layout::Crowd {
                n_agents,
                area_side: 600.0,
            },
            seed,
            clearance: None,
        }
    }

    pub fn custom(agents: Vec<Endpoints>) -> Self {
        ScenarioSpec {
            layout: Layout::Custom { agents },
            seed: 0,
            clearance: None,
        }
    }

    pub fn kind(&self) -> ScenarioKind {
        match self.layout {
            Layout::Reflection { .. } => ScenarioKind::Reflection,
            Layout::Circle { .. } => ScenarioKind::Circle,
            Layout::Crowd { .. } => ScenarioKind::Crowd,
            Layout::Custom { .. } => ScenarioKind::Custom,
        }
    }

    pub fn agent_count(&self) -> usize {
        match &self.layout {
            Layout::Reflection { n_per_side, .. } => 2 * n_per_side,
            Layout::Circle { n_agents, .. } | Layout::Crowd { n_agents, .. } => *n_agents,
            Layout::Custom { agents } => agents.len(),
        }
    }

    pub fn generate(&self, r: f64) -> Result<Scenario, ScenarioError> {
        let clearance = self.clearance.unwrap_or(DEFAULT_CLEARANCE_FRACTION * r);
        match &self.layout {
            &Layout::Reflection {
                n_per_side,
                rows,
                spacing,
                gap,
            } => gen_reflection(n_per_side, rows, spacing, gap, r, clearance),
            &Layout::Circle {
                n_agents,
                n_rings,
                base_radius,
                ring_gap,
            } => gen_circle(n_agents, n_rings, base_radius, ring_gap, r, clearance),
            &Layout::Crowd { n_agents, area_side } => {
                gen_crowd(n_agents, area_side, r, clearance, self.seed)
            }
            Layout::Custom { agents } => {
                if let Some((i, j)) = first_close_pair(agents.iter().map(|a| a.start), 2.0 * r) {
                    return Err(ScenarioError::Infeasible {
                        kind: ScenarioKind::Custom,
                        reason: alloc::format!("starts of agents {i} and {j} are closer than 2r"),
                    });
                }
                Ok(Scenario {
                    kind: ScenarioKind::Custom,
                    agents: agents.clone(),
                    groups: (0..agents.len() as u32).collect(),
                })
            }
        }
    }
}

/// First pair of points closer than `min_distance`, if any.
pub fn first_close_pair(points: impl Iterator<Item = Vec2>, min_distance: f64) -> Option<(usize, usize)> {
    let pts: Vec<Vec2> = points.collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].distance(pts[j]) < min_distance {
                return Some((i, j));
            }
        }
    }
    None
}

fn infeasible(kind: ScenarioKind, reason: String) -> ScenarioError {
    ScenarioError::Infeasible { kind, reason }
}

pub fn gen_reflection(
    n_per_side: usize,
    rows: usize,
    spacing: f64,
    gap: f64,
    r: f64,
    clearance: f64,
) -> Result<Scenario, ScenarioError> {
    let kind = ScenarioKind::Reflection;
    let min = 2.0 * r + clearance;
    if n_per_side == 0 || rows == 0 {
        return Err(infeasible(kind, "n_per_side and rows must be positive".into()));
    }
    if spacing < min {
        return Err(infeasible(kind, alloc::format!("spacing {spacing} < 2r + clearance = {min}")));
    }
    if gap < min {
        return Err(infeasible(kind, alloc::format!("gap {gap} < 2r + clearance = {min}")));
    }
    let rows = rows.min(n_per_side);
    let cols = n_per_side.div_ceil(rows);
    let y0 = -(rows as f64 - 1.0) * spacing / 2.0;
    let mut agents = Vec::with_capacity(2 * n_per_side);
    let mut groups = Vec::with_capacity(2 * n_per_side);
    for side in [-1.0f64, 1.0] {
        for k in 0..n_per_side {
            let (col, row) = (k / rows, k % rows);
            let x = side * (gap / 2.0 + (cols - 1 - col) as f64 * spacing);
            let start = Vec2::new(x, y0 + row as f64 * spacing);
            agents.push(Endpoints {
                start,
                target: Vec2::new(-start.x, start.y),
            });
            groups.push(if side < 0.0 { 0 } else { 1 });
        }
    }
    Ok(Scenario { kind, agents, groups })
}

pub fn gen_circle(
    n_agents: usize,
    n_rings: usize,
    base_radius: f64,
    ring_gap: f64,
    r: f64,
    clearance: f64,
) -> Result<Scenario, ScenarioError> {
    let kind = ScenarioKind::Circle;
    let min = 2.0 * r + clearance;
    if n_agents == 0 || n_rings == 0 || n_rings > n_agents {
        return Err(infeasible(kind, "need 1 <= n_rings <= n_agents".into()));
    }
    if !(base_radius > 0.0) {
        return Err(infeasible(kind, "base_radius must be positive".into()));
    }
    if n_rings > 1 && ring_gap < min {
        return Err(infeasible(kind, alloc::format!("ring_gap {ring_gap} < 2r + clearance = {min}")));
    }
    let base = n_agents / n_rings;
    let extra = n_agents % n_rings;
    let mut agents: Vec<Endpoints> = Vec::with_capacity(n_agents);
    let mut groups = Vec::with_capacity(n_agents);
    for ring in 0..n_rings {
        // remainder goes to the outermost rings
        let count = base + usize::from(ring >= n_rings - extra);
        let radius = base_radius + ring as f64 * ring_gap;
        let chord = if count > 1 {
            2.0 * radius * libm::sin(PI / count as f64)
        } else {
            f64::INFINITY
        };
        if chord < min {
            return Err(infeasible(
                kind,
                alloc::format!("ring {ring} of radius {radius} cannot hold {count} agents (chord {chord:.3} < {min})"),
            ));
        }
        let phase = if ring % 2 == 1 { PI / count as f64 } else { 0.0 };
        let first = agents.len();
        for m in 0..count {
            // even rings: second half is the exact negation of the first
            let start = if count % 2 == 0 && m >= count / 2 {
                -agents[first + m - count / 2].start
            } else {
                Vec2::from_angle(phase + TAU * m as f64 / count as f64) * radius
            };
            agents.push(Endpoints { start, target: -start });
            groups.push(ring as u32);
        }
    }
    Ok(Scenario { kind, agents, groups })
}

fn sample_separated(
    rng: &mut ChaCha8Rng,
    n: usize,
    lo: f64,
    hi: f64,
    min: f64,
    what: &'static str,
    area: f64,
    r: f64,
) -> Result<Vec<Vec2>, ScenarioError> {
    let mut placed: Vec<Vec2> = Vec::with_capacity(n);
    while placed.len() < n {
        let mut ok = false;
        for _ in 0..CROWD_RETRY_BUDGET {
            let p = Vec2::new(lo + (hi - lo) * unit_draw(rng), lo + (hi - lo) * unit_draw(rng));
            if placed.iter().all(|q| q.distance(p) >= min) {
                placed.push(p);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(ScenarioError::RetryBudget {
                what,
                placed: placed.len(),
                requested: n,
                density: placed.len() as f64 * PI * r * r / area,
            });
        }
    }
    Ok(placed)
}

pub fn gen_crowd(
    n_agents: usize,
    area_side: f64,
    r: f64,
    clearance: f64,
    seed: u64,
) -> Result<Scenario, ScenarioError> {
    let kind = ScenarioKind::Crowd;
    if !(area_side > 2.0 * r) {
        return Err(infeasible(kind, alloc::format!("area side {area_side} cannot hold a disk of radius {r}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (-area_side / 2.0 + r, area_side / 2.0 - r);
    let min = 2.0 * r + clearance;
    let area = area_side * area_side;
    let starts = sample_separated(&mut rng, n_agents, lo, hi, min, "starts", area, r)?;
    let targets = sample_separated(&mut rng, n_agents, lo, hi, min, "targets", area, r)?;
    Ok(Scenario {
        kind,
        agents: starts
            .into_iter()
            .zip(targets)
            .map(|(start, target)| Endpoints { start, target })
            .collect(),
        groups: (0..n_agents as u32).collect(),
    })
}
