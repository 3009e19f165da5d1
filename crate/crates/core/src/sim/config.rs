use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compensator::{Binding, CompensatorConfig};
use crate::error::{Error, Result};
use crate::optimizer::{CollisionForm, CostWeights, LimitForm, PlanOptions};
use crate::primitive::PrimitiveOptions;
use crate::sim::plant::PlantModel;
use crate::tracking::TrackingConfig;
use crate::State3;

/// What each robot learns about its peers at a broadcast.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Peers transmit their full planned trajectories.
    #[default]
    Shared,
    /// Peers transmit state, goal and size only; trajectories are predicted.
    Predicted,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Shared => "shared",
            Mode::Predicted => "predicted",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "shared" => Ok(Mode::Shared),
            "predicted" => Ok(Mode::Predicted),
            _ => Err(Error::InvalidParameter(format!("unknown mode `{s}` (expected shared or predicted)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSettings {
    pub collision_form: CollisionForm,
    pub limit_form: LimitForm,
    /// Collision look-ahead in seconds.
    pub horizon: f64,
    /// Keep penalizing approaches after the own plan has ended.
    pub hold_own: bool,
    pub prune_below: f64,
    pub scan_points: usize,
    pub tolerance: f64,
    pub refine_minima: usize,
    /// The duration bracket is `[max(t_min, low·w), min(t_max, high·w + pad)]`
    /// around the warm start `w`.
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub bracket_pad: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        let p = PlanOptions::<f64>::default();
        let prim = PrimitiveOptions::<f64>::default();
        PlannerSettings {
            collision_form: p.collision_form,
            limit_form: p.limit_form,
            horizon: 8.0,
            hold_own: true,
            prune_below: p.prune_below,
            scan_points: p.scan_points,
            tolerance: p.tolerance,
            refine_minima: p.refine_minima,
            bracket_low: 0.5,
            bracket_high: 2.0,
            bracket_pad: 2.0,
            t_min: prim.t_min,
            t_max: prim.t_max,
        }
    }
}

impl PlannerSettings {
    pub fn plan_options(&self) -> PlanOptions<f64> {
        PlanOptions {
            collision_form: self.collision_form,
            limit_form: self.limit_form,
            horizon: self.horizon,
            hold_own: self.hold_own,
            prune_below: self.prune_below,
            scan_points: self.scan_points,
            tolerance: self.tolerance,
            refine_minima: self.refine_minima,
        }
    }

    pub fn primitive_options(&self) -> PrimitiveOptions<f64> {
        PrimitiveOptions {
            t_min: self.t_min,
            t_max: self.t_max,
            ..PrimitiveOptions::default()
        }
    }

    pub fn bracket(&self, warm: f64) -> (f64, f64) {
        (
            self.t_min.max(self.bracket_low * warm),
            self.t_max.min(self.bracket_high * warm + self.bracket_pad),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingSettings {
    pub capacity: usize,
    /// Weights on position, velocity and acceleration residuals.
    pub weights: [f64; 3],
    /// Clamp the pad `ξ` to the robot's horizontal radius.
    pub clamp_to_radius: bool,
}

impl Default for TrackingSettings {
    fn default() -> Self {
        TrackingSettings {
            capacity: 20,
            weights: [1.0, 0.1, 0.01],
            clamp_to_radius: true,
        }
    }
}

impl TrackingSettings {
    pub fn config(&self, radius: f64) -> TrackingConfig<f64, 3> {
        let [p, v, a] = self.weights;
        TrackingConfig {
            capacity: self.capacity,
            weights: State3::new([p; 3], [v; 3], [a; 3]),
            prior: 0.0,
            max_pad: self.clamp_to_radius.then_some(radius),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompensatorSettings {
    /// Fit a correction at all; without it predictions are bare primitives.
    pub enabled: bool,
    pub capacity: usize,
    pub weights: [f64; 3],
    pub at_start: Binding,
    pub at_end: Binding,
}

impl Default for CompensatorSettings {
    fn default() -> Self {
        CompensatorSettings {
            enabled: true,
            capacity: 10,
            weights: [1.0, 0.1, 0.01],
            at_start: Binding::Full,
            at_end: Binding::PositionOnly,
        }
    }
}

impl CompensatorSettings {
    pub fn config(&self) -> CompensatorConfig<f64> {
        CompensatorConfig {
            capacity: self.capacity,
            weights: self.weights,
            at_start: self.at_start,
            at_end: self.at_end,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeadlockSettings {
    /// Sliding window in seconds.
    pub window: f64,
    /// Minimum decrease of the goal distance over the window, in metres.
    pub epsilon: f64,
}

impl Default for DeadlockSettings {
    fn default() -> Self {
        DeadlockSettings {
            window: 5.0,
            epsilon: 0.05,
        }
    }
}

/// Weights used by the simulator. With the library defaults the collision
/// barrier at contact (`Q_obs·(2/K_p)·e^{−K_p}` for a pass through `d = 1`) is
/// about 1e-3, far below the time and smoothness terms; a larger `Q_obs` and
/// a softer `K_p` make it dominate near contact while it still fades within a
/// few combined radii.
pub fn swarm_weights() -> CostWeights<f64> {
    CostWeights {
        q_dynm: 1.0,
        q_obs: 1.0e4,
        q_lim: 10.0,
        k_t: 1.0,
        k_p: 3.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub replan_hz: f64,
    pub sim_hz: f64,
    /// Simulated seconds before the run is stopped.
    pub time_budget: f64,
    pub goal_tol: f64,
    /// Seed of the plant noise.
    pub seed: u64,
    pub weights: CostWeights<f64>,
    pub plant: PlantModel,
    pub planner: PlannerSettings,
    pub tracking: TrackingSettings,
    pub compensator: CompensatorSettings,
    pub deadlock: DeadlockSettings,
    /// Keep every executed state in the report (needed for CSV output).
    pub record_trajectories: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Shared,
            replan_hz: 10.0,
            sim_hz: 100.0,
            time_budget: 60.0,
            goal_tol: 0.1,
            seed: 0,
            weights: swarm_weights(),
            plant: PlantModel::Perfect,
            planner: PlannerSettings::default(),
            tracking: TrackingSettings::default(),
            compensator: CompensatorSettings::default(),
            deadlock: DeadlockSettings::default(),
            record_trajectories: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("replan_hz", self.replan_hz)?;
        positive("sim_hz", self.sim_hz)?;
        positive("time_budget", self.time_budget)?;
        positive("goal_tol", self.goal_tol)?;
        positive("deadlock.window", self.deadlock.window)?;
        positive("planner.horizon", self.planner.horizon)?;
        positive("planner.tolerance", self.planner.tolerance)?;
        if self.sim_hz < self.replan_hz {
            return Err(Error::InvalidParameter(format!(
                "sim_hz ({}) must be at least replan_hz ({})",
                self.sim_hz, self.replan_hz
            )));
        }
        if !(self.planner.bracket_low > 0.0 && self.planner.bracket_low <= 1.0 && self.planner.bracket_high >= 1.0) {
            return Err(Error::InvalidParameter("bracket factors must satisfy 0 < low ≤ 1 ≤ high".into()));
        }
        self.weights.validate()?;
        self.plant.validate()?;
        self.planner.primitive_options().validate()
    }

    /// Simulation ticks per replanning tick.
    pub fn replan_every(&self) -> u64 {
        ((self.sim_hz / self.replan_hz).round() as u64).max(1)
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sim_hz
    }
}
