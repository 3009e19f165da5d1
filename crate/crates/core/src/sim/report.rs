use serde::{Deserialize, Serialize};

use crate::sim::config::Mode;
use crate::State3;

/// Running mean/std/min/max in microseconds (population standard deviation).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub count: u64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    #[serde(skip)]
    m2: f64,
}

impl TimingStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut s = TimingStats::default();
        for &x in samples {
            s.push(x);
        }
        s
    }

    pub fn push(&mut self, x: f64) {
        self.merge(&TimingStats {
            count: 1,
            mean: x,
            std: 0.0,
            min: x,
            max: x,
            m2: 0.0,
        });
    }

    /// Parallel combination (Chan et al.).
    pub fn merge(&mut self, other: &TimingStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let m2 = self.m2 + other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.mean += delta * other.count as f64 / n;
        self.m2 = m2;
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.std = (self.m2 / self.count as f64).max(0.0).sqrt();
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Wall-clock cost of each replanning stage, per call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    /// One minimum-time primitive.
    pub primitive: TimingStats,
    /// One compensator fit.
    pub least_squares: TimingStats,
    /// One duration optimization.
    pub optimization: TimingStats,
    /// One robot's full replan: its peer predictions plus its optimization.
    pub total: TimingStats,
}

impl StageTiming {
    pub fn merge(&mut self, other: &StageTiming) {
        self.primitive.merge(&other.primitive);
        self.least_squares.merge(&other.least_squares);
        self.optimization.merge(&other.optimization);
        self.total.merge(&other.total);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tick: u64,
    pub robot: usize,
    pub t: f64,
    pub state: State3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Event {
    /// Two robots came into contact (`d ≤ 1` with true sizes).
    Collision { time: f64, a: usize, b: usize, separation: f64 },
    Deadlock { time: f64, robot: usize },
    ReachedGoal { time: f64, robot: usize },
    PlannerFailure { time: f64, robot: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobotStatus {
    Active,
    AtGoal,
    Deadlocked,
    Collided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    AllAtGoal,
    TimeBudget,
    Deadlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotOutcome {
    pub model: String,
    pub status: RobotStatus,
    pub arrival: Option<f64>,
    pub collided: bool,
    pub final_goal_distance: f64,
    pub max_pad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub mode: Mode,
    pub seed: u64,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub robots: Vec<RobotOutcome>,
    /// Smallest true-size scaled separation over all pairs and ticks.
    pub min_separation: f64,
    pub end_time: f64,
    pub termination: Termination,
    pub replans: u64,
    pub bracket_collapses: u64,
    /// Replans whose optimal duration moved by more than half of the warm
    /// start.
    pub duration_jumps: u64,
    pub timing: StageTiming,
}

/// Deterministic summary of a run. Timing is carried along but is not part of
/// the serialized form, since wall-clock times differ between runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub scenario: String,
    pub mode: Mode,
    pub seed: u64,
    pub robots: usize,
    /// All robots at goal and no collision events.
    pub success: bool,
    /// Fraction of robots that reached their goal without ever colliding.
    pub success_fraction: f64,
    pub reached_goal: usize,
    pub collisions: usize,
    pub deadlocks: usize,
    pub planner_failures: usize,
    pub min_separation: f64,
    /// Simulated time at which the run ended.
    pub makespan: f64,
    pub termination: Termination,
    pub replans: u64,
    pub bracket_collapses: u64,
    pub duration_jumps: u64,
    pub max_pad: f64,
    #[serde(skip)]
    pub timing: StageTiming,
}

pub fn metrics(report: &RunReport) -> Metrics {
    let count = |pred: fn(&Event) -> bool| report.events.iter().filter(|e| pred(e)).count();
    let collisions = count(|e| matches!(e, Event::Collision { .. }));
    let n = report.robots.len();
    let clean = report.robots.iter().filter(|r| r.arrival.is_some() && !r.collided).count();
    let reached_goal = report.robots.iter().filter(|r| r.arrival.is_some()).count();
    Metrics {
        scenario: report.scenario.clone(),
        mode: report.mode,
        seed: report.seed,
        robots: n,
        success: reached_goal == n && collisions == 0,
        success_fraction: if n == 0 { 1.0 } else { clean as f64 / n as f64 },
        reached_goal,
        collisions,
        deadlocks: count(|e| matches!(e, Event::Deadlock { .. })),
        planner_failures: count(|e| matches!(e, Event::PlannerFailure { .. })),
        min_separation: report.min_separation,
        makespan: report.end_time,
        termination: report.termination,
        replans: report.replans,
        bracket_collapses: report.bracket_collapses,
        duration_jumps: report.duration_jumps,
        max_pad: report.robots.iter().map(|r| r.max_pad).fold(0.0, f64::max),
        timing: report.timing,
    }
}

/// One row of a sweep: a configuration repeated over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    /// Fraction of runs that succeeded.
    pub success_rate: f64,
    pub mean_success_fraction: f64,
    pub mean_collisions: f64,
    pub mean_deadlocks: f64,
    pub min_separation: f64,
    pub mean_makespan: f64,
    #[serde(skip)]
    pub timing: StageTiming,
}

pub fn aggregate(runs: &[Metrics]) -> Aggregate {
    let n = runs.len();
    let mean = |f: &dyn Fn(&Metrics) -> f64| {
        if n == 0 {
            0.0
        } else {
            runs.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let mut timing = StageTiming::default();
    for m in runs {
        timing.merge(&m.timing);
    }
    Aggregate {
        runs: n,
        success_rate: mean(&|m| if m.success { 1.0 } else { 0.0 }),
        mean_success_fraction: mean(&|m| m.success_fraction),
        mean_collisions: mean(&|m| m.collisions as f64),
        mean_deadlocks: mean(&|m| m.deadlocks as f64),
        min_separation: runs.iter().map(|m| m.min_separation).fold(f64::INFINITY, f64::min),
        mean_makespan: mean(&|m| m.makespan),
        timing,
    }
}
