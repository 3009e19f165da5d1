//! Lockstep simulation: broadcast, predict, plan, then step the plant.

use std::collections::{BTreeSet, VecDeque};
use std::time::Instant;

use crate::compensator::{compose_prediction, fit_compensator, HorizonBuffer};
use crate::error::{Error, Result};
use crate::optimizer::{combined_radii, plan, scaled_separation, Peer, PlanContext, RobotShape};
use crate::primitive::solve_min_time;
use crate::sim::config::{Mode, RunConfig};
use crate::sim::plant::Plant;
use crate::sim::report::{Event, RobotOutcome, RobotStatus, RunReport, Sample, StageTiming, Termination};
use crate::sim::scenario::{RobotSpec, Scenario};
use crate::tracking::TrackingHistory;
use crate::{HorizonBuffer3, State3, Trajectory3};

/// What one robot publishes at a replanning tick.
#[derive(Clone, Debug, PartialEq)]
pub struct Broadcast {
    pub state: State3,
    pub goal: [f64; 3],
    /// Shape including the current tracking pad.
    pub shape: RobotShape<f64>,
    /// Remaining plan, rebased to the broadcast time. Only sent in shared mode.
    pub plan: Option<Trajectory3>,
}

/// Pairs in contact: `d ≤ 1` with the true (unpadded) sizes.
pub fn detect_collisions(positions: &[[f64; 3]], shapes: &[RobotShape<f64>]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for a in 0..positions.len() {
        for b in (a + 1)..positions.len() {
            let d = pair_separation(positions, shapes, a, b);
            if d <= 1.0 {
                out.push((a, b, d));
            }
        }
    }
    out
}

fn pair_separation(positions: &[[f64; 3]], shapes: &[RobotShape<f64>], a: usize, b: usize) -> f64 {
    let radii = combined_radii::<f64, 3>(&shapes[a].with_pad(0.0), &shapes[b].with_pad(0.0));
    scaled_separation(&positions[a], &positions[b], &radii)
}

/// `history` holds `(time, goal distance)` in time order. True when the
/// distance decreased by less than `epsilon` since the latest sample at least
/// `window` seconds old.
pub fn detect_deadlock(history: &[(f64, f64)], window: f64, epsilon: f64) -> bool {
    let Some(&(now, current)) = history.last() else {
        return false;
    };
    let past = history.iter().rev().find(|(t, _)| now - *t >= window - 1e-9);
    match past {
        Some(&(_, before)) => before - current < epsilon,
        None => false,
    }
}

/// Per-peer predictor. Every robot receives identical broadcasts, so every
/// robot's predictor for a given peer holds identical data; a single instance
/// per peer is kept and read by all observers.
#[derive(Clone, Debug)]
struct PeerPredictor {
    buffer: HorizonBuffer3,
    /// The last prediction and the time it was made.
    last: Option<(f64, Trajectory3)>,
}

#[derive(Clone, Debug)]
pub struct RobotRuntime {
    pub spec: RobotSpec,
    pub true_state: State3,
    pub plan: Trajectory3,
    /// Simulation time corresponding to local time zero of `plan`.
    pub plan_start: f64,
    pub tracking: TrackingHistory<f64, 3>,
    pub pad: f64,
    pub max_pad: f64,
    pub arrival: Option<f64>,
    pub collided: bool,
    pub deadlocked: bool,
    progress: VecDeque<(f64, f64)>,
    planned_once: bool,
}

impl RobotRuntime {
    fn new(spec: RobotSpec, cfg: &RunConfig) -> Self {
        let start = State3::at_rest(spec.start);
        RobotRuntime {
            true_state: start,
            plan: Trajectory3::stationary(spec.start, 0.0),
            plan_start: 0.0,
            tracking: TrackingHistory::new(cfg.tracking.config(spec.shape.radius)),
            pad: 0.0,
            max_pad: 0.0,
            arrival: None,
            collided: false,
            deadlocked: false,
            progress: VecDeque::new(),
            planned_once: false,
            spec,
        }
    }

    pub fn reference(&self, now: f64) -> State3 {
        self.plan.sample(now - self.plan_start)
    }

    pub fn goal_distance(&self) -> f64 {
        dist(&self.true_state.pos, &self.spec.goal)
    }

    pub fn status(&self) -> RobotStatus {
        if self.collided {
            RobotStatus::Collided
        } else if self.arrival.is_some() {
            RobotStatus::AtGoal
        } else if self.deadlocked {
            RobotStatus::Deadlocked
        } else {
            RobotStatus::Active
        }
    }

    fn shape(&self) -> RobotShape<f64> {
        self.spec.shape.with_pad(self.pad)
    }
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

fn micros(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e6
}

#[derive(Clone)]
pub struct World {
    cfg: RunConfig,
    scenario_name: String,
    pub tick: u64,
    pub robots: Vec<RobotRuntime>,
    predictors: Vec<PeerPredictor>,
    plant: Plant,
    contacts: BTreeSet<(usize, usize)>,
    pub events: Vec<Event>,
    pub samples: Vec<Sample>,
    pub min_separation: f64,
    pub timing: StageTiming,
    pub replans: u64,
    pub bracket_collapses: u64,
    pub duration_jumps: u64,
}

impl World {
    pub fn new(scenario: &Scenario, cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        scenario.validate()?;
        let n = scenario.robots.len();
        let mut world = World {
            scenario_name: scenario.name.clone(),
            tick: 0,
            robots: scenario.robots.iter().map(|s| RobotRuntime::new(s.clone(), cfg)).collect(),
            predictors: (0..n)
                .map(|_| PeerPredictor {
                    buffer: HorizonBuffer::new(cfg.compensator.capacity),
                    last: None,
                })
                .collect(),
            plant: Plant::new(cfg.plant, n, cfg.seed),
            contacts: BTreeSet::new(),
            events: Vec::new(),
            samples: Vec::new(),
            min_separation: f64::INFINITY,
            timing: StageTiming::default(),
            replans: 0,
            bracket_collapses: 0,
            duration_jumps: 0,
            cfg: cfg.clone(),
        };
        world.observe();
        Ok(world)
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.dt()
    }

    fn positions(&self) -> Vec<[f64; 3]> {
        self.robots.iter().map(|r| r.true_state.pos).collect()
    }

    /// Freeze what every robot publishes right now.
    pub fn snapshot(&self) -> Vec<Broadcast> {
        let now = self.time();
        self.robots
            .iter()
            .map(|r| Broadcast {
                state: r.true_state,
                goal: r.spec.goal,
                shape: r.shape(),
                plan: (self.cfg.mode == Mode::Shared).then(|| r.plan.rebased(now - r.plan_start)),
            })
            .collect()
    }

    /// Predict every robot's trajectory from the snapshot alone (state, goal,
    /// shape) plus the predictor's own history. Returns the predictions and
    /// the wall time spent on each.
    fn predict(&mut self, snap: &[Broadcast]) -> (Vec<Trajectory3>, Vec<f64>) {
        let now = self.time();
        let opts = self.cfg.planner.primitive_options();
        let comp = self.cfg.compensator;
        let comp_cfg = comp.config();
        let mut out = Vec::with_capacity(snap.len());
        let mut cost = Vec::with_capacity(snap.len());
        for (b, pred) in snap.iter().zip(self.predictors.iter_mut()) {
            let started = Instant::now();
            if let Some((made, previous)) = &pred.last {
                let expected = previous.sample(now - made);
                // Timestamps are strictly increasing by construction.
                let _ = pred.buffer.push_observation(b.state, expected, now);
            }
            let t0 = Instant::now();
            let primitive = solve_min_time(&b.state, &b.goal, &opts).trajectory;
            self.timing.primitive.push(micros(t0));
            let mut prediction = primitive;
            if comp.enabled && pred.buffer.len() >= 2 {
                let t1 = Instant::now();
                let fit = fit_compensator(&pred.buffer, primitive.duration, &comp_cfg);
                self.timing.least_squares.push(micros(t1));
                if let Ok(fit) = fit {
                    if let Ok(p) = compose_prediction(&primitive, &fit.poly) {
                        if p.coeffs.iter().flatten().all(|c| c.is_finite()) {
                            prediction = p;
                        }
                    }
                }
            }
            pred.last = Some((now, prediction));
            out.push(prediction);
            cost.push(micros(started));
        }
        (out, cost)
    }

    /// Plan robot `k` against the frozen snapshot. Pure apart from reading
    /// the robot's own runtime state.
    fn plan_robot(&self, k: usize, peers: &[Peer<f64, 3>]) -> Result<(Trajectory3, PlanFlags)> {
        let now = self.time();
        let r = &self.robots[k];
        let start = if r.planned_once { r.reference(now) } else { r.true_state };
        let settings = &self.cfg.planner;
        let warm = if r.planned_once {
            (r.plan.duration - (now - r.plan_start)).max(settings.t_min)
        } else {
            solve_min_time(&start, &r.spec.goal, &settings.primitive_options()).trajectory.duration
        };
        let (t_lo, t_hi) = settings.bracket(warm);
        let ctx = PlanContext {
            start,
            goal: r.spec.goal,
            shape: r.shape(),
            limits: r.spec.limits,
            weights: self.cfg.weights,
            peers: peers.to_vec(),
            t_lo,
            t_hi,
            warm_start: warm,
            options: settings.plan_options(),
        };
        let outcome = plan(&ctx)?;
        let jump = r.planned_once && (outcome.duration() - warm).abs() > 0.5 * warm;
        Ok((
            outcome.trajectory,
            PlanFlags {
                collapsed: outcome.collapsed,
                jump,
            },
        ))
    }

    /// One replanning round over all robots that have not reached their goal.
    pub fn replan(&mut self) {
        let now = self.time();
        for r in self.robots.iter_mut().filter(|r| r.arrival.is_none()) {
            if r.planned_once {
                let reference = r.reference(now);
                r.tracking.update(&reference, &r.true_state);
                r.pad = r.tracking.tracking_error();
                r.max_pad = r.max_pad.max(r.pad);
            }
        }
        let snap = self.snapshot();
        let (trajectories, prediction_cost) = match self.cfg.mode {
            Mode::Shared => (
                snap.iter().map(|b| b.plan.expect("shared mode broadcasts plans")).collect(),
                vec![0.0; snap.len()],
            ),
            Mode::Predicted => self.predict(&snap),
        };
        let n = self.robots.len();
        let mut new_plans = Vec::with_capacity(n);
        for k in 0..n {
            if self.robots[k].arrival.is_some() {
                continue;
            }
            let peers: Vec<Peer<f64, 3>> = (0..n)
                .filter(|&j| j != k)
                .map(|j| Peer {
                    trajectory: trajectories[j],
                    shape: snap[j].shape,
                })
                .collect();
            let started = Instant::now();
            let result = self.plan_robot(k, &peers);
            let spent = micros(started);
            self.timing.optimization.push(spent);
            let others: f64 = (0..n).filter(|&j| j != k).map(|j| prediction_cost[j]).sum();
            self.timing.total.push(spent + others);
            new_plans.push((k, result));
        }
        // Barrier: plans are installed only after every robot has planned.
        for (k, result) in new_plans {
            self.replans += 1;
            match result {
                Ok((traj, flags)) => {
                    self.bracket_collapses += flags.collapsed as u64;
                    self.duration_jumps += flags.jump as u64;
                    let r = &mut self.robots[k];
                    r.plan = traj;
                    r.plan_start = now;
                    r.planned_once = true;
                }
                Err(e) => self.events.push(Event::PlannerFailure {
                    time: now,
                    robot: k,
                    message: e.to_string(),
                }),
            }
        }
        self.update_deadlocks();
    }

    fn update_deadlocks(&mut self) {
        let now = self.time();
        let window = self.cfg.deadlock.window;
        let epsilon = self.cfg.deadlock.epsilon;
        for (k, r) in self.robots.iter_mut().enumerate() {
            if r.arrival.is_some() {
                r.deadlocked = false;
                continue;
            }
            let d = r.goal_distance();
            r.progress.push_back((now, d));
            while r.progress.len() > 2 && now - r.progress[1].0 >= window - 1e-9 {
                r.progress.pop_front();
            }
            let (a, b) = r.progress.as_slices();
            let history: Vec<(f64, f64)> = a.iter().chain(b).copied().collect();
            let stuck = detect_deadlock(&history, window, epsilon);
            if stuck && !r.deadlocked {
                self.events.push(Event::Deadlock { time: now, robot: k });
            }
            r.deadlocked = stuck;
        }
    }

    /// Advance the plant by one simulation tick.
    pub fn step(&mut self) {
        let dt = self.cfg.dt();
        self.tick += 1;
        let now = self.time();
        for k in 0..self.robots.len() {
            let reference = self.robots[k].reference(now);
            self.robots[k].true_state = self.plant.step(k, &reference, dt);
        }
        self.observe();
    }

    /// Record samples, contacts, the minimum separation and goal arrivals at
    /// the current tick.
    fn observe(&mut self) {
        let now = self.time();
        if self.cfg.record_trajectories {
            for (k, r) in self.robots.iter().enumerate() {
                self.samples.push(Sample {
                    tick: self.tick,
                    robot: k,
                    t: now,
                    state: r.true_state,
                });
            }
        }
        let positions = self.positions();
        let shapes: Vec<RobotShape<f64>> = self.robots.iter().map(|r| r.spec.shape).collect();
        let mut contacts = BTreeSet::new();
        for a in 0..positions.len() {
            for b in (a + 1)..positions.len() {
                let d = pair_separation(&positions, &shapes, a, b);
                self.min_separation = self.min_separation.min(d);
                if d <= 1.0 {
                    contacts.insert((a, b));
                    if !self.contacts.contains(&(a, b)) {
                        self.events.push(Event::Collision {
                            time: now,
                            a,
                            b,
                            separation: d,
                        });
                        self.robots[a].collided = true;
                        self.robots[b].collided = true;
                    }
                }
            }
        }
        self.contacts = contacts;
        let tol = self.cfg.goal_tol;
        for (k, r) in self.robots.iter_mut().enumerate() {
            if r.arrival.is_none() && r.goal_distance() <= tol {
                r.arrival = Some(now);
                r.deadlocked = false;
                // Hold the goal from here on.
                r.plan = Trajectory3::stationary(r.spec.goal, 0.0);
                r.plan_start = now;
                self.events.push(Event::ReachedGoal { time: now, robot: k });
            }
        }
    }

    pub fn termination(&self) -> Option<Termination> {
        if self.robots.iter().all(|r| r.arrival.is_some()) {
            Some(Termination::AllAtGoal)
        } else if self.time() >= self.cfg.time_budget - 1e-9 {
            Some(Termination::TimeBudget)
        } else if self.robots.iter().filter(|r| r.arrival.is_none()).all(|r| r.deadlocked) {
            Some(Termination::Deadlock)
        } else {
            None
        }
    }

    pub fn into_report(self, seed: u64, termination: Termination) -> RunReport {
        let end_time = self.time();
        RunReport {
            scenario: self.scenario_name,
            mode: self.cfg.mode,
            seed,
            samples: self.samples,
            events: self.events,
            robots: self
                .robots
                .iter()
                .map(|r| RobotOutcome {
                    model: r.spec.model.clone(),
                    status: r.status(),
                    arrival: r.arrival,
                    collided: r.collided,
                    final_goal_distance: r.goal_distance(),
                    max_pad: r.max_pad,
                })
                .collect(),
            min_separation: self.min_separation,
            end_time,
            termination,
            replans: self.replans,
            bracket_collapses: self.bracket_collapses,
            duration_jumps: self.duration_jumps,
            timing: self.timing,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct PlanFlags {
    collapsed: bool,
    jump: bool,
}

/// Simulate `scenario` until every robot is at its goal, every remaining
/// robot is deadlocked, or the time budget runs out.
pub fn run(scenario: &Scenario, cfg: &RunConfig) -> Result<RunReport> {
    let mut world = World::new(scenario, cfg)?;
    let every = cfg.replan_every();
    let max_ticks = (cfg.time_budget * cfg.sim_hz).ceil() as u64;
    let termination = loop {
        if let Some(t) = world.termination() {
            break t;
        }
        if world.tick >= max_ticks {
            break Termination::TimeBudget;
        }
        if world.tick % every == 0 {
            world.replan();
            if let Some(t) = world.termination() {
                break t;
            }
        }
        world.step();
    };
    if world.robots.iter().any(|r| !r.true_state.is_finite()) {
        return Err(Error::InvalidParameter("simulation diverged to non-finite states".into()));
    }
    Ok(world.into_report(scenario.seed, termination))
}
