//! Scenario description, robot models and seeded scenario generation.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{combined_radii, scaled_separation, Limits, RobotShape};

/// Vertical stretch of every robot ellipsoid.
pub const ETA: f64 = 3.0;

/// Workspace proportions used when only an occupancy is requested.
pub const DEFAULT_PROPORTIONS: [f64; 3] = [4.0, 4.0, 2.0];

/// Fixed workspace of the density experiments.
pub const DENSITY_BOX: [f64; 3] = [4.0, 4.0, 2.0];

/// Rejection-sampling attempts per robot before giving up.
pub const PLACEMENT_ATTEMPTS: usize = 20_000;

/// The three multirotors of the heterogeneous experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotModel {
    Hummingbird,
    Firefly,
    Neo,
}

impl RobotModel {
    pub const ALL: [RobotModel; 3] = [RobotModel::Hummingbird, RobotModel::Firefly, RobotModel::Neo];

    pub fn name(self) -> &'static str {
        match self {
            RobotModel::Hummingbird => "hummingbird",
            RobotModel::Firefly => "firefly",
            RobotModel::Neo => "neo",
        }
    }

    /// Horizontal radius `r₁` in metres.
    pub fn radius(self) -> f64 {
        match self {
            RobotModel::Hummingbird => 0.4,
            RobotModel::Firefly => 0.5,
            RobotModel::Neo => 0.6,
        }
    }

    pub fn limits(self) -> Limits<f64> {
        let (velocity, acceleration, jerk) = match self {
            RobotModel::Hummingbird => (2.0, 4.0, 20.0),
            RobotModel::Firefly => (2.0, 8.0, 20.0),
            RobotModel::Neo => (4.0, 12.0, 60.0),
        };
        Limits {
            velocity,
            acceleration,
            jerk,
        }
    }

    pub fn shape(self) -> RobotShape<f64> {
        RobotShape {
            radius: self.radius(),
            eta: ETA,
            pad: 0.0,
        }
    }
}

impl fmt::Display for RobotModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RobotModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RobotModel::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown robot model `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    /// Free-form label; the built-in models use their lowercase names.
    pub model: String,
    pub start: [f64; 3],
    pub goal: [f64; 3],
    pub shape: RobotShape<f64>,
    pub limits: Limits<f64>,
}

impl RobotSpec {
    pub fn from_model(model: RobotModel, start: [f64; 3], goal: [f64; 3]) -> Self {
        RobotSpec {
            model: model.name().to_string(),
            start,
            goal,
            shape: model.shape(),
            limits: model.limits(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Summed ellipsoid volume over box volume.
    pub occupancy: f64,
    /// Box extents; the workspace is centred on the origin.
    #[serde(rename = "box")]
    pub box_extents: [f64; 3],
    pub robots: Vec<RobotSpec>,
}

impl Scenario {
    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        self.robots.iter().map(|r| r.shape.volume()).sum()
    }

    pub fn box_volume(&self) -> f64 {
        self.box_extents.iter().product()
    }

    /// Occupancy implied by the robots and the box.
    pub fn computed_occupancy(&self) -> f64 {
        self.total_volume() / self.box_volume()
    }

    /// Shapes, limits and finiteness, plus pairwise non-overlap of the starts
    /// and of the goals (scaled separation strictly above one, no padding).
    pub fn validate(&self) -> Result<()> {
        if self.robots.is_empty() {
            return Err(Error::InvalidParameter("scenario has no robots".into()));
        }
        if !self.box_extents.iter().all(|x| x.is_finite() && *x > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box extents must be positive, got {:?}",
                self.box_extents
            )));
        }
        for (k, r) in self.robots.iter().enumerate() {
            r.shape.validate()?;
            r.limits.validate()?;
            if !r.start.iter().chain(&r.goal).all(|x| x.is_finite()) {
                return Err(Error::InvalidParameter(format!("robot {k} has non-finite positions")));
            }
        }
        for (what, pick) in [("starts", true), ("goals", false)] {
            for a in 0..self.robots.len() {
                for b in (a + 1)..self.robots.len() {
                    let (ra, rb) = (&self.robots[a], &self.robots[b]);
                    let (pa, pb) = if pick { (ra.start, rb.start) } else { (ra.goal, rb.goal) };
                    let radii = combined_radii::<f64, 3>(&ra.shape, &rb.shape);
                    let d = scaled_separation(&pa, &pb, &radii);
                    if !(d > 1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "{what} of robots {a} and {b} overlap (d = {d})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn models_for(n: usize, mix: &[RobotModel]) -> Vec<RobotModel> {
    let mix = if mix.is_empty() { &[RobotModel::Firefly][..] } else { mix };
    (0..n).map(|k| mix[k % mix.len()]).collect()
}

/// Box with the given proportions whose volume makes the robots occupy the
/// requested fraction of it.
pub fn box_for_occupancy(models: &[RobotModel], occupancy: f64, proportions: [f64; 3]) -> Result<[f64; 3]> {
    if !(occupancy > 0.0 && occupancy < 1.0) {
        return Err(Error::InvalidParameter(format!("occupancy must be in (0, 1), got {occupancy}")));
    }
    if !proportions.iter().all(|x| x.is_finite() && *x > 0.0) {
        return Err(Error::InvalidParameter(format!("box proportions must be positive, got {proportions:?}")));
    }
    let volume: f64 = models.iter().map(|m| m.shape().volume()).sum::<f64>() / occupancy;
    let k = (volume / proportions.iter().product::<f64>()).cbrt();
    Ok(proportions.map(|p| p * k))
}

fn sample_positions(
    rng: &mut ChaCha8Rng,
    shapes: &[RobotShape<f64>],
    extents: [f64; 3],
) -> Result<Vec<[f64; 3]>> {
    let mut placed: Vec<[f64; 3]> = Vec::with_capacity(shapes.len());
    for (k, shape) in shapes.iter().enumerate() {
        let mut found = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let p = extents.map(|e| rng.gen_range(-0.5 * e..=0.5 * e));
            let clear = placed.iter().zip(shapes).all(|(q, other)| {
                let radii = combined_radii::<f64, 3>(shape, other);
                scaled_separation(&p, q, &radii) > 1.0
            });
            if clear {
                found = Some(p);
                break;
            }
        }
        match found {
            Some(p) => placed.push(p),
            None => {
                return Err(Error::PackingFailure {
                    placed: k,
                    requested: shapes.len(),
                })
            }
        }
    }
    Ok(placed)
}

/// Random starts and goals inside a fixed box.
pub fn generate_in_box(
    n: usize,
    extents: [f64; 3],
    seed: u64,
    mix: &[RobotModel],
    name: &str,
) -> Result<Scenario> {
    if n == 0 {
        return Err(Error::InvalidParameter("at least one robot is required".into()));
    }
    let models = models_for(n, mix);
    let shapes: Vec<_> = models.iter().map(|m| m.shape()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = sample_positions(&mut rng, &shapes, extents)?;
    let goals = sample_positions(&mut rng, &shapes, extents)?;
    let robots: Vec<RobotSpec> = models
        .iter()
        .zip(starts.into_iter().zip(goals))
        .map(|(&m, (s, g))| RobotSpec::from_model(m, s, g))
        .collect();
    let mut scenario = Scenario {
        name: name.to_string(),
        seed,
        occupancy: 0.0,
        box_extents: extents,
        robots,
    };
    scenario.occupancy = scenario.computed_occupancy();
    Ok(scenario)
}

/// Random starts and goals in a box scaled to the requested occupancy.
pub fn generate_scenario(
    n: usize,
    occupancy: f64,
    proportions: [f64; 3],
    seed: u64,
    mix: &[RobotModel],
) -> Result<Scenario> {
    let models = models_for(n.max(1), mix);
    let extents = box_for_occupancy(&models, occupancy, proportions)?;
    let mut s = generate_in_box(n, extents, seed, mix, "random")?;
    s.occupancy = occupancy;
    Ok(s)
}

/// `n` robots evenly spaced on a horizontal circle, each heading to the
/// diametrically opposite point. The seed only rotates the whole circle.
pub fn antipodal_circle(n: usize, radius: f64, model: RobotModel, seed: u64) -> Result<Scenario> {
    if n == 0 || !(radius > 0.0) {
        return Err(Error::InvalidParameter("circle needs robots and a positive radius".into()));
    }
    let phase = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..std::f64::consts::TAU);
    let robots: Vec<RobotSpec> = (0..n)
        .map(|k| {
            let a = phase + std::f64::consts::TAU * k as f64 / n as f64;
            let (s, c) = a.sin_cos();
            RobotSpec::from_model(model, [radius * c, radius * s, 0.0], [-radius * c, -radius * s, 0.0])
        })
        .collect();
    let margin = 2.0 * model.radius();
    let mut scenario = Scenario {
        name: format!("circle{n}"),
        seed,
        occupancy: 0.0,
        box_extents: [2.0 * (radius + margin), 2.0 * (radius + margin), 2.0 * ETA * model.radius()],
        robots,
    };
    scenario.occupancy = scenario.computed_occupancy();
    scenario.validate()?;
    Ok(scenario)
}

/// Named scenario families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Eight Fireflies on a 4 m antipodal circle.
    Circle8,
    /// Hummingbird, Firefly and Neo in turn (21 robots unless overridden) at
    /// 20% occupancy.
    Hetero,
    /// Fireflies in the fixed 4 × 4 × 2 m box.
    Density,
    /// Fireflies at 20% occupancy.
    Random,
}

impl Preset {
    pub const NAMES: [&'static str; 4] = ["circle8", "hetero", "density", "random"];

    pub fn default_robots(self) -> usize {
        match self {
            Preset::Circle8 => 8,
            Preset::Hetero => 21,
            Preset::Density => 8,
            Preset::Random => 8,
        }
    }

    pub fn build(self, robots: Option<usize>, occupancy: Option<f64>, seed: u64) -> Result<Scenario> {
        let n = robots.unwrap_or(self.default_robots());
        let occ = occupancy.unwrap_or(0.2);
        match self {
            Preset::Circle8 => antipodal_circle(n, 4.0, RobotModel::Firefly, seed),
            Preset::Hetero => {
                let mut s = generate_scenario(n, occ, DEFAULT_PROPORTIONS, seed, &RobotModel::ALL)?;
                s.name = "hetero".into();
                Ok(s)
            }
            Preset::Density => generate_in_box(n, DENSITY_BOX, seed, &[RobotModel::Firefly], "density"),
            Preset::Random => generate_scenario(n, occ, DEFAULT_PROPORTIONS, seed, &[RobotModel::Firefly]),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circle8" | "circle" => Ok(Preset::Circle8),
            "hetero" | "heterogeneous" => Ok(Preset::Hetero),
            "density" => Ok(Preset::Density),
            "random" => Ok(Preset::Random),
            _ => Err(Error::InvalidParameter(format!(
                "unknown preset `{s}` (expected one of {})",
                Preset::NAMES.join(", ")
            ))),
        }
    }
}
