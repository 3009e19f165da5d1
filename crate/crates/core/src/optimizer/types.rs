use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::{PredictedTrajectory, StateVec};

/// Axis-aligned prolate spheroid: `r` on the horizontal axes, `η·r` on the
/// vertical one, all inflated by the tracking pad `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Deserialize<'de> + Default"))]
pub struct RobotShape<S> {
    pub radius: S,
    pub eta: S,
    #[serde(default)]
    pub pad: S,
}

impl<S: Real> RobotShape<S> {
    pub fn new(radius: S, eta: S) -> Result<Self> {
        let shape = RobotShape {
            radius,
            eta,
            pad: S::zero(),
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius > S::zero() && self.eta >= S::one() && self.pad >= S::zero() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid robot shape {self:?}")))
        }
    }

    pub fn with_pad(mut self, pad: S) -> Self {
        self.pad = pad.max(S::zero());
        self
    }

    /// Unpadded per-axis radii. With three or more axes the third one is
    /// vertical; lower-dimensional shapes are spheres.
    pub fn radii<const N: usize>(&self) -> [S; N] {
        let mut r = [self.radius; N];
        if N >= 3 {
            r[2] = self.eta * self.radius;
        }
        r
    }

    /// Volume of the unpadded three-dimensional ellipsoid.
    pub fn volume(&self) -> S {
        S::lit(4.0 / 3.0) * S::PI() * self.radius * self.radius * self.eta * self.radius
    }
}

/// Per-axis denominators of the scaled separation between two robots: both
/// radii plus both tracking pads.
pub fn combined_radii<S: Real, const N: usize>(a: &RobotShape<S>, b: &RobotShape<S>) -> [S; N] {
    let (ra, rb) = (a.radii::<N>(), b.radii::<N>());
    let mut out = [S::zero(); N];
    for i in 0..N {
        out[i] = ra[i] + rb[i] + a.pad + b.pad;
    }
    out
}

/// `d = Σ (pᵢ − qᵢ)² / Rᵢ²`; the pair is collision-free iff `d > 1`.
pub fn scaled_separation<S: Real, const N: usize>(p: &[S; N], q: &[S; N], radii: &[S; N]) -> S {
    (0..N)
        .map(|i| {
            let e = (p[i] - q[i]) / radii[i];
            e * e
        })
        .sum()
}

/// Bounds on the Euclidean norms of velocity, acceleration and jerk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits<S> {
    pub velocity: S,
    pub acceleration: S,
    pub jerk: S,
}

impl<S: Real> Limits<S> {
    pub fn validate(&self) -> Result<()> {
        if self.velocity > S::zero() && self.acceleration > S::zero() && self.jerk > S::zero() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid limits {self:?}")))
        }
    }

    /// `τ` for derivative order 1, 2 or 3.
    pub fn for_order(&self, order: usize) -> S {
        match order {
            1 => self.velocity,
            2 => self.acceleration,
            3 => self.jerk,
            _ => panic!("no limit for derivative order {order}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostWeights<S> {
    pub q_dynm: S,
    pub q_obs: S,
    pub q_lim: S,
    pub k_t: S,
    pub k_p: S,
}

impl<S: Real> Default for CostWeights<S> {
    fn default() -> Self {
        CostWeights {
            q_dynm: S::one(),
            q_obs: S::lit(100.0),
            q_lim: S::lit(10.0),
            k_t: S::one(),
            k_p: S::lit(10.0),
        }
    }
}

impl<S: Real> CostWeights<S> {
    pub fn validate(&self) -> Result<()> {
        let all = [self.q_dynm, self.q_obs, self.q_lim, self.k_t, self.k_p];
        if all.iter().all(|w| *w >= S::zero() && w.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("weights must be finite and non-negative: {self:?}")))
        }
    }
}

/// How the collision barrier integral is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionForm {
    /// `∫ |d′| e^{−K_p d} dt`, in closed form over the monotone pieces of `d`.
    /// Penalizes every approach regardless of the order of events.
    #[default]
    Variation,
    /// `∫ d′ e^{−K_p d} dt`, which telescopes to the window endpoints.
    Signed,
    /// The unscaled numerator `2 Σ Δpᵢ Δvᵢ e^{−K_p d}`, by quadrature.
    LiteralQuadrature,
}

/// How the dynamic-limit barrier integral is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitForm {
    /// `(1/K_p)[e^{K_p(‖x(T)‖²−τ²)} − e^{K_p(‖x(0)‖²−τ²)}]`. Only the
    /// endpoints matter, and a start state already over a limit makes the
    /// term negative, so this form is unsuitable as a planning objective.
    Signed,
    /// `∫ |d/dt ‖x‖²| e^{K_p(‖x‖²−τ²)} dt`: total variation of the same
    /// antiderivative over the monotone pieces of `‖x‖²`.
    #[default]
    Variation,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions<S> {
    pub collision_form: CollisionForm,
    pub limit_form: LimitForm,
    /// Collision terms are evaluated over `[0, min(T, horizon)]`.
    pub horizon: S,
    /// Extend the collision window past the own duration (up to the horizon
    /// and the peer's duration), with the own trajectory holding its goal.
    #[serde(default)]
    pub hold_own: bool,
    /// Peers whose barrier contribution is provably below this are skipped.
    pub prune_below: S,
    pub scan_points: usize,
    /// Absolute tolerance on the optimal duration.
    pub tolerance: S,
    /// Number of scan minima refined locally.
    pub refine_minima: usize,
}

impl<S: Real> Default for PlanOptions<S> {
    fn default() -> Self {
        PlanOptions {
            collision_form: CollisionForm::Variation,
            limit_form: LimitForm::Variation,
            horizon: S::infinity(),
            hold_own: false,
            prune_below: S::lit(1e-16),
            scan_points: 16,
            tolerance: S::lit(1e-4),
            refine_minima: 3,
        }
    }
}

/// Another robot as seen by the planner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peer<S, const N: usize> {
    pub trajectory: PredictedTrajectory<S, N>,
    pub shape: RobotShape<S>,
}

/// Everything one planning call depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanContext<S, const N: usize> {
    pub start: StateVec<S, N>,
    /// Goal position; the goal velocity and acceleration are zero.
    pub goal: [S; N],
    pub shape: RobotShape<S>,
    pub limits: Limits<S>,
    pub weights: CostWeights<S>,
    pub peers: Vec<Peer<S, N>>,
    pub t_lo: S,
    pub t_hi: S,
    pub warm_start: S,
    pub options: PlanOptions<S>,
}

impl<S: Real, const N: usize> PlanContext<S, N> {
    pub fn goal_state(&self) -> StateVec<S, N> {
        StateVec::at_rest(self.goal)
    }
}
