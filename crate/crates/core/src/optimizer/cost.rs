//! Cost terms of the condensed problem, each in closed form over a quintic.

use crate::poly::Poly;
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;
use crate::trajectory::QuinticTrajectory;

use super::condense::condense;
use super::types::{
    combined_radii, CollisionForm, CostWeights, LimitForm, Limits, Peer, PlanContext, PlanOptions,
    RobotShape,
};
use crate::error::Result;

/// Largest exponent passed to `exp` in the limit barrier.
pub const EXPONENT_CLAMP: f64 = 50.0;

/// `Q_dynm · Σ_axes ∫_0^T (d³p/dt³)² dt`.
pub fn smoothness_cost<S: Real, const N: usize>(traj: &QuinticTrajectory<S, N>, q_dynm: S) -> S {
    if q_dynm.is_zero() {
        return S::zero();
    }
    let jerk: S = (0..N)
        .map(|i| traj.axis_derivative(i, 3).integral_of_square(traj.duration))
        .sum();
    q_dynm * jerk
}

/// One piece of the separation between two trajectories: `d(t)` as a
/// polynomial valid on `[start, end]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationSegment<S> {
    pub start: S,
    pub end: S,
    pub d: Poly<S>,
}

/// Scaled separation `d(t)` between `own` and `peer` over `[0, window]`,
/// split where either trajectory reaches its endpoint and starts holding it.
pub fn separation_segments<S: Real, const N: usize>(
    own: &QuinticTrajectory<S, N>,
    peer: &QuinticTrajectory<S, N>,
    radii: &[S; N],
    window: S,
) -> Vec<SeparationSegment<S>> {
    let mut out = Vec::with_capacity(3);
    if !(window > S::zero()) {
        return out;
    }
    let held = |traj: &QuinticTrajectory<S, N>| {
        let end = traj.eval_order(0, traj.duration.max(S::zero()));
        let mut c = [[S::zero(); 6]; N];
        for i in 0..N {
            c[i][0] = end[i];
        }
        c
    };
    let (own_held, peer_held) = (held(own), held(peer));
    let mut cuts = vec![S::zero()];
    for t in [own.duration, peer.duration] {
        if t > S::zero() && t < window {
            cuts.push(t);
        }
    }
    cuts.push(window);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    for w in cuts.windows(2) {
        let (start, end) = (w[0], w[1]);
        let a = if start < own.duration { &own.coeffs } else { &own_held };
        let b = if start < peer.duration { &peer.coeffs } else { &peer_held };
        let mut d = Poly::zero();
        for i in 0..N {
            let diff = Poly::new((0..6).map(|k| a[i][k] - b[i][k]));
            let w = S::one() / (radii[i] * radii[i]);
            d = &d + &diff.square().scale(w);
        }
        out.push(SeparationSegment { start, end, d });
    }
    out
}

/// Break points of a polynomial's monotone pieces inside `[a, b]`, endpoints
/// included.
fn monotone_nodes<S: Real>(p: &Poly<S>, a: S, b: S) -> Vec<S> {
    let mut nodes = vec![a];
    let dp = p.derivative();
    if !dp.is_zero() {
        nodes.extend(dp.real_roots_in(a, b).into_iter().filter(|&x| x > a && x < b));
    }
    nodes.push(b);
    nodes
}

/// `∫_a^b |d′| e^{−K_p d} dt` exactly, as the variation of `e^{−K_p d}/K_p`
/// across the monotone pieces of `d`.
fn barrier_variation<S: Real>(seg: &SeparationSegment<S>, k_p: S, prune_below: S) -> S {
    let (a, b) = (seg.start, seg.end);
    if !(b > a) {
        return S::zero();
    }
    if k_p > S::zero() && prune_below > S::zero() {
        let (lo, _) = seg.d.range_bound(a, b);
        let bound = S::from_count(seg.d.degree() + 1) * (-k_p * lo).exp() / k_p;
        if bound < prune_below {
            return S::zero();
        }
    }
    let nodes = monotone_nodes(&seg.d, a, b);
    let g = |x: S| {
        let d = seg.d.eval(x);
        if k_p > S::zero() {
            (-k_p * d).exp() / k_p
        } else {
            d
        }
    };
    let vals: Vec<S> = nodes.iter().map(|&x| g(x)).collect();
    vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

fn barrier_signed<S: Real>(seg: &SeparationSegment<S>, k_p: S) -> S {
    let (da, db) = (seg.d.eval(seg.start), seg.d.eval(seg.end));
    if k_p > S::zero() {
        ((-k_p * da).exp() - (-k_p * db).exp()) / k_p
    } else {
        db - da
    }
}

fn barrier_literal<S: Real, const N: usize>(
    own: &QuinticTrajectory<S, N>,
    peer: &QuinticTrajectory<S, N>,
    radii: &[S; N],
    seg: &SeparationSegment<S>,
    k_p: S,
) -> S {
    let rule = GaussLegendre::<S>::new(32);
    let panels = 8;
    let h = (seg.end - seg.start) / S::from_count(panels);
    let integrand = |t: S| {
        let own_state = own.sample(t);
        let (p, v) = (own_state.pos, own_state.vel);
        let q = peer.sample(t);
        let mut num = S::zero();
        let mut d = S::zero();
        for i in 0..N {
            let dp = p[i] - q.pos[i];
            num += dp * (v[i] - q.vel[i]);
            d += dp * dp / (radii[i] * radii[i]);
        }
        S::lit(2.0) * num * (-k_p * d).exp()
    };
    (0..panels)
        .map(|k| {
            let a = seg.start + h * S::from_count(k);
            rule.integrate(a, a + h, integrand)
        })
        .sum()
}

/// Collision barrier against one peer, including the `Q_obs` weight.
pub fn collision_cost<S: Real, const N: usize>(
    own: &QuinticTrajectory<S, N>,
    own_shape: &RobotShape<S>,
    peer: &Peer<S, N>,
    weights: &CostWeights<S>,
    options: &PlanOptions<S>,
) -> S {
    if weights.q_obs.is_zero() {
        return S::zero();
    }
    let radii = combined_radii::<S, N>(own_shape, &peer.shape);
    let window = if options.hold_own {
        own.duration.max(peer.trajectory.duration).min(options.horizon)
    } else {
        own.duration.min(options.horizon)
    };
    let segments = separation_segments(own, &peer.trajectory, &radii, window);
    let k_p = weights.k_p;
    let raw: S = segments
        .iter()
        .map(|seg| match options.collision_form {
            CollisionForm::Variation => barrier_variation(seg, k_p, options.prune_below),
            CollisionForm::Signed => barrier_signed(seg, k_p),
            CollisionForm::LiteralQuadrature => {
                barrier_literal(own, &peer.trajectory, &radii, seg, k_p)
            }
        })
        .sum();
    weights.q_obs * raw
}

/// `‖dᵒp/dtᵒ‖²` as a polynomial.
fn norm_sq_of_derivative<S: Real, const N: usize>(traj: &QuinticTrajectory<S, N>, order: usize) -> Poly<S> {
    (0..N).fold(Poly::zero(), |acc, i| &acc + &traj.axis_derivative(i, order).square())
}

/// Dynamic-limit barrier for velocity, acceleration and jerk, including the
/// `Q_lim` weight.
pub fn limits_cost<S: Real, const N: usize>(
    traj: &QuinticTrajectory<S, N>,
    limits: &Limits<S>,
    weights: &CostWeights<S>,
    form: LimitForm,
) -> S {
    if weights.q_lim.is_zero() {
        return S::zero();
    }
    let (k_p, t) = (weights.k_p, traj.duration);
    let clamp = S::lit(EXPONENT_CLAMP);
    let mut total = S::zero();
    for order in 1..=3 {
        let s = norm_sq_of_derivative(traj, order);
        let tau_sq = limits.for_order(order).powi(2);
        let g = |x: S| {
            let v = s.eval(x);
            if k_p > S::zero() {
                (k_p * (v - tau_sq)).min(clamp).exp() / k_p
            } else {
                v
            }
        };
        total += match form {
            LimitForm::Signed => g(t) - g(S::zero()),
            LimitForm::Variation => {
                let vals: Vec<S> = monotone_nodes(&s, S::zero(), t).into_iter().map(g).collect();
                vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
            }
        };
    }
    weights.q_lim * total
}

/// Individual contributions to the objective at one duration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CostBreakdown<S> {
    pub smoothness: S,
    pub collision: S,
    pub limits: S,
    pub time: S,
}

impl<S: Real> CostBreakdown<S> {
    pub fn total(&self) -> S {
        self.smoothness + self.collision + self.limits + self.time
    }
}

pub fn cost_breakdown<S: Real, const N: usize>(
    duration: S,
    ctx: &PlanContext<S, N>,
) -> Result<CostBreakdown<S>> {
    let traj = condense(&ctx.start, &ctx.goal_state(), duration)?;
    Ok(breakdown_for(&traj, ctx))
}

pub(crate) fn breakdown_for<S: Real, const N: usize>(
    traj: &QuinticTrajectory<S, N>,
    ctx: &PlanContext<S, N>,
) -> CostBreakdown<S> {
    let w = &ctx.weights;
    CostBreakdown {
        smoothness: smoothness_cost(traj, w.q_dynm),
        collision: ctx
            .peers
            .iter()
            .map(|p| collision_cost(traj, &ctx.shape, p, w, &ctx.options))
            .sum(),
        limits: limits_cost(traj, &ctx.limits, w, ctx.options.limit_form),
        time: w.k_t * traj.duration * traj.duration,
    }
}

/// Objective of the condensed problem at `duration`.
pub fn total_cost<S: Real, const N: usize>(duration: S, ctx: &PlanContext<S, N>) -> Result<S> {
    cost_breakdown(duration, ctx).map(|b| b.total())
}
