//! Condensed trajectory optimization: with both boundary states fixed, the
//! quintic is a function of its duration alone, so planning reduces to a
//! bounded scalar minimization of smoothness, collision, dynamic-limit and
//! time costs.

mod brent;
mod condense;
mod cost;
mod types;

pub use brent::{minimize_bounded, Minimum};
pub use condense::{boundary_gaps, condense, transform_matrix, SINGULAR_DURATION};
pub use cost::{
    collision_cost, cost_breakdown, limits_cost, separation_segments, smoothness_cost, total_cost,
    CostBreakdown, SeparationSegment, EXPONENT_CLAMP,
};
pub use types::{
    combined_radii, scaled_separation, CollisionForm, CostWeights, LimitForm, Limits, Peer,
    PlanContext, PlanOptions, RobotShape,
};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::QuinticTrajectory;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanOutcome<S, const N: usize> {
    pub trajectory: QuinticTrajectory<S, N>,
    pub cost: S,
    /// The bracket was narrower than the tolerance; the warm start was used
    /// without optimization.
    pub collapsed: bool,
    pub evaluations: usize,
}

impl<S: Real, const N: usize> PlanOutcome<S, N> {
    pub fn duration(&self) -> S {
        self.trajectory.duration
    }
}

/// Minimize the condensed objective over `[t_lo, t_hi]`.
///
/// A uniform scan (plus the warm start) locates the discrete local minima;
/// the best few are refined with Brent's method. Ties go to the shorter
/// duration, so the result is a deterministic function of the context.
pub fn plan<S: Real, const N: usize>(ctx: &PlanContext<S, N>) -> Result<PlanOutcome<S, N>> {
    let (lo, hi) = (ctx.t_lo, ctx.t_hi);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::BracketCollapse {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    if lo < S::lit(SINGULAR_DURATION) {
        return Err(Error::SingularTransform(lo.as_f64()));
    }
    ctx.weights.validate()?;
    let goal = ctx.goal_state();
    let opts = &ctx.options;
    let mut evaluations = 0usize;
    let mut cost_at = |t: S| -> Result<S> {
        evaluations += 1;
        let traj = condense(&ctx.start, &goal, t)?;
        let c = cost::breakdown_for(&traj, ctx).total();
        Ok(if c.is_nan() { S::infinity() } else { c })
    };

    let warm = ctx.warm_start.max(lo).min(hi);
    if hi - lo < opts.tolerance {
        let cost = cost_at(warm)?;
        return Ok(PlanOutcome {
            trajectory: condense(&ctx.start, &goal, warm)?,
            cost,
            collapsed: true,
            evaluations: 1,
        });
    }

    let n = opts.scan_points.max(2);
    let step = (hi - lo) / S::from_count(n - 1);
    let mut grid: Vec<S> = (0..n).map(|k| lo + step * S::from_count(k)).collect();
    grid[n - 1] = hi;
    if warm.is_finite() && !grid.contains(&warm) {
        grid.push(warm);
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let values = grid
        .iter()
        .map(|&t| cost_at(t))
        .collect::<Result<Vec<S>>>()?;

    let mut minima: Vec<usize> = (0..grid.len())
        .filter(|&k| {
            let left = k == 0 || values[k] <= values[k - 1];
            let right = k + 1 == grid.len() || values[k] <= values[k + 1];
            left && right
        })
        .collect();
    minima.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    minima.truncate(opts.refine_minima.max(1));

    let mut best = (grid[minima[0]], values[minima[0]]);
    let consider = |t: S, c: S, best: &mut (S, S)| {
        if c < best.1 || (c == best.1 && t < best.0) {
            *best = (t, c);
        }
    };
    for &k in &minima {
        let a = grid[k.saturating_sub(1)];
        let b = grid[(k + 1).min(grid.len() - 1)];
        let mut failure = None;
        let m = minimize_bounded(
            |t| match cost_at(t) {
                Ok(c) => c,
                Err(e) => {
                    failure.get_or_insert(e);
                    S::infinity()
                }
            },
            a,
            b,
            opts.tolerance,
            200,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        consider(grid[k], values[k], &mut best);
        consider(m.x, m.value, &mut best);
    }

    Ok(PlanOutcome {
        trajectory: condense(&ctx.start, &goal, best.0)?,
        cost: best.1,
        collapsed: false,
        evaluations,
    })
}

#[cfg(test)]
mod tests;
