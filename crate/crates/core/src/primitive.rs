//! Closed-form jerk-smooth minimum-time motion primitives.
//!
//! For a triple integrator minimizing `∫_0^T (‖u‖² + 1) dt` with only the end
//! position constrained, the optimal jerk on each axis is a quadratic in time
//! whose three coefficients `β` depend only on the duration and on
//! `Δ(T) = p_end - (p0 + v0 T + a0 T²/2)`. The resulting jerk integral is
//! `20 Δ²/T⁵`, so the free-time optimality condition becomes a polynomial in
//! `T` whose positive roots are candidate durations.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Real;
use crate::trajectory::{QuinticTrajectory, StateVec};

/// Duration bracket and fallback-sampling parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimitiveOptions<S> {
    pub t_min: S,
    pub t_max: S,
    pub sample_count: usize,
    /// Half-width of the fallback sampling window as a fraction of the
    /// constant-acceleration duration.
    pub sample_spread: S,
    /// Reference speed for axes the constant-acceleration model cannot reach.
    pub v_ref: S,
}

impl<S: Real> Default for PrimitiveOptions<S> {
    fn default() -> Self {
        PrimitiveOptions {
            t_min: S::lit(0.1),
            t_max: S::lit(60.0),
            sample_count: 64,
            sample_spread: S::lit(0.5),
            v_ref: S::lit(2.0),
        }
    }
}

impl<S: Real> PrimitiveOptions<S> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.t_min > S::zero()
            && self.t_min < self.t_max
            && self.sample_count >= 1
            && self.sample_spread > S::zero()
            && self.sample_spread < S::one()
            && self.v_ref > S::zero();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "primitive options out of range: {self:?}"
            )))
        }
    }
}

/// Per-axis jerk coefficients `(β1, β2, β3)` with `jerk(t) = β1 t²/2 + β2 t + β3`.
pub type Betas<S, const N: usize> = [[S; 3]; N];

fn check_duration<S: Real>(t: S) -> Result<()> {
    if t > S::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDuration(t.as_f64()))
    }
}

fn position_gap<S: Real>(p0: S, v0: S, a0: S, p_end: S, t: S) -> S {
    p_end - (p0 + v0 * t + S::lit(0.5) * a0 * t * t)
}

/// Coefficients that reach `p_end` at `duration` with vanishing velocity and
/// acceleration costates.
pub fn beta_coefficients<S: Real, const N: usize>(
    x0: &StateVec<S, N>,
    p_end: &[S; N],
    duration: S,
) -> Result<Betas<S, N>> {
    check_duration(duration)?;
    let t = duration;
    let t3 = t * t * t;
    let t5 = t3 * t * t;
    let mut out = [[S::zero(); 3]; N];
    for i in 0..N {
        let gap = position_gap(x0.pos[i], x0.vel[i], x0.acc[i], p_end[i], t);
        out[i] = [
            S::lit(20.0) * gap / t5,
            S::lit(-20.0) * gap / (t5 / t),
            S::lit(10.0) * gap / t3,
        ];
    }
    Ok(out)
}

/// Quintic position trajectory of the primitive with the given duration.
pub fn primitive_trajectory<S: Real, const N: usize>(
    x0: &StateVec<S, N>,
    p_end: &[S; N],
    duration: S,
) -> Result<QuinticTrajectory<S, N>> {
    let betas = beta_coefficients(x0, p_end, duration)?;
    let mut coeffs = [[S::zero(); 6]; N];
    for i in 0..N {
        let [b1, b2, b3] = betas[i];
        coeffs[i] = [
            x0.pos[i],
            x0.vel[i],
            x0.acc[i] / S::lit(2.0),
            b3 / S::lit(6.0),
            b2 / S::lit(24.0),
            b1 / S::lit(120.0),
        ];
    }
    Ok(QuinticTrajectory::new(coeffs, duration))
}

/// Polynomial in `T` whose roots are the stationary durations of the total
/// cost `J(T) = Σ 20 Δ(T)²/T⁵ + T`.
///
/// `T⁶ dJ/dT = T⁶ - Σ_axes [40 Δ (v0 + a0 T) T + 100 Δ²]`, with all axes
/// summed into shared coefficients. The result has degree 6.
pub fn duration_polynomial<S: Real, const N: usize>(x0: &StateVec<S, N>, p_end: &[S; N]) -> Poly<S> {
    let mut acc = Poly::new([
        S::zero(),
        S::zero(),
        S::zero(),
        S::zero(),
        S::zero(),
        S::zero(),
        S::one(),
    ]);
    for i in 0..N {
        let (p0, v0, a0) = (x0.pos[i], x0.vel[i], x0.acc[i]);
        let gap = Poly::new([p_end[i] - p0, -v0, -S::lit(0.5) * a0]);
        let rate_t = Poly::new([S::zero(), v0, a0]);
        let cross = (&gap * &rate_t).scale(S::lit(40.0));
        let sq = gap.square().scale(S::lit(100.0));
        acc = &(&acc - &cross) - &sq;
    }
    acc
}

/// Duration under a constant-acceleration assumption: the latest first
/// arrival over all axes.
pub fn constant_accel_duration<S: Real, const N: usize>(
    x0: &StateVec<S, N>,
    p_end: &[S; N],
    opts: &PrimitiveOptions<S>,
) -> S {
    let mut longest = S::zero();
    for i in 0..N {
        let gap = p_end[i] - x0.pos[i];
        let quad = Poly::new([-gap, x0.vel[i], S::lit(0.5) * x0.acc[i]]);
        let first = if quad.degree() == 0 {
            None
        } else {
            quad.real_roots()
                .ok()
                .and_then(|r| r.into_iter().find(|&t| t > S::zero()))
        };
        let t = first.unwrap_or_else(|| gap.abs() / opts.v_ref);
        longest = longest.max(t);
    }
    if longest < opts.t_min {
        opts.t_min
    } else {
        longest
    }
}

/// `(1/T) (∫_0^T ‖jerk‖² dt + T)`.
pub fn average_cost<S: Real, const N: usize>(traj: &QuinticTrajectory<S, N>) -> Result<S> {
    check_duration(traj.duration)?;
    let jerk_sq: S = (0..N)
        .map(|i| traj.axis_derivative(i, 3).integral_of_square(traj.duration))
        .sum();
    Ok((jerk_sq + traj.duration) / traj.duration)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinTimePrimitive<S, const N: usize> {
    pub trajectory: QuinticTrajectory<S, N>,
    /// Whether the duration came from a root of the duration polynomial (as
    /// opposed to the constant-acceleration sampling fallback).
    pub from_root: bool,
}

/// Lowest-average-cost primitive over the admissible stationary durations,
/// falling back to sampling around the constant-acceleration duration.
pub fn solve_min_time<S: Real, const N: usize>(
    x0: &StateVec<S, N>,
    p_end: &[S; N],
    opts: &PrimitiveOptions<S>,
) -> MinTimePrimitive<S, N> {
    let roots = duration_polynomial(x0, p_end)
        .real_roots()
        .unwrap_or_default();
    let candidates: Vec<S> = roots
        .into_iter()
        .filter(|&t| t >= opts.t_min && t <= opts.t_max)
        .collect();
    if let Some(trajectory) = best_of(x0, p_end, candidates) {
        return MinTimePrimitive {
            trajectory,
            from_root: true,
        };
    }

    let guess = constant_accel_duration(x0, p_end, opts);
    let lo = (guess * (S::one() - opts.sample_spread)).max(opts.t_min);
    let hi = (guess * (S::one() + opts.sample_spread)).min(opts.t_max);
    let samples: Vec<S> = if lo >= hi || opts.sample_count == 1 {
        vec![guess.max(opts.t_min).min(opts.t_max)]
    } else {
        let step = (hi - lo) / S::from_count(opts.sample_count - 1);
        (0..opts.sample_count)
            .map(|k| lo + step * S::from_count(k))
            .collect()
    };
    let trajectory = best_of(x0, p_end, samples).unwrap_or_else(|| {
        primitive_trajectory(x0, p_end, opts.t_min).expect("t_min is positive")
    });
    MinTimePrimitive {
        trajectory,
        from_root: false,
    }
}

/// Minimum average cost; ties go to the shorter duration.
fn best_of<S: Real, const N: usize>(
    x0: &StateVec<S, N>,
    p_end: &[S; N],
    mut durations: Vec<S>,
) -> Option<QuinticTrajectory<S, N>> {
    durations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best: Option<(S, QuinticTrajectory<S, N>)> = None;
    for t in durations {
        let Ok(traj) = primitive_trajectory(x0, p_end, t) else {
            continue;
        };
        let Ok(cost) = average_cost(&traj) else {
            continue;
        };
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, traj));
        }
    }
    best.map(|(_, t)| t)
}
