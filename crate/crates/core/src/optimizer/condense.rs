//! Boundary-value condensation: a quintic per axis fully determined by the
//! start state, the end state and the duration.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::{QuinticTrajectory, StateVec};

/// Durations below this make the boundary transform numerically singular.
pub const SINGULAR_DURATION: f64 = 1e-9;

/// The 3×3 map from `(α3, α4, α5)` to the end-state gaps `(Δp, Δv, Δa)`.
pub fn transform_matrix<S: Real>(t: S) -> [[S; 3]; 3] {
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    [
        [t3, t4, t5],
        [S::lit(3.0) * t2, S::lit(4.0) * t3, S::lit(5.0) * t4],
        [S::lit(6.0) * t, S::lit(12.0) * t2, S::lit(20.0) * t3],
    ]
}

/// End-state gaps after removing the part explained by the start state.
pub fn boundary_gaps<S: Real>(p0: S, v0: S, a0: S, pe: S, ve: S, ae: S, t: S) -> [S; 3] {
    let half = S::lit(0.5);
    [
        pe - (p0 + v0 * t + half * a0 * t * t),
        ve - (v0 + a0 * t),
        ae - a0,
    ]
}

/// Quintic joining `x0` at `t = 0` to `x_end` at `t = duration`, exactly.
pub fn condense<S: Real, const N: usize>(
    x0: &StateVec<S, N>,
    x_end: &StateVec<S, N>,
    duration: S,
) -> Result<QuinticTrajectory<S, N>> {
    if !(duration > S::zero()) || !duration.is_finite() {
        return Err(Error::NonPositiveDuration(duration.as_f64()));
    }
    if duration < S::lit(SINGULAR_DURATION) {
        return Err(Error::SingularTransform(duration.as_f64()));
    }
    let t = duration;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    let half = S::lit(0.5);
    let mut coeffs = [[S::zero(); 6]; N];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let [dp, dv, da] = boundary_gaps(
            x0.pos[i],
            x0.vel[i],
            x0.acc[i],
            x_end.pos[i],
            x_end.vel[i],
            x_end.acc[i],
            t,
        );
        c[0] = x0.pos[i];
        c[1] = x0.vel[i];
        c[2] = half * x0.acc[i];
        c[3] = (S::lit(10.0) * dp - S::lit(4.0) * dv * t + half * da * t2) / t3;
        c[4] = (S::lit(-15.0) * dp + S::lit(7.0) * dv * t - da * t2) / t4;
        c[5] = (S::lit(6.0) * dp - S::lit(3.0) * dv * t + half * da * t2) / t5;
    }
    Ok(QuinticTrajectory::new(coeffs, duration))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rest_to_same_rest_is_zero() {
        let x = StateVec::<f64, 3>::zeros();
        let traj = condense(&x, &x, 1.0).unwrap();
        assert!(traj.coeffs.iter().flatten().all(|&c| c == 0.0));
    }

    #[test]
    fn rejects_bad_durations() {
        let x = StateVec::<f64, 1>::zeros();
        assert!(matches!(
            condense(&x, &x, 0.0),
            Err(Error::NonPositiveDuration(_))
        ));
        assert!(matches!(
            condense(&x, &x, 1e-12),
            Err(Error::SingularTransform(_))
        ));
    }

    fn state(v: &[f64]) -> StateVec<f64, 3> {
        StateVec::new([v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]])
    }

    proptest! {
        #[test]
        fn endpoints_reproduced(
            a in prop::collection::vec(-5.0f64..5.0, 9),
            b in prop::collection::vec(-5.0f64..5.0, 9),
            t in 0.2f64..10.0,
        ) {
            let (x0, x1) = (state(&a), state(&b));
            let traj = condense(&x0, &x1, t).unwrap();
            let (s0, s1) = (traj.eval_state(0.0), traj.eval_state(t));
            for o in 0..3 {
                for i in 0..3 {
                    prop_assert!((s0.order(o)[i] - x0.order(o)[i]).abs() < 1e-9);
                    prop_assert!((s1.order(o)[i] - x1.order(o)[i]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn analytic_inverse_solves_transform(
            a in prop::collection::vec(-5.0f64..5.0, 9),
            b in prop::collection::vec(-5.0f64..5.0, 9),
            t in 0.2f64..4.0,
        ) {
            let (x0, x1) = (state(&a), state(&b));
            let traj = condense(&x0, &x1, t).unwrap();
            let m = transform_matrix(t);
            for i in 0..3 {
                let rhs = boundary_gaps(x0.pos[i], x0.vel[i], x0.acc[i], x1.pos[i], x1.vel[i], x1.acc[i], t);
                let alpha = &traj.coeffs[i][3..];
                for r in 0..3 {
                    let lhs: f64 = (0..3).map(|k| m[r][k] * alpha[k]).sum();
                    let scale = 1.0 + rhs[r].abs();
                    prop_assert!((lhs - rhs[r]).abs() < 1e-10 * scale);
                }
            }
        }
    }
}
