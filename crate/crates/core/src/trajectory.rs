//! Triple-integrator states and per-axis quintic trajectories.

use serde::{Deserialize, Serialize};

use crate::poly::Poly;
use crate::scalar::Real;

/// Position, velocity and acceleration of one robot along each of `N` axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct StateVec<S, const N: usize> {
    #[serde(with = "serde_arrays")]
    pub pos: [S; N],
    #[serde(with = "serde_arrays")]
    pub vel: [S; N],
    #[serde(with = "serde_arrays")]
    pub acc: [S; N],
}

impl<S: Real, const N: usize> StateVec<S, N> {
    pub fn new(pos: [S; N], vel: [S; N], acc: [S; N]) -> Self {
        StateVec { pos, vel, acc }
    }

    pub fn at_rest(pos: [S; N]) -> Self {
        StateVec {
            pos,
            vel: [S::zero(); N],
            acc: [S::zero(); N],
        }
    }

    pub fn zeros() -> Self {
        Self::at_rest([S::zero(); N])
    }

    pub fn is_finite(&self) -> bool {
        self.pos
            .iter()
            .chain(&self.vel)
            .chain(&self.acc)
            .all(|x| x.is_finite())
    }

    /// Component `order` (0 position, 1 velocity, 2 acceleration).
    pub fn order(&self, order: usize) -> &[S; N] {
        match order {
            0 => &self.pos,
            1 => &self.vel,
            2 => &self.acc,
            _ => panic!("state order {order} out of range"),
        }
    }

    pub fn order_mut(&mut self, order: usize) -> &mut [S; N] {
        match order {
            0 => &mut self.pos,
            1 => &mut self.vel,
            2 => &mut self.acc,
            _ => panic!("state order {order} out of range"),
        }
    }

    pub fn map2(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        let mut out = *self;
        for o in 0..3 {
            let (a, b) = (self.order(o), other.order(o));
            let dst = out.order_mut(o);
            for i in 0..N {
                dst[i] = f(a[i], b[i]);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map2(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.map2(other, |a, b| a + b)
    }

    pub fn scale(&self, s: S) -> Self {
        self.map2(self, |a, _| a * s)
    }

    /// `Σ w_k x_k²` over all 3N components with diagonal weights `w`.
    pub fn weighted_norm_sq(&self, w: &Self) -> S {
        (0..3)
            .flat_map(|o| (0..N).map(move |i| (o, i)))
            .map(|(o, i)| w.order(o)[i] * self.order(o)[i] * self.order(o)[i])
            .sum()
    }
}

/// Degree-5 position polynomial per axis over a shared duration.
///
/// Coefficients are ascending (`coeffs[axis][k]` multiplies `t^k`). Beyond the
/// duration the trajectory holds its terminal position at rest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct QuinticTrajectory<S, const N: usize> {
    #[serde(with = "serde_arrays")]
    pub coeffs: [[S; 6]; N],
    pub duration: S,
}

/// A peer trajectory as seen by a planner; same representation and
/// endpoint-hold semantics as an own plan.
pub type PredictedTrajectory<S, const N: usize> = QuinticTrajectory<S, N>;

impl<S: Real, const N: usize> QuinticTrajectory<S, N> {
    pub fn new(coeffs: [[S; 6]; N], duration: S) -> Self {
        QuinticTrajectory { coeffs, duration }
    }

    /// Hold `pos` at rest for `duration`.
    pub fn stationary(pos: [S; N], duration: S) -> Self {
        let mut coeffs = [[S::zero(); 6]; N];
        for i in 0..N {
            coeffs[i][0] = pos[i];
        }
        QuinticTrajectory { coeffs, duration }
    }

    pub fn axis(&self, i: usize) -> Poly<S> {
        Poly::new(self.coeffs[i])
    }

    /// Derivative of order `order` of axis `i` as a polynomial.
    pub fn axis_derivative(&self, i: usize, order: usize) -> Poly<S> {
        (0..order).fold(self.axis(i), |p, _| p.derivative())
    }

    /// Raw polynomial evaluation of derivative `order` on every axis, without
    /// endpoint hold (valid for any real `t`, including negative times).
    pub fn eval_order(&self, order: usize, t: S) -> [S; N] {
        let mut out = [S::zero(); N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = eval_derivative(&self.coeffs[i], order, t);
        }
        out
    }

    pub fn eval_state(&self, t: S) -> StateVec<S, N> {
        StateVec {
            pos: self.eval_order(0, t),
            vel: self.eval_order(1, t),
            acc: self.eval_order(2, t),
        }
    }

    /// State at `t`, holding the terminal position at rest once `t > duration`.
    pub fn sample(&self, t: S) -> StateVec<S, N> {
        if t > self.duration {
            StateVec::at_rest(self.eval_order(0, self.duration))
        } else {
            self.eval_state(t)
        }
    }

    pub fn position(&self, t: S) -> [S; N] {
        self.sample(t).pos
    }

    pub fn jerk(&self, t: S) -> [S; N] {
        if t > self.duration {
            [S::zero(); N]
        } else {
            self.eval_order(3, t)
        }
    }

    pub fn start_state(&self) -> StateVec<S, N> {
        self.eval_state(S::zero())
    }

    pub fn end_state(&self) -> StateVec<S, N> {
        self.eval_state(self.duration)
    }

    /// The remainder of this trajectory re-based so that local time zero is
    /// `elapsed` on the original clock. Once past the end, the result is a
    /// stationary hold at the terminal position.
    pub fn rebased(&self, elapsed: S) -> Self {
        if elapsed >= self.duration {
            return Self::stationary(self.eval_order(0, self.duration), S::zero());
        }
        let mut coeffs = [[S::zero(); 6]; N];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let shifted = self.axis(i).shift(elapsed);
            for (k, v) in c.iter_mut().enumerate() {
                *v = shifted.coeff(k);
            }
        }
        QuinticTrajectory {
            coeffs,
            duration: self.duration - elapsed,
        }
    }

    /// Coefficient-wise sum; the duration of `self` is kept.
    pub fn plus_coeffs(&self, other: &[[S; 6]; N]) -> Self {
        let mut out = *self;
        for i in 0..N {
            for k in 0..6 {
                out.coeffs[i][k] += other[i][k];
            }
        }
        out
    }
}

/// Derivative of order `order` of an ascending quintic evaluated at `t`.
pub(crate) fn eval_derivative<S: Real>(c: &[S; 6], order: usize, t: S) -> S {
    let mut acc = S::zero();
    for k in (order..6).rev() {
        let falling = (0..order).fold(1usize, |f, j| f * (k - j));
        acc = acc * t + c[k] * S::from_count(falling);
    }
    acc
}

mod serde_arrays {
    //! Fixed-size arrays as sequences (serde only derives up to length 32
    //! without const generics support on nested arrays).
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T: Serialize, const N: usize, Ser: Serializer>(
        v: &[T; N],
        s: Ser,
    ) -> Result<Ser::Ok, Ser::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, T: Deserialize<'de>, const N: usize, D: Deserializer<'de>>(
        d: D,
    ) -> Result<[T; N], D::Error> {
        let v: Vec<T> = Vec::deserialize(d)?;
        let len = v.len();
        v.try_into()
            .map_err(|_| D::Error::custom(format!("expected {N} elements, got {len}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_evaluation_matches_polynomial() {
        let c = [1.0, -2.0, 0.5, 3.0, -0.25, 0.1];
        let traj = QuinticTrajectory::<f64, 1>::new([c], 2.0);
        for order in 0..4 {
            let p = traj.axis_derivative(0, order);
            for t in [0.0, 0.7, 1.9] {
                assert!((p.eval(t) - traj.eval_order(order, t)[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hold_beyond_duration() {
        let traj = QuinticTrajectory::<f64, 2>::new([[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]; 2], 1.5);
        let s = traj.sample(4.0);
        assert_eq!(s.pos, [1.5, 1.5]);
        assert_eq!(s.vel, [0.0, 0.0]);
        assert_eq!(traj.jerk(4.0), [0.0, 0.0]);
    }

    #[test]
    fn rebased_matches_original_clock() {
        let traj = QuinticTrajectory::<f64, 3>::new(
            [
                [0.0, 1.0, 0.2, -0.1, 0.01, 0.001],
                [1.0, 0.0, 0.0, 0.3, -0.05, 0.002],
                [2.0, -1.0, 0.5, 0.0, 0.0, -0.003],
            ],
            3.0,
        );
        let r = traj.rebased(1.25);
        assert!((r.duration - 1.75).abs() < 1e-15);
        for t in [0.0, 0.5, 1.75] {
            let a = r.sample(t);
            let b = traj.sample(t + 1.25);
            for i in 0..3 {
                assert!((a.pos[i] - b.pos[i]).abs() < 1e-12);
                assert!((a.vel[i] - b.vel[i]).abs() < 1e-12);
            }
        }
        let done = traj.rebased(5.0);
        assert_eq!(done.position(0.0), traj.position(3.0));
    }
}
