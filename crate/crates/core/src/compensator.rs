//! Spatial correction of predicted peer trajectories.
//!
//! Over a moving horizon of broadcast states, the difference between what a
//! peer actually did and what was predicted for it is fitted by a quintic per
//! axis, subject to the correction vanishing at the current instant (local
//! time zero) and at the end of the prediction. The equality-constrained least
//! squares problem is solved through its KKT system.
//!
//! Horizon samples are placed on the compensator's clock relative to the
//! newest one: sample `i` sits at `ts_i - ts_newest <= 0`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymmetricIndefinite};
use crate::scalar::Real;
use crate::trajectory::{eval_derivative, PredictedTrajectory, QuinticTrajectory, StateVec};

/// Which state components a boundary condition pins to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binding {
    /// Position, velocity and acceleration.
    Full,
    PositionOnly,
}

impl Binding {
    fn orders(self) -> usize {
        match self {
            Binding::Full => 3,
            Binding::PositionOnly => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompensatorConfig<S> {
    /// Horizon length `K_comp`.
    pub capacity: usize,
    /// Residual weights for position, velocity, acceleration.
    pub weights: [S; 3],
    pub at_start: Binding,
    pub at_end: Binding,
}

impl<S: Real> Default for CompensatorConfig<S> {
    fn default() -> Self {
        CompensatorConfig {
            capacity: 10,
            weights: [S::one(), S::lit(0.1), S::lit(0.01)],
            at_start: Binding::Full,
            at_end: Binding::Full,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizonSample<S, const N: usize> {
    pub timestamp: S,
    pub observed: StateVec<S, N>,
    pub predicted: StateVec<S, N>,
}

impl<S: Real, const N: usize> HorizonSample<S, N> {
    pub fn residual(&self) -> StateVec<S, N> {
        self.observed.sub(&self.predicted)
    }
}

/// Ring of the last `capacity` (observed, predicted) pairs for one peer.
#[derive(Clone, Debug)]
pub struct HorizonBuffer<S, const N: usize> {
    capacity: usize,
    samples: VecDeque<HorizonSample<S, N>>,
}

impl<S: Real, const N: usize> HorizonBuffer<S, N> {
    pub fn new(capacity: usize) -> Self {
        HorizonBuffer {
            capacity: capacity.max(1),
            samples: VecDeque::with_capacity(capacity.max(1)),
        }
    }

    pub fn push_observation(
        &mut self,
        observed: StateVec<S, N>,
        predicted: StateVec<S, N>,
        timestamp: S,
    ) -> Result<()> {
        if let Some(last) = self.samples.back() {
            if !(timestamp > last.timestamp) {
                return Err(Error::NonMonotoneTimestamp {
                    last: last.timestamp.as_f64(),
                    got: timestamp.as_f64(),
                });
            }
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(HorizonSample {
            timestamp,
            observed,
            predicted,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = &HorizonSample<S, N>> {
        self.samples.iter()
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }

    /// Sample times on the compensator clock (newest at zero).
    pub fn local_times(&self) -> Vec<S> {
        let newest = self.samples.back().map_or(S::zero(), |s| s.timestamp);
        self.samples.iter().map(|s| s.timestamp - newest).collect()
    }
}

/// Additive quintic correction per axis, on the same clock and duration as the
/// prediction it corrects.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompensatorPoly<S, const N: usize> {
    pub coeffs: [[S; 6]; N],
    pub duration: S,
}

impl<S: Real, const N: usize> CompensatorPoly<S, N> {
    pub fn zero(duration: S) -> Self {
        CompensatorPoly {
            coeffs: [[S::zero(); 6]; N],
            duration,
        }
    }

    pub fn eval_state(&self, t: S) -> StateVec<S, N> {
        let mut s = StateVec::zeros();
        for o in 0..3 {
            let dst = s.order_mut(o);
            for i in 0..N {
                dst[i] = eval_derivative(&self.coeffs[i], o, t);
            }
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| c.is_zero())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompensatorFit<S, const N: usize> {
    pub poly: CompensatorPoly<S, N>,
    /// Constraint multipliers per axis, ordered start constraints then end
    /// constraints, each by increasing derivative order.
    pub multipliers: [Vec<S>; N],
    /// The KKT system was singular; `poly` is the zero correction.
    pub singular: bool,
}

fn falling(k: usize, order: usize) -> usize {
    (0..order).fold(1, |f, j| f * (k - j))
}

/// Least-squares objective `Σ_i Σ_o w_o (x_cmp,o(t_i) - r_{i,o})²` summed over axes.
pub fn fit_objective<S: Real, const N: usize>(
    buf: &HorizonBuffer<S, N>,
    poly: &CompensatorPoly<S, N>,
    cfg: &CompensatorConfig<S>,
) -> S {
    buf.local_times()
        .into_iter()
        .zip(buf.samples())
        .map(|(t, s)| {
            let c = poly.eval_state(t);
            let r = s.residual();
            let mut acc = S::zero();
            for o in 0..3 {
                for i in 0..N {
                    let e = c.order(o)[i] - r.order(o)[i];
                    acc += cfg.weights[o] * e * e;
                }
            }
            acc
        })
        .sum()
}

/// Fit the correction over `buf` for a prediction of length `duration`.
///
/// The problem is assembled in the scaled basis `(t/T)^k` so that the
/// constraint rows at `t = T` are of unit size.
pub fn fit_compensator<S: Real, const N: usize>(
    buf: &HorizonBuffer<S, N>,
    duration: S,
    cfg: &CompensatorConfig<S>,
) -> Result<CompensatorFit<S, N>> {
    if !(duration > S::zero()) || !duration.is_finite() {
        return Err(Error::NonPositiveDuration(duration.as_f64()));
    }
    if buf.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: buf.len(),
        });
    }
    let times = buf.local_times();
    let n_start = cfg.at_start.orders();
    let n_end = cfg.at_end.orders();
    let m = n_start + n_end;
    let dim = 6 + m;

    // Hessian rows are shared by all axes; only the right-hand side differs.
    // Row of derivative `o` at time `t` in the scaled basis: k!/(k-o)! s^(k-o) / T^o.
    let inv_t = S::one() / duration;
    let scaled_row = |o: usize, t: S| -> [S; 6] {
        let s = t * inv_t;
        let mut row = [S::zero(); 6];
        for (k, r) in row.iter_mut().enumerate().skip(o) {
            *r = S::from_count(falling(k, o)) * s.powi((k - o) as i32) * inv_t.powi(o as i32);
        }
        row
    };
    // Constraint rows are additionally multiplied by T^o.
    let constraint_row = |o: usize, at_end: bool| -> [S; 6] {
        let mut row = [S::zero(); 6];
        for (k, r) in row.iter_mut().enumerate().skip(o) {
            let f = S::from_count(falling(k, o));
            *r = if at_end || k == o { f } else { S::zero() };
        }
        row
    };

    let mut kkt = DenseMatrix::zeros(dim);
    for &t in &times {
        for o in 0..3 {
            let row = scaled_row(o, t);
            for a in 0..6 {
                for b in 0..6 {
                    kkt.add_to(a, b, cfg.weights[o] * row[a] * row[b]);
                }
            }
        }
    }
    let mut constraint_orders = Vec::with_capacity(m);
    for o in 0..n_start {
        constraint_orders.push((o, false));
    }
    for o in 0..n_end {
        constraint_orders.push((o, true));
    }
    for (c, &(o, at_end)) in constraint_orders.iter().enumerate() {
        let row = constraint_row(o, at_end);
        for (k, &v) in row.iter().enumerate() {
            kkt.set(6 + c, k, v);
            kkt.set(k, 6 + c, v);
        }
    }

    let Some(factor) = SymmetricIndefinite::factor(&kkt) else {
        return Ok(CompensatorFit {
            poly: CompensatorPoly::zero(duration),
            multipliers: std::array::from_fn(|_| vec![S::zero(); m]),
            singular: true,
        });
    };

    let mut coeffs = [[S::zero(); 6]; N];
    let mut multipliers: [Vec<S>; N] = std::array::from_fn(|_| Vec::with_capacity(m));
    for axis in 0..N {
        let mut rhs = vec![S::zero(); dim];
        for (&t, sample) in times.iter().zip(buf.samples()) {
            let r = sample.residual();
            for o in 0..3 {
                let row = scaled_row(o, t);
                let w = cfg.weights[o] * r.order(o)[axis];
                for k in 0..6 {
                    rhs[k] += w * row[k];
                }
            }
        }
        let sol = factor.solve(&rhs);
        let mut tk = S::one();
        for k in 0..6 {
            coeffs[axis][k] = sol[k] / tk;
            tk *= duration;
        }
        for (c, &(o, _)) in constraint_orders.iter().enumerate() {
            multipliers[axis].push(sol[6 + c] * duration.powi(o as i32));
        }
    }
    Ok(CompensatorFit {
        poly: CompensatorPoly { coeffs, duration },
        multipliers,
        singular: false,
    })
}

/// `x_obs(t) = x_pred(t) + x_cmp(t)`; the sum holds its endpoint past `T`.
pub fn compose_prediction<S: Real, const N: usize>(
    pred: &QuinticTrajectory<S, N>,
    comp: &CompensatorPoly<S, N>,
) -> Result<PredictedTrajectory<S, N>> {
    let tol = S::lit(1e-9) * S::one().max(pred.duration.abs());
    if (pred.duration - comp.duration).abs() > tol {
        return Err(Error::DurationMismatch {
            prediction: pred.duration.as_f64(),
            compensator: comp.duration.as_f64(),
        });
    }
    Ok(pred.plus_coeffs(&comp.coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(p: f64, v: f64, a: f64) -> StateVec<f64, 1> {
        StateVec::new([p], [v], [a])
    }

    #[test]
    fn push_and_evict() {
        let mut b = HorizonBuffer::<f64, 1>::new(3);
        b.push_observation(st(0.0, 0.0, 0.0), st(0.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(b.len(), 1);
        for k in 1..=3 {
            b.push_observation(st(k as f64, 0.0, 0.0), st(0.0, 0.0, 0.0), k as f64 * 0.1)
                .unwrap();
        }
        assert_eq!(b.len(), 3);
        assert_eq!(b.samples().next().unwrap().observed.pos[0], 1.0);
        let lt = b.local_times();
        assert!((lt[0] + 0.2).abs() < 1e-12 && (lt[1] + 0.1).abs() < 1e-12 && lt[2] == 0.0);
    }

    #[test]
    fn non_monotone_timestamp_rejected() {
        let mut b = HorizonBuffer::<f64, 1>::new(3);
        b.push_observation(st(0.0, 0.0, 0.0), st(0.0, 0.0, 0.0), 1.0).unwrap();
        let e = b.push_observation(st(0.0, 0.0, 0.0), st(0.0, 0.0, 0.0), 1.0);
        assert!(matches!(e, Err(Error::NonMonotoneTimestamp { .. })));
    }

    #[test]
    fn zero_residual_gives_zero_correction() {
        let mut b = HorizonBuffer::<f64, 1>::new(10);
        for k in 0..10 {
            let s = st(k as f64 * 0.3, 1.0, -0.2);
            b.push_observation(s, s, k as f64 * 0.1).unwrap();
        }
        for binding in [Binding::Full, Binding::PositionOnly] {
            let cfg = CompensatorConfig {
                at_end: binding,
                ..CompensatorConfig::default()
            };
            let fit = fit_compensator(&b, 4.0, &cfg).unwrap();
            assert!(!fit.singular);
            assert!(fit.poly.is_zero(), "{:?}", fit.poly);
        }
    }

    #[test]
    fn too_few_samples() {
        let mut b = HorizonBuffer::<f64, 1>::new(10);
        b.push_observation(st(0.0, 0.0, 0.0), st(0.0, 0.0, 0.0), 0.0).unwrap();
        assert!(matches!(
            fit_compensator(&b, 1.0, &CompensatorConfig::default()),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn duration_mismatch() {
        let pred = QuinticTrajectory::<f64, 1>::stationary([0.0], 2.0);
        let comp = CompensatorPoly::zero(2.5);
        assert!(matches!(
            compose_prediction(&pred, &comp),
            Err(Error::DurationMismatch { .. })
        ));
        assert_eq!(compose_prediction(&pred, &CompensatorPoly::zero(2.0)).unwrap(), pred);
    }

    mod fits {
        use super::super::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        fn buffer_from(
            rng: &mut ChaCha8Rng,
            residual: impl Fn(f64) -> StateVec<f64, 3>,
            dt: f64,
        ) -> HorizonBuffer<f64, 3> {
            let mut b = HorizonBuffer::new(10);
            let t_now = 5.0;
            for k in 0..10 {
                let ts = t_now - dt * (9 - k) as f64;
                let mut v = || [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
                let predicted = StateVec::new(v(), v(), v());
                let observed = predicted.add(&residual(ts - t_now));
                b.push_observation(observed, predicted, ts).unwrap();
            }
            b
        }

        /// Rows of value/velocity/acceleration in the plain monomial basis.
        fn phi(o: usize, t: f64) -> [f64; 6] {
            let mut r = [0.0; 6];
            for (k, x) in r.iter_mut().enumerate().skip(o) {
                *x = falling(k, o) as f64 * t.powi((k - o) as i32);
            }
            r
        }

        #[test]
        fn exact_quintic_is_recovered() {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let t_end = 3.0;
            let cfg = CompensatorConfig {
                at_end: Binding::PositionOnly,
                ..CompensatorConfig::default()
            };
            for _ in 0..20 {
                // t³ (t − T)(a + b t) vanishes to second order at 0 and in value at T.
                let ab: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                let coeffs: [[f64; 6]; 3] = std::array::from_fn(|i| {
                    let (a, b) = ab[i];
                    [0.0, 0.0, 0.0, -a * t_end, a - b * t_end, b]
                });
                let truth = CompensatorPoly { coeffs, duration: t_end };
                let buf = buffer_from(&mut rng, |t| truth.eval_state(t), 0.1);
                let fit = fit_compensator(&buf, t_end, &cfg).unwrap();
                assert!(!fit.singular);
                assert!(fit_objective(&buf, &fit.poly, &cfg) < 1e-8);
                for i in 0..3 {
                    for k in 0..6 {
                        assert!((fit.poly.coeffs[i][k] - coeffs[i][k]).abs() < 1e-6, "{:?}", fit.poly);
                    }
                }
            }
        }

        #[test]
        fn kkt_conditions_hold() {
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            for case in 0..100 {
                let t_end = rng.gen_range(0.5..8.0);
                let at_end = if case % 2 == 0 { Binding::Full } else { Binding::PositionOnly };
                let cfg = CompensatorConfig { at_end, ..CompensatorConfig::default() };
                let offsets: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let dt = rng.gen_range(0.05..0.2);
                let buf = buffer_from(
                    &mut rng,
                    |t| StateVec::new(
                        [offsets[0] + t, offsets[1] * t * t, offsets[2]],
                        [offsets[3], offsets[4], offsets[5] * t],
                        [offsets[6], offsets[7], offsets[8]],
                    ),
                    dt,
                );
                let fit = fit_compensator(&buf, t_end, &cfg).unwrap();
                assert!(!fit.singular);

                let times = buf.local_times();
                let mut cons: Vec<[f64; 6]> = (0..3).map(|o| phi(o, 0.0)).collect();
                cons.extend((0..at_end.orders()).map(|o| phi(o, t_end)));
                for axis in 0..3 {
                    let c = &fit.poly.coeffs[axis];
                    // Stationarity: H c + Aᵀ μ = g.
                    let mut grad = [0.0f64; 6];
                    let mut scale = 0.0f64;
                    for (&t, s) in times.iter().zip(buf.samples()) {
                        let r = s.residual();
                        for o in 0..3 {
                            let row = phi(o, t);
                            let pred: f64 = (0..6).map(|k| row[k] * c[k]).sum();
                            for k in 0..6 {
                                let term = cfg.weights[o] * row[k];
                                grad[k] += term * (pred - r.order(o)[axis]);
                                scale = scale.max((term * r.order(o)[axis]).abs());
                            }
                        }
                    }
                    for (j, row) in cons.iter().enumerate() {
                        for k in 0..6 {
                            grad[k] += row[k] * fit.multipliers[axis][j];
                        }
                        let value: f64 = (0..6).map(|k| row[k] * c[k]).sum();
                        assert!(value.abs() < 1e-9, "constraint {j}: {value}");
                    }
                    for g in grad {
                        assert!(g.abs() < 1e-8 * scale.max(1.0), "case {case}: {grad:?}");
                    }
                }
                let zero = CompensatorPoly::zero(t_end);
                let base = fit_objective(&buf, &zero, &cfg);
                let got = fit_objective(&buf, &fit.poly, &cfg);
                assert!(got <= base * (1.0 + 1e-9), "case {case}: {got} > {base} {:?}", fit.poly);
                let again = fit_compensator(&buf, t_end, &cfg).unwrap();
                assert_eq!(again, fit);
            }
        }

        #[test]
        fn full_binding_on_both_ends_is_degenerate() {
            // Six constraints on six coefficients leave only the zero polynomial.
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let buf = buffer_from(&mut rng, |t| StateVec::at_rest([1.0 + t, 0.5, -t]), 0.1);
            let fit = fit_compensator(&buf, 2.0, &CompensatorConfig::default()).unwrap();
            assert!(fit.poly.coeffs.iter().flatten().all(|c| c.abs() < 1e-12));
        }
    }
}
