//! Moving-horizon tracking error used to pad collision ellipsoids.

use std::collections::VecDeque;

use crate::scalar::Real;
use crate::trajectory::StateVec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingConfig<S, const N: usize> {
    /// Horizon length `K`.
    pub capacity: usize,
    /// Diagonal of `Q`, laid out like a state.
    pub weights: StateVec<S, N>,
    /// Value reported while the history is empty.
    pub prior: S,
    /// Upper clamp on the reported pad.
    pub max_pad: Option<S>,
}

impl<S: Real, const N: usize> Default for TrackingConfig<S, N> {
    fn default() -> Self {
        TrackingConfig {
            capacity: 20,
            weights: StateVec::new([S::one(); N], [S::lit(0.1); N], [S::lit(0.01); N]),
            prior: S::zero(),
            max_pad: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrackingHistory<S, const N: usize> {
    cfg: TrackingConfig<S, N>,
    residuals: VecDeque<StateVec<S, N>>,
}

impl<S: Real, const N: usize> TrackingHistory<S, N> {
    /// Negative weights are clamped to zero so `Q` stays positive semidefinite.
    pub fn new(mut cfg: TrackingConfig<S, N>) -> Self {
        cfg.capacity = cfg.capacity.max(1);
        let w = cfg.weights;
        cfg.weights = w.map2(&w, |a, _| a.max(S::zero()));
        TrackingHistory {
            residuals: VecDeque::with_capacity(cfg.capacity),
            cfg,
        }
    }

    pub fn config(&self) -> &TrackingConfig<S, N> {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn update(&mut self, planned: &StateVec<S, N>, observed: &StateVec<S, N>) {
        if self.residuals.len() == self.cfg.capacity {
            self.residuals.pop_front();
        }
        self.residuals.push_back(planned.sub(observed));
    }

    /// Weighted RMS of the stored residuals, dividing by the number of stored
    /// samples while the horizon is still filling.
    pub fn tracking_error(&self) -> S {
        if self.residuals.is_empty() {
            return self.cfg.prior;
        }
        let sum: S = self
            .residuals
            .iter()
            .map(|r| r.weighted_norm_sq(&self.cfg.weights))
            .sum();
        let xi = (sum / S::from_count(self.residuals.len())).sqrt();
        match self.cfg.max_pad {
            Some(m) => xi.min(m),
            None => xi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn identity_cfg(capacity: usize) -> TrackingConfig<f64, 3> {
        TrackingConfig {
            capacity,
            weights: StateVec::new([1.0; 3], [1.0; 3], [1.0; 3]),
            ..TrackingConfig::default()
        }
    }

    #[test]
    fn empty_uses_prior() {
        let h = TrackingHistory::<f64, 3>::new(TrackingConfig {
            prior: 0.25,
            ..TrackingConfig::default()
        });
        assert_eq!(h.tracking_error(), 0.25);
    }

    #[test]
    fn perfect_tracking_is_zero() {
        let mut h = TrackingHistory::new(TrackingConfig::<f64, 3>::default());
        let s = StateVec::new([1.0, 2.0, 3.0], [0.1; 3], [0.0; 3]);
        for _ in 0..30 {
            h.update(&s, &s);
        }
        assert_eq!(h.len(), 20);
        assert_eq!(h.tracking_error(), 0.0);
    }

    #[test]
    fn zero_weights_are_zero() {
        let mut h = TrackingHistory::new(TrackingConfig {
            weights: StateVec::<f64, 3>::zeros(),
            ..TrackingConfig::default()
        });
        h.update(&StateVec::at_rest([1.0; 3]), &StateVec::zeros());
        assert_eq!(h.tracking_error(), 0.0);
    }

    #[test]
    fn hand_computed_two_sample_fixture() {
        let mut h = TrackingHistory::new(identity_cfg(2));
        let zero = StateVec::zeros();
        h.update(&StateVec::at_rest([1.0, 0.0, 0.0]), &zero);
        h.update(&StateVec::at_rest([0.0, 1.0, 0.0]), &zero);
        assert_eq!(h.tracking_error(), 1.0);
        // evicting the first sample leaves a single unit residual
        h.update(&StateVec::new([0.0; 3], [0.0, 3.0, 0.0], [0.0; 3]), &zero);
        assert!((h.tracking_error() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn partial_horizon_divides_by_len() {
        let mut h = TrackingHistory::new(identity_cfg(20));
        h.update(&StateVec::at_rest([2.0, 0.0, 0.0]), &StateVec::zeros());
        assert_eq!(h.tracking_error(), 2.0);
    }

    #[test]
    fn clamp_applies() {
        let mut h = TrackingHistory::new(TrackingConfig {
            max_pad: Some(0.5),
            ..identity_cfg(4)
        });
        h.update(&StateVec::at_rest([3.0, 0.0, 0.0]), &StateVec::zeros());
        assert_eq!(h.tracking_error(), 0.5);
    }

    proptest! {
        #[test]
        fn scaling_is_linear(
            res in prop::collection::vec(prop::array::uniform9(-1.0f64..1.0), 1..30),
            c in 0.0f64..5.0,
        ) {
            let mut a = TrackingHistory::new(TrackingConfig::<f64, 3>::default());
            let mut b = TrackingHistory::new(TrackingConfig::<f64, 3>::default());
            for r in &res {
                let s = StateVec::new([r[0], r[1], r[2]], [r[3], r[4], r[5]], [r[6], r[7], r[8]]);
                a.update(&s, &StateVec::zeros());
                b.update(&s.scale(c), &StateVec::zeros());
            }
            let (xa, xb) = (a.tracking_error(), b.tracking_error());
            prop_assert!((xb - c * xa).abs() <= 1e-12 * (1.0 + c * xa));
        }
    }
}
