//! Surrogate vehicle dynamics: how the true state follows the reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::State3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PlantModel {
    /// The true state is the reference state.
    #[default]
    Perfect,
    /// Tracking error `e = x − x_ref` evolves per axis as
    ///
    /// ```text
    /// e_a ← ρ e_a + w,   e_v ← ρ e_v + e_a dt,   e_p ← ρ e_p + e_v dt,
    /// ```
    ///
    /// with `ρ = exp(−rate·dt)` and `w` uniform in `[−noise, noise]`
    /// (m/s², drawn once per axis per tick).
    Lag { rate: f64, noise: f64 },
}

impl PlantModel {
    /// Lag parameters giving a steady-state tracking error of roughly a
    /// decimetre at 100 Hz.
    pub fn default_lag() -> Self {
        PlantModel::Lag { rate: 2.0, noise: 0.1 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PlantModel::Perfect => Ok(()),
            PlantModel::Lag { rate, noise } if rate > 0.0 && rate.is_finite() && noise >= 0.0 && noise.is_finite() => Ok(()),
            other => Err(Error::InvalidParameter(format!("invalid plant model {other:?}"))),
        }
    }
}

/// One tracking-error state per robot, plus the noise stream.
#[derive(Clone, Debug)]
pub struct Plant {
    model: PlantModel,
    rng: ChaCha8Rng,
    errors: Vec<State3>,
}

impl Plant {
    pub fn new(model: PlantModel, robots: usize, seed: u64) -> Self {
        Plant {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            errors: vec![State3::zeros(); robots],
        }
    }

    pub fn model(&self) -> PlantModel {
        self.model
    }

    /// Start robot `k` off its reference by `error`. Ignored by the perfect
    /// plant.
    pub fn set_error(&mut self, k: usize, error: State3) {
        self.errors[k] = error;
    }

    pub fn error(&self, k: usize) -> &State3 {
        &self.errors[k]
    }

    /// Advance robot `k` by `dt` and return its true state given the
    /// reference at the end of the step.
    pub fn step(&mut self, k: usize, reference: &State3, dt: f64) -> State3 {
        match self.model {
            PlantModel::Perfect => *reference,
            PlantModel::Lag { rate, noise } => {
                let rho = (-rate * dt).exp();
                let e = &mut self.errors[k];
                for i in 0..3 {
                    let w = if noise > 0.0 {
                        self.rng.gen_range(-noise..=noise)
                    } else {
                        0.0
                    };
                    e.acc[i] = rho * e.acc[i] + w;
                    e.vel[i] = rho * e.vel[i] + e.acc[i] * dt;
                    e.pos[i] = rho * e.pos[i] + e.vel[i] * dt;
                }
                reference.add(e)
            }
        }
    }
}
