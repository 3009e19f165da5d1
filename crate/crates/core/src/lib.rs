//! Decentralized multi-robot trajectory replanning with duration-condensed
//! quintic optimization.
//!
//! Each robot predicts its peers from their broadcast state, goal and size
//! (closed-form minimum-time primitives, reshaped by a least-squares
//! compensator) and then plans its own quintic by minimizing a soft-constrained
//! cost over a single scalar: the trajectory duration.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`) and the number of axes. The simulator and file formats
//! work in three dimensions with `f64`; the aliases below name those concrete
//! instantiations.

pub mod compensator;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod poly;
pub mod primitive;
pub mod quadrature;
pub mod scalar;
pub mod sim;
pub mod tracking;
pub mod trajectory;

pub use error::{Error, Result};
pub use poly::Poly;
pub use scalar::Real;
pub use trajectory::{PredictedTrajectory, QuinticTrajectory, StateVec};

pub type Poly64 = Poly<f64>;
pub type Poly32 = Poly<f32>;
pub type State3 = StateVec<f64, 3>;
pub type State3f = StateVec<f32, 3>;
pub type Trajectory3 = QuinticTrajectory<f64, 3>;
pub type Trajectory3f = QuinticTrajectory<f32, 3>;
pub type PlanContext3 = optimizer::PlanContext<f64, 3>;
pub type RobotShape64 = optimizer::RobotShape<f64>;
pub type CostWeights64 = optimizer::CostWeights<f64>;
pub type HorizonBuffer3 = compensator::HorizonBuffer<f64, 3>;
pub type TrackingHistory3 = tracking::TrackingHistory<f64, 3>;
