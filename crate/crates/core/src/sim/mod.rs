//! Lockstep multi-robot simulator: scenarios, a surrogate plant, the
//! broadcast/predict/plan loop, and run reports.

pub mod config;
pub mod io;
pub mod plant;
pub mod report;
pub mod scenario;
pub mod world;

pub use config::{
    swarm_weights, CompensatorSettings, DeadlockSettings, Mode, PlannerSettings, RunConfig, TrackingSettings,
};
pub use plant::{Plant, PlantModel};
pub use report::{
    aggregate, metrics, Aggregate, Event, Metrics, RobotOutcome, RobotStatus, RunReport, Sample, StageTiming,
    Termination, TimingStats,
};
pub use scenario::{
    antipodal_circle, box_for_occupancy, generate_in_box, generate_scenario, Preset, RobotModel, RobotSpec,
    Scenario, DEFAULT_PROPORTIONS, DENSITY_BOX, ETA,
};
pub use world::{detect_collisions, detect_deadlock, run, Broadcast, RobotRuntime, World};
