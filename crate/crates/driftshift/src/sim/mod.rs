//! Scenario generation, exact oracles, regret accounting, and rate overlays.

pub mod bounds;
pub mod oracle;
pub mod regret;
pub mod scenario;

pub use bounds::{average_power_transform, theory_bounds, BoundOverlay, TheoryParams};
pub use oracle::{density, integrate, EtaOracle};
pub use regret::{dynamic_regret, tv_label_path, PerTimeRegret, RegretReport};
pub use scenario::{
    certify_holder, presets, ClassCond, GaussianComponent, HolderShape, Scenario, ScenarioSpec,
    Segment, TrajectorySpec,
};
