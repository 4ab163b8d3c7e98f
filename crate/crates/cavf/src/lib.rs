//! Deterministic 2-D guidance fields for collision avoidance.
//!
//! This crate builds collision avoidance vector fields (CAVFs) around
//! circular obstacles — static or translating at constant velocity — for a
//! vehicle that moves at constant speed and is steered only through its
//! heading rate. It provides:
//!
//! - the single-obstacle fields themselves ([`cavf_static`], [`cavf_moving`])
//!   together with their building blocks ([`gamma`], [`lambda`],
//!   [`solve_relative_speed`]);
//! - smooth multi-obstacle blending with surface-priority snapping
//!   ([`mixed_cavf`], [`mix_weights`], [`heading_rate_weights`]);
//! - heading-rate controllers that make the vehicle fly the field exactly
//!   ([`control_static`], [`control_dynamic`], [`control_mixed`]) and a
//!   proportional tracker with an exponential error envelope
//!   ([`control_tracking`], [`tracking_gain`]);
//! - a fixed-step scenario simulator with sensing, registration, and
//!   collision accounting ([`run`], [`step`], [`check_collision`]);
//! - TOML scenario files ([`load_scenario`], [`save_scenario`]), CSV
//!   trajectory/field exports ([`export`]), SVG rendering ([`plot`]), and a
//!   seeded random scenario generator ([`generate`]).
//!
//! Everything is deterministic: no global state, no wall-clock input, and
//! seeded randomness only in the generator. Angles are radians; the
//! convention for wrapped angles is the half-open interval `(-pi, pi]`
//! (see [`angles`]).
//!
//! # Example
//!
//! ```
//! use cavf::{cavf_static, CavfParams, Obstacle, Vec2};
//!
//! let obstacle = Obstacle {
//!     center: Vec2::new(0.0, 0.0),
//!     v_o: 0.0,
//!     theta_o: 0.0,
//!     cavf: CavfParams::new(1.0, 1.0, 3.0, 0.0).unwrap(),
//! };
//! // Field heading at a point inside the influence annulus.
//! let sample = cavf_static(Vec2::new(-1.8, 0.9), &obstacle, 1.0).unwrap();
//! assert!((sample.velocity.norm() - 1.0).abs() < 1e-12);
//! ```

pub mod angles;
pub mod control;
pub mod error;
pub mod export;
pub mod fields;
pub mod generate;
pub mod mixing;
pub mod plot;
pub mod scenario;
pub mod sim;

pub use control::{
    control_dynamic, control_mixed, control_static, control_tracking, tracking_gain,
    ControlBranch, ControlConfig, ControlDiagnostics, ControlOutput, GainMode, TrackingState,
};
pub use error::CavfError;
pub use fields::{
    cavf_moving, cavf_moving_with, cavf_static, cavf_static_with, gamma, gamma_prime, lambda,
    lambda_partials, solve_relative_speed, CavfParams, FieldSample, Obstacle, RelativeState, Side,
    TieBreak,
};
pub use generate::{generate_scenario, GeneratorConfig};
pub use mixing::{heading_rate_weights, mix_weights, mixed_cavf, mixed_cavf_with, MixConfig,
    MixWeights, MixedSample};
pub use scenario::{
    load_scenario, parse_scenario, save_scenario, Scenario, ScenarioError, SimConfig, SimMode,
};
pub use sim::{
    check_collision, run, sense_and_register, step, AgentState, CollisionEvent, CollisionReport,
    Trajectory, TrajectorySample, WorldState,
};

/// Planar vector alias used throughout the crate.
pub type Vec2 = nalgebra::Vector2<f64>;
