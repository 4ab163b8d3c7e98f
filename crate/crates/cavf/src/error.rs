//! Error types shared across the guidance library.

use thiserror::Error;

/// Errors produced by field evaluation, mixing, control, and simulation.
#[derive(Debug, Error)]
pub enum CavfError {
    /// A query radius fell outside the influence annulus `[r_o, r_i]` of an
    /// operation that is only defined there.
    #[error("radius {r} is outside the influence annulus [{r_o}, {r_i}]")]
    OutsideAnnulus { r: f64, r_o: f64, r_i: f64 },

    /// A query point lies strictly inside an obstacle disc.
    #[error("point at radius {r} lies inside the obstacle (r_o = {r_o})")]
    InsideObstacle { r: f64, r_o: f64 },

    /// The vehicle speed does not strictly exceed an obstacle speed, so no
    /// guidance field exists around that obstacle.
    #[error("vehicle speed {v} must strictly exceed obstacle speed {v_o}")]
    SpeedOrdering { v: f64, v_o: f64 },

    /// A parameter violated its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Weighted field contributions cancelled; no blended direction exists at
    /// this point. Callers typically fall back to the nearest obstacle's
    /// single-obstacle field.
    #[error("degenerate blend: weighted field sum has magnitude {magnitude:.3e}")]
    DegenerateBlend { magnitude: f64 },

    /// The implicit relative-speed rate equation is singular at this state.
    #[error("relative speed rate is singular (factor {factor:.3e})")]
    SingularSpeedRate { factor: f64 },

    /// Two obstacles violate the pairwise separation requirement.
    #[error(
        "obstacles {first} and {second} violate separation: \
         centre distance {distance} <= r_o^{first} + r_o^{second} + delta = {required}"
    )]
    SeparationViolation {
        first: usize,
        second: usize,
        distance: f64,
        required: f64,
    },
}
