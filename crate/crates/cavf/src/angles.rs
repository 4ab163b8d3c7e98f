//! Angle wrapping helpers.
//!
//! All headings and polar angles in this crate are radians. Wrapped headings
//! live in the half-open interval `(-pi, pi]`; sector arithmetic uses the
//! `[0, 2*pi)` representative.

use std::f64::consts::{PI, TAU};

/// Wraps an angle to `(-pi, pi]`.
///
/// `-pi` maps to `pi`, so the representative of the cut is unique.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Wraps an angle to `[0, 2*pi)`.
pub fn wrap_tau(x: f64) -> f64 {
    x.rem_euclid(TAU)
}
