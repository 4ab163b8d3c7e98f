//! Closed-form collision avoidance vector fields for a single circular
//! obstacle.
//!
//! A constant-speed vehicle is steered around a circular obstacle by
//! modulating the radial component of its velocity inside an influence
//! annulus `r_o < r <= r_i` centred on the obstacle. The modulation profile
//! [`gamma`] shapes how quickly the radial approach rate is surrendered as
//! the vehicle nears the surface; the direction profile [`lambda`] extends it
//! over the annulus with a sector structure that restores the free-stream
//! heading downstream. On the obstacle surface the field's radial component
//! matches the surface's own radial speed, so the surface is a flow barrier;
//! outside the influence circle the field equals the free stream exactly.
//!
//! Two field constructors are provided: [`cavf_static`] for motionless
//! obstacles and [`cavf_moving`] for obstacles translating at constant
//! velocity. The moving construction works in the obstacle's reference frame
//! and adds the obstacle velocity back, preserving the vehicle's speed.

use nalgebra::Vector2;

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use crate::angles::wrap_angle;
use crate::error::CavfError;

/// Shape parameters of a single-obstacle avoidance field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CavfParams {
    /// Sharpness of the radial modulation profile; larger values hold the
    /// free-stream heading longer before committing to the turn. Must be
    /// positive.
    pub a: f64,
    /// Obstacle radius: the disc `r < r_o` must never be entered.
    pub r_o: f64,
    /// Influence radius: the field equals the free stream for `r > r_i`.
    /// Must exceed `r_o`.
    pub r_i: f64,
    /// Desired far-field heading (radians).
    pub psi_d: f64,
}

impl CavfParams {
    /// Builds a parameter set, validating the domain constraints.
    pub fn new(a: f64, r_o: f64, r_i: f64, psi_d: f64) -> Result<Self, CavfError> {
        let params = Self { a, r_o, r_i, psi_d };
        params.validate()?;
        Ok(params)
    }

    /// Checks `a > 0`, `0 < r_o < r_i`, and that every field is finite.
    pub fn validate(&self) -> Result<(), CavfError> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "a",
                reason: format!("must be a positive finite number, got {}", self.a),
            });
        }
        if !(self.r_o > 0.0) || !self.r_o.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "r_o",
                reason: format!("must be a positive finite number, got {}", self.r_o),
            });
        }
        if !(self.r_i > self.r_o) || !self.r_i.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "r_i",
                reason: format!("must be finite and exceed r_o = {}, got {}", self.r_o, self.r_i),
            });
        }
        if !self.psi_d.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "psi_d",
                reason: format!("must be finite, got {}", self.psi_d),
            });
        }
        Ok(())
    }
}

/// Radial modulation profile over the influence annulus.
///
/// `gamma` rises strictly monotonically from 0 at the obstacle surface
/// `r = r_o` to 1 at the influence boundary `r = r_i`, flattening smoothly
/// (zero slope) at both ends. The interior value is
///
/// ```text
/// gamma(r) = a*B / sqrt(1 + (2*a*B)^2) + 1/2,
/// B(r)     = 1/(r_o - r) - 1/(r - r_i),
/// ```
///
/// which is singular at the boundaries; the boundary values are therefore
/// returned directly as the (exact) one-sided limits. At the annulus midpoint
/// `B = 0`, so `gamma = 1/2` for every `a`.
///
/// Errors with [`CavfError::OutsideAnnulus`] when `r` is outside `[r_o, r_i]`.
pub fn gamma(r: f64, params: &CavfParams) -> Result<f64, CavfError> {
    let (r_o, r_i) = (params.r_o, params.r_i);
    if !(r >= r_o && r <= r_i) {
        return Err(CavfError::OutsideAnnulus { r, r_o, r_i });
    }
    if r == r_o {
        return Ok(0.0);
    }
    if r == r_i {
        return Ok(1.0);
    }
    let b = 1.0 / (r_o - r) - 1.0 / (r - r_i);
    let t = params.a * b;
    Ok(t / (1.0 + (2.0 * t) * (2.0 * t)).sqrt() + 0.5)
}

/// Radial derivative `d gamma / d r` of the modulation profile.
///
/// The interior expression is `a * B'(r) / (1 + 4 a^2 B^2)^(3/2)` with
/// `B'(r) = (r_o - r)^{-2} + (r - r_i)^{-2} > 0`; the one-sided limits at both
/// boundaries are exactly 0 and are returned directly. The derivative is
/// strictly positive in the interior, which makes `gamma` strictly
/// increasing.
pub fn gamma_prime(r: f64, params: &CavfParams) -> Result<f64, CavfError> {
    let (r_o, r_i) = (params.r_o, params.r_i);
    if !(r >= r_o && r <= r_i) {
        return Err(CavfError::OutsideAnnulus { r, r_o, r_i });
    }
    if r == r_o || r == r_i {
        return Ok(0.0);
    }
    let b = 1.0 / (r_o - r) - 1.0 / (r - r_i);
    let b_prime = (r_o - r).powi(-2) + (r - r_i).powi(-2);
    let denom = (1.0 + 4.0 * (params.a * b) * (params.a * b)).powf(1.5);
    let g = params.a * b_prime / denom;
    // Within ~1e-154 of a boundary the intermediate squares overflow; the
    // true limit there is 0.
    Ok(if g.is_finite() { g } else { 0.0 })
}

/// Direction profile `lambda(r, theta)` keyed on the far-field heading
/// `psi_d`.
///
/// `lambda` scales how much of the free-stream radial closure the field
/// retains. It is 1 outside the influence circle, exactly 0 on the obstacle
/// surface (for every bearing), and inside the annulus follows a three-sector
/// structure in the downstream offset `Delta = theta - psi_d` (mod 2*pi):
/// within a quarter turn of the downstream bearing it interpolates affinely
/// between 1 on the downstream ray and `gamma(r)` at the quarter-turn
/// boundaries; over the remaining (windward) half it equals `gamma(r)`.
/// The sector boundaries are value-continuous.
///
/// The surface value 0 is pinned explicitly: the downstream-sector affine
/// expressions do not vanish at `r = r_o` on their own, and the barrier
/// property requires `lambda` to vanish on the entire surface.
///
/// Errors with [`CavfError::InsideObstacle`] when `r < r_o`.
pub fn lambda(r: f64, theta: f64, params: &CavfParams) -> Result<f64, CavfError> {
    lambda_at(r, theta, params.psi_d, params)
}

/// Partial derivatives `(d lambda / d r, d lambda / d theta)`.
///
/// Outside the influence circle both vanish. On the downstream ray
/// (`Delta = 0`) the `theta` derivative has a jump; the value for the
/// positive-offset side is returned there. At `r = r_o` the interior limits
/// are returned (the pinned surface value itself is radially discontinuous in
/// the downstream sectors).
pub fn lambda_partials(r: f64, theta: f64, params: &CavfParams) -> Result<(f64, f64), CavfError> {
    lambda_partials_at(r, theta, params.psi_d, params)
}

/// `lambda` with the sector structure keyed on an explicit reference heading
/// (the moving-obstacle construction replaces `psi_d` by the relative-frame
/// heading).
pub(crate) fn lambda_at(
    r: f64,
    theta: f64,
    psi_ref: f64,
    params: &CavfParams,
) -> Result<f64, CavfError> {
    if r < params.r_o {
        return Err(CavfError::InsideObstacle { r, r_o: params.r_o });
    }
    if r > params.r_i {
        return Ok(1.0);
    }
    if r == params.r_o {
        return Ok(0.0);
    }
    let g = gamma(r, params)?;
    let d = wrap_angle(theta - psi_ref);
    Ok(if d.abs() <= FRAC_PI_2 {
        1.0 - FRAC_2_PI * (1.0 - g) * d.abs()
    } else {
        g
    })
}

/// Partial derivatives of [`lambda_at`]; see [`lambda_partials`].
pub(crate) fn lambda_partials_at(
    r: f64,
    theta: f64,
    psi_ref: f64,
    params: &CavfParams,
) -> Result<(f64, f64), CavfError> {
    if r < params.r_o {
        return Err(CavfError::InsideObstacle { r, r_o: params.r_o });
    }
    if r > params.r_i {
        return Ok((0.0, 0.0));
    }
    let g = gamma(r, params)?;
    let gp = gamma_prime(r, params)?;
    let d = wrap_angle(theta - psi_ref);
    Ok(if d.abs() <= FRAC_PI_2 {
        // signum(0) = 1: the downstream ray reports the positive-offset side.
        (FRAC_2_PI * d.abs() * gp, -FRAC_2_PI * (1.0 - g) * d.signum())
    } else {
        (gp, 0.0)
    })
}

/// Which way the vehicle passes when it sits on the switching set, where the
/// field direction is ambiguous.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Pass to the left of the obstacle: substitutes `+1` for
    /// `sign(sin beta)`.
    Left,
    /// Pass to the right of the obstacle: substitutes `-1`.
    Right,
}

impl Side {
    /// Sign substituted for `sign(sin beta)` on the switching set.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Switching-set handling for field evaluation.
///
/// Within the band `|sin beta| < sin(vartheta)` around the switching set the
/// tangential sign is taken from `side` instead of `sign(sin beta)`, making
/// the evaluated field single-valued and the chosen passing side explicit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TieBreak {
    /// Half-width of the substitution band (radians); small and positive.
    pub vartheta: f64,
    /// Passing side used inside the band.
    pub side: Side,
}

impl Default for TieBreak {
    fn default() -> Self {
        Self { vartheta: 0.01, side: Side::Left }
    }
}

impl TieBreak {
    /// Resolves the tangential sign for a given `sin beta`.
    pub fn resolve(&self, sin_beta: f64) -> f64 {
        if sin_beta.abs() < self.vartheta.sin() {
            self.side.sign()
        } else {
            sin_beta.signum()
        }
    }
}

/// A circular obstacle, optionally translating at constant velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct Obstacle {
    /// Centre position at the reference time.
    pub center: Vector2<f64>,
    /// Translation speed (non-negative; 0 for a static obstacle).
    pub v_o: f64,
    /// Translation heading (radians); irrelevant when `v_o = 0`.
    pub theta_o: f64,
    /// Avoidance-field parameters attached to this obstacle.
    pub cavf: CavfParams,
}

impl Obstacle {
    /// Obstacle radius (shorthand for `cavf.r_o`).
    pub fn r_o(&self) -> f64 {
        self.cavf.r_o
    }

    /// Influence radius (shorthand for `cavf.r_i`).
    pub fn r_i(&self) -> f64 {
        self.cavf.r_i
    }

    /// Whether the obstacle is motionless.
    pub fn is_static(&self) -> bool {
        self.v_o == 0.0
    }

    /// Constant translation velocity vector.
    pub fn velocity(&self) -> Vector2<f64> {
        self.v_o * Vector2::new(self.theta_o.cos(), self.theta_o.sin())
    }

    /// Centre position `elapsed` seconds after the reference time (exact
    /// linear motion).
    pub fn center_at(&self, elapsed: f64) -> Vector2<f64> {
        self.center + elapsed * self.velocity()
    }

    /// A copy of this obstacle with its centre advanced by `elapsed` seconds.
    pub fn advanced(&self, elapsed: f64) -> Self {
        Self { center: self.center_at(elapsed), ..self.clone() }
    }

    /// A point on the surface ring at polar angle `theta`.
    ///
    /// Surface behaviour (zero relative radial velocity, the `lambda = 0`
    /// convention) keys on the *recovered* radius `|p - center|` being
    /// exactly `r_o`, and the naive construction
    /// `center + r_o * [cos theta, sin theta]` usually rounds one ulp off
    /// the ring. This constructor rescales and then searches the ulp
    /// neighbourhood so that the recovered radius equals `r_o` bit-exactly
    /// whenever such a point is representable; when it is not (possible for
    /// centres far from the origin), it returns the nearest representable
    /// point *outside* the ring, never inside.
    pub fn surface_point(&self, theta: f64) -> Vector2<f64> {
        let r_o = self.cavf.r_o;
        let radius_at = |p: Vector2<f64>| (p - self.center).norm();
        let mut p = self.center + Vector2::new(r_o * theta.cos(), r_o * theta.sin());
        for _ in 0..4 {
            let n = radius_at(p);
            if n == r_o {
                return p;
            }
            p = self.center + (p - self.center) * (r_o / n);
        }
        // The rescale stalled one rounding step away from the ring; hunt for
        // an exact hit among the ulp neighbours of the candidate.
        let nudged = |x: f64, k: i32| -> f64 {
            let mut y = x;
            for _ in 0..k.abs() {
                y = if k > 0 { y.next_up() } else { y.next_down() };
            }
            y
        };
        let mut fallback = p;
        let mut fallback_r = radius_at(p);
        for dx in -2..=2i32 {
            for dy in -2..=2i32 {
                let q = Vector2::new(nudged(p.x, dx), nudged(p.y, dy));
                let n = radius_at(q);
                if n == r_o {
                    return q;
                }
                if n > r_o && (fallback_r < r_o || n < fallback_r) {
                    fallback = q;
                    fallback_r = n;
                }
            }
        }
        if fallback_r >= r_o {
            fallback
        } else {
            // No neighbour reached the ring; push safely outside it.
            let off = (p - self.center) * (r_o / fallback_r) * (1.0 + 4.0 * f64::EPSILON);
            self.center + off
        }
    }

    /// Validates the obstacle parameters (finite centre, `v_o >= 0`, valid
    /// field parameters).
    pub fn validate(&self) -> Result<(), CavfError> {
        if !self.center.x.is_finite() || !self.center.y.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "center",
                reason: format!("must be finite, got ({}, {})", self.center.x, self.center.y),
            });
        }
        if !(self.v_o >= 0.0) || !self.v_o.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "v_o",
                reason: format!("must be a non-negative finite number, got {}", self.v_o),
            });
        }
        if !self.theta_o.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "theta_o",
                reason: format!("must be finite, got {}", self.theta_o),
            });
        }
        self.cavf.validate()
    }
}

/// Vehicle state expressed in an obstacle's polar frame.
///
/// `phi` is the direction of the *reversed* relative velocity measured from
/// the bearing `theta`, so that the relative polar rates are
/// `dr/dt = -V_b cos(phi)` and `d theta/dt = -(V_b / r) sin(phi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeState {
    /// Distance from the obstacle centre.
    pub r: f64,
    /// Bearing of the vehicle as seen from the obstacle centre (radians).
    pub theta: f64,
    /// Relative flight-path angle (radians, wrapped to `(-pi, pi]`).
    pub phi: f64,
    /// Entry-geometry angle `beta = pi - (theta - psi_b)` (wrapped).
    pub beta: f64,
    /// Relative speed `|V e_psi - V_o o_hat|`.
    pub v_b: f64,
    /// Relative-frame far-field heading; equals `psi_d` for a static
    /// obstacle.
    pub psi_b: f64,
}

impl RelativeState {
    /// Builds the relative state of a vehicle at inertial `position` with
    /// heading `psi` and speed `v` with respect to `obstacle` (at its
    /// reference-time centre).
    ///
    /// Errors if the point is inside the obstacle or if `v <= v_o`.
    pub fn from_inertial(
        position: Vector2<f64>,
        psi: f64,
        v: f64,
        obstacle: &Obstacle,
    ) -> Result<Self, CavfError> {
        if !(v > obstacle.v_o) {
            return Err(CavfError::SpeedOrdering { v, v_o: obstacle.v_o });
        }
        let rel = position - obstacle.center;
        let r = rel.norm();
        if r < obstacle.r_o() {
            return Err(CavfError::InsideObstacle { r, r_o: obstacle.r_o() });
        }
        let theta = rel.y.atan2(rel.x);
        let psi_b = relative_far_heading(v, obstacle, obstacle.cavf.psi_d);
        let beta = wrap_angle(PI - (theta - psi_b));
        let v_rel = v * Vector2::new(psi.cos(), psi.sin()) - obstacle.velocity();
        let v_b = v_rel.norm();
        let phi = wrap_angle((-v_rel.y).atan2(-v_rel.x) - theta);
        Ok(Self { r, theta, phi, beta, v_b, psi_b })
    }
}

/// Far-field heading of the relative flow: the direction of
/// `V e_{psi_d} - V_o o_hat`. Returns `psi_d` exactly for a static obstacle.
pub(crate) fn relative_far_heading(v: f64, obstacle: &Obstacle, psi_d: f64) -> f64 {
    if obstacle.is_static() {
        return psi_d;
    }
    let (v_o, theta_o) = (obstacle.v_o, obstacle.theta_o);
    (v * psi_d.sin() - v_o * theta_o.sin()).atan2(v * psi_d.cos() - v_o * theta_o.cos())
}

/// One evaluation of an avoidance field at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    /// Commanded inertial velocity (magnitude `V`).
    pub velocity: Vector2<f64>,
    /// Direction-profile value at the point.
    pub lambda: f64,
    /// Radial-modulation value at the point (1 outside the annulus).
    pub gamma: f64,
    /// Radial component `<velocity, e_r>` toward/away from the obstacle
    /// centre.
    pub radial_component: f64,
}

fn free_stream_sample(psi_d: f64, v: f64, e_r: Vector2<f64>) -> FieldSample {
    let velocity = v * Vector2::new(psi_d.cos(), psi_d.sin());
    FieldSample { velocity, lambda: 1.0, gamma: 1.0, radial_component: velocity.dot(&e_r) }
}

/// Evaluates the static-obstacle avoidance field with default switching-set
/// handling.
pub fn cavf_static(
    position: Vector2<f64>,
    obstacle: &Obstacle,
    v: f64,
) -> Result<FieldSample, CavfError> {
    cavf_static_with(position, obstacle, v, TieBreak::default())
}

/// Evaluates the static-obstacle avoidance field.
///
/// In polar coordinates about the obstacle centre the commanded motion is
///
/// ```text
/// dr/dt       = -lambda(r, theta) * V * cos(beta),
/// r d theta/dt = -s * sqrt(V^2 - (dr/dt)^2),    s = sign(sin beta),
/// beta        = pi - (theta - psi_d),
/// ```
///
/// rotated into inertial axes. The construction preserves the speed `V` by
/// design. For `r > r_i` the free-stream vector `V [cos psi_d, sin psi_d]` is
/// returned directly (the polar form reduces to it identically, and the
/// direct return keeps the far field exact and free of the switching band).
///
/// Errors if the point is inside the obstacle, if `v <= 0`, or if the
/// obstacle is not static.
pub fn cavf_static_with(
    position: Vector2<f64>,
    obstacle: &Obstacle,
    v: f64,
    tie: TieBreak,
) -> Result<FieldSample, CavfError> {
    if !obstacle.is_static() {
        return Err(CavfError::InvalidParameter {
            name: "obstacle",
            reason: format!("static field requested for a moving obstacle (v_o = {})", obstacle.v_o),
        });
    }
    if !(v > 0.0) {
        return Err(CavfError::InvalidParameter {
            name: "v",
            reason: format!("vehicle speed must be positive, got {v}"),
        });
    }
    let params = &obstacle.cavf;
    let rel = position - obstacle.center;
    let r = rel.norm();
    if r < params.r_o {
        return Err(CavfError::InsideObstacle { r, r_o: params.r_o });
    }
    let theta = rel.y.atan2(rel.x);
    let e_r = Vector2::new(theta.cos(), theta.sin());
    if r > params.r_i {
        return Ok(free_stream_sample(params.psi_d, v, e_r));
    }
    let lam = lambda_at(r, theta, params.psi_d, params)?;
    let gam = gamma(r, params)?;
    let beta = wrap_angle(PI - (theta - params.psi_d));
    let s = tie.resolve(beta.sin());
    let r_dot = -lam * v * beta.cos();
    let tangential = -s * (v * v - r_dot * r_dot).max(0.0).sqrt();
    let e_t = Vector2::new(-theta.sin(), theta.cos());
    let velocity = r_dot * e_r + tangential * e_t;
    Ok(FieldSample { velocity, lambda: lam, gamma: gam, radial_component: velocity.dot(&e_r) })
}

/// Solves the velocity triangle for the relative speed `V_b` given the
/// vehicle speed `v`, the obstacle speed `v_o`, and the angle
/// `chi = phi + theta - theta_o` between the (reversed) relative velocity and
/// the obstacle velocity:
///
/// ```text
/// V_b = v_o cos(chi) + sqrt(v^2 - v_o^2 sin^2(chi)).
/// ```
///
/// This is the positive root of `V_b^2 + v_o^2 - 2 V_b v_o cos(chi) = v^2`;
/// it exists and is unique for every `chi` precisely because `v > v_o`.
pub fn solve_relative_speed(v: f64, v_o: f64, chi: f64) -> Result<f64, CavfError> {
    if !(v_o >= 0.0) || !(v > v_o) {
        return Err(CavfError::SpeedOrdering { v, v_o });
    }
    let s = v_o * chi.sin();
    Ok(v_o * chi.cos() + (v * v - s * s).sqrt())
}

/// Evaluates the moving-obstacle avoidance field with default switching-set
/// handling.
pub fn cavf_moving(
    position: Vector2<f64>,
    obstacle: &Obstacle,
    v: f64,
) -> Result<FieldSample, CavfError> {
    cavf_moving_with(position, obstacle, v, TieBreak::default())
}

/// Evaluates the avoidance field of an obstacle translating at constant
/// velocity.
///
/// The static construction is reused in the obstacle frame with the
/// free-stream heading replaced by the relative far-field heading
/// `psi_b = arg(V e_{psi_d} - V_o o_hat)`; the relative speed along the
/// commanded direction comes from [`solve_relative_speed`], and the obstacle
/// velocity is added back:
///
/// ```text
/// h = R(theta) [dr/dt, r d theta/dt]^T + V_o o_hat,  |h| = V.
/// ```
///
/// A static obstacle (`v_o = 0`) is delegated to [`cavf_static_with`], so the
/// two constructors agree exactly in that case. Errors additionally when
/// `v <= v_o` (no avoidance field exists for an obstacle as fast as the
/// vehicle).
pub fn cavf_moving_with(
    position: Vector2<f64>,
    obstacle: &Obstacle,
    v: f64,
    tie: TieBreak,
) -> Result<FieldSample, CavfError> {
    if obstacle.is_static() {
        return cavf_static_with(position, obstacle, v, tie);
    }
    if !(v > obstacle.v_o) {
        return Err(CavfError::SpeedOrdering { v, v_o: obstacle.v_o });
    }
    let params = &obstacle.cavf;
    let rel = position - obstacle.center;
    let r = rel.norm();
    if r < params.r_o {
        return Err(CavfError::InsideObstacle { r, r_o: params.r_o });
    }
    let theta = rel.y.atan2(rel.x);
    let e_r = Vector2::new(theta.cos(), theta.sin());
    if r > params.r_i {
        return Ok(free_stream_sample(params.psi_d, v, e_r));
    }
    let psi_b = relative_far_heading(v, obstacle, params.psi_d);
    let lam = lambda_at(r, theta, psi_b, params)?;
    let gam = gamma(r, params)?;
    let beta = wrap_angle(PI - (theta - psi_b));
    let s = tie.resolve(beta.sin());
    // Relative-frame direction: [dr/dt, r d theta/dt] = -V_b [c, s*m].
    let c = lam * beta.cos();
    let m = (1.0 - c * c).max(0.0).sqrt();
    let phi_f = (s * m).atan2(c);
    let chi = phi_f + theta - obstacle.theta_o;
    let v_b = solve_relative_speed(v, obstacle.v_o, chi)?;
    let r_dot = -v_b * c;
    let tangential = -v_b * s * m;
    let e_t = Vector2::new(-theta.sin(), theta.cos());
    let velocity = r_dot * e_r + tangential * e_t + obstacle.velocity();
    Ok(FieldSample { velocity, lambda: lam, gamma: gam, radial_component: velocity.dot(&e_r) })
}
