//! Heading-rate control laws that make the vehicle's velocity converge to an
//! avoidance field and stay on it.
//!
//! The single-obstacle laws enforce the invariant
//! `V_b cos(phi) = lambda(r, theta) V_b cos(beta)` along the closed loop: the
//! relative flight-path angle tracks the field's commanded direction, so the
//! vehicle rides a field streamline. Near the switching set (`sin phi`
//! vanishing) the exact law is singular; a bounded correction with fixed gain
//! `k_vartheta = 1 / sin(vartheta)` takes over inside a configurable band.
//!
//! For several obstacles, [`control_mixed`] differentiates each obstacle's
//! field heading along the vehicle's *actual* motion and combines the rates
//! with the heading-rate weights of
//! [`heading_rate_weights`](crate::mixing::heading_rate_weights); the
//! tracking outer loop ([`control_tracking`]) then drives the vehicle's
//! heading onto the blended field direction at an exponential rate.

use nalgebra::Vector2;

use std::f64::consts::PI;

use crate::angles::wrap_angle;
use crate::error::CavfError;
use crate::fields::{
    cavf_moving_with, lambda_at, lambda_partials_at, relative_far_heading, CavfParams,
    FieldSample, Obstacle, RelativeState, Side, TieBreak,
};
use crate::mixing::{heading_rate_weights, mix_weights, MixConfig};
use crate::sim::AgentState;

/// How the tracking gain `K` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GainMode {
    /// A constant gain.
    Fixed {
        /// The gain value (positive).
        k: f64,
    },
    /// Gain from the separation margin: `K = 2 V (ln pi - ln e_psi) / delta`,
    /// sized so the heading error contracts below `e_psi` within the time a
    /// worst-case obstacle needs to close half the margin `delta`.
    Separation {
        /// Separation margin `delta` (positive).
        delta: f64,
    },
    /// Like `Separation`, but the margin is measured live: `K = c_num /
    /// delta(t)` with `delta(t)` the smallest registered surface clearance
    /// (the sensing radius before anything is registered), capped at `1/dt`
    /// for discrete-loop stability.
    Adaptive {
        /// Numerator `c_num`, typically `2 V (ln pi - ln e_psi)`.
        c_num: f64,
    },
}

/// Configuration shared by the control laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlConfig {
    /// Switching-band half-width `vartheta` (radians, in `(0, pi/2)`): below
    /// `|sin phi| = sin(vartheta)` the bounded correction branch is used.
    pub vartheta: f64,
    /// Heading tolerance `e_psi` (radians, in `(0, pi/2)`): the tracking
    /// error the gain rules are sized against.
    pub e_psi: f64,
    /// Tracking-gain rule.
    pub gain_mode: GainMode,
    /// Passing side on the switching set (sign of the bounded correction and
    /// of the field tie-break).
    pub side: Side,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self { vartheta: 0.01, e_psi: 0.01, gain_mode: GainMode::Fixed { k: 25.0 }, side: Side::Left }
    }
}

impl ControlConfig {
    /// The bounded correction gain `k_vartheta = side / sin(vartheta)`.
    pub fn k_theta(&self) -> f64 {
        self.side.sign() / self.vartheta.sin()
    }

    /// Field-evaluation tie-break consistent with this control
    /// configuration.
    pub fn tie_break(&self) -> TieBreak {
        TieBreak { vartheta: self.vartheta, side: self.side }
    }

    /// Checks the angular parameters.
    pub fn validate(&self) -> Result<(), CavfError> {
        if !(self.vartheta > 0.0 && self.vartheta < std::f64::consts::FRAC_PI_2) {
            return Err(CavfError::InvalidParameter {
                name: "vartheta",
                reason: format!("switching band must lie in (0, pi/2), got {}", self.vartheta),
            });
        }
        if !(self.e_psi > 0.0 && self.e_psi < std::f64::consts::FRAC_PI_2) {
            return Err(CavfError::InvalidParameter {
                name: "e_psi",
                reason: format!("heading tolerance must lie in (0, pi/2), got {}", self.e_psi),
            });
        }
        match self.gain_mode {
            GainMode::Fixed { k } if !(k > 0.0 && k.is_finite()) => {
                Err(CavfError::InvalidParameter {
                    name: "k",
                    reason: format!("fixed gain must be positive and finite, got {k}"),
                })
            }
            GainMode::Separation { delta } if !(delta > 0.0 && delta.is_finite()) => {
                Err(CavfError::InvalidParameter {
                    name: "delta",
                    reason: format!("separation margin must be positive and finite, got {delta}"),
                })
            }
            GainMode::Adaptive { c_num } if !(c_num > 0.0 && c_num.is_finite()) => {
                Err(CavfError::InvalidParameter {
                    name: "c_num",
                    reason: format!("gain numerator must be positive and finite, got {c_num}"),
                })
            }
            _ => Ok(()),
        }
    }
}

/// Which branch of a control law produced the command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlBranch {
    /// Exact law `u = NUM / sin(phi) + d theta/dt`.
    Regular,
    /// Bounded correction inside the switching band.
    SwitchingCorrection,
}

/// Internal quantities of a control evaluation, for inspection and tests.
///
/// Fields that do not apply to a given law (e.g. `v_b_dot` for a static
/// obstacle) are `NaN`-free only where meaningful; [`ControlDiagnostics::none`]
/// fills everything with `NaN` for laws that have no field-relative state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlDiagnostics {
    /// Direction-profile value at the evaluation point.
    pub lambda: f64,
    /// Its along-motion time derivative.
    pub lambda_dot: f64,
    /// Relative flight-path angle used by the law.
    pub phi: f64,
    /// Polar bearing rate of the relative motion.
    pub theta_dot: f64,
    /// Relative speed used by the law.
    pub v_b: f64,
    /// Its time derivative (0 for static obstacles).
    pub v_b_dot: f64,
}

impl ControlDiagnostics {
    /// Diagnostics for laws with no field-relative state (`NaN` throughout).
    pub fn none() -> Self {
        Self {
            lambda: f64::NAN,
            lambda_dot: f64::NAN,
            phi: f64::NAN,
            theta_dot: f64::NAN,
            v_b: f64::NAN,
            v_b_dot: f64::NAN,
        }
    }
}

/// A heading-rate command with its provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlOutput {
    /// Commanded heading rate (rad/s).
    pub u: f64,
    /// Branch that produced it.
    pub branch: ControlBranch,
    /// Internal quantities of the evaluation.
    pub diagnostics: ControlDiagnostics,
}

/// Book-keeping for the heading-tracking outer loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingState {
    /// Avoidance heading being tracked.
    pub psi_ca: f64,
    /// Current heading error `wrap(psi - psi_ca)`.
    pub e: f64,
    /// Error magnitude at the start of tracking (the exponential-envelope
    /// amplitude).
    pub c: f64,
    /// Time within which the error envelope falls below the tolerance:
    /// `delta / (2 V)`.
    pub t_track: f64,
}

impl TrackingState {
    /// Starts tracking `psi_ca` from heading `psi` with margin `delta`.
    pub fn new(psi: f64, psi_ca: f64, delta: f64, v: f64) -> Self {
        let e = wrap_angle(psi - psi_ca);
        Self { psi_ca, e, c: e.abs(), t_track: delta / (2.0 * v) }
    }
}

/// Shared core of the single-obstacle laws: from the along-motion rates and
/// the field geometry, produce the relative-frame heading-rate command.
fn relative_rate_command(
    num: f64,
    sin_phi: f64,
    cfg: &ControlConfig,
) -> (f64, ControlBranch) {
    if sin_phi.abs() < cfg.vartheta.sin() {
        (cfg.k_theta() * num, ControlBranch::SwitchingCorrection)
    } else {
        (num / sin_phi, ControlBranch::Regular)
    }
}

/// Heading-rate law that rides a static obstacle's field streamline.
///
/// With the relative polar rates `dr/dt = -V cos(phi)`,
/// `d theta/dt = -(V/r) sin(phi)`, the command is
///
/// ```text
/// u = NUM / sin(phi) + d theta/dt,
/// NUM = d lambda/dt cos(theta - psi_d) - lambda d theta/dt sin(theta - psi_d),
/// ```
///
/// which keeps `cos(phi) - lambda cos(beta)` constant along the motion (zero
/// if started on the field). Inside the switching band the `1/sin(phi)`
/// factor is replaced by the bounded `k_vartheta`.
///
/// Errors when the state is outside the influence annulus.
pub fn control_static(
    state: &RelativeState,
    params: &CavfParams,
    v: f64,
    cfg: &ControlConfig,
) -> Result<ControlOutput, CavfError> {
    if !(state.r >= params.r_o && state.r <= params.r_i) {
        return Err(CavfError::OutsideAnnulus { r: state.r, r_o: params.r_o, r_i: params.r_i });
    }
    let lambda = lambda_at(state.r, state.theta, params.psi_d, params)?;
    let (l_r, l_th) = lambda_partials_at(state.r, state.theta, params.psi_d, params)?;
    let r_dot = -v * state.phi.cos();
    let theta_dot = -(v / state.r) * state.phi.sin();
    let lambda_dot = l_r * r_dot + l_th * theta_dot;
    let off = state.theta - params.psi_d;
    let num = lambda_dot * off.cos() - lambda * theta_dot * off.sin();
    let (u_s, branch) = relative_rate_command(num, state.phi.sin(), cfg);
    Ok(ControlOutput {
        u: u_s + theta_dot,
        branch,
        diagnostics: ControlDiagnostics {
            lambda,
            lambda_dot,
            phi: state.phi,
            theta_dot,
            v_b: v,
            v_b_dot: 0.0,
        },
    })
}

/// Implicit rate of the relative speed for a vehicle turning at `omega_dot =
/// u_d + d theta/dt` about a moving obstacle, and the inertial heading-rate
/// command it implies.
///
/// `psi` is the vehicle's inertial heading, `v_b` the current relative speed,
/// `chi = phi + theta - theta_o`. Errors when the implicit equation is
/// singular (`|denominator| < 1e-9`).
fn inertial_command(
    omega_dot: f64,
    v: f64,
    v_b: f64,
    psi: f64,
    chi: f64,
    obstacle: &Obstacle,
) -> Result<(f64, f64), CavfError> {
    let (v_o, theta_o) = (obstacle.v_o, obstacle.theta_o);
    let sin_chi = chi.sin();
    let cos_chi = chi.cos();
    let sin_po = (psi - theta_o).sin();
    let factor = 1.0 + (v_o * v_o / (v * v_b)) * sin_chi * sin_po;
    if factor.abs() < 1e-9 {
        return Err(CavfError::SingularSpeedRate { factor });
    }
    let v_b_dot = omega_dot * (v_o / v) * (v_b - v_o * cos_chi) * sin_po / factor;
    let u = omega_dot * (v_b * v_b - v_b * v_o * cos_chi) / (v * v)
        - v_b_dot * v_o * sin_chi / (v * v);
    Ok((u, v_b_dot))
}

/// Heading-rate law that rides a moving obstacle's field streamline.
///
/// The relative-frame command mirrors [`control_static`] with the sector
/// reference `psi_b` in place of `psi_d` and the actual relative speed `V_b`
/// in the polar rates. The relative turn rate is then converted to an
/// inertial heading rate through the velocity triangle
/// `V e_psi = V_b d_hat + V_o o_hat`, which also fixes the implicit rate
/// `dV_b/dt`; the vehicle's heading is recovered from the relative state via
/// the same triangle.
///
/// A static obstacle is delegated to [`control_static`]. Errors when the
/// state is outside the annulus, `v <= v_o`, or the implicit speed-rate
/// equation is singular at the state.
pub fn control_dynamic(
    state: &RelativeState,
    obstacle: &Obstacle,
    v: f64,
    cfg: &ControlConfig,
) -> Result<ControlOutput, CavfError> {
    if obstacle.is_static() {
        return control_static(state, &obstacle.cavf, v, cfg);
    }
    if !(v > obstacle.v_o) {
        return Err(CavfError::SpeedOrdering { v, v_o: obstacle.v_o });
    }
    let params = &obstacle.cavf;
    if !(state.r >= params.r_o && state.r <= params.r_i) {
        return Err(CavfError::OutsideAnnulus { r: state.r, r_o: params.r_o, r_i: params.r_i });
    }
    let lambda = lambda_at(state.r, state.theta, state.psi_b, params)?;
    let (l_r, l_th) = lambda_partials_at(state.r, state.theta, state.psi_b, params)?;
    let v_b = state.v_b;
    let r_dot = -v_b * state.phi.cos();
    let theta_dot = -(v_b / state.r) * state.phi.sin();
    let lambda_dot = l_r * r_dot + l_th * theta_dot;
    let off = state.theta - state.psi_b;
    let num = lambda_dot * off.cos() - lambda * theta_dot * off.sin();
    let (u_d, branch) = relative_rate_command(num, state.phi.sin(), cfg);

    // Recover the inertial heading from the velocity triangle.
    let dir = state.phi + state.theta;
    let psi = (-v_b * dir.sin() + obstacle.v_o * obstacle.theta_o.sin())
        .atan2(-v_b * dir.cos() + obstacle.v_o * obstacle.theta_o.cos());
    let chi = state.phi + state.theta - obstacle.theta_o;
    let (u, v_b_dot) = inertial_command(u_d + theta_dot, v, v_b, psi, chi, obstacle)?;
    Ok(ControlOutput {
        u,
        branch,
        diagnostics: ControlDiagnostics {
            lambda,
            lambda_dot,
            phi: state.phi,
            theta_dot,
            v_b,
            v_b_dot,
        },
    })
}

/// Time derivative of one obstacle's field heading along the vehicle's
/// actual motion, converted to an inertial heading rate.
///
/// The polar rates come from the actual relative velocity
/// `v_rel = V e_psi - V_o o_hat` at the point, while the field's own
/// direction (`phi_f` and the field relative speed) comes from the supplied
/// field sample. When the vehicle rides the streamline the two coincide and
/// this reduces to the single-obstacle laws.
fn field_heading_rate(
    position: Vector2<f64>,
    psi: f64,
    v: f64,
    obstacle: &Obstacle,
    sample: &FieldSample,
    cfg: &ControlConfig,
) -> Result<(f64, ControlBranch, ControlDiagnostics), CavfError> {
    let params = &obstacle.cavf;
    let rel = position - obstacle.center;
    let r = rel.norm();
    let theta = rel.y.atan2(rel.x);
    let e_r = Vector2::new(theta.cos(), theta.sin());
    let e_t = Vector2::new(-theta.sin(), theta.cos());

    let v_rel = v * Vector2::new(psi.cos(), psi.sin()) - obstacle.velocity();
    let r_dot = v_rel.dot(&e_r);
    let theta_dot = v_rel.dot(&e_t) / r;

    let psi_b = relative_far_heading(v, obstacle, params.psi_d);
    let lambda = lambda_at(r, theta, psi_b, params)?;
    let (l_r, l_th) = lambda_partials_at(r, theta, psi_b, params)?;
    let lambda_dot = l_r * r_dot + l_th * theta_dot;
    let off = theta - psi_b;
    let num = lambda_dot * off.cos() - lambda * theta_dot * off.sin();

    // The field's relative direction and speed at this point.
    let rel_dir = sample.velocity - obstacle.velocity();
    let v_bf = rel_dir.norm();
    let phi_f = wrap_angle(rel_dir.y.atan2(rel_dir.x) - theta - PI);
    let (phi_f_dot, branch) = relative_rate_command(num, phi_f.sin(), cfg);
    let omega_dot = phi_f_dot + theta_dot;

    let diagnostics = ControlDiagnostics {
        lambda,
        lambda_dot,
        phi: phi_f,
        theta_dot,
        v_b: v_bf,
        v_b_dot: 0.0,
    };
    if obstacle.is_static() {
        return Ok((omega_dot, branch, diagnostics));
    }
    let psi_f = sample.velocity.y.atan2(sample.velocity.x);
    let chi = phi_f + theta - obstacle.theta_o;
    let (u, v_b_dot) = inertial_command(omega_dot, v, v_bf, psi_f, chi, obstacle)?;
    Ok((u, branch, ControlDiagnostics { v_b_dot, ..diagnostics }))
}

/// Heading-rate feed-forward for the blended field: the weighted sum of the
/// per-obstacle field-heading rates, `u_m = sum_j W^j u^j`.
///
/// `obstacles` are the registered obstacles at their current positions.
/// Obstacles whose influence annulus does not contain the vehicle contribute
/// `u^j = 0` (their field heading is constant there), but still take part in
/// the heading-rate weights. The returned diagnostics are those of the
/// obstacle with the largest weight; the branch reports a switching
/// correction if any contributing obstacle used one.
///
/// Errors: empty obstacle list, vehicle inside an obstacle, speed ordering,
/// degenerate blend (propagated so the caller can fall back to the nearest
/// obstacle's single-obstacle law).
pub fn control_mixed(
    agent: &AgentState,
    obstacles: &[Obstacle],
    cfg: &ControlConfig,
    mix: &MixConfig,
) -> Result<ControlOutput, CavfError> {
    if obstacles.is_empty() {
        return Err(CavfError::InvalidParameter {
            name: "obstacles",
            reason: "mixed control needs at least one obstacle".to_string(),
        });
    }
    let p = agent.position();
    let tie = cfg.tie_break();
    let mut samples = Vec::with_capacity(obstacles.len());
    let mut triples = Vec::with_capacity(obstacles.len());
    for obs in obstacles {
        samples.push(cavf_moving_with(p, obs, agent.v, tie)?);
        triples.push(((p - obs.center).norm(), obs.r_o(), obs.r_i()));
    }
    let weights = mix_weights(&triples, mix);
    let headings: Vec<f64> =
        samples.iter().map(|s| s.velocity.y.atan2(s.velocity.x)).collect();
    let rate_weights = heading_rate_weights(&weights, &headings)?;

    let mut u = 0.0;
    let mut branch = ControlBranch::Regular;
    let mut diagnostics = ControlDiagnostics::none();
    let mut best_weight = f64::NEG_INFINITY;
    for (j, obs) in obstacles.iter().enumerate() {
        let in_range = triples[j].0 <= obs.r_i();
        let (u_j, branch_j, diag_j) = if in_range {
            field_heading_rate(p, agent.psi, agent.v, obs, &samples[j], cfg)?
        } else {
            (0.0, ControlBranch::Regular, ControlDiagnostics::none())
        };
        u += rate_weights[j] * u_j;
        if in_range && branch_j == ControlBranch::SwitchingCorrection {
            branch = ControlBranch::SwitchingCorrection;
        }
        if rate_weights[j] > best_weight {
            best_weight = rate_weights[j];
            diagnostics = diag_j;
        }
    }
    Ok(ControlOutput { u, branch, diagnostics })
}

/// Exponential heading-tracking outer loop:
/// `u = -K wrap(psi - psi_ca) + u_m`.
///
/// `psi_ca` is the avoidance heading to track and `u_m` its feed-forward
/// rate. With `K` from [`tracking_gain`] the error `e = wrap(psi - psi_ca)`
/// contracts as `c exp(-K t)`, falling below `e_psi` within
/// `t_track = delta / (2 V)` from any starting error (`|e| <= pi`).
pub fn control_tracking(agent: &AgentState, psi_ca: f64, u_m: f64, k: f64) -> ControlOutput {
    debug_assert!(k > 0.0, "tracking gain must be positive");
    let e = wrap_angle(agent.psi - psi_ca);
    ControlOutput { u: -k * e + u_m, branch: ControlBranch::Regular, diagnostics: ControlDiagnostics::none() }
}

/// Tracking gain sized for a separation margin:
/// `K = 2 V (ln pi - ln e_psi) / delta`.
///
/// Sized so that the worst-case heading error `pi` decays below `e_psi`
/// within the time `delta / (2 V)` a head-on worst-case obstacle needs to
/// close half the margin `delta`.
pub fn tracking_gain(v: f64, e_psi: f64, delta: f64) -> Result<f64, CavfError> {
    if !(v > 0.0) {
        return Err(CavfError::InvalidParameter {
            name: "v",
            reason: format!("vehicle speed must be positive, got {v}"),
        });
    }
    if !(e_psi > 0.0 && e_psi < PI) {
        return Err(CavfError::InvalidParameter {
            name: "e_psi",
            reason: format!("heading tolerance must lie in (0, pi), got {e_psi}"),
        });
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(CavfError::InvalidParameter {
            name: "delta",
            reason: format!("separation margin must be positive and finite, got {delta}"),
        });
    }
    Ok(2.0 * v * (PI.ln() - e_psi.ln()) / delta)
}
