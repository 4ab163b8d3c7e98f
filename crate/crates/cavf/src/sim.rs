//! Scenario simulation: unicycle kinematics, obstacle registration, the
//! closed control loop, and collision accounting.
//!
//! The vehicle is a constant-speed unicycle `dx/dt = V cos psi`,
//! `dy/dt = V sin psi`, `d psi/dt = u`, stepped with classical fourth-order
//! Runge-Kutta under a zero-order-hold command (the command is computed once
//! per step and held). Obstacles become *registered* once they enter the
//! vehicle's sensing disc and stay registered; only registered obstacles
//! shape the command and the clearance accounting.

use nalgebra::Vector2;

use crate::angles::wrap_angle;
use crate::control::{
    control_dynamic, control_mixed, control_tracking, tracking_gain, ControlConfig, GainMode,
};
use crate::error::CavfError;
use crate::fields::{cavf_moving_with, Obstacle, RelativeState};
use crate::mixing::mixed_cavf_with;
use crate::scenario::{Scenario, SimMode};

/// The vehicle's state and standing mission parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentState {
    /// Inertial position (x).
    pub x: f64,
    /// Inertial position (y).
    pub y: f64,
    /// Heading (radians, wrapped to `(-pi, pi]`).
    pub psi: f64,
    /// Constant speed (positive).
    pub v: f64,
    /// Desired far-field heading (radians).
    pub psi_d: f64,
    /// Sensing radius (positive).
    pub r_s: f64,
}

impl AgentState {
    /// Position as a vector.
    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    /// Velocity vector `V [cos psi, sin psi]`.
    pub fn velocity(&self) -> Vector2<f64> {
        self.v * Vector2::new(self.psi.cos(), self.psi.sin())
    }

    /// Checks speed/sensing positivity and finiteness.
    pub fn validate(&self) -> Result<(), CavfError> {
        for (name, value) in
            [("x", self.x), ("y", self.y), ("psi", self.psi), ("psi_d", self.psi_d)]
        {
            if !value.is_finite() {
                return Err(CavfError::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        if !(self.v > 0.0) || !self.v.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "v",
                reason: format!("vehicle speed must be positive and finite, got {}", self.v),
            });
        }
        if !(self.r_s > 0.0) || !self.r_s.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "r_s",
                reason: format!("sensing radius must be positive and finite, got {}", self.r_s),
            });
        }
        Ok(())
    }
}

/// One recorded instant of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    /// Simulation time.
    pub t: f64,
    /// Vehicle position (x).
    pub x: f64,
    /// Vehicle position (y).
    pub y: f64,
    /// Vehicle heading.
    pub psi: f64,
    /// Heading-rate command held over the step starting here (0 on a
    /// terminal collision sample).
    pub u: f64,
    /// Smallest surface clearance over registered obstacles (`+inf` when
    /// nothing is registered).
    pub min_clearance: f64,
    /// Indices of the obstacles registered at this instant.
    pub active_obstacles: Vec<usize>,
}

/// A detected collision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionEvent {
    /// Time of the offending sample.
    pub t: f64,
    /// Index of the penetrated obstacle.
    pub obstacle: usize,
    /// The (negative) clearance recorded.
    pub clearance: f64,
}

/// A complete run record.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Samples at `t = 0, dt, 2 dt, ...`.
    pub samples: Vec<TrajectorySample>,
    /// The collision that ended the run early, if any.
    pub collision: Option<CollisionEvent>,
    /// Desired heading the run was flown against (for reporting).
    pub psi_d: f64,
    /// Heading tolerance the run was flown against (for reporting).
    pub e_psi: f64,
}

/// The obstacle population and registration bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    /// All obstacles, with centres at their `t = 0` reference positions.
    pub obstacles: Vec<Obstacle>,
    /// Indices of registered obstacles, in registration order (stable).
    pub registered: Vec<usize>,
    /// Current simulation time.
    pub t: f64,
    /// Pairwise surface margin `delta` enforced at registration.
    pub min_separation: f64,
}

impl WorldState {
    /// A world at `t = 0` with nothing registered.
    pub fn new(obstacles: Vec<Obstacle>, min_separation: f64) -> Self {
        Self { obstacles, registered: Vec::new(), t: 0.0, min_separation }
    }

    /// Obstacle `j` with its centre advanced to the current time.
    pub fn current_obstacle(&self, j: usize) -> Obstacle {
        self.obstacles[j].advanced(self.t)
    }

    /// The registered obstacles at their current positions.
    pub fn registered_obstacles(&self) -> Vec<Obstacle> {
        self.registered.iter().map(|&j| self.current_obstacle(j)).collect()
    }
}

/// One integration step of the unicycle under a held command.
///
/// Classical fourth-order Runge-Kutta applied to
/// `(dx/dt, dy/dt, d psi/dt) = (V cos psi, V sin psi, u)` with `u` constant
/// over the step. The returned heading is wrapped to `(-pi, pi]`.
pub fn step(agent: &AgentState, u: f64, dt: f64) -> AgentState {
    let deriv = |psi: f64| [agent.v * psi.cos(), agent.v * psi.sin(), u];
    let s0 = [agent.x, agent.y, agent.psi];
    let k1 = deriv(s0[2]);
    let k2 = deriv(s0[2] + 0.5 * dt * k1[2]);
    let k3 = deriv(s0[2] + 0.5 * dt * k2[2]);
    let k4 = deriv(s0[2] + dt * k3[2]);
    let mut s = s0;
    for i in 0..3 {
        s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    AgentState { x: s[0], y: s[1], psi: wrap_angle(s[2]), ..*agent }
}

/// Registers every obstacle whose centre currently lies in the sensing disc
/// (closed ball of radius `r_s` about the vehicle). Registration is
/// monotone: already-registered obstacles stay registered.
///
/// Each newcomer is validated: the vehicle must outrun it (`v > v_o`), and it
/// must keep the world's separation margin to every other registered
/// obstacle (surface distance strictly greater than `min_separation`), both
/// checked at the current positions.
pub fn sense_and_register(agent: &AgentState, world: &WorldState) -> Result<WorldState, CavfError> {
    let mut next = world.clone();
    let p = agent.position();
    for j in 0..world.obstacles.len() {
        if next.registered.contains(&j) {
            continue;
        }
        let center = world.obstacles[j].center_at(world.t);
        if (center - p).norm() > agent.r_s {
            continue;
        }
        let obs = &world.obstacles[j];
        if !(agent.v > obs.v_o) {
            return Err(CavfError::SpeedOrdering { v: agent.v, v_o: obs.v_o });
        }
        for &k in &next.registered {
            let other = world.obstacles[k].center_at(world.t);
            let distance = (center - other).norm();
            let required = obs.r_o() + world.obstacles[k].r_o() + world.min_separation;
            if distance <= required {
                return Err(CavfError::SeparationViolation { first: j, second: k, distance, required });
            }
        }
        next.registered.push(j);
    }
    Ok(next)
}

/// Smallest surface clearance over registered obstacles and the index
/// attaining it (`+inf` / `None` when nothing is registered).
fn min_clearance(agent: &AgentState, world: &WorldState) -> (f64, Option<usize>) {
    let p = agent.position();
    let mut best = f64::INFINITY;
    let mut arg = None;
    for &j in &world.registered {
        let clearance = (world.obstacles[j].center_at(world.t) - p).norm() - world.obstacles[j].r_o();
        if clearance < best {
            best = clearance;
            arg = Some(j);
        }
    }
    (best, arg)
}

/// The tracking gain for the current instant.
fn current_gain(
    cfg: &ControlConfig,
    agent: &AgentState,
    clearance: f64,
    any_registered: bool,
    dt: f64,
) -> Result<f64, CavfError> {
    Ok(match cfg.gain_mode {
        GainMode::Fixed { k } => k,
        GainMode::Separation { delta } => tracking_gain(agent.v, cfg.e_psi, delta)?,
        GainMode::Adaptive { c_num } => {
            let margin = if any_registered { clearance } else { agent.r_s };
            // Cap at 1/dt: the zero-order-hold loop is unstable for K dt > 2.
            (c_num / margin).min(1.0 / dt)
        }
    })
}

/// The tracking-mode command at the current instant.
fn tracking_command(
    agent: &AgentState,
    world: &WorldState,
    scenario: &Scenario,
    clearance: f64,
    nearest: Option<usize>,
) -> Result<f64, CavfError> {
    let cfg = &scenario.control;
    let k = current_gain(cfg, agent, clearance, !world.registered.is_empty(), scenario.sim.dt)?;
    if world.registered.is_empty() {
        return Ok(control_tracking(agent, agent.psi_d, 0.0, k).u);
    }
    let registered = world.registered_obstacles();
    let p = agent.position();
    let blended = mixed_cavf_with(p, &registered, agent.v, &scenario.mixing, cfg.tie_break())
        .and_then(|mixed| {
            let psi_ca = mixed.field.velocity.y.atan2(mixed.field.velocity.x);
            let u_m = control_mixed(agent, &registered, cfg, &scenario.mixing)?.u;
            Ok((psi_ca, u_m))
        });
    let (psi_ca, u_m) = match blended {
        Ok(pair) => pair,
        Err(CavfError::DegenerateBlend { .. }) => {
            // Opposing fields cancelled: steer by the nearest obstacle alone.
            let j = nearest.expect("registered non-empty");
            let obs = world.current_obstacle(j);
            let sample = cavf_moving_with(p, &obs, agent.v, cfg.tie_break())?;
            let psi_ca = sample.velocity.y.atan2(sample.velocity.x);
            let state = RelativeState::from_inertial(p, agent.psi, agent.v, &obs)?;
            let u_m = if state.r <= obs.r_i() {
                control_dynamic(&state, &obs, agent.v, cfg)?.u
            } else {
                0.0
            };
            (psi_ca, u_m)
        }
        Err(e) => return Err(e),
    };
    Ok(control_tracking(agent, psi_ca, u_m, k).u)
}

/// The exact single-obstacle command at a given state and time (0 outside
/// the influence annulus).
fn exact_command(
    x: f64,
    y: f64,
    psi: f64,
    t: f64,
    agent: &AgentState,
    obstacle: &Obstacle,
    cfg: &ControlConfig,
) -> Result<f64, CavfError> {
    let obs = obstacle.advanced(t);
    let state = RelativeState::from_inertial(Vector2::new(x, y), psi, agent.v, &obs)?;
    if state.r > obs.r_i() {
        return Ok(0.0);
    }
    Ok(control_dynamic(&state, &obs, agent.v, cfg)?.u)
}

/// One Runge-Kutta step of the *closed loop* for the exact single-obstacle
/// law: the command is re-evaluated at every stage (with the obstacle
/// advanced to the stage time), so the step carries the full fourth-order
/// accuracy of the smooth closed-loop dynamics.
fn exact_step(
    agent: &AgentState,
    t: f64,
    dt: f64,
    obstacle: &Obstacle,
    cfg: &ControlConfig,
) -> Result<AgentState, CavfError> {
    let f = |x: f64, y: f64, psi: f64, tau: f64| -> Result<[f64; 3], CavfError> {
        let u = exact_command(x, y, psi, tau, agent, obstacle, cfg)?;
        Ok([agent.v * psi.cos(), agent.v * psi.sin(), u])
    };
    let s0 = [agent.x, agent.y, agent.psi];
    let k1 = f(s0[0], s0[1], s0[2], t)?;
    let k2 = f(s0[0] + 0.5 * dt * k1[0], s0[1] + 0.5 * dt * k1[1], s0[2] + 0.5 * dt * k1[2], t + 0.5 * dt)?;
    let k3 = f(s0[0] + 0.5 * dt * k2[0], s0[1] + 0.5 * dt * k2[1], s0[2] + 0.5 * dt * k2[2], t + 0.5 * dt)?;
    let k4 = f(s0[0] + dt * k3[0], s0[1] + dt * k3[1], s0[2] + dt * k3[2], t + dt)?;
    let mut s = s0;
    let ks = [k1, k2, k3, k4];
    for i in 0..3 {
        s[i] += dt / 6.0 * (ks[0][i] + 2.0 * ks[1][i] + 2.0 * ks[2][i] + ks[3][i]);
    }
    Ok(AgentState { x: s[0], y: s[1], psi: wrap_angle(s[2]), ..*agent })
}

/// Runs a scenario to completion (or to first collision).
///
/// Samples are recorded at `t = 0, dt, ..., floor(t_final/dt) * dt`. Each
/// iteration: advance the world clock, register newly sensed obstacles,
/// account clearances (a negative clearance records a collision and ends the
/// run), compute the command, record the sample, and step the vehicle.
///
/// In the default tracking mode the command is the exponential
/// heading-tracking law around the blended field; in the exact
/// single-obstacle mode (requires exactly one obstacle) the command is the
/// streamline-riding law integrated with stage-accurate Runge-Kutta.
pub fn run(scenario: &Scenario) -> Result<Trajectory, CavfError> {
    let mut agent = scenario.agent;
    let mut world =
        WorldState::new(scenario.obstacles.clone(), scenario.mixing.min_separation);
    let dt = scenario.sim.dt;
    let n_steps = (scenario.sim.t_final / dt + 1e-9).floor() as usize;

    if scenario.sim.mode == SimMode::ExactSingle && scenario.obstacles.len() != 1 {
        return Err(CavfError::InvalidParameter {
            name: "mode",
            reason: format!(
                "exact-single mode needs exactly one obstacle, scenario has {}",
                scenario.obstacles.len()
            ),
        });
    }

    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut collision = None;
    for k in 0..=n_steps {
        let t = k as f64 * dt;
        world.t = t;
        world = sense_and_register(&agent, &world)?;
        let (clearance, nearest) = min_clearance(&agent, &world);
        if clearance < 0.0 {
            collision = Some(CollisionEvent {
                t,
                obstacle: nearest.expect("negative clearance implies a registered obstacle"),
                clearance,
            });
            samples.push(TrajectorySample {
                t,
                x: agent.x,
                y: agent.y,
                psi: agent.psi,
                u: 0.0,
                min_clearance: clearance,
                active_obstacles: world.registered.clone(),
            });
            break;
        }
        let u = match scenario.sim.mode {
            SimMode::Tracking => tracking_command(&agent, &world, scenario, clearance, nearest)?,
            SimMode::ExactSingle => exact_command(
                agent.x,
                agent.y,
                agent.psi,
                t,
                &agent,
                &scenario.obstacles[0],
                &scenario.control,
            )?,
        };
        samples.push(TrajectorySample {
            t,
            x: agent.x,
            y: agent.y,
            psi: agent.psi,
            u,
            min_clearance: clearance,
            active_obstacles: world.registered.clone(),
        });
        if k < n_steps {
            agent = match scenario.sim.mode {
                SimMode::Tracking => step(&agent, u, dt),
                SimMode::ExactSingle => {
                    exact_step(&agent, t, dt, &scenario.obstacles[0], &scenario.control)?
                }
            };
        }
    }
    Ok(Trajectory { samples, collision, psi_d: agent.psi_d, e_psi: scenario.control.e_psi })
}

/// Post-run verdict of [`check_collision`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionReport {
    /// Smallest clearance over the whole run.
    pub min_clearance: f64,
    /// Time at which it occurred.
    pub min_clearance_time: f64,
    /// Time of the first clearance violation, if any.
    pub first_violation: Option<f64>,
    /// `|wrap(psi(T) - psi_d)|` at the final sample.
    pub final_heading_error: f64,
    /// Whether the run is collision-free and ends within the heading
    /// tolerance.
    pub ok: bool,
}

impl std::fmt::Display for CollisionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.first_violation {
            Some(t) => writeln!(f, "collision: yes (first violation at t = {t:.3})")?,
            None => writeln!(f, "collision: no")?,
        }
        writeln!(
            f,
            "min clearance: {:.6} at t = {:.3}",
            self.min_clearance, self.min_clearance_time
        )?;
        write!(f, "final heading error: {:.6} rad", self.final_heading_error)
    }
}

/// Scans a trajectory for clearance violations and terminal heading error.
pub fn check_collision(trajectory: &Trajectory) -> CollisionReport {
    let mut min_clearance = f64::INFINITY;
    let mut min_clearance_time = 0.0;
    let mut first_violation = None;
    for s in &trajectory.samples {
        if s.min_clearance < min_clearance {
            min_clearance = s.min_clearance;
            min_clearance_time = s.t;
        }
        if s.min_clearance < 0.0 && first_violation.is_none() {
            first_violation = Some(s.t);
        }
    }
    if let Some(event) = &trajectory.collision {
        if first_violation.is_none() {
            first_violation = Some(event.t);
        }
    }
    let final_heading_error = trajectory
        .samples
        .last()
        .map(|s| wrap_angle(s.psi - trajectory.psi_d).abs())
        .unwrap_or(0.0);
    CollisionReport {
        min_clearance,
        min_clearance_time,
        first_violation,
        final_heading_error,
        ok: first_violation.is_none() && final_heading_error <= trajectory.e_psi,
    }
}
