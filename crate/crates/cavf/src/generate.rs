//! Seeded random scenario generation.
//!
//! Places obstacles by rejection sampling so that every pair keeps the
//! required surface separation and the vehicle starts outside every influence
//! circle. The generator is deterministic in its seed.

use std::f64::consts::TAU;

use nalgebra::Vector2;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

use crate::control::{ControlConfig, GainMode};
use crate::fields::{CavfParams, Obstacle, Side};
use crate::mixing::MixConfig;
use crate::scenario::{validate, Scenario, ScenarioError, SimConfig, SimMode};
use crate::sim::AgentState;

/// Inputs of the scenario generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorConfig {
    /// RNG seed; equal seeds give equal scenarios.
    pub seed: u64,
    /// Number of obstacles to place.
    pub count: usize,
    /// How many of them translate (the rest are static).
    pub moving: usize,
    /// Placement box for obstacle centres: `(x0, x1, y0, y1)`.
    pub bounds: (f64, f64, f64, f64),
    /// Obstacle radius range (inclusive).
    pub r_o_range: (f64, f64),
    /// Influence radius shared by all obstacles.
    pub r_i: f64,
    /// Field sharpness shared by all obstacles.
    pub a: f64,
    /// Initial vehicle state and mission parameters.
    pub agent: AgentState,
    /// Pairwise surface margin required between obstacles.
    pub min_separation: f64,
    /// Run duration written to the scenario.
    pub t_final: f64,
    /// Obstacle speeds are drawn from `[0, max_speed_fraction * v)`.
    pub max_speed_fraction: f64,
}

impl GeneratorConfig {
    /// A cluttered-field template around the given seed: a 10 x 8 box of
    /// mixed static and moving obstacles ahead of a vehicle flying +x.
    pub fn template(seed: u64) -> Self {
        Self {
            seed,
            count: 8,
            moving: 3,
            bounds: (-1.0, 9.0, -4.0, 4.0),
            r_o_range: (0.25, 0.6),
            r_i: 3.0,
            a: 1.0,
            agent: AgentState { x: -3.3, y: 0.0, psi: 0.0, v: 1.0, psi_d: 0.0, r_s: 12.0 },
            min_separation: 0.5,
            t_final: 20.0,
            max_speed_fraction: 0.8,
        }
    }
}

/// Generates a validated scenario from the configuration.
///
/// Errors when the inputs are inconsistent or when the box cannot fit
/// `count` obstacles with the required separation (after `10_000 * count`
/// placement attempts).
pub fn generate_scenario(cfg: &GeneratorConfig) -> Result<Scenario, ScenarioError> {
    if cfg.count == 0 {
        return Err(ScenarioError::Invalid("generator: count must be at least 1".into()));
    }
    if cfg.moving > cfg.count {
        return Err(ScenarioError::Invalid(format!(
            "generator: moving ({}) cannot exceed count ({})",
            cfg.moving, cfg.count
        )));
    }
    if !(cfg.r_o_range.0 > 0.0 && cfg.r_o_range.1 >= cfg.r_o_range.0) {
        return Err(ScenarioError::Invalid(format!(
            "generator: obstacle radius range must be positive and ordered, got [{}, {}]",
            cfg.r_o_range.0, cfg.r_o_range.1
        )));
    }
    if !(cfg.r_i > cfg.r_o_range.1) {
        return Err(ScenarioError::Invalid(format!(
            "generator: influence radius {} must exceed the largest obstacle radius {}",
            cfg.r_i, cfg.r_o_range.1
        )));
    }
    if !(cfg.bounds.1 > cfg.bounds.0 && cfg.bounds.3 > cfg.bounds.2) {
        return Err(ScenarioError::Invalid("generator: placement box edges must be ordered".into()));
    }
    if !(cfg.max_speed_fraction >= 0.0 && cfg.max_speed_fraction < 1.0) {
        return Err(ScenarioError::Invalid(format!(
            "generator: max_speed_fraction must lie in [0, 1), got {}",
            cfg.max_speed_fraction
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = cfg.agent.position();
    let mut obstacles: Vec<Obstacle> = Vec::with_capacity(cfg.count);
    let mut attempts = 0usize;
    while obstacles.len() < cfg.count {
        attempts += 1;
        if attempts > 10_000 * cfg.count {
            return Err(ScenarioError::Invalid(format!(
                "generator: could not place {} obstacles with separation {} in the box; \
                 enlarge the box or relax the separation",
                cfg.count, cfg.min_separation
            )));
        }
        let center = Vector2::new(
            rng.gen_range(cfg.bounds.0..cfg.bounds.1),
            rng.gen_range(cfg.bounds.2..cfg.bounds.3),
        );
        let r_o = rng.gen_range(cfg.r_o_range.0..=cfg.r_o_range.1);
        // The vehicle must start outside the influence circle.
        if (center - start).norm() <= cfg.r_i {
            continue;
        }
        let clear = obstacles.iter().all(|other| {
            (center - other.center).norm() > r_o + other.r_o() + cfg.min_separation
        });
        if !clear {
            continue;
        }
        obstacles.push(Obstacle {
            center,
            v_o: 0.0,
            theta_o: 0.0,
            cavf: CavfParams { a: cfg.a, r_o, r_i: cfg.r_i, psi_d: cfg.agent.psi_d },
        });
    }
    for obs in obstacles.iter_mut().take(cfg.moving) {
        if cfg.max_speed_fraction > 0.0 {
            obs.v_o = rng.gen_range(0.0..cfg.max_speed_fraction * cfg.agent.v);
        }
        obs.theta_o = rng.gen_range(0.0..TAU);
    }

    let e_psi = 0.01;
    let scenario = Scenario {
        name: Some(format!("generated-{}", cfg.seed)),
        agent: cfg.agent,
        obstacles,
        control: ControlConfig {
            vartheta: 0.01,
            e_psi,
            gain_mode: GainMode::Adaptive {
                c_num: 2.0 * cfg.agent.v * (std::f64::consts::PI.ln() - e_psi.ln()),
            },
            side: Side::Left,
        },
        mixing: MixConfig { eps_m: 0.9, min_separation: cfg.min_separation },
        sim: SimConfig { dt: 0.01, t_final: cfg.t_final, mode: SimMode::Tracking, seed: cfg.seed },
    };
    validate(&scenario)?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let a = generate_scenario(&GeneratorConfig::template(7)).unwrap();
        let b = generate_scenario(&GeneratorConfig::template(7)).unwrap();
        let c = generate_scenario(&GeneratorConfig::template(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generated_scenarios_keep_separation() {
        let s = generate_scenario(&GeneratorConfig::template(42)).unwrap();
        assert_eq!(s.obstacles.len(), 8);
        for j in 0..s.obstacles.len() {
            for k in (j + 1)..s.obstacles.len() {
                let d = (s.obstacles[j].center - s.obstacles[k].center).norm();
                assert!(d > s.obstacles[j].r_o() + s.obstacles[k].r_o() + 0.5);
            }
        }
    }
}
