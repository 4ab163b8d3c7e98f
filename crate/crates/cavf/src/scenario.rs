//! Scenario definition, TOML (de)serialization, and validation.
//!
//! A scenario file fixes the vehicle's initial state and mission parameters,
//! the obstacle population, and the control/mixing/integration settings. See
//! `docs/scenario_format.md` at the workspace root for the file format.
//! Loading validates every documented invariant and reports the first
//! violation by name; unknown keys are rejected so typos cannot silently
//! change a run.

use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::control::{ControlConfig, GainMode};
use crate::error::CavfError;
use crate::fields::{CavfParams, Obstacle, Side};
use crate::mixing::MixConfig;
use crate::sim::AgentState;

/// Which closed loop [`run`](crate::sim::run) executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    /// Exponential heading tracking of the blended field (the default).
    Tracking,
    /// The exact streamline-riding law; requires exactly one obstacle.
    ExactSingle,
}

/// Integration settings of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    /// Fixed integration step (positive).
    pub dt: f64,
    /// Run duration; samples cover `t = 0 .. floor(t_final/dt) * dt`.
    pub t_final: f64,
    /// Closed-loop variant.
    pub mode: SimMode,
    /// Seed recorded with generated scenarios (not used during a run).
    pub seed: u64,
}

/// A fully validated scenario, ready to run.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    /// Optional display name.
    pub name: Option<String>,
    /// Initial vehicle state and mission parameters.
    pub agent: AgentState,
    /// Obstacle population (centres at `t = 0`).
    pub obstacles: Vec<Obstacle>,
    /// Control-law settings.
    pub control: ControlConfig,
    /// Field-blending settings.
    pub mixing: MixConfig,
    /// Integration settings.
    pub sim: SimConfig,
}

/// Errors from loading, validating, or saving scenario files.
#[derive(Debug, Error)]
pub enum ScenarioError {
    /// The file could not be read.
    #[error("failed to read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// The TOML text does not parse (message includes line/column and key).
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    /// A documented invariant is violated.
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl From<CavfError> for ScenarioError {
    fn from(e: CavfError) -> Self {
        ScenarioError::Invalid(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// TOML document shape
// ---------------------------------------------------------------------------

/// Accepts an angle either as a number (radians) or as a string `"<num>deg"`.
fn de_angle<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Text(s) => parse_degrees(&s).map_err(serde::de::Error::custom),
    }
}

fn de_opt_angle<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    de_angle(d).map(Some)
}

fn parse_degrees(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let Some(number) = t.strip_suffix("deg") else {
        return Err(format!("angle string must end in \"deg\", got {s:?}"));
    };
    number
        .trim()
        .parse::<f64>()
        .map(f64::to_radians)
        .map_err(|e| format!("bad angle {s:?}: {e}"))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    agent: AgentDoc,
    #[serde(default)]
    control: ControlDoc,
    mixing: MixingDoc,
    sim: SimDoc,
    #[serde(default)]
    obstacles: Vec<ObstacleDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    x: f64,
    y: f64,
    /// Initial heading; defaults to `psi_d`.
    #[serde(default, deserialize_with = "de_opt_angle", skip_serializing_if = "Option::is_none")]
    psi: Option<f64>,
    v: f64,
    #[serde(deserialize_with = "de_angle")]
    psi_d: f64,
    r_s: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleDoc {
    x: f64,
    y: f64,
    r_o: f64,
    r_i: f64,
    a: f64,
    #[serde(default)]
    v_o: f64,
    #[serde(default, deserialize_with = "de_angle")]
    theta_o: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum GainModeDoc {
    Fixed,
    Separation,
    Adaptive,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControlDoc {
    #[serde(default = "default_vartheta", deserialize_with = "de_angle")]
    vartheta: f64,
    #[serde(default = "default_e_psi", deserialize_with = "de_angle")]
    e_psi: f64,
    #[serde(default = "default_gain_mode")]
    gain_mode: GainModeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_num: Option<f64>,
}

fn default_vartheta() -> f64 {
    0.01
}
fn default_e_psi() -> f64 {
    0.01
}
fn default_gain_mode() -> GainModeDoc {
    GainModeDoc::Separation
}

impl Default for ControlDoc {
    fn default() -> Self {
        Self {
            vartheta: default_vartheta(),
            e_psi: default_e_psi(),
            gain_mode: default_gain_mode(),
            gain: None,
            c_num: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixingDoc {
    #[serde(default = "default_eps_m")]
    eps_m: f64,
    min_separation: f64,
}

fn default_eps_m() -> f64 {
    0.9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SideDoc {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModeDoc {
    Tracking,
    ExactSingle,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimDoc {
    #[serde(default = "default_dt")]
    dt: f64,
    t_final: f64,
    #[serde(default = "default_tie_break")]
    tie_break: SideDoc,
    #[serde(default = "default_mode")]
    mode: ModeDoc,
    #[serde(default)]
    seed: u64,
}

fn default_dt() -> f64 {
    0.01
}
fn default_tie_break() -> SideDoc {
    SideDoc::Left
}
fn default_mode() -> ModeDoc {
    ModeDoc::Tracking
}

// ---------------------------------------------------------------------------
// Conversion and validation
// ---------------------------------------------------------------------------

fn convert(doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
    let agent = AgentState {
        x: doc.agent.x,
        y: doc.agent.y,
        psi: doc.agent.psi.unwrap_or(doc.agent.psi_d),
        v: doc.agent.v,
        psi_d: doc.agent.psi_d,
        r_s: doc.agent.r_s,
    };
    let gain_mode = match doc.control.gain_mode {
        GainModeDoc::Fixed => {
            if doc.control.c_num.is_some() {
                return Err(ScenarioError::Invalid(
                    "control.c_num is only valid with gain_mode = \"adaptive\"".into(),
                ));
            }
            let k = doc.control.gain.ok_or_else(|| {
                ScenarioError::Invalid("control.gain is required with gain_mode = \"fixed\"".into())
            })?;
            GainMode::Fixed { k }
        }
        GainModeDoc::Separation => {
            if doc.control.gain.is_some() || doc.control.c_num.is_some() {
                return Err(ScenarioError::Invalid(
                    "control.gain / control.c_num are not valid with gain_mode = \"separation\""
                        .into(),
                ));
            }
            GainMode::Separation { delta: doc.mixing.min_separation }
        }
        GainModeDoc::Adaptive => {
            if doc.control.gain.is_some() {
                return Err(ScenarioError::Invalid(
                    "control.gain is only valid with gain_mode = \"fixed\"".into(),
                ));
            }
            let c_num = doc.control.c_num.ok_or_else(|| {
                ScenarioError::Invalid(
                    "control.c_num is required with gain_mode = \"adaptive\"".into(),
                )
            })?;
            GainMode::Adaptive { c_num }
        }
    };
    let control = ControlConfig {
        vartheta: doc.control.vartheta,
        e_psi: doc.control.e_psi,
        gain_mode,
        side: match doc.sim.tie_break {
            SideDoc::Left => Side::Left,
            SideDoc::Right => Side::Right,
        },
    };
    let mixing = MixConfig { eps_m: doc.mixing.eps_m, min_separation: doc.mixing.min_separation };
    let sim = SimConfig {
        dt: doc.sim.dt,
        t_final: doc.sim.t_final,
        mode: match doc.sim.mode {
            ModeDoc::Tracking => SimMode::Tracking,
            ModeDoc::ExactSingle => SimMode::ExactSingle,
        },
        seed: doc.sim.seed,
    };
    let obstacles = doc
        .obstacles
        .iter()
        .map(|o| Obstacle {
            center: Vector2::new(o.x, o.y),
            v_o: o.v_o,
            theta_o: o.theta_o,
            cavf: CavfParams { a: o.a, r_o: o.r_o, r_i: o.r_i, psi_d: doc.agent.psi_d },
        })
        .collect();
    let scenario = Scenario { name: doc.name, agent, obstacles, control, mixing, sim };
    validate(&scenario)?;
    Ok(scenario)
}

/// Checks every documented invariant of a scenario, reporting the first
/// violation by name.
pub fn validate(scenario: &Scenario) -> Result<(), ScenarioError> {
    scenario
        .agent
        .validate()
        .map_err(|e| ScenarioError::Invalid(format!("agent: {e}")))?;
    scenario
        .control
        .validate()
        .map_err(|e| ScenarioError::Invalid(format!("control: {e}")))?;
    scenario
        .mixing
        .validate()
        .map_err(|e| ScenarioError::Invalid(format!("mixing: {e}")))?;
    if !(scenario.sim.dt > 0.0) || !scenario.sim.dt.is_finite() {
        return Err(ScenarioError::Invalid(format!(
            "sim.dt must be positive and finite, got {}",
            scenario.sim.dt
        )));
    }
    if !(scenario.sim.t_final > 0.0) || !scenario.sim.t_final.is_finite() {
        return Err(ScenarioError::Invalid(format!(
            "sim.t_final must be positive and finite, got {}",
            scenario.sim.t_final
        )));
    }
    if scenario.sim.mode == SimMode::ExactSingle && scenario.obstacles.len() != 1 {
        return Err(ScenarioError::Invalid(format!(
            "sim.mode = \"exact-single\" needs exactly one obstacle, got {}",
            scenario.obstacles.len()
        )));
    }
    for (j, obs) in scenario.obstacles.iter().enumerate() {
        obs.validate()
            .map_err(|e| ScenarioError::Invalid(format!("obstacles[{j}]: {e}")))?;
        if !(scenario.agent.v > obs.v_o) {
            return Err(ScenarioError::Invalid(format!(
                "obstacles[{j}]: obstacle speed {} must be strictly below the vehicle speed {}",
                obs.v_o, scenario.agent.v
            )));
        }
    }
    // Pairwise separation at t = 0 among all listed obstacles.
    for j in 0..scenario.obstacles.len() {
        for k in (j + 1)..scenario.obstacles.len() {
            let a = &scenario.obstacles[j];
            let b = &scenario.obstacles[k];
            let distance = (a.center - b.center).norm();
            let required = a.r_o() + b.r_o() + scenario.mixing.min_separation;
            if distance <= required {
                return Err(ScenarioError::Invalid(format!(
                    "obstacles[{j}] and obstacles[{k}] violate separation at t = 0: \
                     centre distance {distance} <= {required}"
                )));
            }
        }
    }
    Ok(())
}

/// Parses and validates a scenario from TOML text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = toml::from_str(text)?;
    convert(doc)
}

/// Loads and validates a scenario from a TOML file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

/// Serializes a scenario back to TOML. Loading the result reproduces the
/// scenario exactly (floats round-trip bit-for-bit).
pub fn save_scenario(scenario: &Scenario) -> String {
    let (gain_mode, gain, c_num) = match scenario.control.gain_mode {
        GainMode::Fixed { k } => (GainModeDoc::Fixed, Some(k), None),
        GainMode::Separation { .. } => (GainModeDoc::Separation, None, None),
        GainMode::Adaptive { c_num } => (GainModeDoc::Adaptive, None, Some(c_num)),
    };
    let doc = ScenarioDoc {
        name: scenario.name.clone(),
        agent: AgentDoc {
            x: scenario.agent.x,
            y: scenario.agent.y,
            psi: Some(scenario.agent.psi),
            v: scenario.agent.v,
            psi_d: scenario.agent.psi_d,
            r_s: scenario.agent.r_s,
        },
        control: ControlDoc {
            vartheta: scenario.control.vartheta,
            e_psi: scenario.control.e_psi,
            gain_mode,
            gain,
            c_num,
        },
        mixing: MixingDoc {
            eps_m: scenario.mixing.eps_m,
            min_separation: scenario.mixing.min_separation,
        },
        sim: SimDoc {
            dt: scenario.sim.dt,
            t_final: scenario.sim.t_final,
            tie_break: match scenario.control.side {
                Side::Left => SideDoc::Left,
                Side::Right => SideDoc::Right,
            },
            mode: match scenario.sim.mode {
                SimMode::Tracking => ModeDoc::Tracking,
                SimMode::ExactSingle => ModeDoc::ExactSingle,
            },
            seed: scenario.sim.seed,
        },
        obstacles: scenario
            .obstacles
            .iter()
            .map(|o| ObstacleDoc {
                x: o.center.x,
                y: o.center.y,
                r_o: o.r_o(),
                r_i: o.r_i(),
                a: o.cavf.a,
                v_o: o.v_o,
                theta_o: o.theta_o,
            })
            .collect(),
    };
    toml::to_string_pretty(&doc).expect("scenario serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [agent]
        x = -3.0
        y = 0.0
        v = 1.0
        psi_d = 0.0
        r_s = 10.0

        [mixing]
        min_separation = 0.5

        [sim]
        t_final = 10.0

        [[obstacles]]
        x = 0.0
        y = 0.0
        r_o = 0.5
        r_i = 2.0
        a = 1.0
    "#;

    #[test]
    fn minimal_scenario_fills_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.agent.psi, 0.0); // defaults to psi_d
        assert_eq!(s.sim.dt, 0.01);
        assert_eq!(s.control.vartheta, 0.01);
        assert_eq!(s.control.gain_mode, GainMode::Separation { delta: 0.5 });
        assert_eq!(s.obstacles[0].cavf.psi_d, 0.0);
    }

    #[test]
    fn degree_strings_are_accepted() {
        let text = MINIMAL.replace("psi_d = 0.0", "psi_d = \"45 deg\"");
        let s = parse_scenario(&text).unwrap();
        assert!((s.agent.psi_d - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("r_s = 10.0", "r_s = 10.0\nswiftness = 3");
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse(_)));
        assert!(err.to_string().contains("swiftness"));
    }

    #[test]
    fn validation_names_the_bad_obstacle() {
        let text = MINIMAL.replace("r_i = 2.0", "r_i = 0.2");
        let err = parse_scenario(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("obstacles[0]"), "message was: {msg}");
        assert!(msg.contains("r_i"), "message was: {msg}");
    }

    #[test]
    fn round_trip_is_identity() {
        let s = parse_scenario(MINIMAL).unwrap();
        let text = save_scenario(&s);
        let s2 = parse_scenario(&text).unwrap();
        assert_eq!(s, s2);
    }
}
