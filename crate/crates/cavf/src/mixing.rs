//! Blending of per-obstacle avoidance fields into a single command.
//!
//! Each obstacle contributes its own field; a proximity-based weight decides
//! how much say each one gets. The weight rule guarantees that an obstacle
//! touching its surface dominates outright (the blend *snaps* to it, so the
//! surface barrier property of the individual field is preserved verbatim),
//! that obstacles outside their influence annuli contribute nothing, and that
//! in between the weights fall off linearly with surface clearance.

use nalgebra::Vector2;

use crate::error::CavfError;
use crate::fields::{cavf_moving_with, FieldSample, Obstacle, TieBreak};

/// Configuration of the field blend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixConfig {
    /// Snap threshold: when the largest raw weight exceeds this, the blend
    /// collapses to that obstacle's field alone. In `(0, 1)`, close to 1.
    pub eps_m: f64,
    /// Minimum surface-to-surface clearance `delta` required between any two
    /// obstacles (used at registration and scenario validation).
    pub min_separation: f64,
}

impl Default for MixConfig {
    fn default() -> Self {
        Self { eps_m: 0.9, min_separation: 0.5 }
    }
}

impl MixConfig {
    /// Checks `eps_m` in `(0, 1)` and `min_separation > 0`.
    pub fn validate(&self) -> Result<(), CavfError> {
        if !(self.eps_m > 0.0 && self.eps_m < 1.0) {
            return Err(CavfError::InvalidParameter {
                name: "eps_m",
                reason: format!("snap threshold must lie in (0, 1), got {}", self.eps_m),
            });
        }
        if !(self.min_separation > 0.0) || !self.min_separation.is_finite() {
            return Err(CavfError::InvalidParameter {
                name: "min_separation",
                reason: format!("must be a positive finite number, got {}", self.min_separation),
            });
        }
        Ok(())
    }
}

/// Result of the weight computation.
#[derive(Clone, Debug, PartialEq)]
pub struct MixWeights {
    /// Final per-obstacle weights: one-hot after a snap, otherwise
    /// normalized to sum 1, or all ones when no obstacle is in range.
    pub raw: Vec<f64>,
    /// Surface clearances `r^j - r_o^j` for obstacles inside their influence
    /// annulus; `-1` sentinel for obstacles out of range.
    pub deltas: Vec<f64>,
    /// Index of the dominating obstacle when the blend snapped.
    pub snapped_index: Option<usize>,
}

/// Computes blend weights from per-obstacle `(r, r_o, r_i)` triples.
///
/// For each obstacle the surface clearance is `Delta = r - r_o` if the point
/// is inside the influence circle (`r < r_i`), else the out-of-range sentinel
/// `-1`. With `Sigma` the sum of positive clearances, the raw weight is
///
/// * `1` when the obstacle's clearance is the whole of `Sigma` (it is the
///   only one in range) or when the clearance is `0` (surface contact);
/// * `1 - Delta/Sigma` for other in-range obstacles;
/// * `0` out of range.
///
/// If the largest raw weight exceeds `eps_m` the weights snap to one-hot
/// (ties broken toward the smaller clearance, then the smaller index, so a
/// surface contact always wins); if every weight is zero the weights are all
/// ones (pure free stream everywhere); otherwise they are normalized to sum
/// to 1.
///
/// Callers must only pass points outside every obstacle (`r >= r_o`).
pub fn mix_weights(triples: &[(f64, f64, f64)], cfg: &MixConfig) -> MixWeights {
    let deltas: Vec<f64> = triples
        .iter()
        .map(|&(r, r_o, r_i)| if r - r_i < 0.0 { r - r_o } else { -1.0 })
        .collect();
    let sigma: f64 = deltas.iter().filter(|&&d| d > 0.0).sum();
    let mut raw: Vec<f64> = deltas
        .iter()
        .map(|&d| {
            if d == sigma && d >= 0.0 {
                1.0
            } else if d >= 0.0 {
                1.0 - d / sigma
            } else {
                0.0
            }
        })
        .collect();

    let mut best: Option<usize> = None;
    for j in 0..raw.len() {
        let better = match best {
            None => true,
            Some(i) => {
                raw[j] > raw[i] || (raw[j] == raw[i] && deltas[j] >= 0.0 && deltas[j] < deltas[i])
            }
        };
        if better {
            best = Some(j);
        }
    }

    let snapped_index = best.filter(|&i| raw[i] > cfg.eps_m);
    if let Some(i) = snapped_index {
        for (j, w) in raw.iter_mut().enumerate() {
            *w = if j == i { 1.0 } else { 0.0 };
        }
    } else {
        let sum: f64 = raw.iter().sum();
        if sum == 0.0 {
            raw.iter_mut().for_each(|w| *w = 1.0);
        } else {
            raw.iter_mut().for_each(|w| *w /= sum);
        }
    }
    MixWeights { raw, deltas, snapped_index }
}

/// A blended field evaluation: the resulting sample plus the weights that
/// produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedSample {
    /// The blended field at the query point.
    pub field: FieldSample,
    /// The weights used for the blend.
    pub weights: MixWeights,
}

/// Evaluates the blended avoidance field with default switching-set handling.
pub fn mixed_cavf(
    position: Vector2<f64>,
    obstacles: &[Obstacle],
    v: f64,
    cfg: &MixConfig,
) -> Result<MixedSample, CavfError> {
    mixed_cavf_with(position, obstacles, v, cfg, TieBreak::default())
}

/// Evaluates the blended avoidance field at `position`.
///
/// Per-obstacle fields are evaluated (static or moving as appropriate), the
/// weights of [`mix_weights`] combine their velocity vectors, and the blend
/// is rescaled to magnitude `v` so the vehicle's constant speed is preserved.
/// When the weights snap to a single obstacle, that obstacle's sample is
/// returned unchanged (bit-for-bit), which keeps the surface identity exact.
///
/// The sample's `lambda`/`gamma` diagnostics are the minima over obstacles
/// whose influence annulus contains the point (1 when there is none), and
/// `radial_component` is measured about the obstacle with the smallest
/// surface clearance.
///
/// Errors: empty obstacle list; point inside an obstacle; `v` not exceeding
/// every obstacle speed; [`CavfError::DegenerateBlend`] when the weighted sum
/// has magnitude below `1e-12` (opposing fields cancelled; callers should
/// fall back to the nearest obstacle's field).
pub fn mixed_cavf_with(
    position: Vector2<f64>,
    obstacles: &[Obstacle],
    v: f64,
    cfg: &MixConfig,
    tie: TieBreak,
) -> Result<MixedSample, CavfError> {
    if obstacles.is_empty() {
        return Err(CavfError::InvalidParameter {
            name: "obstacles",
            reason: "blended field needs at least one obstacle".to_string(),
        });
    }
    let mut samples = Vec::with_capacity(obstacles.len());
    let mut triples = Vec::with_capacity(obstacles.len());
    for obs in obstacles {
        samples.push(cavf_moving_with(position, obs, v, tie)?);
        let r = (position - obs.center).norm();
        triples.push((r, obs.r_o(), obs.r_i()));
    }
    let weights = mix_weights(&triples, cfg);

    let field = if let Some(i) = weights.snapped_index {
        samples[i]
    } else {
        let mut sum = Vector2::zeros();
        for (w, s) in weights.raw.iter().zip(&samples) {
            sum += *w * s.velocity;
        }
        let magnitude = sum.norm();
        if magnitude < 1e-12 {
            return Err(CavfError::DegenerateBlend { magnitude });
        }
        let velocity = sum * (v / magnitude);
        let mut lambda = 1.0f64;
        let mut gamma = 1.0f64;
        let mut nearest = 0usize;
        let mut nearest_clearance = f64::INFINITY;
        for (j, (&(r, r_o, r_i), s)) in triples.iter().zip(&samples).enumerate() {
            if r <= r_i {
                lambda = lambda.min(s.lambda);
                gamma = gamma.min(s.gamma);
            }
            if r - r_o < nearest_clearance {
                nearest_clearance = r - r_o;
                nearest = j;
            }
        }
        let rel = position - obstacles[nearest].center;
        let e_r = rel / rel.norm();
        FieldSample { velocity, lambda, gamma, radial_component: velocity.dot(&e_r) }
    };
    Ok(MixedSample { field, weights })
}

/// Converts blend weights into heading-rate weights.
///
/// The blended heading is the argument of `m = sum_j w^j v_hat_j` with
/// `v_hat_j` the unit heading of field `j`. Differentiating that argument
/// (holding the weights fixed) gives a convex-like combination of the
/// per-field heading rates with coefficients
///
/// ```text
/// W^i = w^i < v_hat_i, m > / |m|^2,
/// ```
///
/// which always sum to exactly 1 (they may individually be negative when the
/// headings are spread). `headings[j]` is the inertial heading of field `j`
/// at the query point.
///
/// Errors with [`CavfError::DegenerateBlend`] when `|m|^2 < 1e-12`, i.e. the
/// weighted headings cancel and no blended heading exists.
pub fn heading_rate_weights(
    weights: &MixWeights,
    headings: &[f64],
) -> Result<Vec<f64>, CavfError> {
    let w = &weights.raw;
    if w.len() != headings.len() {
        return Err(CavfError::InvalidParameter {
            name: "headings",
            reason: format!("expected {} headings, got {}", w.len(), headings.len()),
        });
    }
    let n = w.len();
    let mut numerators = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += w[j] * (headings[i] - headings[j]).cos();
        }
        numerators[i] = w[i] * acc;
    }
    let denom: f64 = numerators.iter().sum();
    if denom.abs() < 1e-12 {
        return Err(CavfError::DegenerateBlend { magnitude: denom });
    }
    Ok(numerators.iter().map(|&x| x / denom).collect())
}
