//! Self-contained SVG rendering of scenarios and runs.
//!
//! The renderer draws the obstacle population (discs, dashed influence
//! circles, motion arrows and ghost positions for movers), the vehicle's
//! trajectory, and optionally a quiver of the blended field. Output is plain
//! SVG text with no external references, suitable for any viewer.

use std::fmt::Write as _;

use nalgebra::Vector2;

use crate::mixing::mixed_cavf_with;
use crate::scenario::Scenario;
use crate::sim::Trajectory;

/// Rendering options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotOptions {
    /// Drawing width in pixels (height follows the world aspect ratio).
    pub width_px: f64,
    /// Margin around the drawing in pixels.
    pub margin_px: f64,
    /// Quiver resolution per axis; `None` disables the field underlay.
    pub quiver: Option<usize>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { width_px: 720.0, margin_px: 42.0, quiver: None }
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
    margin: f64,
    height_px: f64,
}

impl Frame {
    fn map(&self, p: Vector2<f64>) -> (f64, f64) {
        (
            self.margin + (p.x - self.x0) * self.scale,
            self.height_px - self.margin - (p.y - self.y0) * self.scale,
        )
    }
}

fn nice_step(range: f64) -> f64 {
    let raw = range / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let factor = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    factor * mag
}

/// Renders a scenario (and optionally a flown trajectory) to SVG text.
pub fn render_svg(
    scenario: &Scenario,
    trajectory: Option<&Trajectory>,
    opts: &PlotOptions,
) -> String {
    // World bounds: influence circles now and at t_final, trajectory, start.
    let mut lo = Vector2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vector2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: Vector2<f64>, pad: f64| {
        lo.x = lo.x.min(p.x - pad);
        lo.y = lo.y.min(p.y - pad);
        hi.x = hi.x.max(p.x + pad);
        hi.y = hi.y.max(p.y + pad);
    };
    for obs in &scenario.obstacles {
        grow(obs.center, obs.r_i());
        grow(obs.center_at(scenario.sim.t_final), obs.r_i());
    }
    grow(scenario.agent.position(), 0.5);
    if let Some(t) = trajectory {
        for s in &t.samples {
            grow(Vector2::new(s.x, s.y), 0.25);
        }
    }
    if !lo.x.is_finite() {
        lo = Vector2::new(-1.0, -1.0);
        hi = Vector2::new(1.0, 1.0);
    }
    let span = hi - lo;
    let pad = 0.05 * span.x.max(span.y).max(1e-9);
    lo -= Vector2::new(pad, pad);
    hi += Vector2::new(pad, pad);
    let span = hi - lo;

    let inner_w = opts.width_px - 2.0 * opts.margin_px;
    let scale = inner_w / span.x;
    let height_px = span.y * scale + 2.0 * opts.margin_px;
    let frame = Frame { x0: lo.x, y0: lo.y, scale, margin: opts.margin_px, height_px };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}" font-family="sans-serif" font-size="11">"##,
        opts.width_px, height_px, opts.width_px, height_px
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    // Axis grid.
    let step = nice_step(span.x.max(span.y));
    let mut tick = (lo.x / step).ceil() * step;
    while tick <= hi.x {
        let (px, _) = frame.map(Vector2::new(tick, lo.y));
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#eceff4" stroke-width="1"/><text x="{px:.1}" y="{:.1}" fill="#9aa3af" text-anchor="middle">{tick:.1}</text>"##,
            opts.margin_px,
            height_px - opts.margin_px,
            height_px - opts.margin_px + 14.0
        );
        tick += step;
    }
    let mut tick = (lo.y / step).ceil() * step;
    while tick <= hi.y {
        let (_, py) = frame.map(Vector2::new(lo.x, tick));
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#eceff4" stroke-width="1"/><text x="{:.1}" y="{:.1}" fill="#9aa3af" text-anchor="end">{tick:.1}</text>"##,
            opts.margin_px,
            opts.width_px - opts.margin_px,
            opts.margin_px - 6.0,
            py + 4.0
        );
        tick += step;
    }

    // Field quiver underlay.
    if let Some(n) = opts.quiver.filter(|&n| n >= 2) {
        let tie = scenario.control.tie_break();
        for iy in 0..n {
            for ix in 0..n {
                let p = Vector2::new(
                    lo.x + span.x * ix as f64 / (n - 1) as f64,
                    lo.y + span.y * iy as f64 / (n - 1) as f64,
                );
                if scenario.obstacles.iter().any(|o| (p - o.center).norm() <= o.r_o()) {
                    continue;
                }
                let velocity = if scenario.obstacles.is_empty() {
                    scenario.agent.v
                        * Vector2::new(scenario.agent.psi_d.cos(), scenario.agent.psi_d.sin())
                } else {
                    match mixed_cavf_with(
                        p,
                        &scenario.obstacles,
                        scenario.agent.v,
                        &scenario.mixing,
                        tie,
                    ) {
                        Ok(sample) => sample.field.velocity,
                        Err(_) => continue,
                    }
                };
                let dir = velocity / velocity.norm().max(1e-12);
                let len = 0.35 * span.x / n as f64;
                let (x1, y1) = frame.map(p);
                let (x2, y2) = frame.map(p + len * dir);
                let (hx, hy) = frame.map(p + 0.7 * len * dir + 0.12 * len * Vector2::new(-dir.y, dir.x));
                let (gx, gy) = frame.map(p + 0.7 * len * dir - 0.12 * len * Vector2::new(-dir.y, dir.x));
                let _ = writeln!(
                    svg,
                    r##"<path d="M {x1:.1} {y1:.1} L {x2:.1} {y2:.1} M {hx:.1} {hy:.1} L {x2:.1} {y2:.1} L {gx:.1} {gy:.1}" stroke="#c5ccd6" stroke-width="1" fill="none"/>"##
                );
            }
        }
    }

    // Obstacles.
    for obs in &scenario.obstacles {
        let (cx, cy) = frame.map(obs.center);
        let _ = writeln!(
            svg,
            r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="{:.1}" fill="none" stroke="#b8c0cc" stroke-dasharray="6 5" stroke-width="1"/>"##,
            obs.r_i() * scale
        );
        if !obs.is_static() {
            let ghost = obs.center_at(scenario.sim.t_final);
            let (gx, gy) = frame.map(ghost);
            let _ = writeln!(
                svg,
                r##"<line x1="{cx:.1}" y1="{cy:.1}" x2="{gx:.1}" y2="{gy:.1}" stroke="#94a3b8" stroke-dasharray="2 4" stroke-width="1"/><circle cx="{gx:.1}" cy="{gy:.1}" r="{:.1}" fill="#94a3b8" fill-opacity="0.25"/>"##,
                obs.r_o() * scale
            );
            let tip = obs.center + (obs.r_o() + 0.6 * obs.v_o) * Vector2::new(obs.theta_o.cos(), obs.theta_o.sin());
            let (tx, ty) = frame.map(tip);
            let _ = writeln!(
                svg,
                r##"<line x1="{cx:.1}" y1="{cy:.1}" x2="{tx:.1}" y2="{ty:.1}" stroke="#475569" stroke-width="2"/>"##
            );
        }
        let _ = writeln!(
            svg,
            r##"<circle cx="{cx:.1}" cy="{cy:.1}" r="{:.1}" fill="#64748b" stroke="#334155" stroke-width="1"/>"##,
            obs.r_o() * scale
        );
    }

    // Trajectory.
    if let Some(t) = trajectory {
        if !t.samples.is_empty() {
            let mut d = String::new();
            for (i, s) in t.samples.iter().enumerate() {
                let (px, py) = frame.map(Vector2::new(s.x, s.y));
                let _ = write!(d, "{}{px:.1} {py:.1}", if i == 0 { "M " } else { " L " });
            }
            let _ = writeln!(
                svg,
                r##"<path d="{d}" fill="none" stroke="#2563eb" stroke-width="2"/>"##
            );
            let first = &t.samples[0];
            let last = t.samples.last().unwrap();
            let (sx, sy) = frame.map(Vector2::new(first.x, first.y));
            let (ex, ey) = frame.map(Vector2::new(last.x, last.y));
            let _ = writeln!(svg, r##"<circle cx="{sx:.1}" cy="{sy:.1}" r="4" fill="#16a34a"/>"##);
            let end_color = if t.collision.is_some() { "#dc2626" } else { "#1d4ed8" };
            let _ = writeln!(
                svg,
                r##"<rect x="{:.1}" y="{:.1}" width="7" height="7" fill="{end_color}"/>"##,
                ex - 3.5,
                ey - 3.5
            );
        }
    }

    if let Some(name) = &scenario.name {
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" fill="#334155" font-size="14">{}</text>"##,
            opts.margin_px,
            opts.margin_px - 18.0,
            xml_escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn renders_well_formed_svg() {
        let scenario = parse_scenario(
            r##"
            [agent]
            x = -3.0
            y = 0.0
            v = 1.0
            psi_d = 0.0
            r_s = 10.0
            [mixing]
            min_separation = 0.5
            [sim]
            t_final = 8.0
            [[obstacles]]
            x = 0.0
            y = 0.0
            r_o = 0.5
            r_i = 2.0
            a = 1.0
            [[obstacles]]
            x = 3.0
            y = 1.0
            r_o = 0.4
            r_i = 2.0
            a = 1.0
            v_o = 0.3
            theta_o = 1.0
            "##,
        )
        .unwrap();
        let svg = render_svg(&scenario, None, &PlotOptions { quiver: Some(10), ..Default::default() });
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        // One influence circle and one disc per obstacle.
        assert_eq!(svg.matches("stroke-dasharray=\"6 5\"").count(), 2);
        assert_eq!(svg.matches("fill=\"#64748b\"").count(), 2);
    }
}
