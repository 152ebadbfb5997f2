//! Two-phase equilibrium: equal pressure and equal specific Gibbs energy.
//!
//! At a subcritical temperature the liquid volume `v1` and gas volume `v2`
//! solve
//!
//! ```text
//! φ_v(v2,T) = φ_v(v1,T)
//! φ(v2,T) - v2·φ_v(v2,T) = φ(v1,T) - v1·φ_v(v1,T)
//! ```
//!
//! which is solved by a damped 2-D Newton iteration that keeps `v1` on the
//! liquid side of the spinodal and `v2` on the gas side, so the trivial
//! solution `v1 = v2` is never reachable.

use serde::{Deserialize, Serialize};

use crate::eos::{self, critical_point};
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

/// Relative distance below `T_c` of the first continuation temperature.
pub const CONTINUATION_START: f64 = 1e-7;
/// Spinodal offset used for default Newton guesses.
pub const GUESS_OFFSET: f64 = 0.1;
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 100;
/// Default lowest temperature of a traced curve, as a fraction of `T_c`.
pub const DEFAULT_T_MIN_FRACTION: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoexistencePoint {
    pub temperature: f64,
    /// Liquid-branch volume.
    pub v1: f64,
    /// Gas-branch volume.
    pub v2: f64,
    /// Common transition pressure.
    pub p_star: f64,
}

impl CoexistencePoint {
    /// Residuals of the equal-`φ_v` and equal-Gibbs equations.
    pub fn residuals(&self) -> [f64; 2] {
        residuals(self.v1, self.v2, self.temperature)
    }
}

fn residuals(v1: f64, v2: f64, t: f64) -> [f64; 2] {
    [
        eos::phi_v(v2, t) - eos::phi_v(v1, t),
        eos::gibbs_reduced(v2, t) - eos::gibbs_reduced(v1, t),
    ]
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

fn default_guess(spinodal: (f64, f64)) -> (f64, f64) {
    let (s1, s2) = spinodal;
    (
        s1 - 0.5 * (s1 - 1.0) * GUESS_OFFSET,
        s2 * (1.0 + GUESS_OFFSET),
    )
}

/// Near `T_c` the binodal half-width is about √3 times the spinodal one.
fn scaled_guess(spinodal: (f64, f64)) -> (f64, f64) {
    let (s1, s2) = spinodal;
    let vc = critical_point().volume;
    let k = 3f64.sqrt() - 1.0;
    (
        (s1 - k * (vc - s1)).max(0.5 * (1.0 + s1)),
        s2 + k * (s2 - vc),
    )
}

/// Solves the phase-equilibrium system at temperature `t`.
///
/// `guess` seeds the iteration; a guess that is not outside the spinodal
/// interval on both sides is replaced by the default spinodal-offset seed.
pub fn solve_coexistence_at_t(t: f64, guess: Option<(f64, f64)>) -> Result<CoexistencePoint> {
    let cp = critical_point();
    if !(t > 0.0) || t >= cp.temperature {
        return Err(Error::NoSolution(format!(
            "no phase transition at T = {t} (T_c = {})",
            cp.temperature
        )));
    }
    if let Some((g1, g2)) = guess {
        if !(1.0 < g1 && g1 < cp.volume && cp.volume < g2) {
            return Err(Error::InvalidParams(format!(
                "coexistence guess ({g1}, {g2}) must satisfy 1 < v1 < v_c < v2"
            )));
        }
    }
    let spinodal = eos::spinodal_volumes(t)?;
    let (s1, s2) = spinodal;
    let admissible =
        |v1: f64, v2: f64| v1 > 1.0 + eos::VOLUME_GUARD && v1 < s1 && v2 > s2 && v2.is_finite();
    let (mut v1, mut v2) = match guess {
        Some((g1, g2)) if admissible(g1, g2) => (g1, g2),
        _ => {
            let (a, b) = (default_guess(spinodal), scaled_guess(spinodal));
            if norm(residuals(b.0, b.1, t)) < norm(residuals(a.0, a.1, t)) {
                b
            } else {
                a
            }
        }
    };

    let mut r = residuals(v1, v2, t);
    let mut res = norm(r);
    for _ in 0..NEWTON_MAX_ITER {
        let a = eos::phi_vv(v1, t);
        let b = eos::phi_vv(v2, t);
        // J = [[-a, b], [v1 a, -v2 b]], det = a b (v2 - v1)
        let det = a * b * (v2 - v1);
        let d1 = (-v2 * b * r[0] - b * r[1]) / det;
        let d2 = (-v1 * a * r[0] - a * r[1]) / det;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let (c1, c2) = (v1 - lambda * d1, v2 - lambda * d2);
            if admissible(c1, c2) {
                let rc = residuals(c1, c2, t);
                if norm(rc) <= res || res < NEWTON_TOL {
                    accepted = Some((c1, c2, rc));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((c1, c2, rc)) = accepted else {
            if res < NEWTON_TOL {
                break;
            }
            return Err(Error::Convergence {
                what: "coexistence Newton (no descent step)",
                iterations: NEWTON_MAX_ITER,
                residual: res,
            });
        };
        let step = ((c1 - v1) / v1).abs().max(((c2 - v2) / v2).abs());
        v1 = c1;
        v2 = c2;
        r = rc;
        res = norm(r);
        if res < NEWTON_TOL && step < 1e-13 {
            break;
        }
    }
    if res >= NEWTON_TOL {
        return Err(Error::Convergence {
            what: "coexistence Newton",
            iterations: NEWTON_MAX_ITER,
            residual: res,
        });
    }
    Ok(CoexistencePoint {
        temperature: t,
        v1,
        v2,
        p_star: 0.5 * (eos::pressure(v1, t) + eos::pressure(v2, t)),
    })
}

/// Temperatures `T_c - d_k` with gaps `d_k` growing geometrically from
/// `CONTINUATION_START * T_c` to `T_c - t_min`.
pub fn continuation_temperatures(t_min: f64, steps: usize) -> Vec<f64> {
    let tc = critical_point().temperature;
    let first = CONTINUATION_START * tc;
    let last = tc - t_min;
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                return t_min;
            }
            let s = k as f64 / (steps - 1) as f64;
            tc - first * (last / first).powf(s)
        })
        .collect()
}

/// Coexistence points tabulated by decreasing temperature, with monotone
/// interpolants for both branches.
#[derive(Debug, Clone, PartialEq)]
pub struct CoexistenceCurve {
    points: Vec<CoexistencePoint>,
    t_min: f64,
    // ln(v - 1) of each branch against sqrt(T_c - T); both are nearly linear
    // close to the critical point.
    liquid: MonotoneCubic,
    gas: MonotoneCubic,
}

/// Traces the coexistence curve from just below `T_c` down to `t_min`,
/// seeding each solve with the previous solution.
pub fn trace_coexistence_curve(t_min: f64, steps: usize) -> Result<CoexistenceCurve> {
    let cp = critical_point();
    if !(t_min > 0.0) || t_min >= cp.temperature * (1.0 - CONTINUATION_START) {
        return Err(Error::InvalidParams(format!(
            "curve minimum temperature {t_min} must lie in (0, T_c)"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidParams(format!(
            "curve needs at least 2 steps, got {steps}"
        )));
    }
    let mut points: Vec<CoexistencePoint> = Vec::with_capacity(steps);
    for t in continuation_temperatures(t_min, steps) {
        let guess = points.last().map(|p| (p.v1, p.v2));
        let point = solve_coexistence_at_t(t, guess).map_err(|e| match e {
            Error::Convergence {
                iterations,
                residual,
                ..
            } => Error::Convergence {
                what: "coexistence continuation",
                iterations,
                residual,
            },
            other => other,
        })?;
        points.push(point);
    }
    CoexistenceCurve::from_points(points, t_min)
}

impl CoexistenceCurve {
    /// Builds a curve from points ordered by strictly decreasing temperature.
    pub fn from_points(points: Vec<CoexistencePoint>, t_min: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParams("empty coexistence table".into()));
        }
        let ordered = points
            .windows(2)
            .all(|w| w[1].temperature < w[0].temperature && w[1].v1 < w[0].v1 && w[1].v2 > w[0].v2);
        if !ordered {
            return Err(Error::InvalidParams(
                "coexistence table is not monotone in T, v1 and v2".into(),
            ));
        }
        let cp = critical_point();
        let mut xs = vec![0.0];
        let log_vc = (cp.volume - 1.0).ln();
        let mut liquid = vec![log_vc];
        let mut gas = vec![log_vc];
        for p in &points {
            xs.push((cp.temperature - p.temperature).sqrt());
            liquid.push((p.v1 - 1.0).ln());
            gas.push((p.v2 - 1.0).ln());
        }
        Ok(CoexistenceCurve {
            liquid: MonotoneCubic::new(xs.clone(), liquid),
            gas: MonotoneCubic::new(xs, gas),
            points,
            t_min,
        })
    }

    pub fn points(&self) -> &[CoexistencePoint] {
        &self.points
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    /// Interpolated `(v1, v2)` at a temperature inside the table.
    pub fn branches_at(&self, t: f64) -> Result<(f64, f64)> {
        let tc = critical_point().temperature;
        if t < self.t_min {
            return Err(Error::OutOfTable {
                temperature: t,
                t_min: self.t_min,
            });
        }
        if t >= tc {
            return Err(Error::NoSolution(format!("T = {t} is not below T_c")));
        }
        // tabulated temperatures return the solved volumes exactly
        let k = self.points.partition_point(|p| p.temperature > t);
        if let Some(p) = self.points.get(k).filter(|p| p.temperature == t) {
            return Ok((p.v1, p.v2));
        }
        let x = (tc - t).sqrt();
        Ok((
            1.0 + self.liquid.eval(x).exp(),
            1.0 + self.gas.eval(x).exp(),
        ))
    }

    pub fn classify(&self, v: f64, t: f64) -> Result<PhaseLabel> {
        eos::check_domain(v, t)?;
        if t >= critical_point().temperature {
            return Ok(PhaseLabel::Supercritical);
        }
        let (v1, v2) = self.branches_at(t)?;
        Ok(if v <= v1 {
            PhaseLabel::Liquid
        } else if v >= v2 {
            PhaseLabel::Gas
        } else {
            PhaseLabel::Intermediate
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseLabel {
    Liquid,
    Gas,
    /// Inside the coexistence dome: the condensation region.
    Intermediate,
    Supercritical,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 4] = [
        PhaseLabel::Liquid,
        PhaseLabel::Gas,
        PhaseLabel::Intermediate,
        PhaseLabel::Supercritical,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::Liquid => "liquid",
            PhaseLabel::Gas => "gas",
            PhaseLabel::Intermediate => "intermediate",
            PhaseLabel::Supercritical => "supercritical",
        }
    }
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed-form antiderivative of the reduced pressure in `v`.
pub fn pressure_antiderivative(v: f64, t: f64) -> f64 {
    use std::f64::consts::SQRT_2;
    t * (v - 1.0).ln() - 0.25 * SQRT_2 * ((v + 1.0 - SQRT_2) / (v + 1.0 + SQRT_2)).ln()
}

/// `∫_{v1}^{v2} p dv - p*(v2 - v1)`; zero for an equal-area construction.
pub fn maxwell_area_residual(point: &CoexistencePoint) -> f64 {
    let t = point.temperature;
    pressure_antiderivative(point.v2, t)
        - pressure_antiderivative(point.v1, t)
        - point.p_star * (point.v2 - point.v1)
}
