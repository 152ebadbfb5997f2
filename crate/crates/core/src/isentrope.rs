//! Thermodynamics restricted to a fixed entropy level.
//!
//! With `s0 = exp(2σ₀/n)` the isentrope is `T(v) = s0·(v-1)^{-2/n}` and
//! `p(v) = s0·(v-1)^{-1-2/n} - 1/((v+1)² - 2)`. The pressure is monotone in
//! `v` (and the filtration potential invertible) once `s0` exceeds
//! `2n/(n+2)·max w(v)`, where `w(v) = (v+1)(v-1)^{2+2/n}/(v²+2v-1)²`
//! attains its maximum at the root `v* > 1` of
//! `P(v) = (2-n)v³ + 3(n+2)v² + (3n+2)v + 3n - 2`.

use serde::{Deserialize, Serialize};

use crate::eos::{self, attraction_denominator};
use crate::error::{Error, Result};
use crate::roots;

fn check_dof(dof: u32) -> Result<f64> {
    if dof < 3 {
        return Err(Error::InvalidParams(format!(
            "degrees of freedom must be at least 3, got {dof}"
        )));
    }
    Ok(f64::from(dof))
}

fn check_volume(v: f64) -> Result<()> {
    if !(v > 1.0 + eos::VOLUME_GUARD) {
        return Err(Error::Domain(format!("reduced volume {v} must exceed 1")));
    }
    Ok(())
}

/// The cubic whose root locates the maximum of `w`.
pub fn cubic(v: f64, n: f64) -> f64 {
    (((2.0 - n) * v + 3.0 * (n + 2.0)) * v + (3.0 * n + 2.0)) * v + 3.0 * n - 2.0
}

pub fn cubic_derivative(v: f64, n: f64) -> f64 {
    (3.0 * (2.0 - n) * v + 6.0 * (n + 2.0)) * v + 3.0 * n + 2.0
}

/// `w(v) = (v+1)(v-1)^{2+2/n}/(v²+2v-1)²`; `p'(v) = 0` exactly where
/// `s0·(n+2)/(2n) = w(v)`.
pub fn monotonicity_profile(v: f64, n: f64) -> f64 {
    let d = attraction_denominator(v);
    (v + 1.0) * (v - 1.0).powf(2.0 + 2.0 / n) / (d * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicRoot {
    pub v_star: f64,
    pub dof: u32,
}

/// The unique root `v* > 1` of the cubic, bracketed from `P(1) = 8(n+1) > 0`.
pub fn cubic_root(dof: u32) -> Result<CubicRoot> {
    let n = check_dof(dof)?;
    let hi = roots::expand_upper(|v| cubic(v, n), 1.0, 2.0, 2.0, 1e12)
        .ok_or_else(|| Error::NoSolution(format!("cubic root for n = {dof} not bracketed")))?;
    let v_star = roots::newton_bracketed(
        |v| (cubic(v, n), cubic_derivative(v, n)),
        1.0,
        hi,
        1e-16,
        "cubic root",
    )?;
    Ok(CubicRoot { v_star, dof })
}

/// Lower bound on `s0` above which `p(v)` is strictly decreasing for all `v > 1`.
pub fn s0_threshold(dof: u32) -> Result<f64> {
    let n = check_dof(dof)?;
    let v = cubic_root(dof)?.v_star;
    let d = attraction_denominator(v);
    Ok(2.0 * n * (v + 1.0) * (v - 1.0).powf(2.0 + 2.0 / n) / ((n + 2.0) * d * d))
}

/// Lower bound on `s0` above which every state of the isentrope is
/// applicable (`T(v)` above the spinodal temperature for all `v > 1`).
///
/// `T(v) > T_sp(v)` reduces to `s0 > 2w(v)`, so the bound is `2·w(v*)`,
/// a factor `(n+2)/n` above [`s0_threshold`]: isentropes in between have
/// monotone pressure but cross the unstable region.
pub fn s0_applicability_bound(dof: u32) -> Result<f64> {
    let n = check_dof(dof)?;
    Ok(2.0 * monotonicity_profile(cubic_root(dof)?.v_star, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isentrope {
    dof: u32,
    s0: f64,
    s0_min: f64,
}

impl Isentrope {
    pub fn new(dof: u32, s0: f64) -> Result<Self> {
        check_dof(dof)?;
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(Error::InvalidParams(format!(
                "entropy parameter s0 must be positive, got {s0}"
            )));
        }
        Ok(Isentrope {
            dof,
            s0,
            s0_min: s0_threshold(dof)?,
        })
    }

    /// Builds the isentrope from the reduced entropy `σ₀`, `s0 = exp(2σ₀/n)`.
    pub fn from_entropy(dof: u32, sigma0: f64) -> Result<Self> {
        Self::new(dof, (2.0 * sigma0 / f64::from(dof)).exp())
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    pub fn n(&self) -> f64 {
        f64::from(self.dof)
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn s0_min(&self) -> f64 {
        self.s0_min
    }

    /// `σ₀ = (n/2)·ln s0`.
    pub fn entropy_level(&self) -> f64 {
        0.5 * self.n() * self.s0.ln()
    }

    pub fn is_invertible(&self) -> bool {
        self.s0 > self.s0_min
    }

    pub fn temperature(&self, v: f64) -> Result<f64> {
        check_volume(v)?;
        Ok(self.temperature_unchecked(v))
    }

    pub fn pressure(&self, v: f64) -> Result<f64> {
        check_volume(v)?;
        Ok(self.pressure_unchecked(v))
    }

    pub fn pressure_derivative(&self, v: f64) -> Result<f64> {
        check_volume(v)?;
        Ok(self.pressure_derivative_unchecked(v))
    }

    pub(crate) fn temperature_unchecked(&self, v: f64) -> f64 {
        self.s0 * (v - 1.0).powf(-2.0 / self.n())
    }

    pub(crate) fn pressure_unchecked(&self, v: f64) -> f64 {
        self.s0 * (v - 1.0).powf(-1.0 - 2.0 / self.n()) - 1.0 / attraction_denominator(v)
    }

    pub(crate) fn pressure_derivative_unchecked(&self, v: f64) -> f64 {
        self.pressure_derivative_from_excess(v - 1.0)
    }

    /// `p'` as a function of `w = v - 1`, accurate when `v` is close to 1.
    pub(crate) fn pressure_derivative_from_excess(&self, w: f64) -> f64 {
        let k = 1.0 + 2.0 / self.n();
        let d = w * (w + 4.0) + 2.0;
        -self.s0 * k * w.powf(-k - 1.0) + 2.0 * (w + 2.0) / (d * d)
    }
}
