//! Reduced Peng-Robinson thermodynamics.
//!
//! All quantities here are dimensionless: pressure in units of `a/b²`,
//! temperature in `a/(bR)`, energy in `a/b`, volume in `b` and entropy in
//! `R`. In these units the thermic equation of state reads
//!
//! ```text
//! p = T/(v-1) - 1/((v+1)² - 2)
//! ```
//!
//! and every state is generated by the Massieu-Planck potential
//!
//! ```text
//! φ(v,T) = ln(T^{n/2}(v-1)) - √2/(4T) · ln((3-2√2)(v√2+v-1)/(v√2-v+1))
//! ```
//!
//! through `p = Tφ_v`, `e = T²φ_T` and `σ = φ + Tφ_T`. Energy and entropy
//! are only defined up to additive constants; [`state_from_vt`] normalizes
//! them so that `e = nT/2 + (√2/4)·ln((v√2+v-1)/(v√2-v+1))` and
//! `σ = ln(T^{n/2}(v-1))`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

/// Smallest admissible distance of the reduced volume from the pole at `v = 1`.
pub const VOLUME_GUARD: f64 = 1e-13;

/// `(√2/4)·ln(3 - 2√2)`, the energy shift introduced by the `(3-2√2)` factor in φ.
fn energy_offset() -> f64 {
    0.25 * SQRT_2 * (3.0 - 2.0 * SQRT_2).ln()
}

/// `v² + 2v - 1 = (v+1)² - 2`.
#[inline]
pub(crate) fn attraction_denominator(v: f64) -> f64 {
    v * v + 2.0 * v - 1.0
}

#[inline]
fn attraction_log(v: f64) -> f64 {
    ((3.0 - 2.0 * SQRT_2) * (v * SQRT_2 + v - 1.0) / (v * SQRT_2 - v + 1.0)).ln()
}

pub(crate) fn check_domain(v: f64, t: f64) -> Result<()> {
    if !(v > 1.0 + VOLUME_GUARD) {
        return Err(Error::Domain(format!("reduced volume {v} must exceed 1")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "reduced temperature {t} must be positive"
        )));
    }
    Ok(())
}

/// Scale constants of the Peng-Robinson gas: attraction `a`, covolume `b`
/// and gas constant `R`, in any consistent unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleConstants {
    pub a: f64,
    pub b: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    /// Degrees of freedom of one molecule.
    pub dof: u32,
    pub constants: Option<ScaleConstants>,
}

impl GasParams {
    pub fn new(dof: u32) -> Result<Self> {
        if dof < 3 {
            return Err(Error::InvalidParams(format!(
                "degrees of freedom must be at least 3, got {dof}"
            )));
        }
        Ok(GasParams {
            dof,
            constants: None,
        })
    }

    pub fn with_constants(self, a: f64, b: f64, r: f64) -> Result<Self> {
        for (name, value) in [("a", a), ("b", b), ("R", r)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "constant {name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(GasParams {
            constants: Some(ScaleConstants { a, b, r }),
            ..self
        })
    }

    pub fn n(&self) -> f64 {
        f64::from(self.dof)
    }
}

/// Value and partial derivatives of the reduced Massieu-Planck potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiDerivatives {
    pub value: f64,
    pub dv: f64,
    pub dt: f64,
    pub dvv: f64,
    pub dtt: f64,
    pub dvt: f64,
    pub dvvv: f64,
}

impl PhiDerivatives {
    pub fn at(v: f64, t: f64, n: f64) -> Result<Self> {
        check_domain(v, t)?;
        let d = attraction_denominator(v);
        let log = attraction_log(v);
        let c = 0.25 * SQRT_2;
        Ok(PhiDerivatives {
            value: 0.5 * n * t.ln() + (v - 1.0).ln() - c * log / t,
            dv: phi_v(v, t),
            dt: 0.5 * n / t + c * log / (t * t),
            dvv: phi_vv(v, t),
            dtt: -0.5 * n / (t * t) - 2.0 * c * log / (t * t * t),
            dvt: 1.0 / (t * t * d),
            dvvv: phi_vvv(v, t),
        })
    }

    /// `φ_TT + 2φ_T/T`, the coefficient whose sign governs `e_T > 0`.
    pub fn caloric_form(&self, t: f64) -> f64 {
        self.dtt + 2.0 * self.dt / t
    }
}

/// The reduced Massieu-Planck potential `φ(v, T)` for `n` degrees of freedom.
pub fn phi(v: f64, t: f64, n: f64) -> Result<f64> {
    Ok(PhiDerivatives::at(v, t, n)?.value)
}

// The volume derivatives below do not depend on n.

#[inline]
pub(crate) fn phi_v(v: f64, t: f64) -> f64 {
    1.0 / (v - 1.0) - 1.0 / (t * attraction_denominator(v))
}

#[inline]
pub(crate) fn phi_vv(v: f64, t: f64) -> f64 {
    let d = attraction_denominator(v);
    -1.0 / ((v - 1.0) * (v - 1.0)) + 2.0 * (v + 1.0) / (t * d * d)
}

#[inline]
pub(crate) fn phi_vvv(v: f64, t: f64) -> f64 {
    let d = attraction_denominator(v);
    let w = v - 1.0;
    2.0 / (w * w * w) + 2.0 / t * (1.0 / (d * d) - 4.0 * (v + 1.0) * (v + 1.0) / (d * d * d))
}

#[inline]
fn phi_vvvv(v: f64, t: f64) -> f64 {
    let d = attraction_denominator(v);
    let w = v - 1.0;
    let s = v + 1.0;
    -6.0 / (w * w * w * w)
        + 2.0 / t * (-12.0 * s / (d * d * d) + 24.0 * s * s * s / (d * d * d * d))
}

/// Pressure from the thermic equation of state.
#[inline]
pub fn pressure(v: f64, t: f64) -> f64 {
    t / (v - 1.0) - 1.0 / attraction_denominator(v)
}

/// `(φ - vφ_v)` with the `ln T` term dropped; differences of this quantity
/// between two volumes at equal temperature equal the Gibbs balance.
#[inline]
pub(crate) fn gibbs_reduced(v: f64, t: f64) -> f64 {
    (v - 1.0).ln() - 0.25 * SQRT_2 * attraction_log(v) / t - v * phi_v(v, t)
}

/// A point on the reduced state surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoState {
    pub volume: f64,
    pub temperature: f64,
    pub pressure: f64,
    pub energy: f64,
    pub entropy: f64,
}

impl ThermoState {
    /// Residuals of the thermic, caloric and entropy equations, in that order.
    pub fn eos_residuals(&self, n: f64) -> [f64; 3] {
        let (v, t) = (self.volume, self.temperature);
        let e =
            0.5 * n * t + 0.25 * SQRT_2 * ((v * SQRT_2 + v - 1.0) / (v * SQRT_2 - v + 1.0)).ln();
        let sigma = (t.powf(0.5 * n) * (v - 1.0)).ln();
        [
            self.pressure - pressure(v, t),
            self.energy - e,
            self.entropy - sigma,
        ]
    }
}

/// Evaluates pressure, energy and entropy from the potential's derivatives.
pub fn state_from_vt(v: f64, t: f64, params: &GasParams) -> Result<ThermoState> {
    let n = params.n();
    let d = PhiDerivatives::at(v, t, n)?;
    Ok(ThermoState {
        volume: v,
        temperature: t,
        pressure: t * d.dv,
        energy: t * t * d.dt - energy_offset(),
        entropy: d.value + t * d.dt - 0.5 * n,
    })
}

/// Reduced entropy `ln(T^{n/2}(v-1))`.
pub fn entropy(v: f64, t: f64, n: f64) -> f64 {
    0.5 * n * t.ln() + (v - 1.0).ln()
}

/// Temperature on the spinodal (`φ_vv = 0`) at volume `v`.
#[inline]
pub fn spinodal_temperature(v: f64) -> f64 {
    let d = attraction_denominator(v);
    2.0 * (v + 1.0) * (v - 1.0) * (v - 1.0) / (d * d)
}

#[inline]
fn spinodal_temperature_dv(v: f64) -> f64 {
    let d = attraction_denominator(v);
    let num = (v + 1.0) * (v - 1.0) * (v - 1.0);
    let dnum = (v - 1.0) * (3.0 * v + 1.0);
    2.0 * (dnum * d - 2.0 * num * (2.0 * v + 2.0)) / (d * d * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Applicability {
    pub applicable: bool,
    /// `T` minus the spinodal temperature at `v`.
    pub margin: f64,
}

/// Thermodynamic stability test: `T > 2(v+1)(v-1)²/(v²+2v-1)²`.
pub fn applicability(v: f64, t: f64) -> Result<Applicability> {
    check_domain(v, t)?;
    let margin = t - spinodal_temperature(v);
    Ok(Applicability {
        applicable: margin > 0.0,
        margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub volume: f64,
    pub temperature: f64,
    pub pressure: f64,
}

impl CriticalPoint {
    fn closed_form() -> Self {
        let c = 4.0 + 2.0 * SQRT_2;
        let volume = 1.0 + 2.0 * c.powf(-1.0 / 3.0) + c.cbrt();
        let temperature = spinodal_temperature(volume);
        CriticalPoint {
            volume,
            temperature,
            pressure: pressure(volume, temperature),
        }
    }
}

/// The critical point, from its closed form.
pub fn critical_point() -> CriticalPoint {
    CriticalPoint::closed_form()
}

/// Locates the simultaneous zero of `φ_vv` and `φ_vvv` by Newton's method,
/// independently of the closed form.
pub fn locate_critical_point() -> Result<CriticalPoint> {
    const MAX_ITER: usize = 60;
    let (mut v, mut t) = (4.0, 0.17);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let f1 = phi_vv(v, t);
        let f2 = phi_vvv(v, t);
        residual = f1.abs().max(f2.abs());
        // ∂/∂T of the attraction parts is -(part)/T
        let j11 = phi_vvv(v, t);
        let j12 = -(phi_vv(v, t) + 1.0 / ((v - 1.0) * (v - 1.0))) / t;
        let j21 = phi_vvvv(v, t);
        let j22 = -(phi_vvv(v, t) - 2.0 / ((v - 1.0) * (v - 1.0) * (v - 1.0))) / t;
        let det = j11 * j22 - j12 * j21;
        let dv = (f1 * j22 - f2 * j12) / det;
        let dt = (j11 * f2 - j21 * f1) / det;
        v -= dv;
        t -= dt;
        if dv.abs() < 1e-15 * v && dt.abs() < 1e-15 * t {
            return Ok(CriticalPoint {
                volume: v,
                temperature: t,
                pressure: pressure(v, t),
            });
        }
    }
    Err(Error::Convergence {
        what: "critical point search",
        iterations: MAX_ITER,
        residual,
    })
}

/// The two spinodal volumes `v_sp1 < v_c < v_sp2` at a subcritical temperature.
pub fn spinodal_volumes(t: f64) -> Result<(f64, f64)> {
    let cp = critical_point();
    if !(t > 0.0) || t >= cp.temperature {
        return Err(Error::NoSolution(format!(
            "no spinodal at T = {t}; requires 0 < T < T_c = {}",
            cp.temperature
        )));
    }
    let f = |v: f64| (spinodal_temperature(v) - t, spinodal_temperature_dv(v));
    let liquid = roots::newton_bracketed(f, 1.0 + 1e-12, cp.volume, 1e-16, "liquid spinodal")?;
    let hi = roots::expand_upper(
        |v| spinodal_temperature(v) - t,
        cp.volume,
        2.0 * cp.volume,
        2.0,
        1e300,
    )
    .ok_or_else(|| Error::NoSolution(format!("gas spinodal at T = {t} not bracketed")))?;
    let gas = roots::newton_bracketed(f, cp.volume, hi, 1e-16, "gas spinodal")?;
    Ok((liquid, gas))
}

/// A state in dimensional units, ordered as `(p, T, e, v, σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalState {
    pub pressure: f64,
    pub temperature: f64,
    pub energy: f64,
    pub volume: f64,
    pub entropy: f64,
}

struct Scales {
    pressure: f64,
    temperature: f64,
    energy: f64,
    volume: f64,
    entropy: f64,
}

fn scales(params: &GasParams) -> Result<Scales> {
    let ScaleConstants { a, b, r } = params.constants.ok_or(Error::MissingConstants)?;
    Ok(Scales {
        pressure: a / (b * b),
        temperature: a / (b * r),
        energy: a / b,
        volume: b,
        entropy: r,
    })
}

pub fn to_reduced(state: &DimensionalState, params: &GasParams) -> Result<ThermoState> {
    let s = scales(params)?;
    Ok(ThermoState {
        volume: state.volume / s.volume,
        temperature: state.temperature / s.temperature,
        pressure: state.pressure / s.pressure,
        energy: state.energy / s.energy,
        entropy: state.entropy / s.entropy,
    })
}

pub fn to_dimensional(state: &ThermoState, params: &GasParams) -> Result<DimensionalState> {
    let s = scales(params)?;
    Ok(DimensionalState {
        volume: state.volume * s.volume,
        temperature: state.temperature * s.temperature,
        pressure: state.pressure * s.pressure,
        energy: state.energy * s.energy,
        entropy: state.entropy * s.entropy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const N3: f64 = 3.0;

    #[test]
    fn thermic_equation_at_reference_point() {
        let d = PhiDerivatives::at(2.0, 1.0, N3).unwrap();
        assert!((d.dv - 6.0 / 7.0).abs() < 1e-15);
        let s = state_from_vt(2.0, 1.0, &GasParams::new(3).unwrap()).unwrap();
        assert!((s.pressure - 6.0 / 7.0).abs() < 1e-15);
        assert!(s.entropy.abs() < 1e-15);
    }

    #[test]
    fn ideal_gas_limit() {
        let s = state_from_vt(1e6, 1.0, &GasParams::new(3).unwrap()).unwrap();
        assert!((s.pressure - 1e-6).abs() / 1e-6 < 1e-5);
    }

    #[test]
    fn domain_guards() {
        assert!(matches!(phi(1.0, 1.0, N3), Err(Error::Domain(_))));
        assert!(matches!(phi(1.0 + 1e-14, 1.0, N3), Err(Error::Domain(_))));
        assert!(matches!(phi(2.0, 0.0, N3), Err(Error::Domain(_))));
        assert!(matches!(applicability(0.5, 1.0), Err(Error::Domain(_))));
        assert!(GasParams::new(2).is_err());
        assert!(GasParams::new(3)
            .unwrap()
            .with_constants(1.0, -1.0, 1.0)
            .is_err());
    }

    #[test]
    fn caloric_form_identity() {
        for &(v, t) in &[(1.2, 0.05), (2.0, 1.0), (30.0, 7.0), (3.9, 0.17)] {
            for n in [3.0, 5.0, 6.0] {
                let d = PhiDerivatives::at(v, t, n).unwrap();
                let expected = n / (2.0 * t * t);
                assert!((d.caloric_form(t) - expected).abs() <= 1e-12 * expected.max(1.0));
            }
        }
    }

    #[test]
    fn applicability_examples() {
        assert!(applicability(2.0, 1.0).unwrap().applicable);
        let a = applicability(2.0, 0.05).unwrap();
        assert!(!a.applicable);
        assert!((a.margin - (0.05 - 6.0 / 49.0)).abs() < 1e-15);
        let cp = critical_point();
        assert!(
            applicability(cp.volume, cp.temperature)
                .unwrap()
                .margin
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn critical_point_values() {
        let cp = critical_point();
        assert!((cp.volume - 3.951_373_035_591_44).abs() < 1e-12);
        assert!((cp.temperature - 0.170_144_420_070_350).abs() < 1e-12);
        assert!(cp.pressure > 0.0);
        let num = locate_critical_point().unwrap();
        assert!((num.volume - cp.volume).abs() < 1e-8);
        assert!((num.temperature - cp.temperature).abs() < 1e-8);
        assert!(phi_vv(cp.volume, cp.temperature).abs() < 1e-12);
        assert!(phi_vvv(cp.volume, cp.temperature).abs() < 1e-10);
    }

    #[test]
    fn spinodal_examples() {
        let cp = critical_point();
        let (a, b) = spinodal_volumes(cp.temperature - 1e-9).unwrap();
        assert!((a - cp.volume).abs() < 1e-3 && (b - cp.volume).abs() < 1e-3);

        let t = 0.9 * cp.temperature;
        let (a, b) = spinodal_volumes(t).unwrap();
        assert!(1.0 < a && a < cp.volume && cp.volume < b);
        assert!((spinodal_temperature(a) - t).abs() < 1e-12);
        assert!((spinodal_temperature(b) - t).abs() < 1e-12);

        assert!(matches!(
            spinodal_volumes(1.1 * cp.temperature),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn fourth_volume_derivative_matches_finite_difference() {
        let (v, t) = (3.0, 0.2);
        let h = 1e-5;
        let fd = (phi_vvv(v + h, t) - phi_vvv(v - h, t)) / (2.0 * h);
        assert!((fd - phi_vvvv(v, t)).abs() < 1e-6 * phi_vvvv(v, t).abs().max(1.0));
    }

    #[test]
    fn conversion_requires_constants() {
        let params = GasParams::new(3).unwrap();
        let s = state_from_vt(2.0, 1.0, &params).unwrap();
        assert_eq!(to_dimensional(&s, &params), Err(Error::MissingConstants));
    }

    #[test]
    fn unit_pressure_scale_when_a_equals_b_squared() {
        let params = GasParams::new(3)
            .unwrap()
            .with_constants(0.09, 0.3, 8.314)
            .unwrap();
        let s = state_from_vt(2.0, 1.0, &params).unwrap();
        let d = to_dimensional(&s, &params).unwrap();
        assert!((d.pressure - s.pressure).abs() < 1e-15);
    }
}
