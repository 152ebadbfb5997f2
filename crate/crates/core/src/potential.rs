//! The filtration potential `Q(v) = -∫ (k/μ)·p'(v)/v dv` on an isentrope.
//!
//! Steady isentropic filtration reduces to `ΔQ(v(x)) = 0`, so `Q` is the
//! bridge between the harmonic source field and the specific volume. It is
//! integrated in `t = ln(v - 1)`, where the pole at `v = 1` becomes a smooth
//! exponential growth, tabulated on a uniform `t` grid, and inverted by
//! Newton's method seeded from the table.

use serde::{Deserialize, Serialize};

use crate::eos::VOLUME_GUARD;
use crate::error::{Error, Result};
use crate::interp::hermite;
use crate::isentrope::Isentrope;
use crate::quad::{self, Tolerance};

pub const TABLE_NODES: usize = 2048;
/// Table range of `v - 1`.
pub const TABLE_MIN_EXCESS: f64 = 1e-9;
pub const TABLE_MAX_EXCESS: f64 = 1e6 - 1.0;
/// Extent in `t` of the numerically integrated tail beyond the table.
const TAIL_SPAN: f64 = 40.0;

/// Permeability over viscosity, `k/μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobility(f64);

impl Mobility {
    pub fn new(k_over_mu: f64) -> Result<Self> {
        if !(k_over_mu > 0.0) || !k_over_mu.is_finite() {
            return Err(Error::InvalidParams(format!(
                "mobility k/mu must be positive, got {k_over_mu}"
            )));
        }
        Ok(Mobility(k_over_mu))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QPotential {
    iso: Isentrope,
    mobility: Mobility,
    v_ref: f64,
    tol: Tolerance,
    t_start: f64,
    t_step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    q_sup: f64,
}

impl QPotential {
    /// Builds `Q` normalized by `Q(v_ref) = 0` with the default quadrature
    /// tolerance.
    pub fn build(iso: Isentrope, mobility: Mobility, v_ref: f64) -> Result<Self> {
        Self::build_with_tolerance(iso, mobility, v_ref, Tolerance::default())
    }

    pub fn build_with_tolerance(
        iso: Isentrope,
        mobility: Mobility,
        v_ref: f64,
        tol: Tolerance,
    ) -> Result<Self> {
        if !iso.is_invertible() {
            return Err(Error::NonInvertible {
                s0: iso.s0(),
                threshold: iso.s0_min(),
            });
        }
        if !(v_ref > 1.0 + VOLUME_GUARD) || !v_ref.is_finite() {
            return Err(Error::Domain(format!(
                "reference volume {v_ref} must exceed 1"
            )));
        }
        let t_start = TABLE_MIN_EXCESS.ln();
        let t_step = (TABLE_MAX_EXCESS.ln() - t_start) / (TABLE_NODES - 1) as f64;
        let mut q = QPotential {
            iso,
            mobility,
            v_ref,
            tol,
            t_start,
            t_step,
            values: Vec::with_capacity(TABLE_NODES),
            slopes: Vec::with_capacity(TABLE_NODES),
            q_sup: f64::INFINITY,
        };
        let nodes: Vec<f64> = (0..TABLE_NODES).map(|i| q.node(i)).collect();

        // anchor at the node nearest to v_ref, then accumulate outward
        let t_ref = (v_ref - 1.0).ln();
        let anchor = q.nearest_node(t_ref);
        let mut values = vec![0.0; TABLE_NODES];
        values[anchor] = q.integrate_t(t_ref, nodes[anchor])?;
        for i in anchor + 1..TABLE_NODES {
            values[i] = values[i - 1] + q.integrate_t(nodes[i - 1], nodes[i])?;
        }
        for i in (0..anchor).rev() {
            values[i] = values[i + 1] - q.integrate_t(nodes[i], nodes[i + 1])?;
        }
        q.slopes = nodes.iter().map(|&t| q.integrand_t(t)).collect();
        q.values = values;

        let t_last = nodes[TABLE_NODES - 1];
        let tail = q.integrate_t(t_last, t_last + TAIL_SPAN)?;
        q.q_sup = q.values[TABLE_NODES - 1] + tail + q.tail_bound(t_last + TAIL_SPAN);
        Ok(q)
    }

    pub fn isentrope(&self) -> &Isentrope {
        &self.iso
    }

    pub fn mobility(&self) -> Mobility {
        self.mobility
    }

    pub fn v_ref(&self) -> f64 {
        self.v_ref
    }

    /// Supremum of `Q` as `v → ∞`.
    pub fn q_sup(&self) -> f64 {
        self.q_sup
    }

    /// Tabulated `(v, Q)` pairs.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..TABLE_NODES).map(|i| (1.0 + self.node(i).exp(), self.values[i]))
    }

    fn node(&self, i: usize) -> f64 {
        self.t_start + self.t_step * i as f64
    }

    fn nearest_node(&self, t: f64) -> usize {
        let k = ((t - self.t_start) / self.t_step).round();
        k.clamp(0.0, (TABLE_NODES - 1) as f64) as usize
    }

    /// `dQ/dt = (k/μ)·(-p'(v))·(v-1)/v` with `v = 1 + e^t`.
    fn integrand_t(&self, t: f64) -> f64 {
        let excess = t.exp();
        self.mobility.0 * (-self.iso.pressure_derivative_from_excess(excess)) * excess
            / (1.0 + excess)
    }

    fn integrate_t(&self, from: f64, to: f64) -> Result<f64> {
        quad::integrate(|t| self.integrand_t(t), from, to, self.tol)
    }

    /// Upper bound of the integral beyond `t`, from
    /// `-p'(v)/v <= s0·k·(v-1)^{-k-1}/v` with `k = 1 + 2/n`.
    fn tail_bound(&self, t: f64) -> f64 {
        let k = 1.0 + 2.0 / self.iso.n();
        self.mobility.0 * self.iso.s0() * k / (k + 1.0) * (-(k + 1.0) * t).exp()
    }

    /// `Q(v)`.
    pub fn value(&self, v: f64) -> Result<f64> {
        if !(v > 1.0 + VOLUME_GUARD) {
            return Err(Error::Domain(format!("reduced volume {v} must exceed 1")));
        }
        if v.is_infinite() {
            return Ok(self.q_sup);
        }
        self.value_t((v - 1.0).ln())
    }

    fn value_t(&self, t: f64) -> Result<f64> {
        let i = self.nearest_node(t);
        Ok(self.values[i] + self.integrate_t(self.node(i), t)?)
    }

    /// `dQ/dv = -(k/μ)·p'(v)/v`.
    pub fn derivative(&self, v: f64) -> Result<f64> {
        if !(v > 1.0 + VOLUME_GUARD) {
            return Err(Error::Domain(format!("reduced volume {v} must exceed 1")));
        }
        Ok(-self.mobility.0 * self.iso.pressure_derivative_unchecked(v) / v)
    }

    /// Solves `Q(v) = target` for `v`.
    pub fn invert(&self, target: f64) -> Result<f64> {
        if !target.is_finite() || target >= self.q_sup {
            return Err(Error::OutOfRange {
                target,
                sup: self.q_sup,
            });
        }
        let (lo, hi, guess) = self.bracket(target)?;
        let t = self.newton_t(target, lo, hi, guess)?;
        Ok(1.0 + t.exp())
    }

    /// A bracket `[lo, hi]` in `t` containing the solution, and a guess.
    fn bracket(&self, target: f64) -> Result<(f64, f64, f64)> {
        let last = TABLE_NODES - 1;
        if target < self.values[0] {
            let floor = VOLUME_GUARD.ln() + 1e-9;
            if target <= self.value_t(floor)? {
                return Err(Error::Domain(format!(
                    "potential value {target} corresponds to a volume below the guard 1 + {VOLUME_GUARD:e}"
                )));
            }
            return Ok((floor, self.t_start, self.t_start));
        }
        if target > self.values[last] {
            let mut lo = self.node(last);
            let mut hi = lo + 1.0;
            while self.value_t(hi)? <= target {
                lo = hi;
                hi += (hi - self.node(last)).max(1.0);
                if hi > 700.0 {
                    return Err(Error::OutOfRange {
                        target,
                        sup: self.q_sup,
                    });
                }
            }
            return Ok((lo, hi, 0.5 * (lo + hi)));
        }
        let k = self.values.partition_point(|&q| q <= target).clamp(1, last);
        let (a, b) = (self.node(k - 1), self.node(k));
        // Hermite seed from the table; the exact solve below does not rely on it
        let (qa, qb) = (self.values[k - 1], self.values[k]);
        let (sa, sb) = (self.slopes[k - 1], self.slopes[k]);
        let mut guess = a + (target - qa) / (qb - qa) * (b - a);
        for _ in 0..3 {
            let h = hermite((a, b), (qa, qb), (sa, sb), guess) - target;
            let dh = {
                let e = 1e-7 * (b - a);
                (hermite((a, b), (qa, qb), (sa, sb), guess + e)
                    - hermite((a, b), (qa, qb), (sa, sb), guess - e))
                    / (2.0 * e)
            };
            if dh > 0.0 {
                guess = (guess - h / dh).clamp(a, b);
            }
        }
        Ok((a, b, guess))
    }

    fn newton_t(&self, target: f64, mut lo: f64, mut hi: f64, guess: f64) -> Result<f64> {
        const MAX_ITER: usize = 100;
        let mut t = guess;
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITER {
            let f = self.value_t(t)? - target;
            residual = f.abs();
            if f == 0.0 {
                return Ok(t);
            }
            if f < 0.0 {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
            let newton = f / self.integrand_t(t);
            if newton.abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                return Ok(t - newton);
            }
            let mut next = t - newton;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            t = next;
            if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                return Ok(t);
            }
        }
        Err(Error::Convergence {
            what: "potential inversion",
            iterations: MAX_ITER,
            residual,
        })
    }
}
