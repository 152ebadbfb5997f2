//! Built-in verification suite for `prfilt selfcheck`.

use std::f64::consts::SQRT_2;

use pr_filtration::eos::{
    applicability, critical_point, entropy, locate_critical_point, spinodal_temperature,
    state_from_vt, GasParams, PhiDerivatives,
};
use pr_filtration::field::{
    sample_grid, verify_harmonicity, FiltrationField, GridSpec, HarmonicityProbe, PointSource,
    SourceSet,
};
use pr_filtration::isentrope::{cubic, cubic_root, monotonicity_profile, s0_threshold, Isentrope};
use pr_filtration::parallel::Execution;
use pr_filtration::phase::{
    maxwell_area_residual, solve_coexistence_at_t, trace_coexistence_curve,
};
use pr_filtration::potential::{Mobility, QPotential};
use pr_filtration::quad::Tolerance;
use serde::Serialize;

/// Deliberate corruption of one check's input, for testing the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    CriticalVolume,
    KappaDof,
    CoexistenceVolume,
    MaxwellPressure,
    QInverse,
    CubicRoot,
    HarmonicityStep,
    EntropyDof,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub invariant: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheckReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.name, c.invariant))
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{tag} {:<20} {}: {}\n",
                c.name, c.invariant, c.detail
            ));
        }
        out
    }
}

fn outcome(
    name: &'static str,
    invariant: &'static str,
    result: Result<String, String>,
) -> CheckOutcome {
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CheckOutcome {
        name,
        invariant,
        passed,
        detail,
    }
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err_str(e: pr_filtration::Error) -> String {
    e.to_string()
}

pub fn run_selfcheck(fault: Option<Fault>, execution: Execution) -> SelfCheckReport {
    let checks = vec![
        outcome(
            "critical_point",
            "closed-form v_c and the joint zero of phi_vv, phi_vvv",
            check_critical(fault),
        ),
        outcome(
            "kappa_identity",
            "T^2(phi_TT + 2 phi_T/T) = n/2",
            check_kappa(fault),
        ),
        outcome(
            "coexistence",
            "equal pressure, equal Gibbs energy, equal area",
            check_coexistence(fault),
        ),
        outcome(
            "maxwell_oracle",
            "agreement with equal-area bisection",
            check_maxwell(fault),
        ),
        outcome(
            "q_round_trip",
            "invert(Q(v)) = v and quadrature self-convergence",
            check_q(fault),
        ),
        outcome(
            "invertibility",
            "cubic root maximizes w(v)",
            check_invertibility(fault),
        ),
        outcome(
            "harmonicity_order",
            "7-point Laplacian of Q(v(x)) is O(h^2)",
            check_harmonicity(fault, execution),
        ),
        outcome(
            "entropy_constancy",
            "sigma constant over the field",
            check_entropy(fault, execution),
        ),
    ];
    SelfCheckReport { checks }
}

fn check_critical(fault: Option<Fault>) -> Result<String, String> {
    let c = (4.0 + 2.0 * SQRT_2).cbrt();
    let mut closed = 1.0 + 2.0 / c + c;
    if fault == Some(Fault::CriticalVolume) {
        closed += 1e-6;
    }
    let cp = critical_point();
    let located = locate_critical_point().map_err(err_str)?;
    let dv = (cp.volume - closed).abs();
    let dl = (located.volume - cp.volume)
        .abs()
        .max((located.temperature - cp.temperature).abs());
    ensure(
        dv <= 1e-12 && dl <= 1e-8,
        format!("|v_c - closed form| = {dv:.1e}, |located - exact| = {dl:.1e}"),
    )
}

fn check_kappa(fault: Option<Fault>) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..40 {
        let v = 1.0 + 10f64.powf(-2.0 + 4.0 * i as f64 / 39.0);
        for j in 0..25 {
            let t = spinodal_temperature(v) * (1.05 + 0.4 * j as f64) + 1e-3;
            if !applicability(v, t).map_err(err_str)?.applicable {
                continue;
            }
            let dof = 3 + (i + j) % 5;
            let n = f64::from(dof as u32);
            let d = PhiDerivatives::at(v, t, n).map_err(err_str)?;
            let n_used = if fault == Some(Fault::KappaDof) {
                n + 1e-9
            } else {
                n
            };
            worst = worst.max((t * t * d.caloric_form(t) - 0.5 * n_used).abs());
            count += 1;
        }
    }
    ensure(
        count == 1000 && worst < 1e-12,
        format!("{count} points, max residual {worst:.1e}"),
    )
}

fn gibbs(v: f64, t: f64) -> Result<f64, String> {
    let s = state_from_vt(v, t, &GasParams::new(3).map_err(err_str)?).map_err(err_str)?;
    Ok(s.energy - t * s.entropy + s.pressure * v)
}

fn check_temperatures() -> Vec<f64> {
    let tc = critical_point().temperature;
    (0..20)
        .map(|i| tc * (0.5 + 0.49 * i as f64 / 19.0))
        .collect()
}

fn check_coexistence(fault: Option<Fault>) -> Result<String, String> {
    let (mut r_max, mut g_max, mut m_max): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for t in check_temperatures() {
        let mut p = solve_coexistence_at_t(t, None).map_err(err_str)?;
        if fault == Some(Fault::CoexistenceVolume) {
            p.v1 *= 1.0 + 1e-7;
        }
        let r = p.residuals();
        r_max = r_max.max(r[0].abs()).max(r[1].abs());
        g_max = g_max.max((gibbs(p.v1, t)? - gibbs(p.v2, t)?).abs());
        m_max = m_max.max(maxwell_area_residual(&p).abs());
    }
    ensure(
        r_max < 1e-10 && g_max < 1e-9 && m_max < 1e-8,
        format!("residual {r_max:.1e}, Gibbs {g_max:.1e}, area {m_max:.1e}"),
    )
}

fn pressure(v: f64, t: f64) -> f64 {
    t / (v - 1.0) - 1.0 / (v * v + 2.0 * v - 1.0)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Equal-area construction by nested bisection: the outer loop on the
/// pressure, inner loops for the outer roots of `p(v) = p*`.
pub fn maxwell_oracle(t: f64) -> (f64, f64, f64) {
    let dp =
        |v: f64| -t / ((v - 1.0) * (v - 1.0)) + 2.0 * (v + 1.0) / (v * v + 2.0 * v - 1.0).powi(2);
    let vc = critical_point().volume;
    let s1 = bisect(dp, 1.0 + 1e-12, vc);
    let mut big = 2.0 * vc;
    while dp(big) > 0.0 {
        big *= 2.0;
    }
    let s2 = bisect(dp, vc, big);
    let roots = |ps: f64| {
        let v1 = bisect(|v| pressure(v, t) - ps, 1.0 + 1e-15, s1);
        let mut hi = 2.0 * s2;
        while pressure(hi, t) > ps {
            hi *= 2.0;
        }
        let v2 = bisect(|v| pressure(v, t) - ps, s2, hi);
        (v1, v2)
    };
    let prim = |v: f64| {
        t * (v - 1.0).ln() - ((v + 1.0 - SQRT_2) / (v + 1.0 + SQRT_2)).ln() / (2.0 * SQRT_2)
    };
    let area = |ps: f64| {
        let (v1, v2) = roots(ps);
        prim(v2) - prim(v1) - ps * (v2 - v1)
    };
    let p_lo = pressure(s1, t).max(f64::MIN_POSITIVE);
    let p_hi = pressure(s2, t);
    let ps = bisect(area, p_lo, p_hi);
    let (v1, v2) = roots(ps);
    (v1, v2, ps)
}

fn check_maxwell(fault: Option<Fault>) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for t in check_temperatures() {
        let p = solve_coexistence_at_t(t, None).map_err(err_str)?;
        let (mut v1, v2, _) = maxwell_oracle(t);
        if fault == Some(Fault::MaxwellPressure) {
            v1 *= 1.0 + 1e-4;
        }
        worst = worst
            .max(((p.v1 - v1) / v1).abs())
            .max(((p.v2 - v2) / v2).abs());
    }
    ensure(worst < 1e-6, format!("max relative deviation {worst:.1e}"))
}

fn check_q(fault: Option<Fault>) -> Result<String, String> {
    let iso = Isentrope::new(3, 1.5 * s0_threshold(3).map_err(err_str)?).map_err(err_str)?;
    let mob = Mobility::new(1.0).map_err(err_str)?;
    let q = QPotential::build(iso, mob, 5.0).map_err(err_str)?;
    let volumes: Vec<f64> = (0..100)
        .map(|i| 1.0 + 10f64.powf(-6.0 + 9.0 * i as f64 / 99.0))
        .collect();
    let mut trip: f64 = 0.0;
    for &v in &volumes {
        let mut back = q.invert(q.value(v).map_err(err_str)?).map_err(err_str)?;
        if fault == Some(Fault::QInverse) {
            back *= 1.0 + 1e-7;
        }
        trip = trip.max(((back - v) / v).abs());
    }
    let table: Vec<f64> = q.table().map(|(_, value)| value).collect();
    let increasing = table.windows(2).all(|w| w[1] > w[0]);
    let coarse = QPotential::build_with_tolerance(iso, mob, 5.0, Tolerance::with_abs(1e-10))
        .map_err(err_str)?;
    let fine = QPotential::build_with_tolerance(iso, mob, 5.0, Tolerance::with_abs(5e-11))
        .map_err(err_str)?;
    let mut conv: f64 = 0.0;
    for &v in &volumes {
        let a = coarse.value(v).map_err(err_str)?;
        let b = fine.value(v).map_err(err_str)?;
        conv = conv.max((a - b).abs() / a.abs().max(1.0));
    }
    ensure(
        trip < 1e-8 && increasing && conv < 1e-9,
        format!("round trip {trip:.1e}, increasing {increasing}, self-convergence {conv:.1e}"),
    )
}

fn check_invertibility(fault: Option<Fault>) -> Result<String, String> {
    let n = 3.0;
    let mut v_star = cubic_root(3).map_err(err_str)?.v_star;
    if fault == Some(Fault::CubicRoot) {
        v_star += 1e-3;
    }
    let residual = cubic(v_star, n).abs();
    let argmax = |lo: f64, hi: f64, steps: usize| {
        (0..=steps)
            .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
            .fold((lo, f64::NEG_INFINITY), |best, v| {
                let w = monotonicity_profile(v, n);
                if w > best.1 {
                    (v, w)
                } else {
                    best
                }
            })
            .0
    };
    let coarse = argmax(1.5, 100.0, 10_000);
    let scan = argmax(coarse - 0.02, coarse + 0.02, 400_000);
    let threshold = s0_threshold(3).map_err(err_str)?;
    let volumes = (0..10_000).map(|i| 1.0 + 10f64.powf(-4.0 + 8.0 * i as f64 / 9_999.0));
    let above = Isentrope::new(3, 1.01 * threshold).map_err(err_str)?;
    let below = Isentrope::new(3, 0.5 * threshold).map_err(err_str)?;
    let mut decreasing = true;
    let (mut neg, mut pos) = (false, false);
    for v in volumes {
        decreasing &= above.pressure_derivative(v).map_err(err_str)? < 0.0;
        let d = below.pressure_derivative(v).map_err(err_str)?;
        neg |= d < 0.0;
        pos |= d > 0.0;
    }
    ensure(
        residual < 1e-10 && (scan - v_star).abs() < 1e-4 && decreasing && neg && pos,
        format!(
            "|P(v*)| = {residual:.1e}, |v* - argmax w| = {:.1e}, monotone above {decreasing}, sign change below {}",
            (scan - v_star).abs(),
            neg && pos
        ),
    )
}

/// The three-source field shared by the field checks.
pub fn three_source_field() -> pr_filtration::Result<FiltrationField> {
    let curve = trace_coexistence_curve(0.4 * critical_point().temperature, 60)?;
    let iso = Isentrope::new(3, 2.0 * s0_threshold(3)?)?;
    let q = QPotential::build(iso, Mobility::new(1.0)?, 9.5)?;
    let sources = vec![
        PointSource {
            position: [0.0, 0.0, 0.0],
            intensity: 2e-4,
        },
        PointSource {
            position: [1.5, 0.0, 0.0],
            intensity: -1e-4,
        },
        PointSource {
            position: [0.0, 1.5, 0.5],
            intensity: 1.5e-4,
        },
    ];
    FiltrationField::new(q, SourceSet::new(sources, 9.5)?, curve)
}

fn check_harmonicity(fault: Option<Fault>, execution: Execution) -> Result<String, String> {
    let field = three_source_field().map_err(err_str)?;
    let nodes = GridSpec {
        lower: [-1.5, -1.5, -1.0],
        upper: [2.5, 2.5, 1.5],
        resolution: [5, 5, 4],
    };
    let h = 0.1;
    let refined = if fault == Some(Fault::HarmonicityStep) {
        h / 3.0
    } else {
        h / 2.0
    };
    let run = |h: f64| {
        let probe = HarmonicityProbe {
            nodes,
            h,
            exclusion_radius: 0.6,
        };
        verify_harmonicity(&field, &probe, execution).map_err(err_str)
    };
    let (a, b) = (run(h)?, run(refined)?);
    let lap = a.max_laplacian / b.max_laplacian;
    let div = a.max_continuity / b.max_continuity;
    let ok = |r: f64| (r - 4.0).abs() <= 0.3 * 4.0;
    ensure(
        ok(lap) && ok(div) && a.nodes_used == b.nodes_used && a.nodes_used > 0,
        format!(
            "Laplacian ratio {lap:.3}, continuity ratio {div:.3}, {} nodes",
            a.nodes_used
        ),
    )
}

fn check_entropy(fault: Option<Fault>, execution: Execution) -> Result<String, String> {
    let field = three_source_field().map_err(err_str)?;
    let grid = GridSpec {
        lower: [-2.0, -2.0, -1.0],
        upper: [3.0, 3.0, 1.0],
        resolution: [11, 11, 5],
    };
    let samples = sample_grid(&field, &grid, execution).map_err(err_str)?;
    let n = field.potential().isentrope().n();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, s) in samples
        .records
        .iter()
        .filter_map(|r| r.sample())
        .enumerate()
    {
        let n_used = if fault == Some(Fault::EntropyDof) && i == 0 {
            n + 1e-6
        } else {
            n
        };
        let sigma = entropy(s.volume, s.temperature, n_used);
        lo = lo.min(sigma);
        hi = hi.max(sigma);
    }
    ensure(hi - lo < 1e-10, format!("spread {:.1e}", hi - lo))
}
