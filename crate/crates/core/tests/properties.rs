use pr_filtration::eos::{
    applicability, critical_point, entropy, state_from_vt, to_dimensional, to_reduced, GasParams,
    PhiDerivatives,
};
use pr_filtration::isentrope::{cubic, cubic_root, s0_threshold, Isentrope};
use pr_filtration::phase::{solve_coexistence_at_t, trace_coexistence_curve, PhaseLabel};
use pr_filtration::potential::{Mobility, QPotential};
use proptest::prelude::*;
use std::sync::OnceLock;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

fn potential() -> &'static QPotential {
    static Q: OnceLock<QPotential> = OnceLock::new();
    Q.get_or_init(|| {
        let iso = Isentrope::new(3, 1.5 * s0_threshold(3).unwrap()).unwrap();
        QPotential::build(iso, Mobility::new(1.0).unwrap(), 5.0).unwrap()
    })
}

// e_v = 1/(v^2 + 2v - 1) along an isotherm, so energy differences must
// match a direct quadrature of the attraction term.
#[test]
fn caloric_and_thermic_equations_are_compatible() {
    let params = GasParams::new(5).unwrap();
    for &(t, a, b) in &[(0.3, 1.5, 4.0), (0.05, 2.0, 30.0), (1.2, 1.01, 1.2)] {
        let ea = state_from_vt(a, t, &params).unwrap().energy;
        let eb = state_from_vt(b, t, &params).unwrap().energy;
        let direct = simpson(|v| 1.0 / (v * v + 2.0 * v - 1.0), a, b, 20_000);
        assert!(
            (eb - ea - direct).abs() < 1e-12,
            "T={t}: {} vs {direct}",
            eb - ea
        );
    }
}

#[test]
fn dimensional_round_trip() {
    let params = GasParams::new(3)
        .unwrap()
        .with_constants(0.45, 2.7e-5, 8.314)
        .unwrap();
    let s = state_from_vt(3.2, 0.4, &params).unwrap();
    let back = to_reduced(&to_dimensional(&s, &params).unwrap(), &params).unwrap();
    for (x, y) in [
        (s.volume, back.volume),
        (s.temperature, back.temperature),
        (s.pressure, back.pressure),
        (s.energy, back.energy),
        (s.entropy, back.entropy),
    ] {
        assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
    }
    assert!(to_dimensional(&s, &GasParams::new(3).unwrap()).is_err());
}

#[test]
fn cubic_root_for_several_dof() {
    for dof in 3..=8 {
        let r = cubic_root(dof).unwrap();
        let n = f64::from(dof);
        let scale = r.v_star.powi(3).max(1.0) * n;
        assert!(cubic(r.v_star, n).abs() < 1e-12 * scale, "dof {dof}");
        assert!(r.v_star > critical_point().volume);
    }
}

#[test]
fn curve_shrinks_toward_critical_point() {
    let curve = trace_coexistence_curve(0.4 * critical_point().temperature, 80).unwrap();
    let first = curve.points()[0];
    assert!(first.v2 - first.v1 < 1e-2);
    let widths: Vec<f64> = curve.points().iter().map(|p| p.v2 - p.v1).collect();
    assert!(widths.windows(2).all(|w| w[1] > w[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn state_satisfies_equations_of_state(v in 1.001f64..500.0, t in 0.01f64..3.0, dof in 3u32..9) {
        let params = GasParams::new(dof).unwrap();
        let s = state_from_vt(v, t, &params).unwrap();
        let r = s.eos_residuals(params.n());
        prop_assert!(r[0].abs() < 1e-12 * s.pressure.abs().max(1.0));
        prop_assert!(r[1].abs() < 1e-12 * s.energy.abs().max(1.0));
        prop_assert!(r[2].abs() < 1e-12 * s.entropy.abs().max(1.0));
    }

    #[test]
    fn applicable_iff_phi_vv_negative(v in 1.001f64..200.0, t in 0.005f64..0.5) {
        let a = applicability(v, t).unwrap();
        let d = PhiDerivatives::at(v, t, 3.0).unwrap();
        if a.margin.abs() > 1e-9 {
            prop_assert_eq!(a.applicable, d.dvv < 0.0);
        }
    }

    #[test]
    fn coexistence_pressures_match(frac in 0.5f64..0.99) {
        let t = frac * critical_point().temperature;
        let p = solve_coexistence_at_t(t, None).unwrap();
        let p1 = t / (p.v1 - 1.0) - 1.0 / (p.v1 * p.v1 + 2.0 * p.v1 - 1.0);
        let p2 = t / (p.v2 - 1.0) - 1.0 / (p.v2 * p.v2 + 2.0 * p.v2 - 1.0);
        prop_assert!((p1 - p2).abs() < 1e-11 * p.p_star.abs().max(1e-3));
    }

    #[test]
    fn isentrope_is_isentropic(v in 1.001f64..1e4, scale in 1.01f64..10.0) {
        let iso = Isentrope::new(3, scale * s0_threshold(3).unwrap()).unwrap();
        let t = iso.temperature(v).unwrap();
        prop_assert!((entropy(v, t, 3.0) - iso.entropy_level()).abs() < 1e-12);
        prop_assert!(iso.pressure_derivative(v).unwrap() < 0.0);
    }

    #[test]
    fn q_round_trip(lw in -6.0f64..3.0) {
        let q = potential();
        let v = 1.0 + 10f64.powf(lw);
        let back = q.invert(q.value(v).unwrap()).unwrap();
        prop_assert!((back - v).abs() < 1e-8 * v);
    }

    #[test]
    fn q_is_increasing(lw in -6.0f64..5.0, step in 1e-6f64..1.0) {
        let q = potential();
        let v = 1.0 + 10f64.powf(lw);
        prop_assert!(q.value(v * (1.0 + step)).unwrap() > q.value(v).unwrap());
    }

    #[test]
    fn classify_respects_branch_order(frac in 0.45f64..0.99, x in 0.0f64..1.0) {
        static CURVE: OnceLock<pr_filtration::phase::CoexistenceCurve> = OnceLock::new();
        let curve = CURVE.get_or_init(|| trace_coexistence_curve(0.4 * critical_point().temperature, 120).unwrap());
        let t = frac * critical_point().temperature;
        let (v1, v2) = curve.branches_at(t).unwrap();
        let mid = v1 + x * (v2 - v1);
        let label = curve.classify(mid, t).unwrap();
        if mid > v1 && mid < v2 {
            prop_assert_eq!(label, PhaseLabel::Intermediate);
        }
        prop_assert_eq!(curve.classify(v1 * 0.99, t).unwrap(), PhaseLabel::Liquid);
        prop_assert_eq!(curve.classify(v2 * 1.01, t).unwrap(), PhaseLabel::Gas);
    }
}
