use proptest::prelude::*;

use tovds::evolve::{evolve_linear, modal_seed, LinState, ModalSeed};
use tovds::exterior::{horizons, jump_coefficient, sds_kappa};
use tovds::linearop::synthetic_chart;
use tovds::model::{validate_spec, EosSpec, ModelParams};
use tovds::modes::{solve_modes, ModeSet};

fn gammas() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.5, 4.0 / 3.0, 1.25, 1.2])
}

fn synthetic_modes() -> ModeSet {
    solve_modes(&synthetic_chart(6, 1.0, 32).unwrap(), 3, 96).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enthalpy_inverts(gamma in gammas(), log_rho in -7.0f64..-1.0, w1 in -0.2f64..0.2) {
        let params = ModelParams::geometrized(0.0);
        let eos = validate_spec(&EosSpec::polytrope(1.0, gamma).with_omega(vec![w1]), &params).unwrap();
        let rho = 10f64.powf(log_rho);
        let u = eos.enthalpy_u(rho).unwrap();
        prop_assert!(u > 0.0);
        let back = eos.rho_of_u(u).unwrap();
        prop_assert!((back / rho - 1.0).abs() < 1e-9, "{rho} -> {u} -> {back}");
    }

    #[test]
    fn pressure_increases(gamma in gammas(), log_rho in -7.0f64..-1.0, step in 1.0001f64..2.0) {
        let params = ModelParams::geometrized(0.0);
        let eos = validate_spec(&EosSpec::polytrope(1.0, gamma), &params).unwrap();
        let rho = 10f64.powf(log_rho);
        prop_assert!(eos.pressure(rho * step).unwrap() > eos.pressure(rho).unwrap());
        prop_assert!(eos.enthalpy_u(rho * step).unwrap() > eos.enthalpy_u(rho).unwrap());
    }

    #[test]
    fn horizons_bracket_static_region(log_lambda in -6.0f64..-1.0, frac in 0.01f64..0.99) {
        let params = ModelParams::geometrized(10f64.powf(log_lambda));
        // largest mass with two horizons is 1/(3 sqrt(Lambda))
        let m = frac / (3.0 * params.lambda.sqrt());
        let h = horizons(m, &params);
        prop_assert_eq!(h.len(), 2);
        for r in &h {
            prop_assert!(sds_kappa(*r, m, &params).abs() < 1e-9);
        }
        prop_assert!(sds_kappa((h[0] * h[1]).sqrt(), m, &params) > 0.0);
        prop_assert!(sds_kappa(0.5 * h[0], m, &params) < 0.0);
        prop_assert!(sds_kappa(2.0 * h[1], m, &params) < 0.0);
    }

    #[test]
    fn jump_even_and_quadratic(v in 1e-6f64..1e-2, dv in -1e-3f64..1e-3, lam in 0.0f64..1e-3) {
        let params = ModelParams::geometrized(lam);
        let (r, m) = (8.0, 0.5);
        let kp = sds_kappa(r, m, &params);
        let a = jump_coefficient(v, dv, r, m, kp, &params).unwrap();
        let b = jump_coefficient(-v, dv, r, m, kp, &params).unwrap();
        prop_assert_eq!(a, b);
        // A (1 + v^2 - 2m/r - Lambda r^2/3)^2 / v^2 does not depend on v
        let norm = |v: f64| {
            let f = 1.0 + v * v - 2.0 * m / r - lam * r * r / 3.0;
            jump_coefficient(v, dv, r, m, kp, &params).unwrap() * f * f / (v * v)
        };
        prop_assert!((norm(v) - norm(0.5 * v)).abs() <= 1e-12 * norm(v).abs().max(1e-300));
        prop_assert_eq!(jump_coefficient(0.0, dv, r, m, kp, &params).unwrap(), 0.0);
    }

    #[test]
    fn evolution_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, th in 0.0f64..std::f64::consts::TAU) {
        let modes = synthetic_modes();
        let op = &modes.op;
        let s1 = modal_seed(&modes, &ModalSeed::new(1, 1e-3, th), 0.0).unwrap();
        let s2 = modal_seed(&modes, &ModalSeed::new(2, 1e-3, 0.0), 0.0).unwrap();
        let sum = LinState::combine(a, &s1, b, &s2, op).unwrap();
        let dt = 0.3 / op.lambda_max().sqrt();
        let e = |s: &LinState| evolve_linear(s, op, dt, 2.0, usize::MAX).unwrap().final_state;
        let (f1, f2, fs) = (e(&s1), e(&s2), e(&sum));
        let scale = 1e-3 * (a.abs() + b.abs()).max(1e-3);
        for i in 0..fs.y.len() {
            prop_assert!((fs.y[i] - (a * f1.y[i] + b * f2.y[i])).abs() < 1e-10 * scale);
        }
    }
}

#[test]
fn time_reversal_returns_to_start() {
    let modes = synthetic_modes();
    let op = &modes.op;
    let s0 = modal_seed(&modes, &ModalSeed::new(2, 1e-3, 0.7), 0.0).unwrap();
    let dt = 0.4 / op.lambda_max().sqrt();
    let fwd = evolve_linear(&s0, op, dt, 5.0, usize::MAX).unwrap();
    let back = evolve_linear(&fwd.final_state.reversed(), op, dt, 5.0, usize::MAX).unwrap();
    let end = back.final_state.reversed();
    let worst = end.y.iter().zip(&s0.y).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    assert!(worst < 1e-8 * 1e-3, "{worst:e}");
}
