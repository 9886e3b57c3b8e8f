mod common;

use bcmac::channel::{ChannelSet, LinearConstraint, SinrTargets};
use bcmac::hermitian::HermitianMatrix;
use bcmac::mac::{solve_power_min_mac, solve_sinr_balance_mac};
use bcmac::orchestrator::{
    balance_sinr_multi, combine_constraints, eval_g_wsr, maximize_g_pow, minimize_g, solve_nonlinear_constraint,
    OuterSettings, QuadraticBall,
};
use common::cmat;
use proptest::prelude::*;

fn per_antenna(budgets: &[f64]) -> Vec<LinearConstraint<f64>> {
    budgets.iter().enumerate().map(|(j, &p)| LinearConstraint::per_antenna(budgets.len(), j, p).unwrap()).collect()
}

fn two_user(nr: usize) -> impl Strategy<Value = ChannelSet<f64>> {
    prop::collection::vec(cmat(nr, 2), 2).prop_map(|h| ChannelSet::with_unit_noise(h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn g_is_scale_invariant(ch in two_user(2), x in 0.05f64..0.95, p in (1.0f64..8.0, 1.0f64..8.0)) {
        let set = OuterSettings::default();
        let cons = per_antenna(&[p.0, p.1]);
        let w = [1.0, 0.6];
        let g = eval_g_wsr(&ch, &cons, &[x, 1.0 - x], &w, &set).unwrap().g;
        for t in [0.5, 2.0, 10.0] {
            let gt = eval_g_wsr(&ch, &cons, &[t * x, t * (1.0 - x)], &w, &set).unwrap().g;
            prop_assert!((g - gt).abs() <= 1e-6, "t {}: {} vs {}", t, g, gt);
        }
    }

    #[test]
    fn g_bounds_the_multi_constraint_optimum(ch in two_user(2), x in 0.0f64..1.0, p in (1.0f64..8.0, 1.0f64..8.0)) {
        let set = OuterSettings::default();
        let cons = per_antenna(&[p.0, p.1]);
        let w = [1.0, 0.6];
        let opt = minimize_g(&ch, &cons, &w, &set).unwrap();
        let g = eval_g_wsr(&ch, &cons, &[x.max(1e-3), (1.0 - x).max(1e-3)], &w, &set).unwrap().g;
        prop_assert!(g >= opt.value - 1e-7, "g {} below optimum {}", g, opt.value);
        prop_assert!(opt.slacks.iter().all(|&s| s >= -1e-5 * p.0.max(p.1)));
        // complementarity at the returned multipliers
        let feas = set.feas_tol_rel * p.0.max(p.1);
        for (l, s) in opt.lambda.as_slice().iter().zip(&opt.slacks) {
            prop_assert!((l * s).abs() <= feas, "lambda {} slack {}", l, s);
        }
    }

    #[test]
    fn beamforming_bounds(ch in two_user(1), x in 0.0f64..1.0, p in (1.0f64..8.0, 1.0f64..8.0), gamma in 0.3f64..2.0) {
        let set = OuterSettings::default();
        let cons = per_antenna(&[p.0, p.1]);
        let targets = SinrTargets::uniform(2, gamma).unwrap();
        let lam = [x.max(1e-3), (1.0 - x).max(1e-3)];
        let (a, budget) = combine_constraints(&cons, &lam, &set).unwrap();

        let bal = balance_sinr_multi(&ch, &cons, &targets, &set).unwrap();
        let (relaxed, _) = solve_sinr_balance_mac(&ch, &a, budget, &targets, &set.inner).unwrap();
        prop_assert!(relaxed >= bal.alpha * (1.0 - 1e-7), "g_bal {} below achieved {}", relaxed, bal.alpha);
        prop_assert!(bal.values.iter().zip(&cons).all(|(t, c)| *t <= c.budget() * (1.0 + 1e-5)));

        let pow = maximize_g_pow(&ch, &cons, &targets, &set).unwrap();
        let (total, _) = solve_power_min_mac(&ch, &a, &targets, &set.inner).unwrap();
        prop_assert!(total / budget <= pow.alpha * (1.0 + 1e-7), "g_pow {} above achieved {}", total / budget, pow.alpha);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn cuts_support_the_ball(ch in two_user(2), radius_sq in 10.0f64..200.0) {
        let a = vec![HermitianMatrix::from_diagonal(&[1.0, 0.0]), HermitianMatrix::from_diagonal(&[0.0, 1.0])];
        let ball = QuadraticBall::new(a, radius_sq).unwrap();
        let sol = solve_nonlinear_constraint(&ch, &ball, &[1.0, 1.0], 1e-2, &OuterSettings::default()).unwrap();
        let r = radius_sq.sqrt();
        for (n, x) in sol.state.normals.iter().zip(&sol.state.tangency) {
            let c = n[0] * x[0] + n[1] * x[1];
            for i in 0..=200 {
                let th = std::f64::consts::FRAC_PI_2 * i as f64 / 200.0;
                for rho in [0.25, 0.5, 0.75, 1.0] {
                    let p = [rho * r * th.cos(), rho * r * th.sin()];
                    prop_assert!(n[0] * p[0] + n[1] * p[1] <= c * (1.0 + 1e-12) + 1e-12);
                }
            }
        }
        prop_assert!(sol.rate_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }
}
