mod common;

use bcmac::channel::{ChannelSet, LinearConstraint};
use bcmac::hermitian::HermitianMatrix;
use bcmac::mac::{solve_wsr_mac, SolverSettings};
use bcmac::oracle::{brute_wsr, brute_wsr_mac, GridSpec};
use bcmac::orchestrator::{minimize_g, OuterSettings};
use common::rmat;
use proptest::prelude::*;

fn real_two_user() -> impl Strategy<Value = ChannelSet<f64>> {
    (prop::collection::vec(rmat(2, 2), 2), prop::collection::vec(0.5f64..1.5, 2))
        .prop_map(|(h, s)| ChannelSet::new(h, s).unwrap())
}

fn grid() -> GridSpec {
    GridSpec::new(15, 20, 1.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn mac_solver_sandwich(ch in real_two_user(), w in 0.1f64..1.0, budget in 1.0f64..10.0, off in -0.3f64..0.3) {
        let a = HermitianMatrix::from_real_rows(&[vec![1.0, off], vec![off, 1.5]]).unwrap();
        let weights = [1.0, w];
        let sol = solve_wsr_mac(&ch, &a, budget, &weights, &SolverSettings::default()).unwrap();
        let brute = brute_wsr_mac(&ch, &a, budget, &weights, &grid()).unwrap();
        prop_assert!(sol.objective >= brute - 1e-9, "solver {} below grid {}", sol.objective, brute);
        prop_assert!(sol.objective <= brute + 1e-3, "grid {} too far below {}", brute, sol.objective);
        prop_assert!(sol.cov.weighted_trace(ch.noise_powers()) <= budget * (1.0 + 1e-12));
    }

    #[test]
    fn multi_constraint_sandwich(ch in real_two_user(), w in 0.1f64..1.0, p in (1.0f64..6.0, 1.0f64..6.0)) {
        let cons = vec![LinearConstraint::per_antenna(2, 0, p.0).unwrap(), LinearConstraint::per_antenna(2, 1, p.1).unwrap()];
        let weights = [1.0, w];
        let sol = minimize_g(&ch, &cons, &weights, &OuterSettings::default()).unwrap();
        let brute = brute_wsr(&ch, &cons, &weights, &grid()).unwrap();
        // the outer loop meets the constraints to a relative 1e-5, so the value is only that accurate
        prop_assert!(sol.value >= brute - 1e-5 * brute.max(1.0), "solver {} below grid {}", sol.value, brute);
        prop_assert!(sol.value <= brute + 1e-3, "grid {} too far below {}", brute, sol.value);
        prop_assert!(sol.slacks.iter().zip(&cons).all(|(s, c)| *s >= -1e-5 * c.budget()));
    }
}
