//! Property tests over the public API.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use regattack::lasserre::{basis_size, graded_lex_cmp, monomial_basis, Polynomial};
use regattack::matkit::{self, norm, Matrix};
use regattack::onepoint::{attack_coefficient, solve_abs_objective, AbsSense, Sense};
use regattack::pgd::project_ball;
use regattack::rankone::{uniform_ball, Direction, RankOneContext};
use regattack::regress::{fit_ols, refit_add_point, refit_direct, Dataset};

fn synthetic(n: usize, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let x = Matrix::from_fn(n, m, |_, _| rng.sample(StandardNormal));
    let y = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Dataset::new(x, y).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_brackets_every_feasible_point(
        seed in 0u64..10_000,
        m in 1usize..5,
        eta in 0.01f64..3.0,
        dir in proptest::collection::vec(-1.0f64..1.0, 5),
        r in 0.0f64..1.0,
    ) {
        let data = synthetic(20 + 3 * m, m, seed);
        let fit = fit_ols(&data).unwrap();
        let u = &dir[..=m];
        prop_assume!(norm(u) > 1e-6);
        let u = matkit::scaled(eta * r / norm(u), u);
        for i in 0..m {
            let lo = attack_coefficient(&fit, i, eta, Sense::Minimize).unwrap();
            let hi = attack_coefficient(&fit, i, eta, Sense::Maximize).unwrap();
            let b = refit_add_point(&fit, &u[..m], u[m]).unwrap()[i];
            let slack = 1e-9 * (1.0 + b.abs());
            prop_assert!(lo.predicted_value <= b + slack);
            prop_assert!(b <= hi.predicted_value + slack);
            prop_assert!(lo.energy() <= eta * (1.0 + 1e-9));
        }
    }

    #[test]
    fn rank_one_update_matches_refit(seed in 0u64..10_000, m in 1usize..6, scale in 0.01f64..10.0) {
        let data = synthetic(m + 4, m, seed);
        let fit = fit_ols(&data).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
        let x0: Vec<f64> = (0..m).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        let y0 = scale * rng.sample::<f64, _>(StandardNormal);
        let a = refit_add_point(&fit, &x0, y0).unwrap();
        let b = refit_direct(&data, &x0, y0).unwrap();
        let err = matkit::norm_inf(&matkit::sub(&a, &b));
        prop_assert!(err <= 1e-8 * (1.0 + matkit::norm_inf(&b)), "{err}");
    }

    #[test]
    fn abs_objectives_move_the_right_way(seed in 0u64..10_000, eta in 0.01f64..2.0) {
        let fit = fit_ols(&synthetic(25, 3, seed)).unwrap();
        for i in 0..3 {
            let b = fit.beta0[i].abs();
            let shrink = solve_abs_objective(&fit, i, eta, AbsSense::Shrink, true).unwrap();
            let grow = solve_abs_objective(&fit, i, eta, AbsSense::Grow, false).unwrap();
            prop_assert!(shrink.target_value <= b + 1e-12);
            prop_assert!(grow.target_value >= b - 1e-12);
            prop_assert!(shrink.effective_eta <= eta);
        }
    }

    #[test]
    fn projection_is_idempotent(v in proptest::collection::vec(-5.0f64..5.0, 1..8), r in 0.1f64..3.0) {
        let p = project_ball(&v, r);
        prop_assert!(norm(&p) <= r * (1.0 + 1e-12));
        // a projected point can sit an ulp outside the ball, so allow rounding
        let again = project_ball(&p, r);
        prop_assert!(matkit::norm_inf(&matkit::sub(&again, &p)) <= 4.0 * f64::EPSILON * r);
        if norm(&v) <= r {
            prop_assert_eq!(p, v);
        }
    }

    #[test]
    fn rank_one_objective_ignores_scale_split(seed in 0u64..10_000, k in 0.2f64..5.0) {
        let data = synthetic(14, 3, seed);
        let fit = fit_ols(&data).unwrap();
        let ctx = RankOneContext::new(&fit, Direction::Increase.selector(3, 1), 0.6 * fit.sigma_min()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let c = uniform_ball(&mut rng, 14, 1.0);
        let d = uniform_ball(&mut rng, 3, ctx.eta);
        let h = ctx.objective(&c, &d);
        let hk = ctx.objective(&matkit::scaled(k, &c), &matkit::scaled(1.0 / k, &d));
        prop_assert!((h - hk).abs() <= 1e-10 * (1.0 + h.abs()));
    }

    #[test]
    fn basis_is_sorted_and_complete(n in 1usize..5, deg in 0u32..5) {
        let basis = monomial_basis(n, deg);
        prop_assert_eq!(basis.len(), basis_size(n, deg));
        for w in basis.windows(2) {
            prop_assert_eq!(graded_lex_cmp(&w[0], &w[1]), std::cmp::Ordering::Less);
        }
    }

    #[test]
    fn polynomial_text_round_trip(
        terms in proptest::collection::vec((proptest::collection::vec(0u32..4, 3), -10.0f64..10.0), 0..10),
    ) {
        let p = Polynomial::from_terms(3, terms).unwrap();
        let q = Polynomial::parse_text(3, &p.to_text()).unwrap();
        prop_assert_eq!(p, q);
    }
}
