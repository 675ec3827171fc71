mod oracles;

use oracles::*;
use pls_core::glm::penalized_gradient;
use pls_core::numerics::cholesky;
use pls_core::scalar::max_abs;
use pls_core::{LabeledSet, Learner, LogisticRegression, PriorSpec, SpdMatrix};
use proptest::prelude::*;

fn lr() -> LogisticRegression<f64> {
    LogisticRegression::default()
}

#[test]
fn log_det_matches_cofactor_expansion() {
    let mut rng = TestRng::new(42);
    for k in 0..200 {
        let dim = 1 + k % 6;
        let b: Vec<Vec<f64>> = (0..dim).map(|_| (0..dim).map(|_| rng.range(0.0, 1.0)).collect()).collect();
        let a = gram_plus_shift(&b, if k % 2 == 0 { 5.0 } else { 0.1 });
        let spd = SpdMatrix::from_rows(&a).unwrap();
        let log_det = cholesky(&spd).unwrap().log_det();
        assert!((log_det - cofactor_det(&a).ln()).abs() < 1e-8);
    }
}

#[test]
fn five_by_five_seeded_example() {
    let mut rng = TestRng::new(5);
    let b: Vec<Vec<f64>> = (0..5).map(|_| (0..5).map(|_| rng.uniform()).collect()).collect();
    let a = gram_plus_shift(&b, 5.0);
    let log_det = cholesky(&SpdMatrix::from_rows(&a).unwrap()).unwrap().log_det();
    assert!((log_det - cofactor_det(&a).ln()).abs() < 1e-8);
}

#[test]
fn gradient_and_information_match_finite_differences() {
    let mut rng = TestRng::new(7);
    for k in 0..100 {
        let n = 5 + rng.below(46);
        let d = 1 + rng.below(5);
        let lambda = [0.1, 0.5, 1.0, 2.0][k % 4];
        let (xs, ys) = random_logistic(&mut rng, n, d, true);
        let data = LabeledSet::new(xs.clone(), ys.clone()).unwrap();
        let prior = PriorSpec::new(lambda).unwrap();
        let fit = lr().fit(&data, &prior).unwrap();
        assert!(fit.converged);

        let analytic = penalized_gradient(&fit.theta, &data, &prior).unwrap();
        assert!(max_abs(&analytic) < 1e-6);
        let f = |t: &[f64]| penalized(t, &xs, &ys, lambda);
        let fd = fd_gradient(f, &fit.theta, 1e-5);
        assert!(max_abs(&fd) < 1e-4);

        let theta: Vec<f64> = fit.theta.iter().map(|t| t + rng.range(-0.5, 0.5)).collect();
        let info = lr().fisher_information(&theta, &data, &prior).unwrap();
        let hess = fd_hessian(f, &theta, 1e-4);
        for i in 0..d {
            for j in 0..d {
                assert!((info.get(i, j) + hess[i][j]).abs() < 1e-4, "({i},{j})");
            }
        }
    }
}

#[test]
fn fit_information_is_fisher_at_theta_hat() {
    let mut rng = TestRng::new(8);
    let (xs, ys) = random_logistic(&mut rng, 30, 3, true);
    let data = LabeledSet::new(xs, ys).unwrap();
    let prior = PriorSpec::new(1.0).unwrap();
    let fit = lr().fit(&data, &prior).unwrap();
    assert_eq!(fit.fisher, lr().fisher_information(&fit.theta, &data, &prior).unwrap());
    assert_eq!(fit.log_lik, lr().log_likelihood(&fit.theta, &data).unwrap());
}

#[test]
fn prior_shrinks_coefficients() {
    let mut rng = TestRng::new(9);
    for _ in 0..30 {
        let (xs, ys) = random_logistic(&mut rng, 40, 3, true);
        let data = LabeledSet::new(xs, ys).unwrap();
        let mut prev = f64::INFINITY;
        for lambda in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let fit = lr().fit(&data, &PriorSpec::new(lambda).unwrap()).unwrap();
            let norm = fit.theta.iter().map(|t| t * t).sum::<f64>().sqrt();
            assert!(norm <= prev + 1e-8);
            prev = norm;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn row_permutation_leaves_fit_unchanged(seed in any::<u64>(), n in 5usize..40, d in 1usize..5) {
        let mut rng = TestRng::new(seed);
        let (xs, ys) = random_logistic(&mut rng, n, d, true);
        let data = LabeledSet::new(xs, ys).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.below(i + 1));
        }
        let prior = PriorSpec::new(0.5).unwrap();
        let a = lr().fit(&data, &prior).unwrap();
        let b = lr().fit(&data.permuted(&order), &prior).unwrap();
        for (p, q) in a.theta.iter().zip(&b.theta) {
            prop_assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn converged_fits_have_small_gradient(seed in any::<u64>(), n in 3usize..50, d in 1usize..6, lambda in 0.05f64..5.0) {
        let mut rng = TestRng::new(seed);
        let (xs, ys) = random_logistic(&mut rng, n, d, true);
        let data = LabeledSet::new(xs, ys).unwrap();
        let prior = PriorSpec::new(lambda).unwrap();
        let fit = lr().fit(&data, &prior).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(max_abs(&penalized_gradient(&fit.theta, &data, &prior).unwrap()) < 1e-6);
    }
}
