use super::*;
use crate::numerics::testing::rng;
use rand::Rng;

fn default_model() -> SvModel {
    SvModel::scaled_t(&ScaledTConfig::default()).unwrap()
}

fn toy() -> SvModel {
    SvModel::cauchy(0.8, 1.0, 1.0, default_v_coeffs(4), 1.0, 1.0, 1.0).unwrap()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn inverse_polynomial_realization() {
    let v = vec![2.2, 1.5, 0.3, 0.1, 0.02];
    let g = inverse_poly_realization(&v).unwrap();
    let mut r = rng(3);
    for _ in 0..20 {
        let s = C64::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let mut p = ZERO;
        for &c in v.iter().rev() {
            p = p * (-I * s) + c;
        }
        let want = I / p;
        let got = g.eval(s).unwrap();
        assert!((got - want).norm() < 1e-12 * want.norm(), "{got} {want}");
    }
}

#[test]
fn weight_density_matches_likelihood() {
    for model in [default_model(), toy()] {
        for y in [0.0, 0.7, -2.5] {
            let phi = weight_density(&model, y, &tol()).unwrap().unwrap();
            for x in [-6.0, -1.0, 0.0, 0.3, 4.0, 15.0] {
                let want = model.likelihood(y, x).unwrap();
                let got = phi.density_at(x).unwrap();
                assert!((got - want).abs() < 1e-10 * want, "y {y} x {x}: {got} {want}");
            }
        }
    }
}

#[test]
fn posterior_codegree_at_first_step() {
    let m = default_model();
    let f = Filter::new(m, FilterOptions::default()).unwrap();
    let st = f.init();
    assert_eq!(st.predictive.codegree(), 10);
    let (post, c_t) = update(&st.predictive, 0.4, &f.model, &tol()).unwrap();
    assert_eq!(post.codegree(), 14);
    assert!(c_t > 0.0);
    assert!((post.norm_const() - 1.0).abs() < 1e-12);
    let measured = density_from_summand(post.summand()).codegree(&tol()).unwrap();
    assert_eq!(measured, 14);
}

#[test]
fn constant_volatility_leaves_prior() {
    let m = SvModel::cauchy(0.8, 1.0, 0.0, default_v_coeffs(4), 1.0, 1.0, 1.0).unwrap();
    let prior = m.pdf_x1.clone();
    let (post, c_t) = update(&prior, 0.5, &m, &tol()).unwrap();
    for x in [-2.0, 0.0, 1.0] {
        assert!((post.pdf(x).unwrap() - prior.pdf(x).unwrap()).abs() < 1e-15);
    }
    let want = m.pdf_u.pdf(0.5 / 1.1).unwrap() / 1.1;
    assert!((c_t - want).abs() < 1e-14);
}

#[test]
fn toy_step_is_a_density() {
    let f = Filter::new(
        toy(),
        FilterOptions {
            forecasts: false,
            ..Default::default()
        },
    )
    .unwrap();
    let (st, rec) = f.step(&f.init(), 1.3).unwrap();
    assert!(rec.c_t > 0.0);
    assert_eq!(rec.k_post, 6);
    assert_eq!(rec.k_next, 2);
    let p = &st.predictive;
    assert!((p.norm_const() - 1.0).abs() < 1e-12);
    for i in 0..400 {
        let x = -20.0 + 40.0 * i as f64 / 399.0;
        assert!(p.pdf(x).unwrap() >= 0.0);
    }
}

#[test]
fn symmetric_prediction() {
    let m = default_model();
    let post = m.pdf_x1.clone();
    let pred = predict(&post, &m, &tol()).unwrap();
    assert_eq!(pred.codegree(), 10);
    for x in [0.3, 1.0, 2.5, 7.0] {
        let a = pred.pdf(x).unwrap();
        assert!((a - pred.pdf(-x).unwrap()).abs() < 1e-12 * a);
    }
    let (_, c_t) = (0, pred.norm_const());
    assert!((c_t - 1.0).abs() < 1e-14);
}

#[test]
fn empty_series() {
    let f = Filter::new(default_model(), FilterOptions::default()).unwrap();
    let out = f.run(&[]).unwrap();
    assert_eq!(out.loglik, 0.0);
    assert!(out.records.is_empty());
}

#[test]
fn forecasts_need_moments() {
    let err = Filter::new(toy(), FilterOptions::default()).err().unwrap();
    assert!(err.is_config());
    let err = Filter::new(
        default_model(),
        FilterOptions {
            tau: Some(1.0),
            ..Default::default()
        },
    )
    .err()
    .unwrap();
    assert!(err.is_config());
}

#[test]
fn short_run_with_reduction() {
    let f = Filter::new(
        default_model(),
        FilterOptions {
            compare_full: true,
            verify_codegree: true,
            ..Default::default()
        },
    )
    .unwrap();
    let ys = [0.5, -1.2, 3.0, 0.0, 0.8];
    let out = f.run(&ys).unwrap();
    for r in &out.records {
        let m = r.measured.as_ref().unwrap();
        assert_eq!(m.predictive, r.k_pred);
        assert_eq!(m.posterior, r.k_post);
        assert_eq!(r.k_post, r.k_pred + 4);
        assert_eq!(m.next_full, r.k_next);
        assert_eq!(m.next_reduced, r.k_next);
        assert!(r.m_reduced >= 5 && r.m_reduced <= r.n_full);
        let c = r.comparison.as_ref().unwrap();
        eprintln!("t={} n={} m={} bound={:e} dx={:e} dv={:e}", r.t, r.n_full, r.m_reduced, r.bound,
            (c.mean_x_full - c.mean_x_reduced).abs(), (c.mean_v_full - c.mean_v_reduced).abs() / c.mean_v_full);
        assert!(r.forecast_abs_y.unwrap() > 0.0);
    }
}
