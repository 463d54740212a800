mod common;

use approx::assert_relative_eq;
use common::*;
use modelsets::stats::{cox_partial_loglik, fit_cox, fit_least_squares, fit_logistic, lrt_pvalue, with_intercept, Distribution};
use modelsets::{Family, TieMethod};
use nalgebra::DMatrix;
use rand::Rng;

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

#[test]
fn normal_and_t_cdfs_match_quadrature() {
    for i in -24..=24 {
        let x = i as f64 * 0.25;
        let oracle = symmetric_cdf(&normal_pdf, x);
        let got = Distribution::Normal.cdf(x).unwrap();
        assert!((got - oracle).abs() < 1e-8, "normal at {x}: {got} vs {oracle}");
        assert!((Distribution::Normal.sf(x).unwrap() - (1.0 - oracle)).abs() < 1e-8);
    }
    for df in [1.0, 2.0, 5.0, 7.0, 30.0] {
        for i in -16..=16 {
            let x = i as f64 * 0.5;
            let oracle = symmetric_cdf(&|t| t_pdf(t, df), x);
            let got = Distribution::StudentT { df }.cdf(x).unwrap();
            assert!((got - oracle).abs() < 1e-8, "t{df} at {x}: {got} vs {oracle}");
        }
    }
}

#[test]
fn chi_squared_and_f_cdfs_match_quadrature() {
    let grid = [0.05, 0.2, 0.5, 1.0, 2.0, 3.841, 5.0, 10.0, 20.0];
    for df in [1.0, 2.0, 3.0, 10.0] {
        for &x in &grid {
            let oracle = positive_cdf(&|t| chi2_pdf(t, df), x);
            let d = Distribution::ChiSquared { df };
            assert!((d.cdf(x).unwrap() - oracle).abs() < 1e-8, "chi2({df}) at {x}");
            assert!((d.sf(x).unwrap() - (1.0 - oracle)).abs() < 1e-8);
        }
    }
    for (d1, d2) in [(1.0, 5.0), (2.0, 15.0), (5.0, 30.0), (10.0, 3.0)] {
        for &x in &grid {
            let oracle = positive_cdf(&|t| f_pdf(t, d1, d2), x);
            let d = Distribution::F { df1: d1, df2: d2 };
            assert!((d.cdf(x).unwrap() - oracle).abs() < 1e-8, "F({d1},{d2}) at {x}");
        }
    }
}

#[test]
fn tabulated_quantiles() {
    assert_relative_eq!(Distribution::StudentT { df: 7.0 }.cdf(1.8946).unwrap(), 0.95, epsilon = 1e-5);
    assert_relative_eq!(Distribution::ChiSquared { df: 1.0 }.sf(3.841).unwrap(), 0.05, epsilon = 1e-4);
    assert_relative_eq!(Distribution::Normal.two_sided(1.959963984540054).unwrap(), 0.05, epsilon = 1e-10);
}

#[test]
fn least_squares_matches_normal_equations() {
    let mut r = rng(11);
    for p in 1..=5 {
        let rows = normal_matrix(&mut r, 40, p);
        let y: Vec<f64> = rows.iter().map(|row| 2.0 + row[0] - 0.5 * row[p - 1] + r.random::<f64>()).collect();
        let (beta, rss, se) = ols_normal_equations(&rows, &y);
        let fit = fit_least_squares(&with_intercept(&to_matrix(&rows)), &y).unwrap();
        for k in 0..=p {
            assert_relative_eq!(fit.coefficients[k], beta[k], epsilon = 1e-9, max_relative = 1e-9);
            assert_relative_eq!(fit.standard_errors[k], se[k], epsilon = 1e-9, max_relative = 1e-9);
        }
        assert_relative_eq!(fit.objective, rss, max_relative = 1e-10);
        // t statistics and p-values follow from the oracle's numbers
        let df = (40 - p - 1) as f64;
        let t = beta[1] / se[1];
        let p_oracle = 2.0 * (1.0 - symmetric_cdf(&|u| t_pdf(u, df), t.abs()));
        assert!((fit.p_values[1] - p_oracle).abs() < 1e-8);
    }
}

#[test]
fn logistic_solves_the_score_equations() {
    let mut r = rng(12);
    let rows = normal_matrix(&mut r, 200, 2);
    let y: Vec<f64> = rows
        .iter()
        .map(|x| {
            let eta = -0.3 + 0.8 * x[0] - 0.5 * x[1];
            if r.random::<f64>() < 1.0 / (1.0 + (-eta).exp()) { 1.0 } else { 0.0 }
        })
        .collect();
    let fit = fit_logistic(&with_intercept(&to_matrix(&rows)), &y).unwrap();
    let b = &fit.coefficients;
    let design: Vec<Vec<f64>> = rows.iter().map(|x| vec![1.0, x[0], x[1]]).collect();
    let mu: Vec<f64> = design.iter().map(|d| 1.0 / (1.0 + (-(d[0] * b[0] + d[1] * b[1] + d[2] * b[2])).exp())).collect();
    for k in 0..3 {
        let score: f64 = (0..200).map(|i| design[i][k] * (y[i] - mu[i])).sum();
        assert!(score.abs() < 1e-7, "score {k} = {score}");
    }
    let info: Vec<Vec<f64>> = (0..3)
        .map(|a| (0..3).map(|c| (0..200).map(|i| design[i][a] * design[i][c] * mu[i] * (1.0 - mu[i])).sum()).collect())
        .collect();
    let cov = invert(&info);
    for k in 0..3 {
        assert_relative_eq!(fit.standard_errors[k], cov[k][k].sqrt(), max_relative = 1e-6);
    }
    let ll: f64 = (0..200).map(|i| if y[i] == 1.0 { mu[i].ln() } else { (1.0 - mu[i]).ln() }).sum();
    assert_relative_eq!(fit.objective, ll, max_relative = 1e-10);
}

fn survival_sample(seed: u64, n: usize, p: usize, tie_grid: Option<f64>) -> (Vec<Vec<f64>>, Vec<f64>, Vec<bool>) {
    let mut r = rng(seed);
    let rows = normal_matrix(&mut r, n, p);
    let mut time = Vec::new();
    let mut status = Vec::new();
    for x in &rows {
        let eta: f64 = 0.7 * x[0] - 0.4 * x.get(1).copied().unwrap_or(0.0);
        let u: f64 = r.random_range(1e-12..1.0);
        let mut t = -u.ln() / eta.exp();
        if let Some(g) = tie_grid {
            t = (t / g).ceil() * g;
        }
        let c = -r.random_range(1e-12..1.0f64).ln() / 0.2;
        time.push(t.min(c.max(1e-6)));
        status.push(t <= c);
    }
    (rows, time, status)
}

#[test]
fn cox_loglik_matches_risk_set_enumeration() {
    for (seed, grid) in [(1, None), (2, Some(0.25))] {
        let (rows, time, status) = survival_sample(seed, 60, 2, grid);
        let x = to_matrix(&rows);
        let mut r = rng(seed + 50);
        for _ in 0..5 {
            let beta = vec![r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            for (ties, efron) in [(TieMethod::Efron, true), (TieMethod::Breslow, false)] {
                let got = cox_partial_loglik(&x, &time, &status, &beta, ties).unwrap();
                let oracle = naive_cox_loglik(&rows, &time, &status, &beta, efron);
                assert_relative_eq!(got, oracle, max_relative = 1e-11);
            }
        }
    }
}

#[test]
fn cox_fit_maximizes_partial_likelihood() {
    let (rows, time, status) = survival_sample(3, 120, 2, Some(0.1));
    let fit = fit_cox(&to_matrix(&rows), &time, &status).unwrap();
    let ll = |b: &[f64]| naive_cox_loglik(&rows, &time, &status, b, true);
    let b = fit.coefficients.clone();
    assert_relative_eq!(fit.objective, ll(&b), max_relative = 1e-10);
    // Central-difference gradient vanishes and the curvature gives the SEs.
    let h = 1e-4;
    let mut hess = vec![vec![0.0; 2]; 2];
    for j in 0..2 {
        let mut up = b.clone();
        let mut dn = b.clone();
        up[j] += h;
        dn[j] -= h;
        let grad = (ll(&up) - ll(&dn)) / (2.0 * h);
        assert!(grad.abs() < 1e-5, "gradient {j} = {grad}");
        for k in 0..2 {
            let at = |dj: f64, dk: f64| {
                let mut v = b.clone();
                v[j] += dj;
                v[k] += dk;
                ll(&v)
            };
            hess[j][k] = -(at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
        }
    }
    let cov = invert(&hess);
    for j in 0..2 {
        assert_relative_eq!(fit.standard_errors[j], cov[j][j].sqrt(), max_relative = 1e-3);
    }
    // A coarse grid search never beats the fitted maximum.
    for i in -10..=10 {
        for k in -10..=10 {
            let probe = [b[0] + 0.05 * i as f64, b[1] + 0.05 * k as f64];
            assert!(ll(&probe) <= fit.objective + 1e-9);
        }
    }
}

#[test]
fn gaussian_lrt_is_the_nested_f_test() {
    let mut r = rng(14);
    let rows = normal_matrix(&mut r, 30, 3);
    let y: Vec<f64> = rows.iter().map(|x| 1.0 + x[0] + 0.3 * x[2] + r.random::<f64>()).collect();
    let sub_rows: Vec<Vec<f64>> = rows.iter().map(|x| vec![x[0]]).collect();
    let (_, rss1, _) = ols_normal_equations(&rows, &y);
    let (_, rss0, _) = ols_normal_equations(&sub_rows, &y);
    let f = ((rss0 - rss1) / 2.0) / (rss1 / 26.0);
    let oracle = 1.0 - positive_cdf(&|t| f_pdf(t, 2.0, 26.0), f);
    let comp = fit_least_squares(&with_intercept(&to_matrix(&rows)), &y).unwrap();
    let sub = fit_least_squares(&with_intercept(&to_matrix(&sub_rows)), &y).unwrap();
    let p = lrt_pvalue(&sub, &comp, Family::Gaussian, 30).unwrap();
    assert!((p - oracle).abs() < 1e-8, "{p} vs {oracle}");
}
