//! Independent reference implementations used as test oracles. Nothing here
//! calls into the crate's numerical code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

/// Lanczos approximation (g = 7, n = 9), accurate to ~1e-15 relative.
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn t_pdf(x: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

pub fn chi2_pdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = df / 2.0;
    ((k - 1.0) * x.ln() - x / 2.0 - k * 2f64.ln() - ln_gamma(k)).exp()
}

pub fn f_pdf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_b = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
    (0.5 * d1 * (d1 / d2).ln() + (0.5 * d1 - 1.0) * x.ln() - 0.5 * (d1 + d2) * (1.0 + d1 * x / d2).ln() - ln_b).exp()
}

/// Lower CDF of a density supported on `[0, inf)`, integrating in `u = sqrt(t)`
/// so that integrable singularities at 0 disappear.
pub fn positive_cdf(pdf: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    integrate(&|u: f64| 2.0 * u * pdf(u * u), 0.0, x.sqrt(), 1e-14)
}

/// Lower CDF of a symmetric density about 0.
pub fn symmetric_cdf(pdf: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let half = integrate(pdf, 0.0, x.abs(), 1e-14);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| solve(a.to_vec(), (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()))
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Least squares through the normal equations. `rows` excludes the
/// intercept, which is added. Returns (coefficients, RSS, standard errors).
pub fn ols_normal_equations(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64, Vec<f64>) {
    let n = rows.len();
    let p = rows[0].len() + 1;
    let design: Vec<Vec<f64>> = rows.iter().map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect()).collect();
    let xtx: Vec<Vec<f64>> =
        (0..p).map(|a| (0..p).map(|b| (0..n).map(|i| design[i][a] * design[i][b]).sum()).collect()).collect();
    let xty: Vec<f64> = (0..p).map(|a| (0..n).map(|i| design[i][a] * y[i]).sum()).collect();
    let beta = solve(xtx.clone(), xty);
    let rss: f64 = (0..n)
        .map(|i| {
            let fit: f64 = (0..p).map(|a| design[i][a] * beta[a]).sum();
            (y[i] - fit).powi(2)
        })
        .sum();
    let sigma2 = rss / (n - p) as f64;
    let inv = invert(&xtx);
    let se = (0..p).map(|a| (sigma2 * inv[a][a]).sqrt()).collect();
    (beta, rss, se)
}

/// Cox partial log-likelihood by direct enumeration of risk sets.
pub fn naive_cox_loglik(rows: &[Vec<f64>], time: &[f64], status: &[bool], beta: &[f64], efron: bool) -> f64 {
    let eta: Vec<f64> = rows.iter().map(|r| r.iter().zip(beta).map(|(a, b)| a * b).sum()).collect();
    let mut distinct: Vec<f64> = time.iter().enumerate().filter(|&(i, _)| status[i]).map(|(_, &t)| t).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut ll = 0.0;
    for t in distinct {
        let deaths: Vec<usize> = (0..time.len()).filter(|&i| status[i] && time[i] == t).collect();
        let risk: f64 = (0..time.len()).filter(|&i| time[i] >= t).map(|i| eta[i].exp()).sum();
        let tied: f64 = deaths.iter().map(|&i| eta[i].exp()).sum();
        let d = deaths.len() as f64;
        for (k, &i) in deaths.iter().enumerate() {
            ll += eta[i];
            let denom = if efron { risk - (k as f64 / d) * tied } else { risk };
            ll -= denom.ln();
        }
    }
    ll
}

pub fn binomial_sum(n: usize, kmax: usize) -> u128 {
    let choose = |n: usize, k: usize| -> u128 {
        let mut c = 1u128;
        for i in 0..k {
            c = c * (n - i) as u128 / (i + 1) as u128;
        }
        c
    };
    (1..=kmax.min(n)).map(|k| choose(n, k)).sum()
}

/// A model term in the oracle's own vocabulary: (kind, a, b) with kind 0 =
/// main, 1 = square, 2 = interaction.
pub type OracleTerm = (u8, usize, usize);

pub fn oracle_value(t: OracleTerm, row: &[f64]) -> f64 {
    match t.0 {
        0 => row[t.1],
        1 => row[t.1] * row[t.1],
        _ => row[t.1] * row[t.2],
    }
}

/// Add the main effects of any interaction; sorted, deduplicated.
pub fn oracle_close(terms: &[OracleTerm]) -> Vec<OracleTerm> {
    let mut out = terms.to_vec();
    for t in terms {
        if t.0 == 2 {
            out.push((0, t.1, 0));
            out.push((0, t.2, 0));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Brute-force Gaussian confidence set: every subset of at most `size`
/// terms by bitmask, F test against the full model, p-value by quadrature.
/// Returns the closed models kept, each with the p-values of all kept
/// subsets closing to it.
pub fn oracle_gaussian_set(
    rows: &[Vec<f64>],
    y: &[f64],
    comp: &[OracleTerm],
    signif: f64,
    size: usize,
) -> std::collections::BTreeMap<Vec<OracleTerm>, Vec<(Vec<OracleTerm>, f64)>> {
    let n = rows.len();
    let design = |terms: &[OracleTerm]| -> Vec<Vec<f64>> {
        rows.iter().map(|r| terms.iter().map(|&t| oracle_value(t, r)).collect()).collect()
    };
    let (_, rss_full, _) = ols_normal_equations(&design(comp), y);
    let k = comp.len();
    let df2 = (n - k - 1) as f64;
    let mut out: std::collections::BTreeMap<Vec<OracleTerm>, Vec<(Vec<OracleTerm>, f64)>> = Default::default();
    for mask in 1u32..(1 << k) {
        let m = mask.count_ones() as usize;
        if m > size {
            continue;
        }
        let sub: Vec<OracleTerm> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| comp[i]).collect();
        let p = if m == k {
            1.0
        } else {
            let (_, rss, _) = ols_normal_equations(&design(&sub), y);
            let df1 = (k - m) as f64;
            let f = ((rss - rss_full) / df1) / (rss_full / df2);
            1.0 - positive_cdf(&|t| f_pdf(t, df1, df2), f.max(0.0))
        };
        if p >= signif {
            out.entry(oracle_close(&sub)).or_default().push((sub, p));
        }
    }
    out
}
