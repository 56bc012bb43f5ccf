//! Pearson correlation and a nested-OLS Granger causality test.

use serde::{Deserialize, Serialize};

use super::special::{f_upper_p, t_two_sided_p};
use super::StatsError;

/// A residual sum of squares below this counts as an exact fit.
const PERFECT_FIT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub r: f64,
    pub t: f64,
    /// Two-sided p-value of the no-correlation hypothesis.
    pub p: f64,
    pub n: usize,
}

/// Pearson correlation with the t-approximation p-value. A perfectly
/// correlated pair has an unbounded statistic; its p-value is zero.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationReport, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.len() < 3 {
        return Err(StatsError::InsufficientData { needed: 3, got: x.len() });
    }
    if let Some(v) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite { value: *v });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let denom = 1.0 - r * r;
    let (t, p) = if denom < 1e-15 {
        (f64::INFINITY.copysign(r), 0.0)
    } else {
        let t = r * ((n - 2.0) / denom).sqrt();
        (t, t_two_sided_p(t, n - 2.0))
    };
    Ok(CorrelationReport { r, t, p, n: x.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrangerReport {
    pub f: f64,
    /// Upper-tail p-value of the no-extra-predictive-power hypothesis.
    pub p: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
    /// Regression rows actually used (series length minus the lag window).
    pub n_rows: usize,
    /// The unrestricted model fit the data exactly; F is unbounded.
    pub perfect_fit: bool,
}

/// Ordinary least squares through the normal equations, returning the
/// residual sum of squares. `rows` holds the regressors per observation.
fn ols_rss(rows: &[Vec<f64>], y: &[f64]) -> Result<f64, StatsError> {
    let k = rows[0].len();
    // Build X'X and X'y.
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                xtx[i][j] += row[i] * row[j];
            }
            xty[i] += row[i] * yi;
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut a = xtx;
    let mut b = xty;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-12 {
            return Err(StatsError::SingularDesign);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        for row in (col + 1)..k {
            let factor = a[row][col] / pivot_row[col];
            for (aj, pj) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *aj -= factor * pj;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut beta = vec![0.0; k];
    for row in (0..k).rev() {
        let mut acc = b[row];
        for j in (row + 1)..k {
            acc -= a[row][j] * beta[j];
        }
        beta[row] = acc / a[row][row];
    }
    let mut rss = 0.0;
    for (row, &yi) in rows.iter().zip(y) {
        let fit: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        rss += (yi - fit) * (yi - fit);
    }
    Ok(rss)
}

/// Tests whether lagged values of `x` improve the prediction of `y` beyond
/// `y`'s own lags. The restricted model regresses y_t on an intercept and
/// y_{t-1..t-lag}; the unrestricted model adds x_{t-1..t-lag}. The F
/// statistic compares their residual sums of squares.
pub fn granger(x: &[f64], y: &[f64], lag: usize) -> Result<GrangerReport, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if lag == 0 {
        return Err(StatsError::BadLag { lag });
    }
    if let Some(v) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite { value: *v });
    }
    let n_rows = y.len().saturating_sub(lag);
    let df_den = n_rows as isize - 2 * lag as isize - 1;
    if df_den <= 0 {
        return Err(StatsError::InsufficientData {
            needed: 3 * lag + 2,
            got: y.len(),
        });
    }
    let df_den = df_den as usize;

    let mut restricted = Vec::with_capacity(n_rows);
    let mut unrestricted = Vec::with_capacity(n_rows);
    let mut target = Vec::with_capacity(n_rows);
    for t in lag..y.len() {
        let mut r_row = Vec::with_capacity(1 + lag);
        r_row.push(1.0);
        for j in 1..=lag {
            r_row.push(y[t - j]);
        }
        let mut u_row = r_row.clone();
        for j in 1..=lag {
            u_row.push(x[t - j]);
        }
        restricted.push(r_row);
        unrestricted.push(u_row);
        target.push(y[t]);
    }
    let rss_r = ols_rss(&restricted, &target)?;
    let rss_u = ols_rss(&unrestricted, &target)?;

    let perfect_fit = rss_u < PERFECT_FIT_TOL;
    let (f, p) = if perfect_fit {
        (f64::INFINITY, 0.0)
    } else {
        let f = (((rss_r - rss_u) / lag as f64) / (rss_u / df_den as f64)).max(0.0);
        (f, f_upper_p(f, lag as f64, df_den as f64))
    };
    Ok(GrangerReport {
        f,
        p,
        df_num: lag,
        df_den,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        n_rows,
        perfect_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_relation_pins_the_correlation() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = pearson(&x, &y).unwrap();
        assert_eq!(r.r, 1.0);
        assert_eq!(r.p, 0.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let rn = pearson(&x, &neg).unwrap();
        assert_eq!(rn.r, -1.0);
        assert_eq!(rn.p, 0.0);
    }

    #[test]
    fn hand_computed_correlation() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 1.0, 4.0, 3.0, 6.0];
        let r = pearson(&x, &y).unwrap();
        // cov = 2.5, var_x = 2.5, var_y = 3.7.
        assert!((r.r - 2.5 / 9.25_f64.sqrt()).abs() < 1e-12);
        assert!(r.p > 0.0 && r.p < 0.1);

        // One bent point: sxy = 6.5, sxx = 5, syy = 8.75.
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 2.0, 3.0, 5.0];
        let r = pearson(&x, &y).unwrap();
        assert!((r.r - 6.5 / 43.75_f64.sqrt()).abs() < 1e-12);
        assert!(r.r < 1.0 && r.p > 0.0);
    }

    #[test]
    fn correlation_is_affine_invariant() {
        let x = [0.3, 1.2, 0.8, 2.5, 1.9, 0.1];
        let y = [1.0, 0.4, 0.9, 2.2, 1.5, 0.3];
        let base = pearson(&x, &y).unwrap();
        let x2: Vec<f64> = x.iter().map(|v| 3.0 * v - 7.0).collect();
        let y2: Vec<f64> = y.iter().map(|v| 0.5 * v + 2.0).collect();
        let scaled = pearson(&x2, &y2).unwrap();
        assert!((base.r - scaled.r).abs() < 1e-12);
        assert!((base.p - scaled.p).abs() < 1e-12);
    }

    #[test]
    fn deterministic_lead_is_perfect_granger_cause() {
        // y copies x with a one-step delay; x is irregular enough that y's
        // own lag explains nothing exactly.
        let x = [1.0, 2.0, 4.0, 8.0, 3.0, 7.0, 2.0, 9.0];
        let y = [0.0, 1.0, 2.0, 4.0, 8.0, 3.0, 7.0, 2.0];
        let g = granger(&x, &y, 1).unwrap();
        assert!(g.perfect_fit);
        assert_eq!(g.f, f64::INFINITY);
        assert_eq!(g.p, 0.0);
        assert!(g.rss_restricted > 1.0);
    }

    #[test]
    fn unrelated_series_produce_a_finite_f() {
        let x = [0.3, -0.2, 0.5, 0.1, -0.4, 0.2, 0.0, 0.6, -0.1, 0.4];
        let y = [1.0, 2.0, 1.5, 3.0, 2.5, 4.0, 3.5, 5.0, 4.2, 5.5];
        let g = granger(&x, &y, 1).unwrap();
        assert!(g.f.is_finite());
        assert!(g.f >= 0.0);
        assert!(g.p > 0.0 && g.p <= 1.0);
        assert_eq!(g.n_rows, 9);
        assert_eq!(g.df_den, 6);
        assert!(g.rss_unrestricted <= g.rss_restricted + 1e-9);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let c = [1.0, 1.0, 1.0, 1.0];
        let y = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(pearson(&c, &y), Err(StatsError::DegenerateVariance)));
        assert!(matches!(granger(&y, &y[..3], 1), Err(StatsError::LengthMismatch { .. })));
        assert!(matches!(granger(&y, &y, 0), Err(StatsError::BadLag { .. })));
        // Constant regressor duplicated with the intercept: singular design.
        let x = [2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0];
        let yy = [1.0, 2.0, 1.5, 3.0, 2.5, 4.0, 3.5, 5.0];
        assert!(matches!(granger(&x, &yy, 1), Err(StatsError::SingularDesign)));
        // Constant effect series: its own lag duplicates the intercept.
        let flat = [3.0; 8];
        assert!(matches!(granger(&yy, &flat, 1), Err(StatsError::SingularDesign)));
    }

    #[test]
    fn white_noise_shows_no_causality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let x: Vec<f64> = (0..500).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..500).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = granger(&x, &y, 1).unwrap();
        assert!(g.f.is_finite() && g.f >= 0.0);
        assert!(g.p > 0.05, "independent draws flagged as causal: p = {}", g.p);
    }

    #[test]
    fn planted_lag_dependence_is_detected() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let cause: Vec<f64> = (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut effect = vec![0.0];
        for t in 1..cause.len() {
            effect.push(0.9 * cause[t - 1] + rng.gen_range(-0.01..0.01));
        }
        let g = granger(&cause, &effect, 1).unwrap();
        assert!(g.f > 100.0, "planted dependence missed: F = {}", g.f);
        assert!(g.p < 0.01);
    }

    #[test]
    fn short_series_cannot_support_the_lag() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(granger(&x, &x, 1), Err(StatsError::InsufficientData { .. })));
    }
}
