//! Welch's unequal-variance t-test for comparing two deviation samples.

use serde::{Deserialize, Serialize};

use super::special::t_two_sided_p;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestReport {
    pub t: f64,
    /// Welch-Satterthwaite effective degrees of freedom.
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
}

fn mean_var(xs: &[f64]) -> Result<(f64, f64), StatsError> {
    if xs.len() < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got: xs.len() });
    }
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite { value: *x });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var))
}

/// Welch's t-test; samples may differ in size and variance. Two samples with
/// no variance at all are either indistinguishable (t = 0, p = 1) or
/// trivially separated, which has no finite t statistic and is rejected.
pub fn welch_ttest(a: &[f64], b: &[f64]) -> Result<TTestReport, StatsError> {
    let (mean_a, var_a) = mean_var(a)?;
    let (mean_b, var_b) = mean_var(b)?;
    let (n_a, n_b) = (a.len() as f64, b.len() as f64);
    let sa = var_a / n_a;
    let sb = var_b / n_b;
    if sa + sb == 0.0 {
        if mean_a == mean_b {
            return Ok(TTestReport {
                t: 0.0,
                df: n_a + n_b - 2.0,
                p: 1.0,
                mean_a,
                mean_b,
                n_a: a.len(),
                n_b: b.len(),
            });
        }
        return Err(StatsError::DegenerateVariance);
    }
    let t = (mean_a - mean_b) / (sa + sb).sqrt();
    let df = (sa + sb) * (sa + sb) / (sa * sa / (n_a - 1.0) + sb * sb / (n_b - 1.0));
    Ok(TTestReport { t, df, p: t_two_sided_p(t, df), mean_a, mean_b, n_a: a.len(), n_b: b.len() })
}
