//! Peg-deviation metrics: root-mean-square distance of a price series from a
//! point target or a tolerance band, plus the downward-only variants that
//! ignore trading above the peg.

use serde::{Deserialize, Serialize};

use super::StatsError;

/// What "on peg" means for a series: an exact level or a band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Point { target: f64 },
    Band { lo: f64, hi: f64 },
}

impl Target {
    pub fn peg() -> Target {
        Target::Point { target: 1.0 }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        match *self {
            Target::Point { target } if target.is_finite() => Ok(()),
            Target::Point { target } => Err(StatsError::NonFinite { value: target }),
            Target::Band { lo, hi } if lo.is_finite() && hi.is_finite() && lo < hi => Ok(()),
            Target::Band { lo, hi } => Err(StatsError::BadBand { lo, hi }),
        }
    }

    /// Signed deviation of one price: distance to the point, or distance to
    /// the nearest band edge (zero inside the band).
    pub fn deviation(&self, price: f64) -> f64 {
        match *self {
            Target::Point { target } => price - target,
            Target::Band { lo, hi } => {
                if price < lo {
                    price - lo
                } else if price > hi {
                    price - hi
                } else {
                    0.0
                }
            }
        }
    }
}

/// Downward part of the deviation: how far the price sits below the target
/// (or band floor), zero otherwise. Always <= 0.
pub fn shortfall(price: f64, target: &Target) -> f64 {
    match *target {
        Target::Point { target } => (price - target).min(0.0),
        Target::Band { lo, .. } => (price - lo).min(0.0),
    }
}

/// Caps a series from above: values over `cap` are replaced by `cap`, values
/// at or below pass through. Run on both price and redemption-value series
/// before correlating them, so that premiums above the peg do not register
/// as co-movement.
pub fn downward_clip(values: &[f64], cap: f64) -> Vec<f64> {
    values.iter().map(|v| v.min(cap)).collect()
}

fn rms(devs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for d in devs {
        sum += d * d;
        n += 1;
    }
    (sum / n as f64).sqrt()
}

fn check_prices(prices: &[f64]) -> Result<(), StatsError> {
    if prices.is_empty() {
        return Err(StatsError::EmptySeries);
    }
    if let Some(p) = prices.iter().find(|p| !p.is_finite()) {
        return Err(StatsError::NonFinite { value: *p });
    }
    Ok(())
}

/// Root-mean-square deviation of `prices` from `target`.
pub fn price_deviation(prices: &[f64], target: &Target) -> Result<f64, StatsError> {
    check_prices(prices)?;
    target.validate()?;
    Ok(rms(prices.iter().map(|p| target.deviation(*p))))
}

/// Root-mean-square of the downward-clipped deviations: volatility above the
/// peg does not count against the coin.
pub fn downward_deviation(prices: &[f64], target: &Target) -> Result<f64, StatsError> {
    check_prices(prices)?;
    target.validate()?;
    Ok(rms(prices.iter().map(|p| shortfall(*p, target))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_offset_is_its_own_rms() {
        assert_eq!(price_deviation(&[1.0, 1.0, 1.0], &Target::peg()).unwrap(), 0.0);
        let prices = vec![0.99; 40];
        let d = price_deviation(&prices, &Target::peg()).unwrap();
        assert!((d - 0.01).abs() < 1e-15);
    }

    #[test]
    fn mixed_series_averages_squared_deviations() {
        // One of two points off by 0.01: RMS = sqrt(5e-5).
        let prices = [1.0, 0.99];
        let d = price_deviation(&prices, &Target::peg()).unwrap();
        assert!((d - 5e-5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn band_only_counts_excursions() {
        let band = Target::Band { lo: 0.9933, hi: 1.0033 };
        let inside = [0.995, 1.0, 1.003];
        assert_eq!(price_deviation(&inside, &band).unwrap(), 0.0);
        // One of two points 0.001 below the floor: RMS = sqrt(5e-7).
        let prices = [1.0, 0.9923];
        let d = price_deviation(&prices, &band).unwrap();
        assert!((d - 5e-7_f64.sqrt()).abs() < 1e-15);
        // Same distance above the ceiling scores the same.
        let d = price_deviation(&[1.0, 1.0043], &band).unwrap();
        assert!((d - 5e-7_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn downward_ignores_premiums() {
        assert_eq!(downward_deviation(&[1.0, 1.02], &Target::peg()).unwrap(), 0.0);
        let prices = [1.02, 1.0, 0.99];
        let d = downward_deviation(&prices, &Target::peg()).unwrap();
        assert!((d - (1e-4_f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(shortfall(1.05, &Target::peg()), 0.0);
        assert!((shortfall(0.95, &Target::peg()) + 0.05).abs() < 1e-15);
        let band = Target::Band { lo: 0.9933, hi: 1.0033 };
        assert_eq!(shortfall(0.995, &band), 0.0);
        assert!((shortfall(0.99, &band) + 0.0033).abs() < 1e-12);
    }

    #[test]
    fn clipping_is_idempotent() {
        let t = Target::peg();
        for p in [0.9, 0.99, 1.0, 1.01, 1.2] {
            let once = shortfall(p, &t);
            let twice = shortfall(1.0 + once, &t);
            assert!((once - twice).abs() < 1e-15);
        }
    }

    #[test]
    fn series_clip_caps_only_the_overshoots() {
        assert_eq!(downward_clip(&[0.9, 1.1], 1.0), vec![0.9, 1.0]);
        let under = [0.95, 1.0, 0.8];
        assert_eq!(downward_clip(&under, 1.0), under.to_vec());
        assert_eq!(downward_clip(&[], 1.0), Vec::<f64>::new());
    }

    #[test]
    fn input_validation() {
        assert!(matches!(price_deviation(&[], &Target::peg()), Err(StatsError::EmptySeries)));
        assert!(matches!(
            price_deviation(&[f64::NAN], &Target::peg()),
            Err(StatsError::NonFinite { .. })
        ));
        let bad = Target::Band { lo: 1.1, hi: 0.9 };
        assert!(matches!(price_deviation(&[1.0], &bad), Err(StatsError::BadBand { .. })));
    }
}
