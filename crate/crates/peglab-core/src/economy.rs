//! Parametric economy curves and their build-time validation.
//!
//! Every curve family is fixed-form with free parameters; `Economy::build`
//! checks declared monotonicity and bounds on a dense grid so downstream code
//! can rely on them without re-checking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::linspace;

/// Grid density used by build-time monotonicity checks, per axis.
const VALIDATION_GRID: usize = 101;
/// Slack for "does not move the wrong way" comparisons on the grid.
const MONO_TOL: f64 = 1e-12;
/// Absolute tolerance for the coin-supply identity `D_L + sum(D_u) = T_s`.
const SUPPLY_IDENT_TOL: f64 = 1e-9;

/// Collateral-ratio family `r_c(Q, theta)`: user-side over system-side
/// collateral price, falling in redemption demand `Q` and rising in
/// fundamentals `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RatioFamily {
    /// `theta * (1 - alpha * Q / T_s)`, `alpha` in `[0, 1]`. `alpha = 0`
    /// models robust collateral whose price ignores redemption volume.
    Linear { alpha: f64 },
    /// `theta * exp(-k * Q / T_s)`, `k >= 0`.
    Exponential { k: f64 },
}

/// Free parameters for one economy. See `Economy` for the curve meanings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    /// Market impact of sold quantity: `p(M) = 1 - beta * M / T_s`, `beta` in `(0, 1]`.
    pub price_beta: f64,
    /// No-intervention price `e(theta)`: linear from `e_min` at `theta_min`
    /// to `e_max` at `theta_max`, with `e_max < 1`.
    pub e_min: f64,
    pub e_max: f64,
    pub ratio: RatioFamily,
    /// Crypto reserve value `V_c(theta) = reserve_v0 * theta`.
    pub reserve_v0: f64,
    /// Over-collateralization estimate `o(theta) = max(0, over_o0 * theta)`.
    pub over_o0: f64,
    /// Holding incentive `i(x) = (1 + incentive_rate) * x`, rate `>= 0`.
    pub incentive_rate: f64,
    /// Liquidation demand ramp: `D_L(theta) = T_s` at `theta_min`, falling
    /// linearly to zero at `liquidation_theta_l`. A value `<= theta_min`
    /// disables liquidation entirely.
    pub liquidation_theta_l: f64,
    /// Number of debtor users splitting the non-liquidated debt equally.
    pub n_debtors: u32,
}

impl Default for EconomyConfig {
    fn default() -> Self {
        EconomyConfig {
            theta_min: 0.5,
            theta_max: 3.0,
            price_beta: 0.5,
            e_min: 0.1,
            e_max: 0.9,
            ratio: RatioFamily::Linear { alpha: 0.5 },
            reserve_v0: 2.0,
            over_o0: 1.25,
            incentive_rate: 0.0,
            liquidation_theta_l: 1.0,
            n_debtors: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconomyError {
    #[error("{function}: expected {requirement}, but f({x0}) = {f0} vs f({x1}) = {f1}")]
    Monotonicity {
        function: &'static str,
        requirement: &'static str,
        x0: f64,
        x1: f64,
        f0: f64,
        f1: f64,
    },
    #[error("{function}: {message}")]
    Parameter { function: &'static str, message: String },
    #[error("{function}: value {value} at {x} breaks bound {bound}")]
    Bound { function: &'static str, x: f64, value: f64, bound: &'static str },
    #[error("supply identity broken at theta = {theta}: D_L + sum(D_u) = {got}, expected {expected}")]
    SupplyIdentity { theta: f64, got: f64, expected: f64 },
}

/// Validated economy. All curve methods are total over their documented
/// domains; invariants were grid-checked by `build`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Economy {
    cfg: EconomyConfig,
    total_supply: f64,
}

impl Economy {
    /// Validates `cfg` against the declared shape requirements and returns the
    /// economy, or every violation found.
    pub fn build(cfg: EconomyConfig, total_supply: f64) -> Result<Economy, Vec<EconomyError>> {
        let mut errs = Vec::new();
        let param = |errs: &mut Vec<EconomyError>, function, message: String| {
            errs.push(EconomyError::Parameter { function, message });
        };

        if !(total_supply.is_finite() && total_supply > 0.0) {
            param(&mut errs, "total_supply", format!("must be positive, got {total_supply}"));
        }
        if !(cfg.theta_min.is_finite() && cfg.theta_min > 0.0) {
            param(&mut errs, "theta", format!("theta_min must be positive, got {}", cfg.theta_min));
        }
        if !(cfg.theta_max.is_finite() && cfg.theta_max > cfg.theta_min) {
            param(
                &mut errs,
                "theta",
                format!("theta_max {} must exceed theta_min {}", cfg.theta_max, cfg.theta_min),
            );
        }
        if !(cfg.price_beta > 0.0 && cfg.price_beta <= 1.0) {
            param(&mut errs, "p", format!("beta must lie in (0, 1], got {}", cfg.price_beta));
        }
        if !(cfg.e_min > 0.0 && cfg.e_min < cfg.e_max) {
            param(&mut errs, "e", format!("need 0 < e_min < e_max, got {} vs {}", cfg.e_min, cfg.e_max));
        }
        if cfg.e_max >= 1.0 {
            param(&mut errs, "e", format!("e_max must stay below 1, got {}", cfg.e_max));
        }
        match cfg.ratio {
            RatioFamily::Linear { alpha } => {
                if !(0.0..=1.0).contains(&alpha) {
                    param(&mut errs, "r_c", format!("alpha must lie in [0, 1], got {alpha}"));
                }
            }
            RatioFamily::Exponential { k } => {
                if !(k.is_finite() && k >= 0.0) {
                    param(&mut errs, "r_c", format!("k must be nonnegative, got {k}"));
                }
            }
        }
        if !(cfg.reserve_v0 > 0.0 && cfg.reserve_v0.is_finite()) {
            param(&mut errs, "V_c", format!("reserve_v0 must be positive, got {}", cfg.reserve_v0));
        }
        if !(cfg.over_o0 >= 0.0 && cfg.over_o0.is_finite()) {
            param(&mut errs, "o", format!("over_o0 must be nonnegative, got {}", cfg.over_o0));
        }
        if !(cfg.incentive_rate >= 0.0 && cfg.incentive_rate.is_finite()) {
            param(
                &mut errs,
                "i",
                format!("incentive_rate must be nonnegative, got {}", cfg.incentive_rate),
            );
        }
        if cfg.n_debtors == 0 {
            param(&mut errs, "D_u", "n_debtors must be at least 1".to_string());
        }
        if !errs.is_empty() {
            return Err(errs);
        }

        let econ = Economy { cfg, total_supply };
        econ.check_grid(&mut errs);
        if errs.is_empty() {
            Ok(econ)
        } else {
            Err(errs)
        }
    }

    /// Grid checks for shape requirements that parameter checks alone do not
    /// pin down. Strictness: `p` strictly decreasing, `e` and `V_c` strictly
    /// increasing; `r_c` must not rise in `Q` nor fall in `theta` (constancy
    /// is allowed so alpha = 0 / k = 0 collateral stays expressible);
    /// `i` nondecreasing with `i(x) >= x`; `D_L` nonincreasing in `[0, T_s]`.
    fn check_grid(&self, errs: &mut Vec<EconomyError>) {
        let ts = self.total_supply;
        let thetas = linspace(self.cfg.theta_min, self.cfg.theta_max, VALIDATION_GRID);
        let ms = linspace(0.0, ts, VALIDATION_GRID);

        for w in ms.windows(2) {
            let (f0, f1) = (self.price(w[0]), self.price(w[1]));
            if f1 >= f0 {
                errs.push(EconomyError::Monotonicity {
                    function: "p",
                    requirement: "strictly decreasing in M",
                    x0: w[0],
                    x1: w[1],
                    f0,
                    f1,
                });
                break;
            }
        }
        for m in [0.0, 0.5 * ts, ts] {
            let p = self.price(m);
            if !(0.0..=1.0).contains(&p) {
                errs.push(EconomyError::Bound { function: "p", x: m, value: p, bound: "[0, 1]" });
            }
        }

        for w in thetas.windows(2) {
            let (f0, f1) = (self.e(w[0]), self.e(w[1]));
            if f1 <= f0 {
                errs.push(EconomyError::Monotonicity {
                    function: "e",
                    requirement: "strictly increasing in theta",
                    x0: w[0],
                    x1: w[1],
                    f0,
                    f1,
                });
                break;
            }
        }
        if self.e(self.cfg.theta_max) >= 1.0 {
            errs.push(EconomyError::Bound {
                function: "e",
                x: self.cfg.theta_max,
                value: self.e(self.cfg.theta_max),
                bound: "< 1",
            });
        }

        'ratio_q: for &theta in &[self.cfg.theta_min, midpoint(&thetas), self.cfg.theta_max] {
            let qs = linspace(0.0, ts, VALIDATION_GRID);
            for w in qs.windows(2) {
                let (f0, f1) = (self.ratio(w[0], theta), self.ratio(w[1], theta));
                if f1 > f0 + MONO_TOL {
                    errs.push(EconomyError::Monotonicity {
                        function: "r_c",
                        requirement: "nonincreasing in Q",
                        x0: w[0],
                        x1: w[1],
                        f0,
                        f1,
                    });
                    break 'ratio_q;
                }
            }
        }
        'ratio_t: for &q in &[0.0, 0.5 * ts, ts] {
            for w in thetas.windows(2) {
                let (f0, f1) = (self.ratio(q, w[0]), self.ratio(q, w[1]));
                if f1 < f0 - MONO_TOL {
                    errs.push(EconomyError::Monotonicity {
                        function: "r_c",
                        requirement: "nondecreasing in theta",
                        x0: w[0],
                        x1: w[1],
                        f0,
                        f1,
                    });
                    break 'ratio_t;
                }
            }
        }

        for w in thetas.windows(2) {
            let (f0, f1) = (self.reserve_value(w[0]), self.reserve_value(w[1]));
            if f1 <= f0 {
                errs.push(EconomyError::Monotonicity {
                    function: "V_c",
                    requirement: "strictly increasing in theta",
                    x0: w[0],
                    x1: w[1],
                    f0,
                    f1,
                });
                break;
            }
        }

        for w in thetas.windows(2) {
            let (f0, f1) = (self.over_value(w[0]), self.over_value(w[1]));
            if f1 < f0 - MONO_TOL {
                errs.push(EconomyError::Monotonicity {
                    function: "o",
                    requirement: "nondecreasing in theta",
                    x0: w[0],
                    x1: w[1],
                    f0,
                    f1,
                });
                break;
            }
        }

        let xs = linspace(0.0, 2.0, VALIDATION_GRID);
        for &x in &xs {
            if self.incentive(x) < x - MONO_TOL {
                errs.push(EconomyError::Bound {
                    function: "i",
                    x,
                    value: self.incentive(x),
                    bound: "i(x) >= x",
                });
                break;
            }
        }
        for w in xs.windows(2) {
            let (f0, f1) = (self.incentive(w[0]), self.incentive(w[1]));
            if f1 < f0 - MONO_TOL {
                errs.push(EconomyError::Monotonicity {
                    function: "i",
                    requirement: "nondecreasing",
                    x0: w[0],
                    x1: w[1],
                    f0,
                    f1,
                });
                break;
            }
        }

        for w in thetas.windows(2) {
            let (f0, f1) = (self.liquidation_demand(w[0]), self.liquidation_demand(w[1]));
            if f1 > f0 + MONO_TOL {
                errs.push(EconomyError::Monotonicity {
                    function: "D_L",
                    requirement: "nonincreasing in theta",
                    x0: w[0],
                    x1: w[1],
                    f0,
                    f1,
                });
                break;
            }
        }
        for &theta in &thetas {
            let dl = self.liquidation_demand(theta);
            if !(0.0..=ts + MONO_TOL).contains(&dl) {
                errs.push(EconomyError::Bound {
                    function: "D_L",
                    x: theta,
                    value: dl,
                    bound: "[0, T_s]",
                });
                break;
            }
        }
        for w in thetas.windows(2) {
            let (f0, f1) = (self.debtor_debt(w[0]), self.debtor_debt(w[1]));
            if f1 < f0 - MONO_TOL {
                errs.push(EconomyError::Monotonicity {
                    function: "D_u",
                    requirement: "nondecreasing in theta",
                    x0: w[0],
                    x1: w[1],
                    f0,
                    f1,
                });
                break;
            }
        }
        for &theta in &thetas {
            let got = self.liquidation_demand(theta)
                + self.cfg.n_debtors as f64 * self.debtor_debt(theta);
            if (got - ts).abs() > SUPPLY_IDENT_TOL {
                errs.push(EconomyError::SupplyIdentity { theta, got, expected: ts });
                break;
            }
        }
    }

    pub fn config(&self) -> &EconomyConfig {
        &self.cfg
    }

    pub fn total_supply(&self) -> f64 {
        self.total_supply
    }

    pub fn theta_min(&self) -> f64 {
        self.cfg.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.cfg.theta_max
    }

    /// Market price after `m` coins are offered for sale.
    pub fn price(&self, m: f64) -> f64 {
        1.0 - self.cfg.price_beta * m / self.total_supply
    }

    /// Price the coin would trade at with the peg mechanism switched off.
    pub fn e(&self, theta: f64) -> f64 {
        let t = (theta - self.cfg.theta_min) / (self.cfg.theta_max - self.cfg.theta_min);
        self.cfg.e_min + (self.cfg.e_max - self.cfg.e_min) * t
    }

    /// Collateral price ratio paid per redeemed coin.
    pub fn ratio(&self, q: f64, theta: f64) -> f64 {
        match self.cfg.ratio {
            RatioFamily::Linear { alpha } => theta * (1.0 - alpha * q / self.total_supply),
            RatioFamily::Exponential { k } => theta * (-k * q / self.total_supply).exp(),
        }
    }

    /// Value of the crypto reserve backing redemption.
    pub fn reserve_value(&self, theta: f64) -> f64 {
        self.cfg.reserve_v0 * theta
    }

    /// System estimate of collateral value per over-collateralized coin.
    pub fn over_value(&self, theta: f64) -> f64 {
        (self.cfg.over_o0 * theta).max(0.0)
    }

    /// Incentive-adjusted value of a held claim.
    pub fn incentive(&self, x: f64) -> f64 {
        (1.0 + self.cfg.incentive_rate) * x
    }

    /// Redemption demand created by ongoing liquidations.
    pub fn liquidation_demand(&self, theta: f64) -> f64 {
        let tl = self.cfg.liquidation_theta_l;
        if tl <= self.cfg.theta_min {
            return 0.0;
        }
        let frac = ((tl - theta) / (tl - self.cfg.theta_min)).clamp(0.0, 1.0);
        self.total_supply * frac
    }

    /// Debt of one good debtor; the non-liquidated supply split equally.
    pub fn debtor_debt(&self, theta: f64) -> f64 {
        (self.total_supply - self.liquidation_demand(theta)) / self.cfg.n_debtors as f64
    }
}

fn midpoint(xs: &[f64]) -> f64 {
    xs[xs.len() / 2]
}
