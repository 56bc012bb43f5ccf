//! Redemption designs, per-coin redemption value, and the one-shot payoff of
//! a single user's action.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::Economy;

/// Tolerance when testing which side of a reserve-exhaustion branch a
/// redemption volume falls on, so float noise cannot flip the branch.
pub const BRANCH_TOL: f64 = 1e-12;

/// The five redemption designs. They differ only in what one redeemed coin
/// pays out; market structure is shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Design {
    /// Fiat reserve covering the whole supply.
    FiatFull,
    /// Fiat reserve strictly smaller than the supply.
    FiatPartial,
    /// Crypto reserve of value `V_c(theta)`; payouts in collateral at `r_c`.
    Crypto,
    /// No reserve; redemption mints collateral at `r_c` without limit.
    Algo,
    /// Debtor-collateralized: redemption seizes over-collateralized debt,
    /// available only while liquidations run or to good debtors.
    Over,
}

impl Design {
    pub const ALL: [Design; 5] =
        [Design::FiatFull, Design::FiatPartial, Design::Crypto, Design::Algo, Design::Over];

    pub fn label(self) -> &'static str {
        match self {
            Design::FiatFull => "fiat_full",
            Design::FiatPartial => "fiat_partial",
            Design::Crypto => "crypto",
            Design::Algo => "algo",
            Design::Over => "over",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("theta = {theta} outside [{lo}, {hi}]")]
    InvalidTheta { theta: f64, lo: f64, hi: f64 },
    #[error("redemption volume Q = {q} outside [0, {total_supply}]")]
    InvalidQ { q: f64, total_supply: f64 },
    #[error("sale volume M = {m} outside [0, {total_supply}]")]
    InvalidM { m: f64, total_supply: f64 },
    #[error("{design:?}: {message}")]
    BadFiatReserve { design: Design, message: String },
}

/// A design plus the reserve it was instantiated with, validated against the
/// coin supply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StablecoinSpec {
    design: Design,
    fiat_reserve: Option<f64>,
    total_supply: f64,
}

impl StablecoinSpec {
    /// `fiat_reserve` is required for the fiat designs (`>= T_s` for full
    /// backing, in `(0, T_s)` for partial) and must be absent otherwise.
    pub fn new(
        design: Design,
        fiat_reserve: Option<f64>,
        total_supply: f64,
    ) -> Result<StablecoinSpec, ModelError> {
        let bad = |message: String| ModelError::BadFiatReserve { design, message };
        if !(total_supply.is_finite() && total_supply > 0.0) {
            return Err(bad(format!("total supply must be positive, got {total_supply}")));
        }
        match (design, fiat_reserve) {
            (Design::FiatFull, Some(v)) if v >= total_supply => {}
            (Design::FiatFull, Some(v)) => {
                return Err(bad(format!("full backing needs reserve >= {total_supply}, got {v}")));
            }
            (Design::FiatPartial, Some(v)) if v > 0.0 && v < total_supply => {}
            (Design::FiatPartial, Some(v)) => {
                return Err(bad(format!(
                    "partial backing needs reserve in (0, {total_supply}), got {v}"
                )));
            }
            (Design::FiatFull | Design::FiatPartial, None) => {
                return Err(bad("fiat design needs a fiat reserve".to_string()));
            }
            (_, Some(v)) => {
                return Err(bad(format!("non-fiat design cannot hold a fiat reserve ({v})")));
            }
            (_, None) => {}
        }
        Ok(StablecoinSpec { design, fiat_reserve, total_supply })
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn fiat_reserve(&self) -> Option<f64> {
        self.fiat_reserve
    }

    pub fn total_supply(&self) -> f64 {
        self.total_supply
    }
}

/// What a user can do with a coin in the one-shot game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Sell,
    Redeem,
    Hold,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Sell, Action::Redeem, Action::Hold];
}

/// Role-dependent redemption eligibility. Only the `Over` design reads it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UserContext {
    pub is_good_debtor: bool,
}

impl UserContext {
    pub fn non_debtor() -> UserContext {
        UserContext { is_good_debtor: false }
    }

    pub fn good_debtor() -> UserContext {
        UserContext { is_good_debtor: true }
    }
}

/// Next-period quantities a holder expects: sale volume `m_prime` and
/// redemption value `v_prime`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Future {
    pub m_prime: f64,
    pub v_prime: f64,
}

fn check_theta(econ: &Economy, theta: f64) -> Result<(), ModelError> {
    if theta.is_finite() && theta >= econ.theta_min() && theta <= econ.theta_max() {
        Ok(())
    } else {
        Err(ModelError::InvalidTheta { theta, lo: econ.theta_min(), hi: econ.theta_max() })
    }
}

fn check_volume(v: f64, total_supply: f64, is_q: bool) -> Result<(), ModelError> {
    if v.is_finite() && (-BRANCH_TOL..=total_supply + BRANCH_TOL).contains(&v) {
        Ok(())
    } else if is_q {
        Err(ModelError::InvalidQ { q: v, total_supply })
    } else {
        Err(ModelError::InvalidM { m: v, total_supply })
    }
}

/// Per-coin payout of redeeming when total redemption volume is `q`.
///
/// Fiat pays face value until the reserve runs out, then splits the reserve
/// pro rata. Crypto pays collateral worth `r_c` until the reserve value is
/// exhausted, then splits it. Algo always mints at `r_c`. Over pays the
/// over-collateralization `r_c * o` but only while liquidations supply debt
/// to seize, or to a user who is a good debtor themselves.
pub fn redemption_value(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    q: f64,
    ctx: UserContext,
) -> Result<f64, ModelError> {
    check_theta(econ, theta)?;
    check_volume(q, spec.total_supply, true)?;
    let value = match spec.design {
        Design::FiatFull | Design::FiatPartial => {
            let vf = spec.fiat_reserve.expect("validated at construction");
            if q <= vf + BRANCH_TOL {
                1.0
            } else {
                vf / q
            }
        }
        Design::Crypto => {
            let rc = econ.ratio(q, theta);
            let vc = econ.reserve_value(theta);
            if q <= vc + BRANCH_TOL {
                rc
            } else {
                rc * vc / q
            }
        }
        Design::Algo => econ.ratio(q, theta),
        Design::Over => {
            if econ.liquidation_demand(theta) > 0.0 || ctx.is_good_debtor {
                econ.ratio(q, theta) * econ.over_value(theta)
            } else {
                0.0
            }
        }
    };
    Ok(value)
}

/// One-shot payoff of `action` for a single coin, given current aggregates
/// `m` (coins sold) and `q` (coins redeemed) and the holder's view of the
/// next period.
#[allow(clippy::too_many_arguments)] // the argument list is the model's state
pub fn payoff(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    action: Action,
    m: f64,
    q: f64,
    ctx: UserContext,
    future: Future,
) -> Result<f64, ModelError> {
    check_theta(econ, theta)?;
    check_volume(m, spec.total_supply, false)?;
    check_volume(q, spec.total_supply, true)?;
    check_volume(future.m_prime, spec.total_supply, false)?;
    let value = match action {
        Action::Sell => econ.price(m),
        Action::Redeem => redemption_value(spec, econ, theta, q, ctx)?,
        Action::Hold => {
            let resale = econ.incentive(econ.price(future.m_prime));
            let redeem_later = econ.incentive(future.v_prime);
            resale.max(redeem_later)
        }
    };
    Ok(value)
}
