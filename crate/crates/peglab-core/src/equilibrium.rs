//! Zone classification and peg-stability analysis.
//!
//! A design/economy pair sorts each fundamentals level `theta` into one of
//! three zones: the peg is the only equilibrium, the peg coexists with
//! self-fulfilling depegs, or no peg equilibrium exists at all. The zone
//! boundaries are roots of the redemption value evaluated at the extreme
//! redemption volumes `Q = 0` (most optimistic) and `Q = T_s` (most
//! pessimistic).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::Economy;
use crate::numeric::{bisect, linspace, RootError};
use crate::redemption::{redemption_value, Design, Future, StablecoinSpec, UserContext};

/// Slack for >= comparisons against the peg price.
const PEG_TOL: f64 = 1e-12;

/// Thresholds carry bisection error (bracket width 1e-12), so boundary
/// inclusivity is honored to a tolerance comfortably above it.
const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Zone {
    /// Blue: every equilibrium trades at the peg.
    UniquePeg,
    /// Yellow: the peg is an equilibrium, but pessimistic beliefs sustain a
    /// depeg too.
    SelfFulfilling,
    /// Red: no beliefs sustain the peg.
    DepegOnly,
}

impl Zone {
    pub fn label(self) -> &'static str {
        match self {
            Zone::UniquePeg => "unique_peg",
            Zone::SelfFulfilling => "self_fulfilling",
            Zone::DepegOnly => "depeg_only",
        }
    }

    pub fn from_label(s: &str) -> Option<Zone> {
        match s {
            "unique_peg" => Some(Zone::UniquePeg),
            "self_fulfilling" => Some(Zone::SelfFulfilling),
            "depeg_only" => Some(Zone::DepegOnly),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("{threshold}: condition stays {value_at_max} < 1 up to theta_max; no root in range")]
    NoRoot { threshold: &'static str, value_at_max: f64 },
    #[error("model assumption violated: {message}")]
    AssumptionViolated { message: String },
    #[error("root finder failed: {0}")]
    Root(#[from] RootError),
}

/// Zone boundaries for one design/economy pair. Fields are `None` when the
/// boundary does not exist for the design or falls outside the theta range.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Thresholds {
    /// Above this, even full-supply redemption pays at least face value:
    /// the peg is unique. Crypto and algo designs only.
    pub theta_bar: Option<f64>,
    /// Above this, zero-volume redemption pays at least face value: the peg
    /// becomes self-sustaining. Crypto, algo, and over designs.
    pub theta_under: Option<f64>,
    /// Over design: above this, even full-supply redemption covers the peg.
    pub theta_star: Option<f64>,
    /// Over design: largest theta at which liquidations absorb the whole
    /// supply.
    pub theta_circ: Option<f64>,
}

/// Solves an increasing condition `g(theta) = 1` over the economy's theta
/// range. A condition already satisfied at `theta_min` roots there; one never
/// satisfied is reported as `NoRoot`.
fn solve_increasing(
    econ: &Economy,
    threshold: &'static str,
    g: impl Fn(f64) -> f64,
) -> Result<f64, SolveError> {
    let (lo, hi) = (econ.theta_min(), econ.theta_max());
    if g(lo) >= 1.0 {
        return Ok(lo);
    }
    let at_max = g(hi);
    if at_max < 1.0 {
        return Err(SolveError::NoRoot { threshold, value_at_max: at_max });
    }
    Ok(bisect(|t| g(t) - 1.0, lo, hi)?)
}

/// Theta above which `r_c(T_s, theta) >= 1`: full-volume redemption holds the
/// peg on its own. Crypto/algo blue-zone boundary.
pub fn solve_theta_bar(econ: &Economy) -> Result<f64, SolveError> {
    let ts = econ.total_supply();
    solve_increasing(econ, "theta_bar", |t| econ.ratio(ts, t))
}

/// Theta above which marginal redemption pays face value. For the over
/// design the payout includes the collateralization factor.
pub fn solve_theta_under(econ: &Economy, design: Design) -> Result<f64, SolveError> {
    match design {
        Design::Over => {
            solve_increasing(econ, "theta_under", |t| econ.ratio(0.0, t) * econ.over_value(t))
        }
        _ => solve_increasing(econ, "theta_under", |t| econ.ratio(0.0, t)),
    }
}

/// Over design: theta above which even full-volume redemption covers the peg.
pub fn solve_theta_star(econ: &Economy) -> Result<f64, SolveError> {
    let ts = econ.total_supply();
    solve_increasing(econ, "theta_star", |t| econ.ratio(ts, t) * econ.over_value(t))
}

/// Over design: largest theta at which liquidation demand equals the whole
/// supply. With the linear ramp this is `theta_min` whenever liquidation is
/// enabled at all.
pub fn solve_theta_circ(econ: &Economy) -> Result<f64, SolveError> {
    let ts = econ.total_supply();
    if econ.liquidation_demand(econ.theta_min()) >= ts - PEG_TOL {
        Ok(econ.theta_min())
    } else {
        Err(SolveError::NoRoot {
            threshold: "theta_circ",
            value_at_max: econ.liquidation_demand(econ.theta_min()) / ts,
        })
    }
}

impl Thresholds {
    /// Computes every boundary the design admits, checking the side
    /// assumptions the zone story relies on.
    pub fn compute(spec: &StablecoinSpec, econ: &Economy) -> Result<Thresholds, SolveError> {
        let missing_ok = |r: Result<f64, SolveError>| match r {
            Ok(v) => Ok(Some(v)),
            Err(SolveError::NoRoot { .. }) => Ok(None),
            Err(e) => Err(e),
        };
        match spec.design() {
            Design::FiatFull | Design::FiatPartial => Ok(Thresholds::default()),
            Design::Crypto | Design::Algo => {
                let theta_under = missing_ok(solve_theta_under(econ, spec.design()))?;
                let theta_bar = missing_ok(solve_theta_bar(econ))?;
                if spec.design() == Design::Crypto {
                    if let Some(tu) = theta_under {
                        // The reserve must cover full redemption once marginal
                        // redemption pays face value, else the self-sustaining
                        // story breaks down.
                        if econ.reserve_value(tu) < spec.total_supply() - PEG_TOL {
                            return Err(SolveError::AssumptionViolated {
                                message: format!(
                                    "reserve value {} at theta_under {} does not cover supply {}",
                                    econ.reserve_value(tu),
                                    tu,
                                    spec.total_supply()
                                ),
                            });
                        }
                    }
                }
                Ok(Thresholds { theta_bar, theta_under, ..Default::default() })
            }
            Design::Over => {
                let theta_circ = missing_ok(solve_theta_circ(econ))?;
                if let Some(tc) = theta_circ {
                    // While liquidations absorb the whole supply, redemption
                    // must pay below face value, else the red zone vanishes.
                    let v0 = econ.ratio(0.0, tc) * econ.over_value(tc);
                    if v0 >= 1.0 - PEG_TOL {
                        return Err(SolveError::AssumptionViolated {
                            message: format!(
                                "redemption pays {v0} >= 1 while liquidations cover the supply \
                                 (theta = {tc})"
                            ),
                        });
                    }
                }
                let theta_under = missing_ok(solve_theta_under(econ, Design::Over))?;
                let theta_star = missing_ok(solve_theta_star(econ))?;
                Ok(Thresholds { theta_under, theta_star, theta_circ, ..Default::default() })
            }
        }
    }
}

/// Pointwise zone of `theta` given precomputed boundaries. Boundaries are
/// inclusive on the stronger side: at `theta_bar` exactly the peg is unique.
pub fn classify(spec: &StablecoinSpec, _econ: &Economy, theta: f64, th: &Thresholds) -> Zone {
    match spec.design() {
        Design::FiatFull => Zone::UniquePeg,
        Design::FiatPartial => Zone::SelfFulfilling,
        Design::Crypto | Design::Algo => {
            if th.theta_bar.is_some_and(|b| theta >= b - BOUNDARY_TOL) {
                Zone::UniquePeg
            } else if th.theta_under.is_some_and(|u| theta >= u - BOUNDARY_TOL) {
                Zone::SelfFulfilling
            } else {
                Zone::DepegOnly
            }
        }
        // Over never reaches a unique peg: users without redemption access
        // can always coordinate a sell-off once liquidations stop.
        Design::Over => {
            if th.theta_under.is_some_and(|u| theta >= u - BOUNDARY_TOL) {
                Zone::SelfFulfilling
            } else {
                Zone::DepegOnly
            }
        }
    }
}

/// One classified grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZonePoint {
    pub theta: f64,
    pub zone: Zone,
}

/// Zone classification of a whole theta grid, plus the boundaries used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneReport {
    pub design: Design,
    pub thresholds: Thresholds,
    pub points: Vec<ZonePoint>,
}

/// Classifies `grid_points` evenly spaced thetas. Boundaries are computed
/// once, so refining the grid never moves a shared point's zone.
pub fn zone_diagram(
    spec: &StablecoinSpec,
    econ: &Economy,
    grid_points: usize,
) -> Result<ZoneReport, SolveError> {
    let thresholds = Thresholds::compute(spec, econ)?;
    let points = linspace(econ.theta_min(), econ.theta_max(), grid_points)
        .into_iter()
        .map(|theta| ZonePoint { theta, zone: classify(spec, econ, theta, &thresholds) })
        .collect();
    Ok(ZoneReport { design: spec.design(), thresholds, points })
}

/// Price the mechanism supports under belief `belief_q`: the best available
/// redemption value, floored by the no-intervention price and capped at the
/// peg. Eligibility is resolved in the user's favor.
pub fn support_price(spec: &StablecoinSpec, econ: &Economy, theta: f64, belief_q: f64) -> f64 {
    let v = redemption_value(spec, econ, theta, belief_q, UserContext::good_debtor())
        .unwrap_or_else(|_| econ.e(theta));
    v.max(econ.e(theta)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Peg,
    Depeg,
}

/// An equilibrium price level and the mechanism that pins it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub price: f64,
    pub kind: EquilibriumKind,
    pub mechanism: String,
}

/// Redemption volume users coordinate on when valuing the coin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub expected_q: f64,
}

impl Belief {
    pub fn optimistic() -> Belief {
        Belief { expected_q: 0.0 }
    }

    pub fn pessimistic(total_supply: f64) -> Belief {
        Belief { expected_q: total_supply }
    }
}

/// Closed-form equilibrium price levels under a fixed belief about the
/// redemption volume. The peg appears when redemption at the believed volume
/// pays at least face value; otherwise the price settles on the redemption
/// value itself, floored by the no-intervention price. The over design adds
/// a sell-off level once liquidations stop, because users without redemption
/// access cannot arbitrage it away.
pub fn equilibrium_prices(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    belief: Belief,
) -> Result<Vec<EquilibriumPoint>, crate::redemption::ModelError> {
    let mut out = Vec::new();
    if spec.design() == Design::FiatFull {
        out.push(EquilibriumPoint {
            price: 1.0,
            kind: EquilibriumKind::Peg,
            mechanism: "redemption-supported".to_string(),
        });
        return Ok(out);
    }
    let v_b =
        redemption_value(spec, econ, theta, belief.expected_q, UserContext::good_debtor())?;
    if v_b >= 1.0 - PEG_TOL {
        out.push(EquilibriumPoint {
            price: 1.0,
            kind: EquilibriumKind::Peg,
            mechanism: "redemption-supported".to_string(),
        });
    } else {
        let floor = econ.e(theta);
        if v_b > floor {
            let capped = spec.design() == Design::Crypto
                && belief.expected_q > econ.reserve_value(theta) + PEG_TOL;
            out.push(EquilibriumPoint {
                price: v_b,
                kind: EquilibriumKind::Depeg,
                mechanism: if capped { "reserve-exhaustion" } else { "redemption-anchored" }
                    .to_string(),
            });
        } else {
            out.push(EquilibriumPoint {
                price: floor,
                kind: EquilibriumKind::Depeg,
                mechanism: "no-intervention floor".to_string(),
            });
        }
    }
    if spec.design() == Design::Over && econ.liquidation_demand(theta) <= 0.0 {
        let floor = econ.e(theta);
        if !out.iter().any(|p| (p.price - floor).abs() < 1e-9) {
            out.push(EquilibriumPoint {
                price: floor,
                kind: EquilibriumKind::Depeg,
                mechanism: "non-debtor sell-off".to_string(),
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Peg-stability test
// ---------------------------------------------------------------------------

/// Outcome of sampling the two peg-stability conditions over a grid of sale
/// volumes.
///
/// At every sampled below-peg price, some alternative to selling — redeem
/// now at `v`, redeem later at `i(v')`, or resell later at `i(p(M'))` —
/// must pay strictly more, else selling at a discount is self-sustaining.
/// At the peg itself the best alternative must pay at least face value.
/// `sufficient_holds` asks both under the worst redemption volume, so it
/// certifies the peg as the only outcome; `necessary_holds` asks only the
/// below-peg condition under the best volume, so its failure certifies that
/// no peg survives. Between the two the test is silent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub theta: f64,
    /// Worst per-coin redemption value over the scanned volume range.
    pub worst_v: f64,
    /// Best per-coin redemption value over the scanned volume range.
    pub best_v: f64,
    /// Largest sampled below-peg price: the binding comparison level.
    pub tightest_price: f64,
    pub sufficient_holds: bool,
    pub necessary_holds: bool,
    /// First sampled sale volume at which the below-peg condition fails
    /// even under the best redemption volume.
    pub first_necessary_failure: Option<f64>,
}

/// Evaluates the peg-stability conditions at one `theta` over the sampled
/// sale volumes `m_grid`.
///
/// Redemption values are scanned over the same number of volumes spanning
/// `[0, T_s]` and every eligibility context the design distinguishes; the
/// monotone ratio families reach their extremes at the endpoints, the scan
/// guards anything else. With an explicit `future` the hold leg uses that
/// continuation at every sampled point. Without one the continuation is
/// stationary: a holder expects tomorrow's price to be today's, capped by
/// the level redemption arbitrage can support.
pub fn check_theorem1(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    m_grid: &[f64],
    future: Option<Future>,
) -> Result<Theorem1Report, crate::redemption::ModelError> {
    assert!(!m_grid.is_empty(), "need at least one sale volume");
    let ts = spec.total_supply();
    let contexts: &[UserContext] = if spec.design() == Design::Over {
        &[UserContext::non_debtor(), UserContext::good_debtor()]
    } else {
        &[UserContext::non_debtor()]
    };
    let mut worst_v = f64::INFINITY;
    let mut best_v = f64::NEG_INFINITY;
    for q in linspace(0.0, ts, m_grid.len().max(2)) {
        for &ctx in contexts {
            let v = redemption_value(spec, econ, theta, q, ctx)?;
            worst_v = worst_v.min(v);
            best_v = best_v.max(v);
        }
    }
    let fixed_hold = future
        .map(|f| econ.incentive(econ.price(f.m_prime)).max(econ.incentive(f.v_prime)));
    let support_worst = support_price(spec, econ, theta, ts);
    let support_best = support_price(spec, econ, theta, 0.0);
    let mut tightest_price = f64::NEG_INFINITY;
    let mut sufficient_holds = true;
    let mut necessary_holds = true;
    let mut first_necessary_failure = None;
    for &m in m_grid {
        let price = econ.price(m);
        let hold_worst = fixed_hold.unwrap_or_else(|| {
            econ.incentive(price.min(support_worst)).max(econ.incentive(worst_v))
        });
        let hold_best = fixed_hold.unwrap_or_else(|| {
            econ.incentive(price.min(support_best)).max(econ.incentive(best_v))
        });
        let alt_worst = worst_v.max(hold_worst);
        let alt_best = best_v.max(hold_best);
        if price < 1.0 - PEG_TOL {
            tightest_price = tightest_price.max(price);
            // Strict comparison: an alternative merely matching the
            // discount price does not pull sellers out of the market.
            if alt_worst <= price + PEG_TOL {
                sufficient_holds = false;
            }
            if alt_best <= price + PEG_TOL {
                necessary_holds = false;
                first_necessary_failure.get_or_insert(m);
            }
        } else if alt_worst < 1.0 - PEG_TOL {
            sufficient_holds = false;
        }
    }
    Ok(Theorem1Report {
        theta,
        worst_v,
        best_v,
        tightest_price,
        sufficient_holds,
        necessary_holds,
        first_necessary_failure,
    })
}
