//! Finite-population game dynamics: best responses, equilibrium enumeration,
//! coordination runs under fixed beliefs, and multi-step shock simulations.
//!
//! A population of coin holders each picks sell / redeem / hold. An agent
//! values a candidate action with their own coins moved but everyone else's
//! fixed, and values holding by the better of next-period resale and
//! next-period redemption at a believed redemption volume. The future resale
//! price is the current price capped by the redemption-supported level, so
//! holding cannot bank on a price the mechanism will not carry.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::Economy;
use crate::equilibrium::{support_price, Zone};
use crate::redemption::{redemption_value, Action, Design, ModelError, StablecoinSpec};

/// Ties between action values narrower than this resolve by preference
/// order hold > redeem > sell.
const TIE_TOL: f64 = 1e-12;
/// Two equilibrium prices closer than this count as the same level.
const PRICE_TOL: f64 = 1e-9;
/// Enumeration is exhaustive over action profiles; cap the population.
const MAX_ENUM_AGENTS: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("bad population: {message}")]
    BadPopulation { message: String },
    #[error("the fundamentals path must contain at least one step")]
    EmptyThetaPath,
    #[error("enumeration supports at most {max} agents, got {n}")]
    TooManyAgents { n: usize, max: usize },
    #[error("best-response sweep still changing after {max_passes} passes")]
    NonConvergence { max_passes: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Redemption eligibility class of an agent. Only the over-collateralized
/// design treats the classes differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    NonDebtor,
    GoodDebtor,
}

impl Role {
    pub fn context(self) -> crate::redemption::UserContext {
        crate::redemption::UserContext { is_good_debtor: self == Role::GoodDebtor }
    }
}

/// A fixed set of agents with holdings, roles, and current actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPopulation {
    holdings: Vec<f64>,
    roles: Vec<Role>,
    actions: Vec<Action>,
}

impl AgentPopulation {
    /// `n` equal holders of the whole supply, all starting on `initial`.
    /// Under the over design the first `n_debtors` agents (capped at `n`)
    /// are good debtors; everyone else is a plain holder.
    pub fn uniform(
        spec: &StablecoinSpec,
        econ: &Economy,
        n: usize,
        initial: Action,
    ) -> Result<AgentPopulation, DynamicsError> {
        if n == 0 {
            return Err(DynamicsError::BadPopulation { message: "need at least one agent".into() });
        }
        let h = spec.total_supply() / n as f64;
        let n_debtors = if spec.design() == Design::Over {
            (econ.config().n_debtors as usize).min(n)
        } else {
            0
        };
        let roles = (0..n)
            .map(|i| if i < n_debtors { Role::GoodDebtor } else { Role::NonDebtor })
            .collect();
        Ok(AgentPopulation { holdings: vec![h; n], roles, actions: vec![initial; n] })
    }

    pub fn all_hold(
        spec: &StablecoinSpec,
        econ: &Economy,
        n: usize,
    ) -> Result<AgentPopulation, DynamicsError> {
        AgentPopulation::uniform(spec, econ, n, Action::Hold)
    }

    pub fn all_sell(
        spec: &StablecoinSpec,
        econ: &Economy,
        n: usize,
    ) -> Result<AgentPopulation, DynamicsError> {
        AgentPopulation::uniform(spec, econ, n, Action::Sell)
    }

    /// Arbitrary population; lengths must agree and holdings be finite and
    /// nonnegative.
    pub fn from_parts(
        holdings: Vec<f64>,
        roles: Vec<Role>,
        actions: Vec<Action>,
    ) -> Result<AgentPopulation, DynamicsError> {
        if holdings.len() != roles.len() || holdings.len() != actions.len() {
            return Err(DynamicsError::BadPopulation {
                message: format!(
                    "length mismatch: {} holdings, {} roles, {} actions",
                    holdings.len(),
                    roles.len(),
                    actions.len()
                ),
            });
        }
        if holdings.is_empty() {
            return Err(DynamicsError::BadPopulation { message: "need at least one agent".into() });
        }
        if let Some(h) = holdings.iter().find(|h| !h.is_finite() || **h < 0.0) {
            return Err(DynamicsError::BadPopulation {
                message: format!("holding {h} is not a nonnegative finite number"),
            });
        }
        Ok(AgentPopulation { holdings, roles, actions })
    }

    pub fn len(&self) -> usize {
        self.holdings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holdings.is_empty()
    }

    pub fn holdings(&self) -> &[f64] {
        &self.holdings
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Coins currently offered for sale.
    pub fn total_m(&self) -> f64 {
        self.total_of(Action::Sell)
    }

    /// Coins currently presented for redemption.
    pub fn total_q(&self) -> f64 {
        self.total_of(Action::Redeem)
    }

    fn total_of(&self, action: Action) -> f64 {
        let total: f64 = self
            .holdings
            .iter()
            .zip(&self.actions)
            .filter(|(_, a)| **a == action)
            .map(|(h, _)| h)
            .sum();
        total + 0.0 // the empty sum is -0.0; keep volumes on the +0.0 side
    }
}

/// Aggregates and the resulting price of one action profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub m: f64,
    pub q: f64,
    pub price: f64,
}

impl MarketState {
    pub fn of(spec: &StablecoinSpec, econ: &Economy, theta: f64, pop: &AgentPopulation) -> MarketState {
        let m = pop.total_m();
        let q = pop.total_q();
        MarketState { m, q, price: effective_price(spec, econ, theta, m, q) }
    }
}

/// Price at which the profile's outcome trades. With sell pressure the
/// market impact curve sets it; with none, the marginal trade is a
/// redemption, so the coin shadow-prices at the redemption-supported level
/// (capped at the peg).
pub fn effective_price(spec: &StablecoinSpec, econ: &Economy, theta: f64, m: f64, q: f64) -> f64 {
    let ts = spec.total_supply();
    if m > TIE_TOL {
        econ.price(m.min(ts))
    } else {
        support_price(spec, econ, theta, q.clamp(0.0, ts))
    }
}

/// Value of `candidate` to one agent holding `h` coins, currently on
/// `current`, inside a profile with observed aggregates `m_obs` / `q_obs`
/// (own coins included). `belief_q` is the redemption volume the agent
/// expects next period.
#[allow(clippy::too_many_arguments)]
pub fn action_value(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    candidate: Action,
    current: Action,
    h: f64,
    m_obs: f64,
    q_obs: f64,
    role: Role,
    belief_q: f64,
) -> Result<f64, DynamicsError> {
    let ts = spec.total_supply();
    let moved = |base: f64, slot: Action| {
        let mut x = base;
        if current == slot {
            x -= h;
        }
        if candidate == slot {
            x += h;
        }
        x.clamp(0.0, ts)
    };
    let belief = belief_q.clamp(0.0, ts);
    let value = match candidate {
        Action::Sell => econ.price(moved(m_obs, Action::Sell)),
        Action::Redeem => {
            redemption_value(spec, econ, theta, moved(q_obs, Action::Redeem), role.context())?
        }
        Action::Hold => {
            let support = support_price(spec, econ, theta, belief);
            let future_price = econ.price(m_obs.clamp(0.0, ts)).min(support);
            let redeem_later = redemption_value(spec, econ, theta, belief, role.context())?;
            econ.incentive(future_price).max(econ.incentive(redeem_later))
        }
    };
    Ok(value)
}

/// Best action by value, ties broken hold > redeem > sell.
#[allow(clippy::too_many_arguments)]
pub fn best_response(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    current: Action,
    h: f64,
    m_obs: f64,
    q_obs: f64,
    role: Role,
    belief_q: f64,
) -> Result<Action, DynamicsError> {
    let mut best = f64::NEG_INFINITY;
    let mut vals = [0.0; 3];
    let order = [Action::Hold, Action::Redeem, Action::Sell];
    for (slot, &a) in order.iter().enumerate() {
        let v = action_value(spec, econ, theta, a, current, h, m_obs, q_obs, role, belief_q)?;
        vals[slot] = v;
        best = best.max(v);
    }
    let pick = order
        .iter()
        .zip(vals)
        .find(|(_, v)| *v >= best - TIE_TOL)
        .map(|(a, _)| *a)
        .expect("max is attained");
    Ok(pick)
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of symmetric equilibria
// ---------------------------------------------------------------------------

/// One equilibrium profile found by enumeration, deduplicated by price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedEquilibrium {
    pub sellers: usize,
    pub redeemers: usize,
    pub holders: usize,
    pub m: f64,
    pub q: f64,
    pub price: f64,
}

/// A profile is an equilibrium when no occupied action admits a strictly
/// better alternative (weak inequalities survive, so indifference does not
/// break a profile). Beliefs are consistent: the believed redemption volume
/// equals the profile's realized one.
fn profile_is_equilibrium(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    h: f64,
    groups: &[(Role, Action, usize)],
) -> Result<bool, DynamicsError> {
    let m_obs: f64 = groups
        .iter()
        .filter(|(_, a, _)| *a == Action::Sell)
        .map(|(_, _, c)| *c as f64 * h)
        .sum();
    let q_obs: f64 = groups
        .iter()
        .filter(|(_, a, _)| *a == Action::Redeem)
        .map(|(_, _, c)| *c as f64 * h)
        .sum();
    let belief = q_obs;
    for &(role, action, count) in groups {
        if count == 0 {
            continue;
        }
        let cur =
            action_value(spec, econ, theta, action, action, h, m_obs, q_obs, role, belief)?;
        for alt in Action::ALL {
            if alt == action {
                continue;
            }
            let dev =
                action_value(spec, econ, theta, alt, action, h, m_obs, q_obs, role, belief)?;
            if dev > cur + TIE_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Scans every split of `n` equal holders across the three actions (and
/// across eligibility roles under the over design) and returns the
/// equilibrium profiles, one per distinct price, sorted by price.
pub fn enumerate_equilibria(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    n: usize,
) -> Result<Vec<EnumeratedEquilibrium>, DynamicsError> {
    if n == 0 || n > MAX_ENUM_AGENTS {
        return Err(DynamicsError::TooManyAgents { n, max: MAX_ENUM_AGENTS });
    }
    let h = spec.total_supply() / n as f64;
    let mut found: Vec<EnumeratedEquilibrium> = Vec::new();
    let mut consider = |groups: &[(Role, Action, usize)]| -> Result<(), DynamicsError> {
        if !profile_is_equilibrium(spec, econ, theta, h, groups)? {
            return Ok(());
        }
        let count_of = |a: Action| -> usize {
            groups.iter().filter(|(_, g, _)| *g == a).map(|(_, _, c)| c).sum()
        };
        let (s, q, hold) = (count_of(Action::Sell), count_of(Action::Redeem), count_of(Action::Hold));
        let (m_tot, q_tot) = (s as f64 * h, q as f64 * h);
        let price = effective_price(spec, econ, theta, m_tot, q_tot);
        if !found.iter().any(|e| (e.price - price).abs() < PRICE_TOL) {
            found.push(EnumeratedEquilibrium {
                sellers: s,
                redeemers: q,
                holders: hold,
                m: m_tot,
                q: q_tot,
                price,
            });
        }
        Ok(())
    };

    if spec.design() == Design::Over {
        let n_d = (econ.config().n_debtors as usize).min(n);
        let n_p = n - n_d;
        for s_d in 0..=n_d {
            for q_d in 0..=(n_d - s_d) {
                for s_p in 0..=n_p {
                    for q_p in 0..=(n_p - s_p) {
                        consider(&[
                            (Role::GoodDebtor, Action::Sell, s_d),
                            (Role::GoodDebtor, Action::Redeem, q_d),
                            (Role::GoodDebtor, Action::Hold, n_d - s_d - q_d),
                            (Role::NonDebtor, Action::Sell, s_p),
                            (Role::NonDebtor, Action::Redeem, q_p),
                            (Role::NonDebtor, Action::Hold, n_p - s_p - q_p),
                        ])?;
                    }
                }
            }
        }
    } else {
        for s in 0..=n {
            for q in 0..=(n - s) {
                consider(&[
                    (Role::NonDebtor, Action::Sell, s),
                    (Role::NonDebtor, Action::Redeem, q),
                    (Role::NonDebtor, Action::Hold, n - s - q),
                ])?;
            }
        }
    }
    found.sort_by(|a, b| a.price.total_cmp(&b.price));
    Ok(found)
}

// ---------------------------------------------------------------------------
// Best-response coordination runs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateOrder {
    RoundRobin,
    Shuffled { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub max_passes: usize,
    pub order: UpdateOrder,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_passes: 100, order: UpdateOrder::RoundRobin }
    }
}

/// Final state of a converged best-response run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsResult {
    pub population: AgentPopulation,
    pub market: MarketState,
    /// Passes taken, counting the final no-change pass.
    pub passes: usize,
}

/// Runs sequential best-response sweeps under a fixed belief about next
/// period's redemption volume until a full pass changes nothing.
pub fn run_dynamics(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    mut pop: AgentPopulation,
    belief_q: f64,
    opts: RunOptions,
) -> Result<DynamicsResult, DynamicsError> {
    let mut rng = match opts.order {
        UpdateOrder::Shuffled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        UpdateOrder::RoundRobin => None,
    };
    let mut order: Vec<usize> = (0..pop.len()).collect();
    for pass in 1..=opts.max_passes.max(1) {
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        let mut changed = false;
        for &i in &order {
            let m_obs = pop.total_m();
            let q_obs = pop.total_q();
            let br = best_response(
                spec,
                econ,
                theta,
                pop.actions[i],
                pop.holdings[i],
                m_obs,
                q_obs,
                pop.roles[i],
                belief_q,
            )?;
            if br != pop.actions[i] {
                pop.actions[i] = br;
                changed = true;
            }
        }
        if !changed {
            let market = MarketState::of(spec, econ, theta, &pop);
            return Ok(DynamicsResult { population: pop, market, passes: pass });
        }
    }
    Err(DynamicsError::NonConvergence { max_passes: opts.max_passes })
}

/// Zone estimate from play alone: the union of enumerated equilibrium prices
/// and the fixed points of an optimistic run (everyone holding, no
/// redemption feared) and a pessimistic run (everyone selling, full
/// redemption feared). Unique peg when every price sits on the peg, depeg
/// only when none does.
pub fn estimate_zone(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta: f64,
    n: usize,
    opts: RunOptions,
) -> Result<Zone, DynamicsError> {
    let mut prices: Vec<f64> =
        enumerate_equilibria(spec, econ, theta, n)?.iter().map(|e| e.price).collect();
    let optimistic = run_dynamics(
        spec,
        econ,
        theta,
        AgentPopulation::all_hold(spec, econ, n)?,
        0.0,
        opts,
    )?;
    let pessimistic = run_dynamics(
        spec,
        econ,
        theta,
        AgentPopulation::all_sell(spec, econ, n)?,
        spec.total_supply(),
        opts,
    )?;
    prices.push(optimistic.market.price);
    prices.push(pessimistic.market.price);

    let peg = |p: &f64| (p - 1.0).abs() <= PRICE_TOL;
    Ok(if prices.iter().all(peg) {
        Zone::UniquePeg
    } else if !prices.iter().any(peg) {
        Zone::DepegOnly
    } else {
        Zone::SelfFulfilling
    })
}

// ---------------------------------------------------------------------------
// Multi-step shock simulation
// ---------------------------------------------------------------------------

/// Forced redemption wave: at `step`, this fraction of every living agent's
/// holding is redeemed and burned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shock {
    pub step: usize,
    pub redeemed_fraction: f64,
}

/// Knobs for a multi-step run; the fundamentals path sets the step count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub shock: Option<Shock>,
    pub order: UpdateOrder,
}

/// One recorded simulation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub step: usize,
    pub theta: f64,
    /// Coins offered for sale this step.
    pub m: f64,
    /// Coins redeemed and burned since the start, shock included.
    pub q_cumulative: f64,
    pub price: f64,
    /// Collateral ratio at the cumulative redemption volume.
    pub r_c: f64,
    /// Redemption value at the cumulative volume for an eligible user.
    pub v: f64,
}

/// Final state of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub path: Vec<PathPoint>,
    pub population: AgentPopulation,
}

/// Simulates `n` fixed-identity holders over repeated one-shot rounds, one
/// round per entry of `theta_path`. Redemption is cumulative: a redeeming
/// agent burns their whole holding and stays in the population as a spent
/// agent, and every agent's redemption value is driven by the volume
/// redeemed so far. Each step runs one best-response pass; beliefs track the
/// cumulative volume including redemptions earlier in the same step.
pub fn simulate_run(
    spec: &StablecoinSpec,
    econ: &Economy,
    theta_path: &[f64],
    n: usize,
    opts: SimOptions,
) -> Result<RunOutcome, DynamicsError> {
    if theta_path.is_empty() {
        return Err(DynamicsError::EmptyThetaPath);
    }
    if let Some(s) = opts.shock {
        if !(0.0..=1.0).contains(&s.redeemed_fraction) {
            return Err(DynamicsError::BadPopulation {
                message: format!("shock fraction {} outside [0, 1]", s.redeemed_fraction),
            });
        }
    }
    let mut pop = AgentPopulation::all_hold(spec, econ, n)?;
    let ts = spec.total_supply();
    let mut q_cum = 0.0_f64;
    let mut rng = match opts.order {
        UpdateOrder::Shuffled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        UpdateOrder::RoundRobin => None,
    };
    let mut order: Vec<usize> = (0..n).collect();

    let record = |step: usize, theta: f64, pop: &AgentPopulation, q_cum: f64| {
        let m = pop.total_m();
        let q_eff = q_cum.clamp(0.0, ts);
        PathPoint {
            step,
            theta,
            m,
            q_cumulative: q_cum,
            price: effective_price(spec, econ, theta, m, q_eff),
            r_c: econ.ratio(q_eff, theta),
            v: redemption_value(spec, econ, theta, q_eff, crate::redemption::UserContext::good_debtor())
                .expect("volume clamped to range"),
        }
    };

    let mut path = vec![record(0, theta_path[0], &pop, q_cum)];
    for (step, &theta) in (1..).zip(theta_path) {
        if let Some(shock) = opts.shock {
            if shock.step == step {
                for h in &mut pop.holdings {
                    let burn = *h * shock.redeemed_fraction;
                    *h -= burn;
                    q_cum += burn;
                }
            }
        }
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        for &i in &order {
            if pop.holdings[i] <= 0.0 {
                continue;
            }
            let m_obs = pop.total_m();
            let br = best_response(
                spec,
                econ,
                theta,
                pop.actions[i],
                pop.holdings[i],
                m_obs,
                q_cum,
                pop.roles[i],
                q_cum,
            )?;
            if br == Action::Redeem {
                q_cum += pop.holdings[i];
                pop.holdings[i] = 0.0;
                pop.actions[i] = Action::Redeem;
            } else {
                pop.actions[i] = br;
            }
        }
        let remaining: f64 = pop.holdings.iter().sum();
        assert!(
            (remaining + q_cum - ts).abs() < 1e-9,
            "coin conservation broken: {remaining} remaining + {q_cum} redeemed != {ts}"
        );
        path.push(record(step, theta, &pop, q_cum));
    }
    Ok(RunOutcome { path, population: pop })
}
