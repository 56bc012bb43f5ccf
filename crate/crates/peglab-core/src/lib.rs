//! Stablecoin peg laboratory.
//!
//! Models a one-shot redemption game on a fixed coin supply: every holder
//! either sells at the market price, redeems against the issuer, or holds.
//! The crate classifies fundamentals into peg-stability zones, cross-checks
//! the classification with a brute-force agent oracle, simulates redemption
//! shocks, and ships the econometric kernels used to score real price series
//! against their peg.
//!
//! Module map:
//! - [`economy`]: parametric market/reserve curves and their validation
//! - [`redemption`]: designs, redemption value, and the action payoff
//! - [`equilibrium`]: thresholds, zone classification, belief-dependent prices
//! - [`dynamics`]: best-response oracle, exhaustive equilibrium search, shock paths
//! - [`stats`]: deviation metrics, Welch t, Pearson, Granger, special functions
//! - [`config`]: flat key-value scenario configs
//! - [`io`]: CSV readers and writers for series, zone tables, and paths

pub mod config;
pub mod dynamics;
pub mod economy;
pub mod equilibrium;
pub mod io;
pub mod numeric;
pub mod redemption;
pub mod stats;

pub use chrono::NaiveDate;
pub use config::{AnalysisConfig, ConfigError, DynamicsConfig, ScenarioConfig};
pub use dynamics::{
    action_value, best_response, effective_price, enumerate_equilibria, estimate_zone,
    run_dynamics, simulate_run, AgentPopulation, DynamicsError, DynamicsResult,
    EnumeratedEquilibrium, MarketState, PathPoint, Role, RunOptions, RunOutcome, Shock,
    SimOptions, UpdateOrder,
};
pub use economy::{Economy, EconomyConfig, EconomyError, RatioFamily};
pub use equilibrium::{
    check_theorem1, classify, equilibrium_prices, solve_theta_bar, solve_theta_circ,
    solve_theta_star, solve_theta_under, support_price, zone_diagram, Belief, EquilibriumKind,
    EquilibriumPoint, SolveError, Theorem1Report, Thresholds, Zone, ZonePoint, ZoneReport,
};
pub use io::{
    fmt_f64, load_price_series, load_v_series, read_path_csv, read_zone_csv, write_path_csv,
    write_zone_csv, zone_rows, IoError, ZoneRow,
};
pub use numeric::{bisect, linspace, RootError};
pub use redemption::{
    payoff, redemption_value, Action, Design, Future, ModelError, StablecoinSpec, UserContext,
};
pub use stats::{
    align, downward_clip, downward_deviation, f_cdf, f_upper_p, granger, inc_beta, ln_gamma,
    pearson, price_deviation, shortfall, t_two_sided_p, welch_ttest, Aligned, CorrelationReport,
    GrangerReport, PriceSeries, Series, StatsError, TTestReport, Target,
};
