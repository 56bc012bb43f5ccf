//! Scenario configuration: a flat `key = value` format with dotted keys,
//! `#` comments, and defaults for everything except the design and the
//! fundamentals range.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::{Economy, EconomyConfig, EconomyError, RatioFamily};
use crate::redemption::{Design, ModelError, StablecoinSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: &'static str },
    #[error("key `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error("economy: {0}")]
    Economy(EconomyError),
    #[error("design: {0}")]
    Model(ModelError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub n_agents: usize,
    pub max_iter: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub lag: usize,
    pub alpha: f64,
}

/// Everything one scenario needs: the design, the economy parameters, and
/// the knobs for grids, dynamics, and analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub design: Design,
    pub total_supply: f64,
    /// Fiat reserve; read only by the fiat designs, so one base config can
    /// carry a reserve through a sweep over all designs.
    pub fiat_reserve: Option<f64>,
    pub economy: EconomyConfig,
    pub grid_points: usize,
    pub dynamics: DynamicsConfig,
    pub analysis: AnalysisConfig,
}

fn parse_design(s: &str) -> Option<Design> {
    Design::ALL.into_iter().find(|d| d.label() == s)
}

struct Parser {
    map: BTreeMap<String, (usize, String)>,
    errs: Vec<ConfigError>,
}

impl Parser {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(_, v)| v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        match self.take(key) {
            None => default,
            Some(raw) => raw.parse().unwrap_or_else(|_| {
                self.errs.push(ConfigError::BadValue {
                    key: key.to_string(),
                    message: format!("`{raw}` is not a number"),
                });
                default
            }),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize, min: usize) -> usize {
        match self.take(key) {
            None => default,
            Some(raw) => match raw.parse::<usize>() {
                Ok(v) if v >= min => v,
                Ok(v) => {
                    self.errs.push(ConfigError::BadValue {
                        key: key.to_string(),
                        message: format!("{v} is below the minimum {min}"),
                    });
                    default
                }
                Err(_) => {
                    self.errs.push(ConfigError::BadValue {
                        key: key.to_string(),
                        message: format!("`{raw}` is not a nonnegative integer"),
                    });
                    default
                }
            },
        }
    }

    fn u64_or(&mut self, key: &str, default: u64) -> u64 {
        match self.take(key) {
            None => default,
            Some(raw) => raw.parse().unwrap_or_else(|_| {
                self.errs.push(ConfigError::BadValue {
                    key: key.to_string(),
                    message: format!("`{raw}` is not a nonnegative integer"),
                });
                default
            }),
        }
    }
}

impl ScenarioConfig {
    /// Reference scenario used throughout the test suite and as the seed for
    /// new config files.
    pub fn reference(design: Design) -> ScenarioConfig {
        let base = ScenarioConfig {
            design,
            total_supply: 1.0,
            fiat_reserve: None,
            economy: EconomyConfig::default(),
            grid_points: 101,
            dynamics: DynamicsConfig { n_agents: 20, max_iter: 100, seed: 7 },
            analysis: AnalysisConfig { lag: 1, alpha: 0.05 },
        };
        base.for_design(design)
    }

    /// The same scenario under another design. Fiat designs that lack a
    /// usable reserve get the conventional one (1.2x the supply for full
    /// backing, half the supply for partial backing).
    pub fn for_design(&self, design: Design) -> ScenarioConfig {
        let ts = self.total_supply;
        let fiat_reserve = match design {
            Design::FiatFull => {
                Some(self.fiat_reserve.filter(|r| *r >= ts).unwrap_or(1.2 * ts))
            }
            Design::FiatPartial => {
                Some(self.fiat_reserve.filter(|r| *r > 0.0 && *r < ts).unwrap_or(0.5 * ts))
            }
            _ => self.fiat_reserve,
        };
        ScenarioConfig { design, fiat_reserve, ..self.clone() }
    }

    pub fn from_file(path: &Path) -> Result<ScenarioConfig, Vec<ConfigError>> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            vec![ConfigError::Io { path: path.display().to_string(), message: e.to_string() }]
        })?;
        ScenarioConfig::parse_str(&text)
    }

    /// Parses the flat key-value format, reporting every problem found.
    /// A repeated key keeps its last value.
    pub fn parse_str(text: &str) -> Result<ScenarioConfig, Vec<ConfigError>> {
        let mut map = BTreeMap::new();
        let mut errs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            match s.split_once('=') {
                Some((k, v)) if !k.trim().is_empty() => {
                    map.insert(k.trim().to_string(), (line, v.trim().to_string()));
                }
                _ => errs.push(ConfigError::Syntax { line, text: s.to_string() }),
            }
        }
        let mut p = Parser { map, errs };

        let design = match p.take("spec.design") {
            None => {
                p.errs.push(ConfigError::MissingKey { key: "spec.design" });
                None
            }
            Some(raw) => match parse_design(&raw) {
                Some(d) => Some(d),
                None => {
                    p.errs.push(ConfigError::BadValue {
                        key: "spec.design".to_string(),
                        message: format!(
                            "`{raw}` is not a design (expected one of {:?})",
                            Design::ALL.map(Design::label)
                        ),
                    });
                    None
                }
            },
        };
        let total_supply = p.f64_or("spec.total_supply", 1.0);
        let fiat_reserve = p.take("spec.fiat_reserve").and_then(|raw| match raw.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                p.errs.push(ConfigError::BadValue {
                    key: "spec.fiat_reserve".to_string(),
                    message: format!("`{raw}` is not a number"),
                });
                None
            }
        });
        if matches!(design, Some(Design::FiatFull | Design::FiatPartial)) && fiat_reserve.is_none()
        {
            p.errs.push(ConfigError::MissingKey { key: "spec.fiat_reserve" });
        }

        let theta_min = match p.take("economy.theta_min") {
            None => {
                p.errs.push(ConfigError::MissingKey { key: "economy.theta_min" });
                f64::NAN
            }
            Some(raw) => raw.parse().unwrap_or_else(|_| {
                p.errs.push(ConfigError::BadValue {
                    key: "economy.theta_min".to_string(),
                    message: format!("`{raw}` is not a number"),
                });
                f64::NAN
            }),
        };
        let theta_max = match p.take("economy.theta_max") {
            None => {
                p.errs.push(ConfigError::MissingKey { key: "economy.theta_max" });
                f64::NAN
            }
            Some(raw) => raw.parse().unwrap_or_else(|_| {
                p.errs.push(ConfigError::BadValue {
                    key: "economy.theta_max".to_string(),
                    message: format!("`{raw}` is not a number"),
                });
                f64::NAN
            }),
        };

        for (key, family) in
            [("economy.price.family", "linear"), ("economy.e.family", "linear")]
        {
            if let Some(raw) = p.take(key) {
                if raw != family {
                    p.errs.push(ConfigError::BadValue {
                        key: key.to_string(),
                        message: format!("only `{family}` is supported, got `{raw}`"),
                    });
                }
            }
        }
        let price_beta = p.f64_or("economy.price.beta", 0.5);
        let e_min = p.f64_or("economy.e.min", 0.1);
        let e_max = p.f64_or("economy.e.max", 0.9);
        let ratio_family = p.take("economy.r_c.family").unwrap_or_else(|| "linear".to_string());
        let alpha = p.f64_or("economy.r_c.alpha", 0.5);
        let k = p.f64_or("economy.r_c.k", 1.0);
        let ratio = match ratio_family.as_str() {
            "linear" => RatioFamily::Linear { alpha },
            "exponential" => RatioFamily::Exponential { k },
            other => {
                p.errs.push(ConfigError::BadValue {
                    key: "economy.r_c.family".to_string(),
                    message: format!("`{other}` is not `linear` or `exponential`"),
                });
                RatioFamily::Linear { alpha }
            }
        };
        let reserve_v0 = p.f64_or("economy.reserve_value.v0", 2.0);
        let over_o0 = p.f64_or("economy.collateral.o0", 1.25);
        let incentive_rate = p.f64_or("economy.incentive.rate", 0.0);
        let liquidation_theta_l = p.f64_or("economy.liquidation.theta_l", 1.0);
        let n_debtors = p.usize_or("economy.debtors.count", 5, 1) as u32;

        let grid_points = p.usize_or("grid.points", 101, 2);
        let dynamics = DynamicsConfig {
            n_agents: p.usize_or("dynamics.n", 20, 1),
            max_iter: p.usize_or("dynamics.max_iter", 100, 1),
            seed: p.u64_or("dynamics.seed", 7),
        };
        let lag = p.usize_or("analysis.lag", 1, 1);
        let alpha_level = p.f64_or("analysis.alpha", 0.05);
        if !(alpha_level > 0.0 && alpha_level < 1.0) {
            p.errs.push(ConfigError::BadValue {
                key: "analysis.alpha".to_string(),
                message: format!("significance level must lie in (0, 1), got {alpha_level}"),
            });
        }

        for key in p.map.keys() {
            p.errs.push(ConfigError::UnknownKey { key: key.clone() });
        }
        if !p.errs.is_empty() {
            return Err(p.errs);
        }
        Ok(ScenarioConfig {
            design: design.expect("checked above"),
            total_supply,
            fiat_reserve,
            economy: EconomyConfig {
                theta_min,
                theta_max,
                price_beta,
                e_min,
                e_max,
                ratio,
                reserve_v0,
                over_o0,
                incentive_rate,
                liquidation_theta_l,
                n_debtors,
            },
            grid_points,
            dynamics,
            analysis: AnalysisConfig { lag, alpha: alpha_level },
        })
    }

    /// Validates the parameters and instantiates the design and economy.
    pub fn build(&self) -> Result<(StablecoinSpec, Economy), Vec<ConfigError>> {
        let mut errs = Vec::new();
        let econ = match Economy::build(self.economy.clone(), self.total_supply) {
            Ok(e) => Some(e),
            Err(es) => {
                errs.extend(es.into_iter().map(ConfigError::Economy));
                None
            }
        };
        let reserve = match self.design {
            Design::FiatFull | Design::FiatPartial => self.fiat_reserve,
            _ => None,
        };
        let spec = match StablecoinSpec::new(self.design, reserve, self.total_supply) {
            Ok(s) => Some(s),
            Err(e) => {
                errs.push(ConfigError::Model(e));
                None
            }
        };
        match (spec, econ) {
            (Some(s), Some(e)) if errs.is_empty() => Ok((s, e)),
            _ => Err(errs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
spec.design = crypto
economy.theta_min = 0.5
economy.theta_max = 3.0
";

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ScenarioConfig::parse_str(MINIMAL).unwrap();
        assert_eq!(cfg.design, Design::Crypto);
        assert_eq!(cfg.total_supply, 1.0);
        assert_eq!(cfg.economy.ratio, RatioFamily::Linear { alpha: 0.5 });
        assert_eq!(cfg.grid_points, 101);
        assert_eq!(cfg.dynamics.n_agents, 20);
        assert_eq!(cfg.dynamics.seed, 7);
        assert_eq!(cfg.analysis.lag, 1);
        let (spec, econ) = cfg.build().unwrap();
        assert_eq!(spec.design(), Design::Crypto);
        assert_eq!(econ.theta_max(), 3.0);
    }

    #[test]
    fn comments_blanks_and_duplicates_are_handled() {
        let text = "\
# scenario
spec.design = algo   # inline comment

economy.theta_min = 0.5
economy.theta_max = 2.0
economy.theta_max = 3.0
";
        let cfg = ScenarioConfig::parse_str(text).unwrap();
        assert_eq!(cfg.design, Design::Algo);
        assert_eq!(cfg.economy.theta_max, 3.0);
    }

    #[test]
    fn errors_are_aggregated() {
        let text = "\
spec.design = plutonium
economy.theta_min = abc
grid.points = 1
mystery.key = 3
";
        let errs = ScenarioConfig::parse_str(text).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, ConfigError::BadValue { key, .. } if key == "spec.design")));
        assert!(errs.iter().any(|e| matches!(e, ConfigError::BadValue { key, .. } if key == "economy.theta_min")));
        assert!(errs.iter().any(|e| matches!(e, ConfigError::BadValue { key, .. } if key == "grid.points")));
        assert!(errs.iter().any(|e| matches!(e, ConfigError::MissingKey { key } if *key == "economy.theta_max")));
        assert!(errs.iter().any(|e| matches!(e, ConfigError::UnknownKey { key } if key == "mystery.key")));
    }

    #[test]
    fn fiat_designs_require_a_reserve_key() {
        let text = "\
spec.design = fiat_partial
economy.theta_min = 0.5
economy.theta_max = 3.0
";
        let errs = ScenarioConfig::parse_str(text).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ConfigError::MissingKey { key } if *key == "spec.fiat_reserve")));
    }

    #[test]
    fn exponential_family_reads_k() {
        let text = "\
spec.design = algo
economy.theta_min = 0.5
economy.theta_max = 3.0
economy.r_c.family = exponential
economy.r_c.k = 2.5
";
        let cfg = ScenarioConfig::parse_str(text).unwrap();
        assert_eq!(cfg.economy.ratio, RatioFamily::Exponential { k: 2.5 });
    }

    #[test]
    fn sweep_fills_missing_fiat_reserves() {
        let base = ScenarioConfig::parse_str(MINIMAL).unwrap();
        let full = base.for_design(Design::FiatFull);
        assert_eq!(full.fiat_reserve, Some(1.2));
        let partial = base.for_design(Design::FiatPartial);
        assert_eq!(partial.fiat_reserve, Some(0.5));
        assert!(full.build().is_ok());
        assert!(partial.build().is_ok());
        // A provided, valid reserve survives the switch.
        let mut with_reserve = base.clone();
        with_reserve.fiat_reserve = Some(0.7);
        assert_eq!(with_reserve.for_design(Design::FiatPartial).fiat_reserve, Some(0.7));
        assert_eq!(with_reserve.for_design(Design::FiatFull).fiat_reserve, Some(1.2));
    }

    #[test]
    fn reference_config_builds_for_every_design() {
        for design in Design::ALL {
            let cfg = ScenarioConfig::reference(design);
            let (spec, _) = cfg.build().unwrap();
            assert_eq!(spec.design(), design);
        }
    }

    #[test]
    fn bad_economy_parameters_surface_at_build() {
        let text = "\
spec.design = crypto
economy.theta_min = 0.5
economy.theta_max = 3.0
economy.e.max = 1.5
";
        let cfg = ScenarioConfig::parse_str(text).unwrap();
        let errs = cfg.build().unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, ConfigError::Economy(_))));
    }
}
