//! Flat `key = value` scenario configuration.
//!
//! One assignment per line, `#` starts a comment, no nesting. Lists use
//! commas: `regimes = fixed:1, exp:1` and `substitutions = 0:0, 0.4:0.4`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use substock::{DemandModel, EconomicParams, ReplenishmentRegime};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Monte Carlo attachment for sweep rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub n_reps: u64,
    pub seed: u64,
}

/// A capacity-sweep experiment: one demand/economics base, a range of
/// capacities, and the regime and substitution variants to compare.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub demand: DemandModel,
    pub econ: EconomicParams,
    pub a1: f64,
    pub a2: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub c_step: f64,
    pub regimes: Vec<ReplenishmentRegime>,
    /// `(p12, p21)` pairs the sweep toggles through.
    pub substitutions: Vec<(f64, f64)>,
    pub mc: Option<MonteCarloConfig>,
    pub tol: f64,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: HashMap<String, (usize, String)> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if entries.insert(key.clone(), (line_no, value)).is_some() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }

        let known = [
            "lambda1",
            "lambda2",
            "p12",
            "p21",
            "r1",
            "c1",
            "h1",
            "r2",
            "c2",
            "h2",
            "a1",
            "a2",
            "c_min",
            "c_max",
            "c_step",
            "regimes",
            "substitutions",
            "mc_reps",
            "mc_seed",
            "tol",
        ];
        for (key, (line, _)) in &entries {
            if !known.contains(&key.as_str()) {
                return Err(ConfigError::Parse {
                    line: *line,
                    message: format!("unknown key `{key}`"),
                });
            }
        }

        let number = |key: &'static str| -> Result<f64, ConfigError> {
            let (line, value) = entries.get(key).ok_or(ConfigError::MissingKey(key))?;
            value.parse::<f64>().map_err(|_| ConfigError::Parse {
                line: *line,
                message: format!("key `{key}`: expected a number, got `{value}`"),
            })
        };
        let number_or = |key: &'static str, default: f64| -> Result<f64, ConfigError> {
            match entries.get(key) {
                None => Ok(default),
                Some(_) => number(key),
            }
        };

        let demand = DemandModel::new(
            number("lambda1")?,
            number("lambda2")?,
            number_or("p12", 0.0)?,
            number_or("p21", 0.0)?,
        )
        .map_err(|e| ConfigError::Invalid {
            key: "lambda1/lambda2/p12/p21".to_string(),
            message: e.to_string(),
        })?;
        let econ = EconomicParams::new(
            number("r1")?,
            number("c1")?,
            number("h1")?,
            number("r2")?,
            number("c2")?,
            number("h2")?,
        )
        .map_err(|e| ConfigError::Invalid {
            key: "r/c/h".to_string(),
            message: e.to_string(),
        })?;

        let a1 = number("a1")?;
        let a2 = number("a2")?;
        let c_min = number("c_min")?;
        let c_max = number("c_max")?;
        let c_step = number("c_step")?;
        if c_step < 1.0 || !c_step.is_finite() {
            return Err(ConfigError::Invalid {
                key: "c_step".to_string(),
                message: format!("step must be at least 1, got {c_step}"),
            });
        }
        if c_min > c_max || c_min < 0.0 || c_min.is_nan() || c_max.is_nan() {
            return Err(ConfigError::Invalid {
                key: "c_min/c_max".to_string(),
                message: format!("empty or negative sweep range [{c_min}, {c_max}]"),
            });
        }

        let (regimes_line, regimes_value) = entries
            .get("regimes")
            .ok_or(ConfigError::MissingKey("regimes"))?;
        let mut regimes = Vec::new();
        for item in regimes_value.split(',') {
            let item = item.trim();
            let (tag, param) = item.split_once(':').ok_or_else(|| ConfigError::Parse {
                line: *regimes_line,
                message: format!("regime `{item}` must look like `fixed:T` or `exp:MU`"),
            })?;
            let value: f64 = param.trim().parse().map_err(|_| ConfigError::Parse {
                line: *regimes_line,
                message: format!("regime parameter `{param}` is not a number"),
            })?;
            let regime = match tag.trim() {
                "fixed" => ReplenishmentRegime::fixed(value),
                "exp" | "exponential" => ReplenishmentRegime::exponential(value),
                other => {
                    return Err(ConfigError::Parse {
                        line: *regimes_line,
                        message: format!("unknown regime `{other}`"),
                    })
                }
            }
            .map_err(|e| ConfigError::Parse {
                line: *regimes_line,
                message: e.to_string(),
            })?;
            regimes.push(regime);
        }
        if regimes.is_empty() {
            return Err(ConfigError::Invalid {
                key: "regimes".to_string(),
                message: "at least one regime is required".to_string(),
            });
        }

        let substitutions = match entries.get("substitutions") {
            None => vec![(demand.p12(), demand.p21())],
            Some((line, value)) => {
                let mut pairs = Vec::new();
                for item in value.split(',') {
                    let item = item.trim();
                    let (p12, p21) = item.split_once(':').ok_or_else(|| ConfigError::Parse {
                        line: *line,
                        message: format!("substitution pair `{item}` must look like `p12:p21`"),
                    })?;
                    let parse = |s: &str| -> Result<f64, ConfigError> {
                        s.trim().parse().map_err(|_| ConfigError::Parse {
                            line: *line,
                            message: format!("substitution probability `{s}` is not a number"),
                        })
                    };
                    pairs.push((parse(p12)?, parse(p21)?));
                }
                if pairs.is_empty() {
                    return Err(ConfigError::Invalid {
                        key: "substitutions".to_string(),
                        message: "at least one pair is required".to_string(),
                    });
                }
                pairs
            }
        };
        // Validate each toggle against the demand model's invariants.
        for &(p12, p21) in &substitutions {
            DemandModel::new(demand.lambda1(), demand.lambda2(), p12, p21).map_err(|e| {
                ConfigError::Invalid {
                    key: "substitutions".to_string(),
                    message: e.to_string(),
                }
            })?;
        }

        let mc = match (entries.get("mc_reps"), entries.get("mc_seed")) {
            (None, None) => None,
            (Some(_), Some(_)) => {
                let reps = number("mc_reps")?;
                let seed = number("mc_seed")?;
                if reps < 2.0 || reps.fract() != 0.0 || seed < 0.0 || seed.fract() != 0.0 {
                    return Err(ConfigError::Invalid {
                        key: "mc_reps/mc_seed".to_string(),
                        message: "replications and seed must be nonnegative integers, reps >= 2"
                            .to_string(),
                    });
                }
                Some(MonteCarloConfig {
                    n_reps: reps as u64,
                    seed: seed as u64,
                })
            }
            _ => {
                return Err(ConfigError::Invalid {
                    key: "mc_reps/mc_seed".to_string(),
                    message: "mc_reps and mc_seed must be given together".to_string(),
                })
            }
        };

        let tol = number_or("tol", substock::transient::DEFAULT_TOL)?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(ConfigError::Invalid {
                key: "tol".to_string(),
                message: format!("tolerance must be positive and finite, got {tol}"),
            });
        }

        Ok(Self {
            demand,
            econ,
            a1,
            a2,
            c_min,
            c_max,
            c_step,
            regimes,
            substitutions,
            mc,
            tol,
        })
    }

    /// The swept capacity values `c_min, c_min + step, ..., <= c_max`.
    pub fn capacities(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut c = self.c_min;
        while c <= self.c_max + 1e-9 {
            out.push(c);
            c += self.c_step;
        }
        out
    }

    /// Round-trippable text form (used to template derived configs).
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "lambda1 = {}", self.demand.lambda1());
        let _ = writeln!(s, "lambda2 = {}", self.demand.lambda2());
        let _ = writeln!(s, "r1 = {}", self.econ.retail(substock::Product::One));
        let _ = writeln!(s, "c1 = {}", self.econ.cost(substock::Product::One));
        let _ = writeln!(s, "h1 = {}", self.econ.holding(substock::Product::One));
        let _ = writeln!(s, "r2 = {}", self.econ.retail(substock::Product::Two));
        let _ = writeln!(s, "c2 = {}", self.econ.cost(substock::Product::Two));
        let _ = writeln!(s, "h2 = {}", self.econ.holding(substock::Product::Two));
        let _ = writeln!(s, "a1 = {}", self.a1);
        let _ = writeln!(s, "a2 = {}", self.a2);
        let _ = writeln!(s, "c_min = {}", self.c_min);
        let _ = writeln!(s, "c_max = {}", self.c_max);
        let _ = writeln!(s, "c_step = {}", self.c_step);
        let regimes: Vec<String> = self.regimes.iter().map(regime_tag).collect();
        let _ = writeln!(s, "regimes = {}", regimes.join(", "));
        let subs: Vec<String> = self
            .substitutions
            .iter()
            .map(|(p12, p21)| format!("{p12}:{p21}"))
            .collect();
        let _ = writeln!(s, "substitutions = {}", subs.join(", "));
        if let Some(mc) = self.mc {
            let _ = writeln!(s, "mc_reps = {}", mc.n_reps);
            let _ = writeln!(s, "mc_seed = {}", mc.seed);
        }
        let _ = writeln!(s, "tol = {}", self.tol);
        s
    }
}

/// Short textual tag for a regime, also used in CSV rows.
pub fn regime_tag(regime: &ReplenishmentRegime) -> String {
    match *regime {
        ReplenishmentRegime::Fixed { t } => format!("fixed:{t}"),
        ReplenishmentRegime::Exponential { mu } => format!("exp:{mu}"),
    }
}
