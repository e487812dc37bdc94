//! Experiment configuration: a flat `key = value` file merged with
//! command-line overrides and checked against each command's key list.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sunflower_core::probability::{Engine, McConfig};
use sunflower_core::rational::Rational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown command `{0}`; expected one of: {list}", list = Command::NAMES.join(", "))]
    UnknownCommand(String),
    #[error("unknown key `{key}` for `{command}`; accepted keys: {accepted}")]
    UnknownKey {
        command: String,
        key: String,
        accepted: String,
    },
    #[error("key `{0}` given twice in the config file")]
    DuplicateKey(String),
    #[error("config line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("`{key}` = `{value}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{0}` samples at random; pass --seed <u64> or set `seed = <u64>` in the config file")]
    MissingSeed(String),
    #[error("no command given; pass a subcommand or set `command = <name>` in the config file")]
    MissingCommand,
    #[error("command `{cli}` conflicts with `command = {file}` in the config file")]
    CommandMismatch { cli: String, file: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SunflowerExtract,
    Coverage,
    ClosureDemo,
    HrVerify,
    CliqueVerify,
    CliqueExtract,
    Janson,
    CodePoly,
    SpreadExperiment,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::SunflowerExtract,
        Command::Coverage,
        Command::ClosureDemo,
        Command::HrVerify,
        Command::CliqueVerify,
        Command::CliqueExtract,
        Command::Janson,
        Command::CodePoly,
        Command::SpreadExperiment,
    ];

    pub const NAMES: [&'static str; 9] = [
        "sunflower-extract",
        "coverage",
        "closure-demo",
        "hr-verify",
        "clique-verify",
        "clique-extract",
        "janson",
        "code-poly",
        "spread-experiment",
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    /// Command-specific keys and their defaults. An empty default means
    /// the key is optional and absent unless given.
    pub fn schema(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::SunflowerExtract => &[
                ("n", "10"),
                ("l", "3"),
                ("r", "3"),
                ("members", "0"),
                ("p", "1/2"),
                ("eps", "1/4"),
                ("b", "1"),
                ("family", ""),
            ],
            Command::Coverage => &[
                ("n", "12"),
                ("members", "6"),
                ("max_size", "4"),
                ("p", "1/2"),
                ("core", ""),
                ("family", ""),
            ],
            Command::ClosureDemo => &[
                ("n", "6"),
                ("members", "4"),
                ("max_size", "3"),
                ("eps", "1/10"),
                ("c", "2"),
                ("noise", "1/2"),
                ("b", "1"),
                ("function", ""),
                ("circuit", ""),
            ],
            Command::HrVerify => &[("n", "11"), ("c", "2"), ("k", "3")],
            Command::CliqueVerify => &[
                ("n", "64"),
                ("k", "4"),
                ("p", "1/16"),
                ("bound", "3/4"),
                ("delta", "1/12"),
                ("t", "0.5,1,2,5,10,20"),
                ("max_l", "16"),
            ],
            Command::CliqueExtract => &[
                ("n", "8"),
                ("l", "3"),
                ("members", "56"),
                ("p", "3/4"),
                ("q", "3/4"),
                ("eps", "1/4"),
                ("family", ""),
            ],
            Command::Janson => &[
                ("n", "6"),
                ("l", "3"),
                ("members", "4"),
                ("p", "1/2"),
                ("q", "1/2"),
                ("trials", "20"),
            ],
            Command::CodePoly => &[
                ("q", "11"),
                ("n", "9"),
                ("dim", "3"),
                ("merges", "8"),
                ("code", ""),
            ],
            Command::SpreadExperiment => &[
                ("n", "12"),
                ("l", "3"),
                ("members", "30"),
                ("p", "1/2"),
                ("trials", "20"),
            ],
        }
    }

    /// Whether the command draws random instances even under the exact engine.
    pub fn randomized(self, params: &BTreeMap<String, String>) -> bool {
        let given = |k: &str| params.get(k).is_some_and(|v| !v.is_empty());
        match self {
            Command::SunflowerExtract | Command::Coverage | Command::CliqueExtract => {
                !given("family")
            }
            Command::ClosureDemo => !given("function"),
            Command::CodePoly | Command::HrVerify => false,
            Command::CliqueVerify | Command::Janson | Command::SpreadExperiment => true,
        }
    }

    /// Engine used when none is requested.
    pub fn default_engine(self) -> EngineChoice {
        match self {
            Command::CliqueVerify => EngineChoice::Mc,
            _ => EngineChoice::Exact,
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::NAMES
            .iter()
            .position(|&name| name == s)
            .map(|i| Self::ALL[i])
            .ok_or_else(|| ConfigError::UnknownCommand(s.to_string()))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Exact,
    Mc,
}

impl FromStr for EngineChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(EngineChoice::Exact),
            "mc" => Ok(EngineChoice::Mc),
            _ => Err("expected `exact` or `mc`".into()),
        }
    }
}

/// Keys accepted by every command.
pub const COMMON_KEYS: [&str; 6] = ["command", "seed", "samples", "confidence", "engine", "out"];

pub const DEFAULT_SAMPLES: u64 = 10_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// A fully resolved experiment: every command key carries a value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub engine: EngineChoice,
    pub samples: u64,
    pub confidence: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        };
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        }
        if out
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(ConfigError::DuplicateKey(key.to_string()));
        }
    }
    Ok(out)
}

fn bad(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    /// Resolves a command and a flat key map (file entries already merged
    /// with overrides) into a config, rejecting unknown keys.
    pub fn resolve(
        command: Option<Command>,
        mut entries: BTreeMap<String, String>,
    ) -> Result<Self, ConfigError> {
        let file_command = entries.remove("command");
        let command = match (command, file_command) {
            (Some(c), None) => c,
            (None, Some(f)) => f.parse()?,
            (Some(c), Some(f)) => {
                if f.parse::<Command>()? != c {
                    return Err(ConfigError::CommandMismatch {
                        cli: c.to_string(),
                        file: f,
                    });
                }
                c
            }
            (None, None) => return Err(ConfigError::MissingCommand),
        };
        let schema = command.schema();
        if let Some(key) = entries
            .keys()
            .find(|k| !COMMON_KEYS.contains(&k.as_str()) && !schema.iter().any(|(s, _)| s == k))
        {
            let accepted: Vec<&str> = COMMON_KEYS[1..]
                .iter()
                .copied()
                .chain(schema.iter().map(|(k, _)| *k))
                .collect();
            return Err(ConfigError::UnknownKey {
                command: command.to_string(),
                key: key.clone(),
                accepted: accepted.join(", "),
            });
        }

        let seed = match entries.remove("seed") {
            Some(v) => Some(
                v.parse::<u64>()
                    .map_err(|e| bad("seed", &v, e.to_string()))?,
            ),
            None => None,
        };
        let samples = match entries.remove("samples") {
            Some(v) => v
                .parse::<u64>()
                .map_err(|e| bad("samples", &v, e.to_string()))?,
            None => DEFAULT_SAMPLES,
        };
        if samples < 100 {
            return Err(bad(
                "samples",
                &samples.to_string(),
                "at least 100 samples are needed",
            ));
        }
        let confidence = match entries.remove("confidence") {
            Some(v) => {
                let c = v
                    .parse::<f64>()
                    .map_err(|e| bad("confidence", &v, e.to_string()))?;
                if !(c > 0.0 && c < 1.0) {
                    return Err(bad("confidence", &v, "must lie strictly between 0 and 1"));
                }
                c
            }
            None => DEFAULT_CONFIDENCE,
        };
        let engine = match entries.remove("engine") {
            Some(v) => v.parse().map_err(|e: String| bad("engine", &v, e))?,
            None => command.default_engine(),
        };
        let out = entries
            .remove("out")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from);

        let mut params = BTreeMap::new();
        for &(key, default) in schema {
            let value = entries.remove(key).unwrap_or_else(|| default.to_string());
            params.insert(key.to_string(), value);
        }
        if seed.is_none() && (engine == EngineChoice::Mc || command.randomized(&params)) {
            return Err(ConfigError::MissingSeed(command.to_string()));
        }
        Ok(Self {
            command,
            params,
            seed,
            engine,
            samples,
            confidence,
            out,
        })
    }

    fn raw(&self, key: &str) -> &str {
        self.params.get(key).map(String::as_str).unwrap_or("")
    }

    /// The value of an optional key, `None` when left empty.
    pub fn optional(&self, key: &str) -> Option<&str> {
        Some(self.raw(key)).filter(|v| !v.is_empty())
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| bad(key, v, "expected a non-negative integer"))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| bad(key, v, "expected a non-negative integer"))
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.raw(key);
        parse_rational(v)
            .map(|r| sunflower_core::rational::to_f64(&r))
            .map_err(|e| bad(key, v, e))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.raw(key);
        v.split(',')
            .map(|item| {
                parse_rational(item.trim())
                    .map(|r| sunflower_core::rational::to_f64(&r))
                    .map_err(|e| bad(key, v, e))
            })
            .collect()
    }

    pub fn rational(&self, key: &str) -> Result<Rational, ConfigError> {
        let v = self.raw(key);
        parse_rational(v).map_err(|e| bad(key, v, e))
    }

    /// A rational strictly between 0 and 1.
    pub fn probability(&self, key: &str) -> Result<Rational, ConfigError> {
        let r = self.rational(key)?;
        if r > Rational::zero() && r < Rational::one() {
            Ok(r)
        } else {
            Err(bad(key, self.raw(key), "must lie strictly between 0 and 1"))
        }
    }

    /// The seed, or zero when the run is fully deterministic without one.
    pub fn seed_or_zero(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn mc_config(&self) -> McConfig {
        McConfig::new(self.samples, self.confidence, self.seed_or_zero())
    }

    pub fn engine(&self) -> Engine {
        match self.engine {
            EngineChoice::Exact => Engine::exact(),
            EngineChoice::Mc => Engine::MonteCarlo(self.mc_config()),
        }
    }
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.25` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    let int = |s: &str| -> Result<BigInt, String> {
        s.parse::<BigInt>()
            .map_err(|_| format!("`{s}` is not an integer"))
    };
    if let Some((num, den)) = text.split_once('/') {
        let den = int(den.trim())?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(Rational::new(int(num.trim())?, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 30 {
            return Err(format!("`{text}` is not a decimal number"));
        }
        let negative = whole.starts_with('-');
        let whole = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            int(whole)?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mut num = whole.abs() * &scale + int(frac)?;
        if negative {
            num = -num;
        }
        return Ok(Rational::new(num, scale));
    }
    Ok(Rational::from_integer(int(text)?))
}
