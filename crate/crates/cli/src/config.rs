//! Run configuration: defaults, `key = value` files, environment and flags merged
//! into one [`RunConfig`] that every report embeds verbatim.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use obscost_core::sobolev::LambdaProfile;
use obscost_kdv::Scheme;
use obscost_lab::Basis;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Report schema version. Bumped on breaking changes to any report layout.
pub const SCHEMA: u32 = 1;

pub const PROFILE_ENV: &str = "OBSCOST_LAMBDA_PROFILE";

/// Every subcommand name.
pub const COMMANDS: [&str; 10] = [
    "constants",
    "gamma",
    "epsilon",
    "cost",
    "critical",
    "simulate",
    "gramian",
    "subspace-m",
    "gramschmidt",
    "verify",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub command: String,
    pub lambda_profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    /// Radius `K` of the H³ ball.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Basis>,
    /// `sine:<n>`, `rough:<seed>` or `subspace`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    /// Sine modes in a rough initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    /// Tolerance for restricting the Gramian to the complement of `M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restrict_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stub_e13: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_override: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_threshold: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            schema: SCHEMA,
            command: command.to_string(),
            lambda_profile: "default".into(),
            length: None,
            k: None,
            k1: None,
            gamma: None,
            tol: None,
            time: None,
            dt: None,
            nodes: None,
            scheme: None,
            basis: None,
            initial: None,
            modes: None,
            restrict_tol: None,
            t1: None,
            delta: None,
            level_cap: None,
            stub_e13: None,
            b_override: None,
            exact_threshold: None,
            output: None,
            csv: None,
        }
    }

    /// Sets one field from its textual form; `at` names the source in errors.
    pub fn set(&mut self, key: &str, value: &str, at: &str) -> Result<(), ConfigError> {
        let value = value.trim().trim_matches('"');
        let field = |msg: String| ConfigError::Field { at: at.to_string(), field: key.to_string(), msg };
        fn num<T: FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
        }
        match key.trim().replace('-', "_").as_str() {
            "command" => {
                if !COMMANDS.contains(&value) {
                    return Err(field(format!("unknown command `{value}`")));
                }
                self.command = value.to_string();
            }
            "schema" => {
                let s: u32 = num(value).map_err(field)?;
                if s != SCHEMA {
                    return Err(field(format!("unsupported schema {s}, expected {SCHEMA}")));
                }
            }
            "lambda_profile" => {
                LambdaProfile::from_str(value).map_err(|e| field(e.to_string()))?;
                self.lambda_profile = value.to_string();
            }
            "length" => self.length = Some(num(value).map_err(field)?),
            "k" => self.k = Some(num(value).map_err(field)?),
            "k1" => self.k1 = Some(num(value).map_err(field)?),
            "gamma" => self.gamma = Some(num(value).map_err(field)?),
            "tol" => self.tol = Some(num(value).map_err(field)?),
            "time" => self.time = Some(num(value).map_err(field)?),
            "dt" => self.dt = Some(num(value).map_err(field)?),
            "nodes" => self.nodes = Some(num(value).map_err(field)?),
            "scheme" => self.scheme = Some(Scheme::from_str(value).map_err(|e| field(e.to_string()))?),
            "basis" => {
                self.basis = Some(match value {
                    "filtered-sine" => Basis::FilteredSine,
                    "nodal" => Basis::Nodal,
                    other => return Err(field(format!("unknown basis `{other}`"))),
                })
            }
            "initial" => {
                Initial::from_str(value).map_err(field)?;
                self.initial = Some(value.to_string());
            }
            "modes" => self.modes = Some(num(value).map_err(field)?),
            "restrict_tol" => self.restrict_tol = Some(num(value).map_err(field)?),
            "t1" => self.t1 = Some(num(value).map_err(field)?),
            "delta" => self.delta = Some(num(value).map_err(field)?),
            "level_cap" => self.level_cap = Some(num(value).map_err(field)?),
            "stub_e13" => self.stub_e13 = Some(num(value).map_err(field)?),
            "b_override" => self.b_override = Some(num(value).map_err(field)?),
            "exact_threshold" => self.exact_threshold = Some(num(value).map_err(field)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "csv" => self.csv = Some(PathBuf::from(value)),
            _ => return Err(ConfigError::UnknownKey { at: at.to_string(), key: key.trim().to_string() }),
        }
        Ok(())
    }

    /// Applies a `key = value` document. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax { line, text: body.to_string() });
            };
            self.set(key.trim(), value, &format!("line {line}"))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        self.apply_text(&text)
    }

    pub fn profile(&self) -> Result<LambdaProfile, ConfigError> {
        LambdaProfile::from_str(&self.lambda_profile)
            .map_err(|e| ConfigError::Invalid { field: "lambda_profile".into(), msg: e.to_string() })
    }

    pub fn require<T: Copy>(&self, v: Option<T>, field: &'static str) -> Result<T, ConfigError> {
        v.ok_or_else(|| ConfigError::Missing { command: self.command.clone(), field })
    }

    pub fn initial_state(&self) -> Result<Option<Initial>, ConfigError> {
        self.initial
            .as_deref()
            .map(|s| Initial::from_str(s).map_err(|msg| ConfigError::Invalid { field: "initial".into(), msg }))
            .transpose()
    }
}

/// Initial data for the flow experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initial {
    Sine(usize),
    Rough(u64),
    /// First member of the flux-invisible subspace.
    Subspace,
}

impl FromStr for Initial {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| v.parse::<u64>().map_err(|e| format!("`{s}`: {e}"));
        match s.split_once(':') {
            Some(("sine", n)) => match parse(n)? {
                0 => Err("sine mode must be at least 1".into()),
                n => Ok(Initial::Sine(n as usize)),
            },
            Some(("rough", seed)) => Ok(Initial::Rough(parse(seed)?)),
            None if s == "subspace" => Ok(Initial::Subspace),
            _ => Err(format!("expected `sine:<n>`, `rough:<seed>` or `subspace`, got `{s}`")),
        }
    }
}
