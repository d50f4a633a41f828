//! Run configuration: defaults, an optional TOML file, then flag overrides.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use tree_shapley::analysis::{DEFAULT_CONVEX_LIMIT, DEFAULT_CORE_LIMIT};
use tree_shapley::io::parse_rational;
use tree_shapley::shapley::DEFAULT_BRUTEFORCE_LIMIT;
use tree_shapley::{MechanismSpec, Rational};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MechanismName {
    Shapley,
    ReferAFriend,
    Geometric,
}

impl FromStr for MechanismName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shapley" => Ok(MechanismName::Shapley),
            "refer-a-friend" | "refer_a_friend" | "referafriend" | "dropbox" => Ok(MechanismName::ReferAFriend),
            "geometric" => Ok(MechanismName::Geometric),
            other => Err(CliError::Config(format!("unknown mechanism {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Records,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table" => Ok(OutputFormat::Table),
            "records" | "jsonl" | "json" => Ok(OutputFormat::Records),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(CliError::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mechanisms: Vec<MechanismName>,
    pub unit: Rational,
    pub root_adjust: bool,
    pub ratio: Rational,
    pub normalize: bool,
    pub referrer_share: Rational,
    pub limit_bruteforce: usize,
    pub limit_core: usize,
    pub limit_convex: usize,
    pub format: OutputFormat,
    /// Print exact rationals instead of rounded integers.
    pub exact: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mechanisms: vec![MechanismName::Shapley],
            unit: Rational::from_integer(1.into()),
            root_adjust: false,
            ratio: Rational::new(1.into(), 2.into()),
            normalize: true,
            referrer_share: Rational::new(1.into(), 2.into()),
            limit_bruteforce: DEFAULT_BRUTEFORCE_LIMIT,
            limit_core: DEFAULT_CORE_LIMIT,
            limit_convex: DEFAULT_CONVEX_LIMIT,
            format: OutputFormat::Table,
            exact: false,
        }
    }
}

/// Every field optional; rationals are strings (`"1/2"`, `"0.5"`) or integers.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigOverrides {
    pub mechanisms: Option<Vec<String>>,
    pub unit: Option<RationalField>,
    pub root_adjust: Option<bool>,
    pub ratio: Option<RationalField>,
    pub normalize: Option<bool>,
    pub referrer_share: Option<RationalField>,
    pub limit_bruteforce: Option<usize>,
    pub limit_core: Option<usize>,
    pub limit_convex: Option<usize>,
    pub format: Option<String>,
    pub exact: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RationalField {
    Int(i64),
    Text(String),
}

impl RationalField {
    fn parse(&self) -> Result<Rational, CliError> {
        match self {
            RationalField::Int(v) => Ok(Rational::from_integer((*v).into())),
            RationalField::Text(s) => parse_rational(s).map_err(|e| CliError::Config(e.to_string())),
        }
    }
}

impl RunConfig {
    pub fn from_toml(doc: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        cfg.apply(&toml::from_str(doc).map_err(|e| CliError::Config(e.to_string()))?)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let doc = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::from_toml(&doc)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) -> Result<(), CliError> {
        if let Some(m) = &o.mechanisms {
            self.mechanisms = m.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        }
        if let Some(x) = &o.unit {
            self.unit = x.parse()?;
        }
        if let Some(x) = o.root_adjust {
            self.root_adjust = x;
        }
        if let Some(x) = &o.ratio {
            self.ratio = x.parse()?;
        }
        if let Some(x) = o.normalize {
            self.normalize = x;
        }
        if let Some(x) = &o.referrer_share {
            self.referrer_share = x.parse()?;
        }
        if let Some(x) = o.limit_bruteforce {
            self.limit_bruteforce = x;
        }
        if let Some(x) = o.limit_core {
            self.limit_core = x;
        }
        if let Some(x) = o.limit_convex {
            self.limit_convex = x;
        }
        if let Some(x) = &o.format {
            self.format = x.parse()?;
        }
        if let Some(x) = o.exact {
            self.exact = x;
        }
        Ok(())
    }

    /// Mechanism specs in the configured order, validated.
    pub fn specs(&self) -> Result<Vec<MechanismSpec>, CliError> {
        if self.mechanisms.is_empty() {
            return Err(CliError::Config("no mechanism selected".into()));
        }
        self.mechanisms
            .iter()
            .map(|m| {
                let spec = match m {
                    MechanismName::Shapley => MechanismSpec::shapley(self.root_adjust, self.unit.clone()),
                    MechanismName::ReferAFriend => {
                        MechanismSpec::refer_a_friend(self.referrer_share.clone(), self.unit.clone())?
                    }
                    MechanismName::Geometric => {
                        MechanismSpec::geometric(self.ratio.clone(), self.normalize, self.unit.clone())?
                    }
                };
                Ok(spec)
            })
            .collect()
    }
}
