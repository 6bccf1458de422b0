//! Run configuration: a flat `key = value` file overlaid by command-line flags.
//!
//! ```toml
//! seed = 7
//! K = 10000
//! num_nodes = 3
//! pairs = "0-1,1-2"
//! H2 = 500
//! H3 = 500
//! gamma = 0.01
//! mu = 0.01
//! loss_db = 1.0        # or T = 0.79, not both
//! attack = "path"      # none | path | message | both
//! eta_path = 0.2
//! trials = 1
//! traffic = "full"     # full | silent
//! ```

use std::path::Path;

use serde::Deserialize;
use sqr_core::adversary::{AttackConfig, AttackMode};
use sqr_core::channel::ChannelModel;
use sqr_core::protocol::NodePair;
use sqr_core::simulation::{SimulationConfig, ThresholdPolicy, Traffic};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    Transmissivity(f64),
    Db(f64),
}

/// Every field is optional so a file and a set of flags can be merged; unset
/// fields fall back to [`SimulationConfig::default`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub k: Option<u64>,
    pub num_nodes: Option<u32>,
    pub pairs: Option<Vec<NodePair>>,
    pub h2: Option<u64>,
    pub h3: Option<u64>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub loss: Option<Loss>,
    pub attack: Option<AttackMode>,
    pub eta_path: Option<f64>,
    pub eta_msg: Option<f64>,
    pub trials: Option<u64>,
    pub threshold2: Option<f64>,
    pub threshold3: Option<f64>,
    pub traffic: Option<Traffic>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    #[serde(rename = "K")]
    k: Option<u64>,
    num_nodes: Option<u32>,
    pairs: Option<String>,
    #[serde(rename = "H2")]
    h2: Option<u64>,
    #[serde(rename = "H3")]
    h3: Option<u64>,
    gamma: Option<f64>,
    mu: Option<f64>,
    #[serde(rename = "T")]
    t: Option<f64>,
    loss_db: Option<f64>,
    attack: Option<String>,
    eta_path: Option<f64>,
    eta_msg: Option<f64>,
    trials: Option<u64>,
    threshold2: Option<f64>,
    threshold3: Option<f64>,
    traffic: Option<String>,
}

fn config_err(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

pub fn parse_pairs(s: &str) -> Result<Vec<NodePair>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<NodePair>().map_err(|e| config_err("pairs", format!("`{p}`: {e}"))))
        .collect()
}

pub fn parse_attack(s: &str) -> Result<AttackMode, CliError> {
    s.parse().map_err(|e| config_err("attack", format!("{e}")))
}

pub fn parse_traffic(s: &str) -> Result<Traffic, CliError> {
    match s {
        "full" => Ok(Traffic::Full),
        "silent" => Ok(Traffic::Silent),
        other => Err(config_err("traffic", format!("expected `full` or `silent`, got `{other}`"))),
    }
}

fn probability(key: &str, v: Option<f64>) -> Result<Option<f64>, CliError> {
    match v {
        Some(x) if !(0.0..=1.0).contains(&x) => Err(config_err(key, format!("must lie in [0, 1], got {x}"))),
        other => Ok(other),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let file: FileConfig = toml::from_str(text).map_err(|e| CliError::Usage(format!("config file: {e}")))?;
        let loss = match (file.t, file.loss_db) {
            (Some(_), Some(_)) => return Err(config_err("T", "`T` and `loss_db` are mutually exclusive")),
            (Some(t), None) => Some(Loss::Transmissivity(t)),
            (None, Some(db)) => Some(Loss::Db(db)),
            (None, None) => None,
        };
        Ok(Self {
            seed: file.seed,
            k: file.k,
            num_nodes: file.num_nodes,
            pairs: file.pairs.as_deref().map(parse_pairs).transpose()?,
            h2: file.h2,
            h3: file.h3,
            gamma: file.gamma,
            mu: file.mu,
            loss,
            attack: file.attack.as_deref().map(parse_attack).transpose()?,
            eta_path: file.eta_path,
            eta_msg: file.eta_msg,
            trials: file.trials,
            threshold2: file.threshold2,
            threshold3: file.threshold3,
            traffic: file.traffic.as_deref().map(parse_traffic).transpose()?,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Fields set in `over` replace ours.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            seed: over.seed.or(self.seed),
            k: over.k.or(self.k),
            num_nodes: over.num_nodes.or(self.num_nodes),
            pairs: over.pairs.or(self.pairs),
            h2: over.h2.or(self.h2),
            h3: over.h3.or(self.h3),
            gamma: over.gamma.or(self.gamma),
            mu: over.mu.or(self.mu),
            loss: over.loss.or(self.loss),
            attack: over.attack.or(self.attack),
            eta_path: over.eta_path.or(self.eta_path),
            eta_msg: over.eta_msg.or(self.eta_msg),
            trials: over.trials.or(self.trials),
            threshold2: over.threshold2.or(self.threshold2),
            threshold3: over.threshold3.or(self.threshold3),
            traffic: over.traffic.or(self.traffic),
        }
    }

    pub fn channel(&self) -> Result<ChannelModel, CliError> {
        let gamma = probability("gamma", self.gamma)?.unwrap_or(0.0);
        let mu = probability("mu", self.mu)?.unwrap_or(0.0);
        let t = match self.loss {
            None => 1.0,
            Some(Loss::Transmissivity(t)) => probability("T", Some(t))?.unwrap_or(1.0),
            Some(Loss::Db(db)) => {
                if !(db >= 0.0) || !db.is_finite() {
                    return Err(config_err("loss_db", format!("must be a finite value >= 0, got {db}")));
                }
                sqr_core::channel::loss_db_to_t(db)?
            }
        };
        Ok(ChannelModel::new(t, gamma, mu)?)
    }

    pub fn attack_config(&self) -> Result<AttackConfig, CliError> {
        let mode = self.attack.unwrap_or(AttackMode::None);
        let eta_path = probability("eta_path", self.eta_path)?;
        let eta_msg = probability("eta_msg", self.eta_msg)?;
        let needs_path = matches!(mode, AttackMode::Path | AttackMode::Both);
        let needs_msg = matches!(mode, AttackMode::Message | AttackMode::Both);
        if needs_path && eta_path.is_none() {
            return Err(config_err("eta_path", format!("required for attack = {mode}")));
        }
        if needs_msg && eta_msg.is_none() {
            return Err(config_err("eta_msg", format!("required for attack = {mode}")));
        }
        Ok(AttackConfig::new(mode, eta_path.unwrap_or(0.0), eta_msg.unwrap_or(0.0))?)
    }

    pub fn thresholds(&self) -> Result<ThresholdPolicy, CliError> {
        match (self.threshold2, self.threshold3) {
            (None, None) => Ok(ThresholdPolicy::default()),
            (Some(type2), Some(type3)) => {
                for (key, v) in [("threshold2", type2), ("threshold3", type3)] {
                    if !(0.0..=0.5).contains(&v) {
                        return Err(config_err(key, format!("must lie in [0, 0.5], got {v}")));
                    }
                }
                Ok(ThresholdPolicy::Fixed { type2, type3 })
            }
            (Some(_), None) => Err(config_err("threshold3", "must be set together with threshold2")),
            (None, Some(_)) => Err(config_err("threshold2", "must be set together with threshold3")),
        }
    }

    pub fn to_simulation(&self) -> Result<SimulationConfig, CliError> {
        let d = SimulationConfig::default();
        let config = SimulationConfig {
            seed: self.seed.unwrap_or(d.seed),
            k: self.k.unwrap_or(d.k),
            num_nodes: self.num_nodes.unwrap_or(d.num_nodes),
            pairs: self.pairs.clone().unwrap_or(d.pairs),
            h2: self.h2.unwrap_or(d.h2),
            h3: self.h3.unwrap_or(d.h3),
            channel: self.channel()?,
            link_overrides: d.link_overrides,
            attack: self.attack_config()?,
            rounds: self.trials.unwrap_or(d.rounds),
            traffic: self.traffic.unwrap_or(d.traffic),
            thresholds: self.thresholds()?,
        };
        if config.k == 0 {
            return Err(config_err("K", "must be at least 1"));
        }
        if config.h2 + config.h3 > config.k {
            return Err(config_err(
                "K",
                format!("must be at least H2 + H3 = {}, got {}", config.h2 + config.h3, config.k),
            ));
        }
        if config.rounds == 0 {
            return Err(config_err("trials", "must be at least 1"));
        }
        if config.pairs.is_empty() {
            return Err(config_err("pairs", "at least one pair is required"));
        }
        if let Some(p) = config
            .pairs
            .iter()
            .find(|p| p.sender >= config.num_nodes || p.receiver >= config.num_nodes)
        {
            return Err(config_err(
                "pairs",
                format!("pair {p} references a node outside 0..{} (num_nodes)", config.num_nodes),
            ));
        }
        config.validate()?;
        Ok(config)
    }
}
