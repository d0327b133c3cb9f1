//! Run configuration: a versioned TOML tree layered over profile defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rl::SacConfig;
use crate::tasks::EnvConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Simulated peg insertion, 150 steps per episode.
    #[default]
    Sim,
    /// Longer episodes of the physical task setups, 200 steps.
    Real,
}

impl Profile {
    pub fn max_steps(self) -> usize {
        match self {
            Self::Sim => 150,
            Self::Real => 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyStop {
    /// Number of most recent episodes considered.
    pub window: usize,
    /// Stop once this fraction of the window succeeded.
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Checkpoint period in policy steps; 0 keeps only the final one.
    pub checkpoint_every: usize,
    #[serde(default)]
    pub early_stop: Option<EarlyStop>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            checkpoint_every: 10_000,
            early_stop: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub profile: Profile,
    pub seed: u64,
    /// Policy steps of the training session.
    pub total_steps: usize,
    pub env: EnvConfig,
    pub sac: SacConfig,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::for_profile(Profile::Sim)
    }
}

/// Recursively overlays `over` onto `base`.
fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl RunConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let mut env = EnvConfig::default();
        env.episode.max_steps = profile.max_steps();
        Self {
            schema_version: SCHEMA_VERSION,
            profile,
            seed: 0,
            total_steps: 50_000,
            env,
            sac: SacConfig::default(),
            train: TrainConfig::default(),
        }
    }

    /// Parses a configuration file. Keys left out take the defaults of the
    /// file's profile; unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Value = toml::from_str(text)?;
        let table = user
            .as_table()
            .ok_or_else(|| Error::Config("configuration must be a table".into()))?;
        match table
            .get("schema_version")
            .and_then(toml::Value::as_integer)
        {
            Some(v) if v == SCHEMA_VERSION as i64 => {}
            Some(v) => {
                return Err(Error::Config(format!(
                    "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
                )))
            }
            None => return Err(Error::Config("missing integer key schema_version".into())),
        }
        let profile: Profile = match table.get("profile") {
            Some(p) => p.clone().try_into()?,
            None => Profile::Sim,
        };
        let mut merged = toml::Value::try_from(Self::for_profile(profile))?;
        merge(&mut merged, user);
        let cfg: Self = merged.try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        if self.total_steps == 0 {
            return Err(Error::Config("total_steps must be positive".into()));
        }
        if let Some(es) = &self.train.early_stop {
            if es.window == 0 || !(0.0..=1.0).contains(&es.success_rate) {
                return Err(Error::Config(
                    "train.early_stop needs window > 0 and a rate in [0, 1]".into(),
                ));
            }
        }
        self.env.validate()?;
        self.sac.validate()
    }

    /// Hash of everything a trained policy depends on: the environment and
    /// the network shapes. Seeds and step budgets are excluded so a
    /// checkpoint can be evaluated under other seeds.
    pub fn config_hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            env: &'a EnvConfig,
            hidden: &'a [usize],
        }
        let text = toml::to_string(&Hashed {
            env: &self.env,
            hidden: &self.sac.hidden,
        })
        .expect("configuration serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
