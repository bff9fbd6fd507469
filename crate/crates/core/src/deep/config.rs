use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::game::GameId;
use crate::nn::Bootstrap;
use crate::{Error, Result};

/// Neural solver family member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DeepVariant {
    VrDeepDcfrPlus,
    VrDeepPdcfrPlus,
    VrDeepCfr,
    VrDeepLinearCfr,
    DeepPdcfrPlusNoBaseline,
}

/// How the previous cumulative estimate is carried into the next target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscountKind {
    DcfrPlus,
    None,
    Linear,
}

impl DeepVariant {
    pub const ALL: [DeepVariant; 5] = [
        DeepVariant::VrDeepDcfrPlus,
        DeepVariant::VrDeepPdcfrPlus,
        DeepVariant::VrDeepCfr,
        DeepVariant::VrDeepLinearCfr,
        DeepVariant::DeepPdcfrPlusNoBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeepVariant::VrDeepDcfrPlus => "vr_deep_dcfr_plus",
            DeepVariant::VrDeepPdcfrPlus => "vr_deep_pdcfr_plus",
            DeepVariant::VrDeepCfr => "vr_deep_cfr",
            DeepVariant::VrDeepLinearCfr => "vr_deep_linear_cfr",
            DeepVariant::DeepPdcfrPlusNoBaseline => "deep_pdcfr_plus_no_baseline",
        }
    }

    pub fn uses_prediction(self) -> bool {
        matches!(self, DeepVariant::VrDeepPdcfrPlus | DeepVariant::DeepPdcfrPlusNoBaseline)
    }

    pub fn uses_baseline(self) -> bool {
        self != DeepVariant::DeepPdcfrPlusNoBaseline
    }

    pub fn discount_kind(self) -> DiscountKind {
        match self {
            DeepVariant::VrDeepCfr => DiscountKind::None,
            DeepVariant::VrDeepLinearCfr => DiscountKind::Linear,
            _ => DiscountKind::DcfrPlus,
        }
    }

    pub fn default_alpha(self) -> f64 {
        if self.uses_prediction() {
            2.3
        } else {
            2.0
        }
    }

    /// Exponent of the `(t/T)^gamma` average-strategy weight.
    pub fn default_gamma(self) -> f64 {
        match self.discount_kind() {
            DiscountKind::DcfrPlus => 2.0,
            DiscountKind::Linear => 1.0,
            DiscountKind::None => 0.0,
        }
    }

    pub fn bootstrap(self, alpha: f64) -> Bootstrap {
        match self.discount_kind() {
            DiscountKind::DcfrPlus => Bootstrap::DiscountClip { alpha },
            DiscountKind::None => Bootstrap::Plain,
            DiscountKind::Linear => Bootstrap::Linear,
        }
    }
}

impl fmt::Display for DeepVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DeepVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DeepVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}

/// Tunable settings, named as in the usual neural CFR configuration tables.
/// Unset keys take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparameters {
    pub num_iterations: u64,
    pub num_traversals: u64,
    pub advantage_buffer_size: usize,
    pub ave_policy_buffer_size: usize,
    pub history_value_buffer_size: usize,
    pub learning_rate: f64,
    pub advantage_network_train_steps: usize,
    pub advantage_network_batch_size: usize,
    pub ave_policy_network_train_steps: usize,
    pub ave_policy_batch_size: usize,
    pub history_value_network_train_steps: usize,
    pub history_value_batch_size: usize,
    pub reinitialize_advantage_networks: bool,
    pub reinitialize_imm_regret_networks: bool,
    pub num_layers: usize,
    pub num_hiddens: usize,
    pub use_regret_matching_argmax: bool,
    pub epsilon: f64,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    /// Evaluate every this many iterations; 0 means at every doubling.
    pub eval_every: u64,
    /// Record elapsed seconds in logs; off gives reproducible output.
    pub log_wall_time: bool,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            num_iterations: 500,
            num_traversals: 10_000,
            advantage_buffer_size: 1_000_000,
            ave_policy_buffer_size: 1_000_000,
            history_value_buffer_size: 1_000_000,
            learning_rate: 0.001,
            advantage_network_train_steps: 750,
            advantage_network_batch_size: 2048,
            ave_policy_network_train_steps: 5000,
            ave_policy_batch_size: 2048,
            history_value_network_train_steps: 10_000,
            history_value_batch_size: 2048,
            reinitialize_advantage_networks: false,
            reinitialize_imm_regret_networks: true,
            num_layers: 3,
            num_hiddens: 64,
            use_regret_matching_argmax: true,
            epsilon: 0.6,
            alpha: None,
            gamma: None,
            eval_every: 0,
            log_wall_time: true,
        }
    }
}

impl Hyperparameters {
    pub fn from_toml(text: &str) -> Result<Self> {
        let hp: Hyperparameters = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        hp.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(self) -> Result<Self> {
        let bad = |what: &str| Err(Error::Config(format!("{what} must be positive")));
        let counts = [
            ("num_iterations", self.num_iterations as usize),
            ("num_traversals", self.num_traversals as usize),
            ("advantage_buffer_size", self.advantage_buffer_size),
            ("ave_policy_buffer_size", self.ave_policy_buffer_size),
            ("history_value_buffer_size", self.history_value_buffer_size),
            ("advantage_network_batch_size", self.advantage_network_batch_size),
            ("ave_policy_batch_size", self.ave_policy_batch_size),
            ("history_value_batch_size", self.history_value_batch_size),
            ("num_hiddens", self.num_hiddens),
        ];
        for (name, v) in counts {
            if v == 0 {
                return bad(name);
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        for (name, v) in [("alpha", self.alpha), ("gamma", self.gamma)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} must be a nonnegative number, got {v}")));
                }
            }
        }
        Ok(self)
    }
}

/// Everything one seeded neural run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub game: GameId,
    pub variant: DeepVariant,
    pub seed: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub hp: Hyperparameters,
}

impl RunConfig {
    pub fn new(game: GameId, variant: DeepVariant, seed: u64, hp: Hyperparameters) -> Result<Self> {
        let hp = hp.validate()?;
        Ok(RunConfig {
            game,
            variant,
            seed,
            alpha: hp.alpha.unwrap_or(variant.default_alpha()),
            gamma: hp.gamma.unwrap_or(variant.default_gamma()),
            hp,
        })
    }

    /// Parses hyperparameters from TOML text.
    pub fn parse(game: GameId, variant: DeepVariant, seed: u64, text: &str) -> Result<Self> {
        Self::new(game, variant, seed, Hyperparameters::from_toml(text)?)
    }

    pub fn episodes_per_iteration(&self) -> u64 {
        2 * self.hp.num_traversals
    }

    /// Iterations at which the average strategy is evaluated.
    pub fn eval_iterations(&self) -> Vec<u64> {
        eval_schedule(self.hp.num_iterations, self.hp.eval_every)
    }
}

/// Checkpoints in `1..=last`: every `every` iterations (plus the first), or
/// at each power of two when `every` is 0. The last iteration is always
/// included.
pub fn eval_schedule(last: u64, every: u64) -> Vec<u64> {
    let mut out: Vec<u64> = if every > 0 {
        (1..=last).filter(|t| *t == 1 || t % every == 0).collect()
    } else {
        std::iter::successors(Some(1u64), |t| Some(t * 2))
            .take_while(|&t| t <= last)
            .collect()
    };
    if last > 0 && out.last() != Some(&last) {
        out.push(last);
    }
    out
}
