//! Per-variant update rules for cumulative regret and cumulative strategy.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Cfr,
    CfrPlus,
    LinearCfr,
    Dcfr,
    DcfrPlus,
    PcfrPlus,
    PdcfrPlus,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Cfr,
        Variant::CfrPlus,
        Variant::LinearCfr,
        Variant::Dcfr,
        Variant::DcfrPlus,
        Variant::PcfrPlus,
        Variant::PdcfrPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Cfr => "cfr",
            Variant::CfrPlus => "cfr+",
            Variant::LinearCfr => "linear",
            Variant::Dcfr => "dcfr",
            Variant::DcfrPlus => "dcfr+",
            Variant::PcfrPlus => "pcfr+",
            Variant::PdcfrPlus => "pdcfr+",
        }
    }

    /// Whether stored cumulative regrets are clipped at zero.
    pub fn clips(self) -> bool {
        matches!(
            self,
            Variant::CfrPlus | Variant::DcfrPlus | Variant::PcfrPlus | Variant::PdcfrPlus
        )
    }

    pub fn uses_prediction(self) -> bool {
        matches!(self, Variant::PcfrPlus | Variant::PdcfrPlus)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cfr" => Variant::Cfr,
            "cfr+" | "cfr_plus" => Variant::CfrPlus,
            "linear" | "linear_cfr" => Variant::LinearCfr,
            "dcfr" => Variant::Dcfr,
            "dcfr+" | "dcfr_plus" => Variant::DcfrPlus,
            "pcfr+" | "pcfr_plus" => Variant::PcfrPlus,
            "pdcfr+" | "pdcfr_plus" => Variant::PdcfrPlus,
            _ => return Err(Error::UnknownVariant(s.to_string())),
        })
    }
}

/// A variant together with its exponents.
///
/// `alpha` discounts positive regrets, `beta` negative ones (plain DCFR
/// only) and `gamma` discounts the cumulative strategy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegretUpdateRule {
    pub variant: Variant,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alternating: bool,
}

/// `x^e / (x^e + 1)` with `0^e = 0` for positive `e`.
pub fn discount(x: f64, exponent: f64) -> f64 {
    if x == 0.0 && exponent > 0.0 {
        return 0.0;
    }
    let p = x.powf(exponent);
    p / (p + 1.0)
}

fn check_iteration(t: u64) -> Result<()> {
    if t < 1 {
        return Err(Error::InvalidIteration(t));
    }
    Ok(())
}

impl RegretUpdateRule {
    pub fn new(variant: Variant) -> Self {
        let (alpha, beta, gamma) = match variant {
            Variant::Dcfr => (1.5, 0.0, 2.0),
            Variant::DcfrPlus => (2.0, 0.0, 2.0),
            Variant::PdcfrPlus => (2.3, 0.0, 2.0),
            Variant::PcfrPlus => (0.0, 0.0, 2.0),
            Variant::Cfr | Variant::CfrPlus | Variant::LinearCfr => (0.0, 0.0, 1.0),
        };
        RegretUpdateRule {
            variant,
            alpha,
            beta,
            gamma,
            alternating: variant != Variant::Cfr,
        }
    }

    pub fn validate(self) -> Result<Self> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(self)
    }

    /// Cumulative regret after iteration `t` given the previous cumulative
    /// regret and the instantaneous regret of iteration `t`.
    pub fn update_cumulative_regret(&self, r_prev: f64, r_t: f64, t: u64) -> Result<f64> {
        check_iteration(t)?;
        let tm1 = (t - 1) as f64;
        Ok(match self.variant {
            Variant::Cfr => r_prev + r_t,
            Variant::CfrPlus | Variant::PcfrPlus => (r_prev + r_t).max(0.0),
            Variant::LinearCfr => r_prev + t as f64 * r_t,
            Variant::Dcfr => {
                let d = if r_prev > 0.0 {
                    discount(tm1, self.alpha)
                } else {
                    discount(tm1, self.beta)
                };
                r_prev * d + r_t
            }
            Variant::DcfrPlus | Variant::PdcfrPlus => {
                discounted_plus(r_prev, r_t, discount(tm1, self.alpha))
            }
        })
    }

    /// Optimistic guess of the cumulative regret of iteration `t + 1`.
    pub fn predicted_cumulative_regret(&self, r_t: f64, prediction: f64, t: u64) -> Result<f64> {
        match self.variant {
            Variant::PcfrPlus => Ok((r_t + prediction).max(0.0)),
            Variant::PdcfrPlus => Ok(discounted_plus(r_t, prediction, discount(t as f64, self.alpha))),
            v => Err(Error::InvalidParameter(format!("{v} does not use prediction"))),
        }
    }

    /// Cumulative strategy after adding the reach-weighted probability `w`
    /// of iteration `t`.
    pub fn update_cumulative_strategy(&self, c_prev: f64, w: f64, t: u64) -> Result<f64> {
        check_iteration(t)?;
        if w < 0.0 {
            return Err(Error::NegativeWeight(w));
        }
        Ok(c_prev * self.strategy_decay(t) + self.strategy_weight(t) * w)
    }

    /// Factor applied to the previous cumulative strategy at iteration `t`.
    pub fn strategy_decay(&self, t: u64) -> f64 {
        match self.variant {
            Variant::Cfr | Variant::CfrPlus | Variant::LinearCfr => 1.0,
            _ => ((t - 1) as f64 / t as f64).powf(self.gamma),
        }
    }

    /// Factor applied to the new contribution at iteration `t`.
    pub fn strategy_weight(&self, t: u64) -> f64 {
        match self.variant {
            Variant::CfrPlus | Variant::LinearCfr => t as f64,
            _ => 1.0,
        }
    }
}

/// `max(r_prev * multiplier + r_t, 0)`.
pub fn discounted_plus(r_prev: f64, r_t: f64, multiplier: f64) -> f64 {
    (r_prev * multiplier + r_t).max(0.0)
}

impl fmt::Display for RegretUpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.variant)?;
        match self.variant {
            Variant::Dcfr => write!(f, ":alpha={},beta={},gamma={}", self.alpha, self.beta, self.gamma),
            Variant::DcfrPlus | Variant::PdcfrPlus => {
                write!(f, ":alpha={},gamma={}", self.alpha, self.gamma)
            }
            Variant::PcfrPlus => write!(f, ":gamma={}", self.gamma),
            _ => Ok(()),
        }
    }
}

/// Parses `variant[:alpha=..,beta=..,gamma=..]`.
impl FromStr for RegretUpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let mut rule = RegretUpdateRule::new(name.trim().parse()?);
        for kv in params.into_iter().flat_map(|p| p.split(',')) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{kv}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number `{v}`")))?;
            match k.trim() {
                "alpha" => rule.alpha = v,
                "beta" => rule.beta = v,
                "gamma" => rule.gamma = v,
                other => return Err(Error::InvalidParameter(format!("unknown key `{other}`"))),
            }
        }
        rule.validate()
    }
}

/// Positive parts normalized to sum to one; uniform when none is positive.
pub fn regret_matching(regrets: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; regrets.len()];
    regret_matching_into(regrets, &mut out);
    out
}

pub fn regret_matching_into(regrets: &[f64], out: &mut [f64]) {
    let total: f64 = regrets.iter().map(|r| r.max(0.0)).sum();
    if total > 0.0 {
        for (o, r) in out.iter_mut().zip(regrets) {
            *o = r.max(0.0) / total;
        }
    } else {
        out.fill(1.0 / regrets.len() as f64);
    }
}

/// Like [`regret_matching`] but puts all mass on the largest regret (lowest
/// index on ties) when none is positive.
pub fn regret_matching_argmax(regrets: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; regrets.len()];
    regret_matching_argmax_into(regrets, &mut out);
    out
}

pub fn regret_matching_argmax_into(regrets: &[f64], out: &mut [f64]) {
    if regrets.iter().any(|&r| r > 0.0) {
        regret_matching_into(regrets, out);
        return;
    }
    let mut best = 0;
    for (k, &r) in regrets.iter().enumerate() {
        if r > regrets[best] {
            best = k;
        }
    }
    out.fill(0.0);
    out[best] = 1.0;
}
