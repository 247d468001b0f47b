use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Temperature as a function of the step counter `t >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnnealingSchedule {
    /// `T0 / sqrt(ln(t + 2))`. Tends to zero while `T(t) ln t` diverges.
    InverseSqrtLog { t0: f64 },
    /// `T0 / ln(t + 2)`.
    InverseLog { t0: f64 },
    /// `T0 * ratio^t`. Fast, no convergence guarantee.
    Geometric { t0: f64, ratio: f64 },
    /// Fixed temperature. `0` selects the zero-temperature (argmax) limit.
    Constant { t: f64 },
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        AnnealingSchedule::InverseSqrtLog { t0: 1.0 }
    }
}

impl AnnealingSchedule {
    pub fn temperature(&self, t: u64) -> f64 {
        let t = t as f64;
        match *self {
            AnnealingSchedule::InverseSqrtLog { t0 } => t0 / (t + 2.0).ln().sqrt(),
            AnnealingSchedule::InverseLog { t0 } => t0 / (t + 2.0).ln(),
            AnnealingSchedule::Geometric { t0, ratio } => t0 * ratio.powf(t),
            AnnealingSchedule::Constant { t } => t,
        }
    }

    /// Replaces the initial temperature, leaving the shape alone.
    pub fn with_t0(self, new_t0: f64) -> Self {
        match self {
            AnnealingSchedule::InverseSqrtLog { .. } => AnnealingSchedule::InverseSqrtLog { t0: new_t0 },
            AnnealingSchedule::InverseLog { .. } => AnnealingSchedule::InverseLog { t0: new_t0 },
            AnnealingSchedule::Geometric { ratio, .. } => AnnealingSchedule::Geometric { t0: new_t0, ratio },
            c @ AnnealingSchedule::Constant { .. } => c,
        }
    }
}

impl fmt::Display for AnnealingSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnealingSchedule::InverseSqrtLog { .. } => f.write_str("invsqrtlog"),
            AnnealingSchedule::InverseLog { .. } => f.write_str("invlog"),
            AnnealingSchedule::Geometric { ratio, .. } => write!(f, "geometric:{ratio}"),
            AnnealingSchedule::Constant { t } => write!(f, "const:{t}"),
        }
    }
}

impl FromStr for AnnealingSchedule {
    type Err = String;

    /// Parses `invsqrtlog`, `invlog`, `geometric:<ratio>` or `const:<T>`,
    /// with `T0 = 1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64, String> {
            let a = a.ok_or_else(|| format!("schedule `{head}` needs a value, e.g. `{head}:0.5`"))?;
            a.parse::<f64>().map_err(|e| format!("bad schedule value `{a}`: {e}"))
        };
        let sched = match head {
            "invsqrtlog" => AnnealingSchedule::InverseSqrtLog { t0: 1.0 },
            "invlog" => AnnealingSchedule::InverseLog { t0: 1.0 },
            "geometric" => {
                let ratio = num(arg)?;
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(format!("geometric ratio must lie in (0, 1), got {ratio}"));
                }
                AnnealingSchedule::Geometric { t0: 1.0, ratio }
            }
            "const" => {
                let t = num(arg)?;
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(format!("constant temperature must be >= 0, got {t}"));
                }
                AnnealingSchedule::Constant { t }
            }
            other => return Err(format!("unknown schedule `{other}`")),
        };
        if arg.is_some() && matches!(head, "invsqrtlog" | "invlog") {
            return Err(format!("schedule `{head}` takes no value"));
        }
        Ok(sched)
    }
}
