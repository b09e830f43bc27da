//! Synthetic arrays with a prescribed h-index.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngHandle;

/// How the `n - h` entries below the threshold are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowProfile {
    /// i.i.d. uniform on `[0, h-1]` (on `{0}` when `h <= 1`).
    #[default]
    Uniform,
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub h: usize,
    pub high_value: u64,
    pub low_profile: LowProfile,
}

impl GenSpec {
    /// `high_value` defaults to `n`, the largest value that survives the cap.
    pub fn new(n: usize, h: usize) -> Self {
        Self {
            n,
            h,
            high_value: n as u64,
            low_profile: LowProfile::Uniform,
        }
    }

    pub fn with_high_value(mut self, high_value: u64) -> Self {
        self.high_value = high_value;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("gen: n must be >= 1"));
        }
        if self.h > self.n {
            return Err(Error::invalid(format!("gen: h={} exceeds n={}", self.h, self.n)));
        }
        if self.high_value < self.h as u64 {
            return Err(Error::invalid(format!(
                "gen: high={} below h={}",
                self.high_value, self.h
            )));
        }
        Ok(())
    }
}

/// Parses `n=...,h=...[,high=...][,low=uniform|zeros]`.
impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mut n, mut h, mut high, mut low) = (None, None, None, LowProfile::Uniform);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("gen: expected key=value, got {part:?}")))?;
            let num = || {
                value
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("gen: {key}={value}: {e}")))
            };
            match key {
                "n" => n = Some(num()? as usize),
                "h" => h = Some(num()? as usize),
                "high" => high = Some(num()?),
                "low" => {
                    low = match value {
                        "uniform" => LowProfile::Uniform,
                        "zeros" => LowProfile::Zeros,
                        other => return Err(Error::Parse(format!("gen: unknown low profile {other:?}"))),
                    }
                }
                other => return Err(Error::Parse(format!("gen: unknown key {other:?}"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("gen: missing n".into()))?;
        let h = h.ok_or_else(|| Error::Parse("gen: missing h".into()))?;
        let spec = GenSpec {
            n,
            h,
            high_value: high.unwrap_or(n as u64),
            low_profile: low,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let low = match self.low_profile {
            LowProfile::Uniform => "uniform",
            LowProfile::Zeros => "zeros",
        };
        write!(f, "n={},h={},high={},low={}", self.n, self.h, self.high_value, low)
    }
}

/// Exactly `h` entries equal `high_value`, the rest strictly below `h`,
/// positions shuffled. The result has h-index exactly `h`.
pub fn generate_array(spec: &GenSpec, handle: &RngHandle) -> Result<Vec<u64>> {
    spec.validate()?;
    let mut rng = handle.rng();
    let h = spec.h as u64;
    let mut values = Vec::with_capacity(spec.n);
    values.resize(spec.h, spec.high_value);
    for _ in spec.h..spec.n {
        let v = match spec.low_profile {
            LowProfile::Uniform if h > 1 => rng.random_range(0..h),
            _ => 0,
        };
        values.push(v);
    }
    values.shuffle(&mut rng);
    Ok(values)
}
