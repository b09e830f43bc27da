//! Popcount thresholding: distinguish `x ~ D0` (each bit set with
//! probability `(1-2γ)k/m`) from `x ~ D1` (probability `(1+2γ)k/m`).

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngHandle;

/// Fixed-length bit string packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self::zeros(len);
        for i in 0..len {
            b.set(i, true);
        }
        b
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &bit) in bits.iter().enumerate() {
            b.set(i, bit);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 0-based position `i`.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

/// ASCII `0`/`1`, most significant position first.
impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("bit string: unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }
}

/// Number of set bits, `|x|_1`.
pub fn popcount(x: &BitString) -> u64 {
    x.count_ones()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtpParams {
    pub m: usize,
    pub k: u64,
    pub gamma: f64,
    pub delta: f64,
}

impl PtpParams {
    pub fn new(m: usize, k: u64, gamma: f64, delta: f64) -> Self {
        Self { m, k, gamma, delta }
    }

    /// `(1-2γ)·k/m`
    pub fn p0(&self) -> f64 {
        (1.0 - 2.0 * self.gamma) * self.k as f64 / self.m as f64
    }

    /// `(1+2γ)·k/m`
    pub fn p1(&self) -> f64 {
        (1.0 + 2.0 * self.gamma) * self.k as f64 / self.m as f64
    }

    pub fn rate(&self, label: u8) -> f64 {
        if label == 0 {
            self.p0()
        } else {
            self.p1()
        }
    }

    /// Smallest admissible `k`: `12·ln(1/δ)/γ²`.
    pub fn k_lower_bound(&self) -> f64 {
        12.0 * (1.0 / self.delta).ln() / (self.gamma * self.gamma)
    }

    /// Checks `γ ∈ (0, 1/4)`, `δ ∈ (0, 1)`, `12·ln(1/δ)/γ² <= k <= m/6` and
    /// that both bit rates lie in `(0, 1/3)`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(format!("ptp: {msg}")));
        if self.m == 0 || self.k == 0 {
            return bad(format!("m and k must be positive (m={}, k={})", self.m, self.k));
        }
        if !(self.gamma > 0.0 && self.gamma < 0.25) {
            return bad(format!("gamma={} outside (0, 1/4)", self.gamma));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta={} outside (0, 1)", self.delta));
        }
        if (self.k as f64) < self.k_lower_bound() {
            return bad(format!(
                "k={} below 12 ln(1/delta)/gamma^2 = {:.1}",
                self.k,
                self.k_lower_bound()
            ));
        }
        if self.k as f64 > self.m as f64 / 6.0 {
            return bad(format!("k={} above m/6 = {:.1}", self.k, self.m as f64 / 6.0));
        }
        for p in [self.p0(), self.p1()] {
            if !(p > 0.0 && p < 1.0 / 3.0) {
                return bad(format!("bit rate {p} outside (0, 1/3)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtpInstance {
    pub x: BitString,
    /// Source distribution, 0 for `D0` and 1 for `D1`. Never shown to solvers.
    pub label: u8,
}

impl PtpInstance {
    pub fn new(x: BitString, label: u8) -> Self {
        Self { x, label }
    }

    /// Instance file: header `m k gamma label`, then the bits as ASCII.
    pub fn to_file_string(&self, params: &PtpParams) -> String {
        format!(
            "{} {} {} {}\n{}\n",
            self.x.len(),
            params.k,
            params.gamma,
            self.label,
            self.x
        )
    }

    /// Parses an instance file. The returned params carry `delta = NaN`;
    /// the file does not record it.
    pub fn parse_file(text: &str) -> Result<(Self, PtpParams)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("ptp file: missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "ptp file: header needs `m k gamma label`, got {header:?}"
            )));
        }
        let p = |i: usize| Error::Parse(format!("ptp file: bad header field {:?}", fields[i]));
        let m: usize = fields[0].parse().map_err(|_| p(0))?;
        let k: u64 = fields[1].parse().map_err(|_| p(1))?;
        let gamma: f64 = fields[2].parse().map_err(|_| p(2))?;
        let label: u8 = fields[3].parse().map_err(|_| p(3))?;
        if label > 1 {
            return Err(p(3));
        }
        let x: BitString = lines.collect::<String>().parse()?;
        if x.len() != m {
            return Err(Error::Parse(format!(
                "ptp file: header says m={m}, found {} bits",
                x.len()
            )));
        }
        Ok((Self { x, label }, PtpParams::new(m, k, gamma, f64::NAN)))
    }
}

/// Samples an instance. With `label = None` the label is a fair coin.
pub fn sample_ptp(params: &PtpParams, label: Option<u8>, handle: &RngHandle) -> Result<PtpInstance> {
    params.validate()?;
    if matches!(label, Some(l) if l > 1) {
        return Err(Error::invalid("ptp label must be 0 or 1"));
    }
    let mut rng = handle.rng();
    let label = label.unwrap_or_else(|| rng.random_range(0..=1));
    let p = params.rate(label);
    let mut x = BitString::zeros(params.m);
    for i in 0..params.m {
        if rng.random_bool(p) {
            x.set(i, true);
        }
    }
    Ok(PtpInstance { x, label })
}
