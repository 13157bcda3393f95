//! Jump-rate functions `g: N -> [0, inf)` with `g(0) = 0` and `g(k) > 0` for `k >= 1`.
//!
//! A [`JumpRate`] carries the metadata the rest of the crate needs: the lower and
//! upper bounds `m_g`, `M_g` over `k >= 1`, the variation bound
//! `g* = sup |g(k+1) - g(k)|`, and the radius of convergence `phi*` of the
//! partition function `Z(phi) = sum phi^j / g(j)!`.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Extension rule for a tabulated rate beyond its last entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailRule {
    /// `g(k) = g(K)` for `k > K`.
    Constant,
    /// `g(k) = g(K) + s (k - K)` with `s = g(K) - g(K-1) > 0`.
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
enum RateKind {
    Constant(f64),
    Linear(f64),
    Alternating,
    Table {
        /// `values[k - 1] = g(k)` for `k = 1..=K`.
        values: Vec<f64>,
        tail: TailRule,
        /// `suffix_min[i] = min(values[i..])`, used for tail ratio bounds.
        suffix_min: Vec<f64>,
        slope: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpRate {
    name: String,
    kind: RateKind,
    min_rate: f64,
    max_rate: Option<f64>,
    variation: f64,
    radius: f64,
    period: usize,
}

impl JumpRate {
    /// `g(k) = c * 1{k >= 1}`: geometric marginals, `phi* = c`.
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidRate(format!("constant rate needs c > 0, got {c}")));
        }
        Ok(Self {
            name: if c == 1.0 { "constant".into() } else { format!("constant({c})") },
            kind: RateKind::Constant(c),
            min_rate: c,
            max_rate: Some(c),
            variation: 0.0,
            radius: c,
            period: 1,
        })
    }

    /// `g(k) = c * k`: Poisson marginals, unbounded, `phi* = inf`.
    pub fn linear(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidRate(format!("linear rate needs c > 0, got {c}")));
        }
        Ok(Self {
            name: if c == 1.0 { "linear".into() } else { format!("linear({c})") },
            kind: RateKind::Linear(c),
            min_rate: c,
            max_rate: None,
            variation: c,
            radius: f64::INFINITY,
            period: 1,
        })
    }

    /// `g(k) = (2 + (-1)^k) / 2` for `k >= 1`: bounded and non-monotone.
    /// The two-step product is `3/4`, so `phi* = sqrt(3)/2`.
    pub fn alternating() -> Self {
        Self {
            name: "alternating".into(),
            kind: RateKind::Alternating,
            min_rate: 0.5,
            max_rate: Some(1.5),
            variation: 1.0,
            radius: 0.75f64.sqrt(),
            period: 2,
        }
    }

    /// Tabulated rate. `values[k - 1] = g(k)` for `k = 1..=K`.
    pub fn table(values: Vec<f64>, tail: TailRule) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidRate("empty rate table".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidRate(format!("g({}) = {v} must be positive and finite", i + 1)));
        }
        let last = *values.last().unwrap();
        let slope = match tail {
            TailRule::Constant => 0.0,
            TailRule::Linear => {
                if values.len() < 2 {
                    return Err(Error::InvalidRate("linear tail needs at least two table entries".into()));
                }
                let s = last - values[values.len() - 2];
                if s <= 0.0 {
                    return Err(Error::InvalidRate(format!("linear tail needs an increasing last step, got slope {s}")));
                }
                s
            }
        };
        let mut suffix_min = values.clone();
        for i in (0..suffix_min.len().saturating_sub(1)).rev() {
            suffix_min[i] = suffix_min[i].min(suffix_min[i + 1]);
        }
        let min_rate = suffix_min[0];
        let max_rate = match tail {
            TailRule::Constant => Some(values.iter().cloned().fold(0.0, f64::max)),
            TailRule::Linear => None,
        };
        let variation = values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(slope, f64::max);
        let radius = match tail {
            TailRule::Constant => last,
            TailRule::Linear => f64::INFINITY,
        };
        Ok(Self {
            name: "table".into(),
            kind: RateKind::Table { values, tail, suffix_min, slope },
            min_rate,
            max_rate,
            variation,
            radius,
            period: 1,
        })
    }

    /// Parse a table file: one `k value` pair per line (k consecutive, starting
    /// at 0 or 1; `g(0)` must be 0 when listed), `#` comments, and one
    /// `tail constant|linear` line.
    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut tail = None;
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap();
            let second = parts.next();
            if parts.next().is_some() {
                return Err(Error::InvalidRate(format!("line {}: expected two fields", lineno + 1)));
            }
            if head == "tail" {
                tail = Some(match second {
                    Some("constant") => TailRule::Constant,
                    Some("linear") => TailRule::Linear,
                    other => {
                        return Err(Error::InvalidRate(format!("line {}: unknown tail rule {other:?}", lineno + 1)))
                    }
                });
                continue;
            }
            let k: u64 = head
                .parse()
                .map_err(|_| Error::InvalidRate(format!("line {}: bad index `{head}`", lineno + 1)))?;
            let v: f64 = second
                .ok_or_else(|| Error::InvalidRate(format!("line {}: missing value", lineno + 1)))?
                .parse()
                .map_err(|_| Error::InvalidRate(format!("line {}: bad value", lineno + 1)))?;
            if k == 0 {
                if v != 0.0 {
                    return Err(Error::InvalidRate(format!("g(0) must be 0, got {v}")));
                }
                continue;
            }
            if k as usize != values.len() + 1 {
                return Err(Error::InvalidRate(format!("line {}: index {k} out of sequence", lineno + 1)));
            }
            values.push(v);
        }
        let tail = tail.ok_or_else(|| Error::InvalidRate("missing `tail constant|linear` line".into()))?;
        Self::table(values, tail)
    }

    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rate = Self::from_table_str(&text)?;
        rate.name = format!("table:{}", path.display());
        Ok(rate)
    }

    /// Catalogue lookup: `constant`, `linear`, `alternating` (with an optional
    /// scale for the first two) or `table:<path>`.
    pub fn from_name(name: &str, scale: f64) -> Result<Self> {
        match name {
            "constant" | "indicator" => Self::constant(scale),
            "linear" | "poisson" => Self::linear(scale),
            "alternating" => Ok(Self::alternating()),
            other => match other.strip_prefix("table:") {
                Some(path) => Self::from_table_file(Path::new(path)),
                None => Err(Error::InvalidRate(format!("unknown rate `{other}`"))),
            },
        }
    }

    #[inline]
    pub fn g(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match &self.kind {
            RateKind::Constant(c) => *c,
            RateKind::Linear(c) => c * k as f64,
            RateKind::Alternating => {
                if k.is_multiple_of(2) {
                    1.5
                } else {
                    0.5
                }
            }
            RateKind::Table { values, tail, slope, .. } => {
                let k = k as usize;
                if k <= values.len() {
                    values[k - 1]
                } else {
                    let last = values[values.len() - 1];
                    match tail {
                        TailRule::Constant => last,
                        TailRule::Linear => last + slope * (k - values.len()) as f64,
                    }
                }
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `m_g = inf_{k>=1} g(k)`.
    pub fn min_rate(&self) -> f64 {
        self.min_rate
    }

    /// `M_g = sup_{k>=1} g(k)`, absent for unbounded rates.
    pub fn max_rate(&self) -> Option<f64> {
        self.max_rate
    }

    pub fn is_bounded(&self) -> bool {
        self.max_rate.is_some()
    }

    /// `g* = sup_{k>=1} |g(k+1) - g(k)|`.
    pub fn variation(&self) -> f64 {
        self.variation
    }

    /// Radius of convergence `phi*` of `Z`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Block length used for the geometric tail bound of the series.
    pub(crate) fn period(&self) -> usize {
        self.period
    }

    /// Upper bound on the block ratio `t_{j+p} / t_j = phi^p / (g(j+1)...g(j+p))`
    /// over all `j >= k`, where `t_j = phi^j / g(j)!` and `p` is [`Self::period`].
    pub(crate) fn block_ratio_bound(&self, phi: f64, k: u64) -> f64 {
        match &self.kind {
            RateKind::Constant(c) => phi / c,
            RateKind::Linear(c) => phi / (c * (k + 1) as f64),
            RateKind::Alternating => phi * phi / 0.75,
            RateKind::Table { values, tail, suffix_min, slope } => {
                let k = k as usize;
                let last = values[values.len() - 1];
                let tail_min = match tail {
                    TailRule::Constant => last,
                    TailRule::Linear => last + slope * (k + 1).saturating_sub(values.len()) as f64,
                };
                let table_min = if k < values.len() { suffix_min[k] } else { f64::INFINITY };
                phi / table_min.min(tail_min)
            }
        }
    }
}

impl JumpRate {
    /// True when the block ratio is the same constant for every `j >= k`, so
    /// the series tail past `k` is an exact geometric sum.
    pub(crate) fn ratio_is_exact_from(&self, k: u64) -> bool {
        match &self.kind {
            RateKind::Constant(_) | RateKind::Alternating => true,
            RateKind::Linear(_) => false,
            RateKind::Table { values, tail, .. } => *tail == TailRule::Constant && k as usize >= values.len(),
        }
    }
}

impl fmt::Display for JumpRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
