use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Fixed-point clock format: `m` integer bits, `n` fraction bits and a sign bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precision {
    pub m: u32,
    pub n: u32,
}

impl Precision {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config("precision needs at least one fraction bit".into()));
        }
        if m + n + 1 > 20 {
            return Err(Error::Config(format!(
                "precision {m}.{n} needs a clock register over 20 qubits"
            )));
        }
        Ok(Self { m, n })
    }

    pub fn n_clock(&self) -> u32 {
        self.m + self.n + 1
    }

    /// Number of clock codes, `2^n_clock`.
    pub fn codes(&self) -> usize {
        1 << self.n_clock()
    }

    /// Smallest representable magnitude, `2^-n`.
    pub fn resolution(&self) -> f64 {
        (-f64::from(self.n)).exp2()
    }

    /// QPE evolution time mapping eigenvalue `lambda` to clock code `lambda * 2^n`.
    pub fn evolution_time(&self) -> f64 {
        2.0 * std::f64::consts::PI * (-f64::from(self.m + 1)).exp2()
    }

    /// Two's-complement value of clock code `k`, scaled by `2^-n`.
    pub fn code_value(&self, k: usize) -> f64 {
        let half = self.codes() / 2;
        let signed = if k >= half {
            k as i64 - self.codes() as i64
        } else {
            k as i64
        };
        signed as f64 * self.resolution()
    }

    /// Representable range `[-2^m, 2^m - 2^-n]`.
    pub fn range(&self) -> (f64, f64) {
        let top = f64::from(self.m).exp2();
        (-top, top - self.resolution())
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.m, self.n)
    }
}

impl FromStr for Precision {
    type Err = Error;

    /// Parses `m.n`, e.g. `3.4`.
    fn from_str(s: &str) -> Result<Self> {
        let (m, n) = s
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::Parse(format!("precision {s:?} is not of the form m.n")))?;
        let m = m.parse().map_err(|e| Error::Parse(format!("precision {s:?}: {e}")))?;
        let n = n.parse().map_err(|e| Error::Parse(format!("precision {s:?}: {e}")))?;
        Self::new(m, n)
    }
}
