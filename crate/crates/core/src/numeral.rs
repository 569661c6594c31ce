//! Base-`q` digit words, read least-significant digit first.
//!
//! A word `d0 d1 ... d(L-1)` denotes `d0 + d1*q + ... + d(L-1)*q^(L-1)`.
//! Reading a word `w` of length `L` and then the digits of `a` yields the
//! integer `a*q^L + value(w)`: prefixes fix the low-order part.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `q^exp`, or a range error if it does not fit in `u64`.
pub fn checked_pow(q: u64, exp: u32) -> Result<u64> {
    q.checked_pow(exp)
        .ok_or_else(|| Error::Range(format!("{q}^{exp} exceeds the 64-bit range")))
}

pub(crate) fn check_base(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::Argument(format!("base must be at least 2, got {q}")));
    }
    if q > u32::MAX as u64 {
        return Err(Error::Argument(format!("base {q} is too large")));
    }
    Ok(())
}

/// Number of words of length at most `len` over `q` digits: `(q^(len+1) - 1)/(q - 1)`.
pub fn words_up_to(q: u64, len: u32) -> Result<u64> {
    let top = checked_pow(q, len)?;
    let mut total: u64 = 0;
    let mut layer: u64 = 1;
    loop {
        total = total
            .checked_add(layer)
            .ok_or_else(|| Error::Range("word count exceeds the 64-bit range".into()))?;
        if layer == top {
            return Ok(total);
        }
        layer *= q;
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitWord {
    base: u64,
    digits: Vec<u32>,
}

impl DigitWord {
    pub fn new(base: u64, digits: Vec<u32>) -> Result<Self> {
        check_base(base)?;
        if let Some(&d) = digits.iter().find(|&&d| d as u64 >= base) {
            return Err(Error::Range(format!("digit {d} out of range for base {base}")));
        }
        Ok(DigitWord { base, digits })
    }

    pub fn empty(base: u64) -> Result<Self> {
        Self::new(base, Vec::new())
    }

    /// The length-`len` word of `value`, zero-padded on the high side.
    pub fn from_value(value: u64, base: u64, len: u32) -> Result<Self> {
        check_base(base)?;
        if let Ok(limit) = checked_pow(base, len) {
            if value >= limit {
                return Err(Error::Range(format!(
                    "{value} does not fit in {len} base-{base} digits"
                )));
            }
        }
        let mut rest = value;
        let digits = (0..len)
            .map(|_| {
                let d = (rest % base) as u32;
                rest /= base;
                d
            })
            .collect();
        Ok(DigitWord { base, digits })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Integer value of the word. Panics if it overflows `u64`; words built
    /// through [`DigitWord::from_value`] never do.
    pub fn value(&self) -> u64 {
        self.digits
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * self.base + d as u64)
    }

    /// The word `self` followed by `suffix`.
    pub fn concat(&self, suffix: &DigitWord) -> Result<DigitWord> {
        if self.base != suffix.base {
            return Err(Error::Argument("cannot concatenate words of different bases".into()));
        }
        let mut digits = self.digits.clone();
        digits.extend_from_slice(&suffix.digits);
        Ok(DigitWord {
            base: self.base,
            digits,
        })
    }

    /// Appends `count` zero digits; the value is unchanged.
    pub fn padded(&self, count: usize) -> DigitWord {
        let mut digits = self.digits.clone();
        digits.resize(self.digits.len() + count, 0);
        DigitWord {
            base: self.base,
            digits,
        }
    }

    /// Parses the serialized form produced by `Display` for a given base.
    pub fn parse(text: &str, base: u64) -> Result<Self> {
        check_base(base)?;
        let bad = || Error::Argument(format!("malformed base-{base} word {text:?}"));
        let digits = if base <= 10 {
            text.chars()
                .map(|c| c.to_digit(10).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?
        } else if text.is_empty() {
            Vec::new()
        } else {
            text.split(',')
                .map(|part| u32::from_str(part.trim()).map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        Self::new(base, digits)
    }
}

/// `value(word)`.
pub fn value_of(word: &DigitWord) -> u64 {
    word.value()
}

/// `to_word(value, q, L)`.
pub fn to_word(value: u64, q: u64, len: u32) -> Result<DigitWord> {
    DigitWord::from_value(value, q, len)
}

/// LSB-first digits for `base <= 10` as a bare digit string, otherwise a
/// comma-separated list.
impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.base <= 10 {
            for d in &self.digits {
                write!(f, "{d}")?;
            }
            Ok(())
        } else {
            let mut first = true;
            for d in &self.digits {
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                write!(f, "{d}")?;
            }
            Ok(())
        }
    }
}

impl fmt::Debug for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DigitWord(q={}, \"{}\")", self.base, self)
    }
}

/// An integer below `q^n` split as `high * q^(n-m) + value(low)` with
/// `low` of length `n - m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitNumber {
    low: DigitWord,
    high: u64,
    n: u32,
    m: u32,
}

impl SplitNumber {
    pub fn new(low: DigitWord, high: u64, n: u32, m: u32) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::Argument(format!("split requires 0 < m < n, got n={n}, m={m}")));
        }
        let q = low.base();
        checked_pow(q, n)?;
        if low.len() != (n - m) as usize {
            return Err(Error::Argument(format!(
                "low word has length {}, expected n-m = {}",
                low.len(),
                n - m
            )));
        }
        let high_limit = checked_pow(q, m)?;
        if high >= high_limit {
            return Err(Error::Range(format!("high part {high} must be below {q}^{m}")));
        }
        Ok(SplitNumber { low, high, n, m })
    }

    pub fn low(&self) -> &DigitWord {
        &self.low
    }

    pub fn high(&self) -> u64 {
        self.high
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `high * q^(n-m) + value(low)`.
    pub fn compose(&self) -> u64 {
        let shift = self.low.base().pow(self.n - self.m);
        self.high * shift + self.low.value()
    }
}
