use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result, Scalar};

/// Constants pinned for evaluation.
///
/// Config files are flat `key = value` lines; `#` starts a comment. Keys:
/// `c`, `D1`, `D2`, `C0`, `rho`, `product_tolerance`, `prime_cutoff_cap`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundsConfig<T> {
    /// Constant in the exponent of the final lower bound.
    pub c: T,
    #[serde(rename = "D1")]
    pub d1: T,
    #[serde(rename = "D2")]
    pub d2: T,
    #[serde(rename = "C0")]
    pub c0: T,
    /// `r_k = rho * k^2 * ln(k + 1)`.
    pub rho: T,
    /// Relative accuracy of infinite prime products.
    pub product_tolerance: T,
    /// Largest prime enumerated for tails.
    pub prime_cutoff_cap: u64,
}

impl<T: Scalar> Default for BoundsConfig<T> {
    fn default() -> Self {
        BoundsConfig {
            c: T::one(),
            d1: T::one(),
            d2: T::one(),
            c0: T::one(),
            rho: T::one(),
            product_tolerance: T::lit(1e-6),
            prime_cutoff_cap: 50_000_000,
        }
    }
}

impl<T: Scalar> BoundsConfig<T> {
    pub const KEYS: [&'static str; 7] = ["c", "D1", "D2", "C0", "rho", "product_tolerance", "prime_cutoff_cap"];

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c", self.c), ("D1", self.d1), ("D2", self.d2), ("rho", self.rho)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be a positive finite number")));
            }
        }
        if !(self.c0 >= T::one() && self.c0.is_finite()) {
            return Err(Error::Argument("C0 must be at least 1".into()));
        }
        if !(self.product_tolerance > T::zero() && self.product_tolerance <= T::lit(1e-6)) {
            return Err(Error::Argument("product_tolerance must lie in (0, 1e-6]".into()));
        }
        if self.prime_cutoff_cap < 2 {
            return Err(Error::Argument("prime_cutoff_cap must be at least 2".into()));
        }
        Ok(())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Argument(format!("invalid value {value:?} for {key}"));
        if key == "prime_cutoff_cap" {
            let cap = value.parse::<f64>().map_err(|_| bad())?;
            if !(cap >= 2.0 && cap <= u64::MAX as f64 && cap.fract() == 0.0) {
                return Err(bad());
            }
            self.prime_cutoff_cap = cap as u64;
            return Ok(());
        }
        let v = value.parse::<f64>().ok().and_then(T::from_f64).ok_or_else(bad)?;
        match key {
            "c" => self.c = v,
            "D1" => self.d1 = v,
            "D2" => self.d2 = v,
            "C0" => self.c0 = v,
            "rho" => self.rho = v,
            "product_tolerance" => self.product_tolerance = v,
            _ => return Err(Error::Argument(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key = value, found {line:?}")))?;
            self.set(key.trim(), value.trim()).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(())
    }

    /// Defaults overridden by the file at `path`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::default();
        config.apply_text(&text, path)?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        BoundsConfig::<f64>::default().validate().unwrap();
        BoundsConfig::<f32>::default().validate().unwrap();
    }

    #[test]
    fn parse_flat_file() {
        let mut cfg = BoundsConfig::<f64>::default();
        cfg.apply_text("# constants\nD1 = 2.5\nC0=3 # trailing\n\nprime_cutoff_cap = 1e6\n", Path::new("x"))
            .unwrap();
        assert_eq!(cfg.d1, 2.5);
        assert_eq!(cfg.c0, 3.0);
        assert_eq!(cfg.prime_cutoff_cap, 1_000_000);
        assert_eq!(cfg.d2, 1.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let mut cfg = BoundsConfig::<f64>::default();
        let err = cfg.apply_text("c = 1\nbogus = 2\n", Path::new("cfg.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = cfg.apply_text("c 1\n", Path::new("cfg.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn validation_rejects_bad_constants() {
        let mut cfg = BoundsConfig::<f64>::default();
        cfg.c0 = 0.5;
        assert!(cfg.validate().is_err());
        let mut cfg = BoundsConfig::<f64>::default();
        cfg.product_tolerance = 1e-3;
        assert!(cfg.validate().is_err());
        let mut cfg = BoundsConfig::<f64>::default();
        cfg.d1 = -1.0;
        assert!(cfg.validate().is_err());
    }
}
