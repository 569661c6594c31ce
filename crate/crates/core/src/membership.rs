//! Membership oracles: a set of integers materialized as a bitset over `[0, limit)`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bitset::Bitset;
use crate::{Error, Result};

/// Values per sieve segment.
pub const SEGMENT_SIZE: u64 = 1 << 20;

/// Default cap on oracle limits.
pub const DEFAULT_MAX_LIMIT: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_limit: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_limit: DEFAULT_MAX_LIMIT,
        }
    }
}

impl OracleBudget {
    fn check(&self, limit: u64) -> Result<()> {
        if limit > self.max_limit {
            return Err(Error::Resource(format!(
                "oracle limit {limit} exceeds the budget of {} values",
                self.max_limit
            )));
        }
        if usize::try_from(limit).is_err() {
            return Err(Error::Resource(format!("oracle limit {limit} is not addressable")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Primes,
    Squares,
    ResidueClass { residue: u64, modulus: u64 },
    Explicit { path: PathBuf },
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetKind::Primes => f.write_str("primes"),
            SetKind::Squares => f.write_str("squares"),
            SetKind::ResidueClass { residue, modulus } => write!(f, "class:{residue},{modulus}"),
            SetKind::Explicit { path } => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for SetKind {
    type Err = Error;

    /// `primes`, `squares`, `class:r,mod` or `file:PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Argument(format!("unknown set {s:?}; expected primes, squares, class:r,mod or file:PATH"));
        match s {
            "primes" => Ok(SetKind::Primes),
            "squares" => Ok(SetKind::Squares),
            _ => {
                if let Some(rest) = s.strip_prefix("class:") {
                    let (r, m) = rest.split_once(',').ok_or_else(bad)?;
                    let residue = r.trim().parse().map_err(|_| bad())?;
                    let modulus: u64 = m.trim().parse().map_err(|_| bad())?;
                    if modulus == 0 {
                        return Err(Error::Argument("residue class modulus must be positive".into()));
                    }
                    Ok(SetKind::ResidueClass { residue, modulus })
                } else if let Some(path) = s.strip_prefix("file:") {
                    Ok(SetKind::Explicit { path: path.into() })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl SetKind {
    pub fn build(&self, limit: u64, budget: OracleBudget) -> Result<MembershipOracle> {
        match self {
            SetKind::Primes => build_prime_oracle_with(limit, budget),
            SetKind::Squares => build_square_oracle_with(limit, budget),
            &SetKind::ResidueClass { residue, modulus } => {
                build_residue_class_oracle(residue, modulus, limit, budget)
            }
            SetKind::Explicit { path } => load_explicit_oracle_with(path, limit, budget),
        }
    }
}

/// A total, immutable predicate on `[0, limit)`.
#[derive(Clone)]
pub struct MembershipOracle {
    kind: SetKind,
    bits: Bitset,
}

impl fmt::Debug for MembershipOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MembershipOracle")
            .field("kind", &self.kind)
            .field("limit", &self.limit())
            .field("members", &self.count())
            .finish()
    }
}

impl MembershipOracle {
    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// Exclusive upper bound of the domain.
    pub fn limit(&self) -> u64 {
        self.bits.len() as u64
    }

    /// Membership of `value`. Panics if `value >= limit`.
    #[inline]
    pub fn answer(&self, value: u64) -> bool {
        assert!(value < self.limit(), "value {value} outside oracle domain [0, {})", self.limit());
        self.bits.get(value as usize)
    }

    /// Number of members.
    pub fn count(&self) -> u64 {
        self.bits.count_ones() as u64
    }

    /// Number of members in `[start, end)`.
    pub fn count_range(&self, start: u64, end: u64) -> u64 {
        self.bits.count_range(start as usize, end as usize) as u64
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter_ones().map(|v| v as u64)
    }

    pub(crate) fn require_limit(&self, needed: u64) -> Result<()> {
        if self.limit() < needed {
            return Err(Error::Argument(format!(
                "oracle covers [0, {}) but [0, {needed}) is required",
                self.limit()
            )));
        }
        Ok(())
    }
}

pub fn build_prime_oracle(limit: u64) -> Result<MembershipOracle> {
    build_prime_oracle_with(limit, OracleBudget::default())
}

/// Segmented sieve of Eratosthenes over `[0, limit)`. Segments are sieved in
/// parallel; each owns a disjoint slice of the result.
pub fn build_prime_oracle_with(limit: u64, budget: OracleBudget) -> Result<MembershipOracle> {
    if limit < 2 {
        return Err(Error::Argument(format!("prime oracle needs limit >= 2, got {limit}")));
    }
    budget.check(limit)?;
    let base = primes_up_to(isqrt(limit - 1));
    let segments = limit.div_ceil(SEGMENT_SIZE);
    let words: Vec<u64> = (0..segments)
        .into_par_iter()
        .flat_map_iter(|s| {
            let lo = s * SEGMENT_SIZE;
            let hi = (lo + SEGMENT_SIZE).min(limit);
            sieve_segment(lo, hi, &base)
        })
        .collect();
    Ok(MembershipOracle {
        kind: SetKind::Primes,
        bits: Bitset::from_words(limit as usize, words),
    })
}

fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let span = (hi - lo) as usize;
    let mut words = vec![!0u64; span.div_ceil(64)];
    let mut clear = |v: u64| {
        let i = (v - lo) as usize;
        words[i / 64] &= !(1 << (i % 64));
    };
    for v in lo..hi.min(2) {
        clear(v);
    }
    for &p in base {
        if p * p >= hi {
            break;
        }
        let mut j = (p * p).max(lo.div_ceil(p) * p);
        while j < hi {
            clear(j);
            j += p;
        }
    }
    words
}

pub fn build_square_oracle(limit: u64) -> Result<MembershipOracle> {
    build_square_oracle_with(limit, OracleBudget::default())
}

pub fn build_square_oracle_with(limit: u64, budget: OracleBudget) -> Result<MembershipOracle> {
    if limit < 1 {
        return Err(Error::Argument("square oracle needs limit >= 1".into()));
    }
    budget.check(limit)?;
    let mut bits = Bitset::new(limit as usize);
    let mut u: u64 = 0;
    while let Some(sq) = u.checked_mul(u).filter(|&sq| sq < limit) {
        bits.insert(sq as usize);
        u += 1;
    }
    Ok(MembershipOracle {
        kind: SetKind::Squares,
        bits,
    })
}

/// `{ v < limit : v ≡ residue (mod modulus) }`.
pub fn build_residue_class_oracle(
    residue: u64,
    modulus: u64,
    limit: u64,
    budget: OracleBudget,
) -> Result<MembershipOracle> {
    if modulus == 0 {
        return Err(Error::Argument("residue class modulus must be positive".into()));
    }
    budget.check(limit)?;
    let mut bits = Bitset::new(limit as usize);
    let mut v = residue % modulus;
    while v < limit {
        bits.insert(v as usize);
        v += modulus;
    }
    Ok(MembershipOracle {
        kind: SetKind::ResidueClass { residue, modulus },
        bits,
    })
}

pub fn load_explicit_oracle(path: &Path, limit: u64) -> Result<MembershipOracle> {
    load_explicit_oracle_with(path, limit, OracleBudget::default())
}

/// Reads one decimal integer per line. Blank lines are skipped; duplicates collapse.
pub fn load_explicit_oracle_with(
    path: &Path,
    limit: u64,
    budget: OracleBudget,
) -> Result<MembershipOracle> {
    budget.check(limit)?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut bits = Bitset::new(limit as usize);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let v: u64 = line
            .parse()
            .map_err(|_| parse_err(format!("expected a nonnegative integer, found {line:?}")))?;
        if v >= limit {
            return Err(Error::Range(format!(
                "{}:{}: value {v} is not below the limit {limit}",
                path.display(),
                i + 1
            )));
        }
        bits.insert(v as usize);
    }
    Ok(MembershipOracle {
        kind: SetKind::Explicit {
            path: path.to_path_buf(),
        },
        bits,
    })
}

/// An oracle with explicitly given members; used by tests and synthetic sets.
pub fn oracle_from_members(limit: u64, members: impl IntoIterator<Item = u64>) -> Result<MembershipOracle> {
    let mut bits = Bitset::new(limit as usize);
    for v in members {
        if v >= limit {
            return Err(Error::Range(format!("member {v} is not below the limit {limit}")));
        }
        bits.insert(v as usize);
    }
    Ok(MembershipOracle {
        kind: SetKind::Explicit { path: PathBuf::new() },
        bits,
    })
}

/// `floor(sqrt(n))`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// All primes `<= limit`, by a plain sieve.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Distinct prime divisors of `n`.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    prime_divisors(n).into_iter().fold(n, |acc, p| acc / p * (p - 1))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_prime_oracle() {
        let o = build_prime_oracle(16).unwrap();
        assert!(o.answer(13));
        assert!(!o.answer(1));
        assert!(!o.answer(0));
        assert_eq!(o.members().collect::<Vec<_>>(), vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn prime_count_below_a_million() {
        let o = build_prime_oracle(1_000_000).unwrap();
        let brute = (0..1_000_000u64).filter(|&v| trial_division(v)).count() as u64;
        assert_eq!(brute, 78498);
        assert_eq!(o.count(), brute);
    }

    #[test]
    fn segment_boundaries() {
        let limit = 2 * SEGMENT_SIZE + 77;
        let o = build_prime_oracle(limit).unwrap();
        for v in (SEGMENT_SIZE - 200..SEGMENT_SIZE + 200).chain(limit - 300..limit) {
            assert_eq!(o.answer(v), is_prime_u64(v), "v = {v}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let tight = OracleBudget { max_limit: 100 };
        assert!(matches!(build_prime_oracle_with(101, tight), Err(Error::Resource(_))));
        assert!(matches!(build_prime_oracle(1), Err(Error::Argument(_))));
    }

    #[test]
    fn square_oracle() {
        let o = build_square_oracle(16).unwrap();
        assert!(o.answer(0));
        assert!(!o.answer(15));
        assert_eq!(o.members().collect::<Vec<_>>(), vec![0, 1, 4, 9]);
        for limit in [1u64, 2, 81, 100, 101, 6561] {
            let o = build_square_oracle(limit).unwrap();
            let enumerated = (0..).take_while(|u| u * u < limit).count() as u64;
            assert_eq!(o.count(), enumerated, "limit {limit}");
        }
    }

    #[test]
    fn residue_class_oracle() {
        let o = build_residue_class_oracle(1, 3, 10, OracleBudget::default()).unwrap();
        assert_eq!(o.members().collect::<Vec<_>>(), vec![1, 4, 7]);
    }

    #[test]
    fn explicit_oracle_files() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, body: &str| {
            let path = dir.path().join(name);
            fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
            path
        };
        let o = load_explicit_oracle(&write("a.txt", "2\n3\n5\n"), 8).unwrap();
        assert_eq!(o.members().collect::<Vec<_>>(), vec![2, 3, 5]);
        let o = load_explicit_oracle(&write("b.txt", ""), 8).unwrap();
        assert_eq!(o.count(), 0);
        let o = load_explicit_oracle(&write("c.txt", "5\n5\n"), 8).unwrap();
        assert_eq!(o.members().collect::<Vec<_>>(), vec![5]);

        let err = load_explicit_oracle(&write("d.txt", "2\nx\n"), 8).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = load_explicit_oracle(&write("e.txt", "2\n8"), 8).unwrap_err();
        assert!(matches!(err, Error::Range(_)));
        let err = load_explicit_oracle(&dir.path().join("missing.txt"), 8).unwrap_err();
        assert!(err.to_string().contains("missing.txt"));
    }

    #[test]
    fn set_kind_parsing() {
        assert_eq!("primes".parse::<SetKind>().unwrap(), SetKind::Primes);
        assert_eq!(
            "class:1,4".parse::<SetKind>().unwrap(),
            SetKind::ResidueClass { residue: 1, modulus: 4 }
        );
        assert_eq!("file:x.txt".parse::<SetKind>().unwrap().to_string(), "file:x.txt");
        assert!("class:1".parse::<SetKind>().is_err());
        assert!("class:1,0".parse::<SetKind>().is_err());
        assert!("cubes".parse::<SetKind>().is_err());
    }

    #[test]
    fn number_theory_helpers() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(15), 3);
        assert_eq!(isqrt(16), 4);
        assert_eq!(isqrt(u64::MAX), 4294967295);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(10), 4);
        assert_eq!(euler_phi(231), 120);
        assert_eq!(prime_divisors(360), vec![2, 3, 5]);
        assert_eq!(primes_up_to(10), vec![2, 3, 5, 7]);
        assert!(is_prime_u64(18446744073709551557));
        assert!(!is_prime_u64(3215031751));
    }

    #[test]
    fn prime_oracle_matches_miller_rabin() {
        let limit = 1 << 22;
        let o = build_prime_oracle(limit).unwrap();
        // splitmix64 stream; 10^4 samples
        let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
        for _ in 0..10_000 {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            let v = (z ^ (z >> 31)) % limit;
            assert_eq!(o.answer(v), is_prime_u64(v), "v = {v}");
        }
    }

    proptest! {
        #[test]
        fn square_members_are_squares(limit in 1u64..5000) {
            let o = build_square_oracle(limit).unwrap();
            for v in 0..limit {
                prop_assert_eq!(o.answer(v), isqrt(v) * isqrt(v) == v);
            }
        }

        #[test]
        fn miller_rabin_matches_trial_division(n in 0u64..2_000_000) {
            prop_assert_eq!(is_prime_u64(n), trial_division(n));
        }
    }
}
