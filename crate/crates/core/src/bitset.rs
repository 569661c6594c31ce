//! Fixed-width bitset backed by `u64` words.
//!
//! Equality and hashing are over the exact word contents, so two bitsets of
//! the same width compare equal iff they hold the same members.

use std::fmt;

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitset {
    len: usize,
    words: Vec<u64>,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Bitset {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    /// Wraps raw words. Bits at positions `>= len` must be clear.
    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(WORD_BITS));
        let mut set = Bitset { len, words };
        set.clear_tail();
        set
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        debug_assert!(index < self.len);
        self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, index: usize) {
        debug_assert!(index < self.len);
        self.words[index / WORD_BITS] |= 1 << (index % WORD_BITS);
    }

    #[inline]
    pub fn remove(&mut self, index: usize) {
        debug_assert!(index < self.len);
        self.words[index / WORD_BITS] &= !(1 << (index % WORD_BITS));
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of members in `[start, end)`.
    pub fn count_range(&self, start: usize, end: usize) -> usize {
        let end = end.min(self.len);
        if start >= end {
            return 0;
        }
        let (first, last) = (start / WORD_BITS, (end - 1) / WORD_BITS);
        let lo_mask = !0u64 << (start % WORD_BITS);
        let hi_mask = !0u64 >> (WORD_BITS - 1 - (end - 1) % WORD_BITS);
        if first == last {
            return (self.words[first] & lo_mask & hi_mask).count_ones() as usize;
        }
        let mut total = (self.words[first] & lo_mask).count_ones() as usize;
        total += self.words[first + 1..last]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>();
        total + (self.words[last] & hi_mask).count_ones() as usize
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * WORD_BITS + bit)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for Bitset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter_ones()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_count() {
        let mut set = Bitset::new(130);
        for i in [0, 63, 64, 129] {
            set.insert(i);
        }
        assert_eq!(set.count_ones(), 4);
        assert_eq!(set.iter_ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        set.remove(63);
        assert!(!set.get(63));
        assert_eq!(set.count_range(1, 129), 1);
        assert_eq!(set.count_range(0, 130), 3);
        assert_eq!(set.count_range(64, 65), 1);
        assert_eq!(set.count_range(5, 5), 0);
    }

    #[test]
    fn equality_is_by_content() {
        let mut a = Bitset::new(10);
        let mut b = Bitset::new(10);
        a.insert(3);
        b.insert(3);
        assert_eq!(a, b);
        b.insert(4);
        assert_ne!(a, b);
        assert!(Bitset::new(200).is_empty());
    }

    #[test]
    fn from_words_masks_tail() {
        let set = Bitset::from_words(3, vec![u64::MAX]);
        assert_eq!(set.count_ones(), 3);
    }
}
