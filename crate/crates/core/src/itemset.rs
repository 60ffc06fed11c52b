use crate::error::{Error, Result};
use std::fmt;

const WORD: usize = 64;

/// A subset of the items `0..m`, stored as a dense bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ItemSet {
    m: usize,
    words: Vec<u64>,
}

impl ItemSet {
    pub fn empty(m: usize) -> Self {
        ItemSet {
            m,
            words: vec![0; m.div_ceil(WORD)],
        }
    }

    pub fn full(m: usize) -> Self {
        let mut s = ItemSet {
            m,
            words: vec![u64::MAX; m.div_ceil(WORD)],
        };
        s.trim();
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(m: usize, items: I) -> Result<Self> {
        let mut s = ItemSet::empty(m);
        for i in items {
            if i >= m {
                return Err(Error::ItemOutOfRange { item: i, m });
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// Builds a set from the low `m` bits of `mask` (requires `m <= 64`).
    pub fn from_mask(m: usize, mask: u64) -> Self {
        assert!(m <= WORD, "from_mask supports at most 64 items");
        let mut s = ItemSet::empty(m);
        if m > 0 {
            s.words[0] = mask;
            s.trim();
        }
        s
    }

    /// Low 64 bits of the membership vector.
    pub fn low_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    fn trim(&mut self) {
        let rem = self.m % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.m && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.m, "item {i} out of range for {} items", self.m);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.m {
            self.words[i / WORD] &= !(1 << (i % WORD));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    fn check(&self, other: &ItemSet) {
        assert_eq!(self.m, other.m, "item sets over different ground sets");
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        self.check(other);
        ItemSet {
            m: self.m,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn intersection(&self, other: &ItemSet) -> ItemSet {
        self.check(other);
        ItemSet {
            m: self.m,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn difference(&self, other: &ItemSet) -> ItemSet {
        self.check(other);
        ItemSet {
            m: self.m,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn complement(&self) -> ItemSet {
        let mut s = ItemSet {
            m: self.m,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.trim();
        s
    }

    pub fn intersection_len(&self, other: &ItemSet) -> usize {
        self.check(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_len(&self, other: &ItemSet) -> usize {
        self.check(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &ItemSet) -> bool {
        self.check(other);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
