//! Fixed-length bitvector subsets of a ground set `0..len`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A subset of the ground set `0..len`, stored as a bitvector with its
/// cardinality cached.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    len: usize,
    words: Vec<u64>,
    count: usize,
}

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(WORD)
}

impl Subset {
    pub fn empty(len: usize) -> Self {
        Self {
            len,
            words: vec![0; word_count(len)],
            count: 0,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut words = vec![u64::MAX; word_count(len)];
        let tail = len % WORD;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << tail) - 1;
            }
        }
        Self {
            len,
            words,
            count: len,
        }
    }

    /// Builds a subset from member indices. Repeated indices collapse.
    pub fn from_indices<I>(len: usize, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut s = Self::empty(len);
        for i in indices {
            if i >= len {
                return Err(Error::IndexOutOfRange {
                    set: 0,
                    index: i,
                    n: len,
                });
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// Ground-set size this subset lives in.
    #[inline]
    pub fn universe(&self) -> usize {
        self.len
    }

    /// Cardinality.
    #[inline]
    pub fn len(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    /// Inserts `i`; returns whether it was newly added. Panics if `i` is out of range.
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.len, "index {i} out of range for universe {}", self.len);
        let w = &mut self.words[i / WORD];
        let bit = 1u64 << (i % WORD);
        if *w & bit == 0 {
            *w |= bit;
            self.count += 1;
            true
        } else {
            false
        }
    }

    pub fn remove(&mut self, i: usize) -> bool {
        if i >= self.len {
            return false;
        }
        let w = &mut self.words[i / WORD];
        let bit = 1u64 << (i % WORD);
        if *w & bit != 0 {
            *w &= !bit;
            self.count -= 1;
            true
        } else {
            false
        }
    }

    fn check_same(&self, other: &Subset) -> Result<()> {
        if self.len != other.len {
            return Err(Error::GroundSetMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Subset, f: impl Fn(u64, u64) -> u64) -> Subset {
        debug_assert_eq!(self.len, other.len);
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let count = words.iter().map(|w| w.count_ones() as usize).sum();
        Subset {
            len: self.len,
            words,
            count,
        }
    }

    /// `|self ∩ other|` without materializing the intersection.
    #[inline]
    pub fn intersection_count(&self, other: &Subset) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|Δ(self, other)|` without materializing the difference.
    #[inline]
    pub fn symmetric_difference_count(&self, other: &Subset) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn symmetric_difference(&self, other: &Subset) -> Result<Subset> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a ^ b))
    }

    pub fn intersection(&self, other: &Subset) -> Result<Subset> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a & b))
    }

    pub fn union(&self, other: &Subset) -> Result<Subset> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a | b))
    }

    /// `self \ other`.
    pub fn difference(&self, other: &Subset) -> Result<Subset> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a & !b))
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.len == other.len
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    /// Member indices in ascending order.
    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subset[{}]", self.len)?;
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_idx * WORD + bit);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}

impl<'a> IntoIterator for &'a Subset {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

#[derive(Serialize, Deserialize)]
struct SubsetRepr {
    n: usize,
    members: Vec<usize>,
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SubsetRepr {
            n: self.len,
            members: self.to_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SubsetRepr::deserialize(deserializer)?;
        Subset::from_indices(repr.n, repr.members).map_err(serde::de::Error::custom)
    }
}
