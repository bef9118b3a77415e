use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Maximum number of coordinates a [`Support`] can index.
pub const MAX_COORDINATES: usize = 64;

/// A set of coordinate indices, stored as a bitmask.
///
/// Ordering is by the bitmask, which puts subsets of a fixed set in a
/// deterministic order. Serialized as a sorted list of 0-based indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Support(u64);

impl Support {
    pub const EMPTY: Support = Support(0);

    pub fn from_bits(bits: u64) -> Self {
        Support(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// `{0, …, n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_COORDINATES);
        if n == MAX_COORDINATES {
            Support(u64::MAX)
        } else {
            Support((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_COORDINATES);
        Support(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices
            .into_iter()
            .fold(Support::EMPTY, |s, i| s.with(i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_COORDINATES && self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        assert!(i < MAX_COORDINATES);
        Support(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        Support(self.0 & !(1u64 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Support) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: Support) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn union(self, other: Support) -> Self {
        Support(self.0 | other.0)
    }

    pub fn intersection(self, other: Support) -> Self {
        Support(self.0 & other.0)
    }

    pub fn difference(self, other: Support) -> Self {
        Support(self.0 & !other.0)
    }

    /// Highest index plus one (0 for the empty set).
    pub fn bound(self) -> usize {
        (u64::BITS - self.0.leading_zeros()) as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, in increasing bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = Support> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(Support(cur))
        })
    }

    /// Re-indexes `self` through `map`, where `map[i]` is the new index of `i`.
    pub fn remap(self, map: &[usize]) -> Support {
        Support::from_indices(self.iter().map(|i| map[i]))
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", idx.join(","))
    }
}

impl fmt::Debug for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Support {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.indices().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Support {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let idx = Vec::<usize>::deserialize(d)?;
        if let Some(bad) = idx.iter().find(|&&i| i >= MAX_COORDINATES) {
            return Err(serde::de::Error::custom(format!(
                "coordinate index {bad} exceeds {MAX_COORDINATES}"
            )));
        }
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != idx {
            return Err(serde::de::Error::custom(
                "support indices must be strictly increasing",
            ));
        }
        Ok(Support::from_indices(idx))
    }
}
