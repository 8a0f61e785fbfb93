//! Subsets of `{1, ..., d}` as bitmasks.
//!
//! Players/indices are numbered from 1 throughout the crate; bit `i - 1` of a
//! mask is set iff player `i` is in the subset. The mask's numeric value is
//! also the position of the subset inside a dense value table of length
//! `2^d`, which makes masks the universal index currency here.

use crate::error::{Error, Result};
use std::fmt;

/// Largest supported width: dense tables hold `2^d` entries, so exact
/// enumeration past 25 is out of scope.
pub const MAX_DIMENSION: usize = 25;

/// A subset of `{1, ..., d}` stored as a bitmask (bit `i - 1` <-> player `i`).
///
/// The width `d` is carried by the containers ([`crate::SimplifiedModel`],
/// [`crate::CooperativeGame`]); operations that need it take `d` explicitly.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SubsetMask(u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn from_bits(bits: u32) -> Self {
        SubsetMask(bits)
    }

    /// The full set `{1, ..., d}`.
    pub fn full(d: usize) -> Self {
        debug_assert!(d <= MAX_DIMENSION);
        SubsetMask(((1u64 << d) - 1) as u32)
    }

    pub fn singleton(player: usize) -> Self {
        debug_assert!((1..=MAX_DIMENSION).contains(&player));
        SubsetMask(1 << (player - 1))
    }

    /// Builds a mask from 1-based player indices.
    pub fn from_players(players: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        for &p in players {
            if p == 0 || p > MAX_DIMENSION {
                return Err(Error::InvalidArgument(format!(
                    "player index {p} out of range 1..={MAX_DIMENSION}"
                )));
            }
            bits |= 1 << (p - 1);
        }
        Ok(SubsetMask(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Position of this subset in a dense value table.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Cardinality `|S|`.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, player: usize) -> bool {
        debug_assert!(player >= 1);
        player <= 32 && self.0 >> (player - 1) & 1 == 1
    }

    pub fn with(self, player: usize) -> Self {
        debug_assert!((1..=MAX_DIMENSION).contains(&player));
        SubsetMask(self.0 | 1 << (player - 1))
    }

    /// `S \ {player}`; by convention the set is unchanged when the player is
    /// not a member.
    pub fn without(self, player: usize) -> Self {
        debug_assert!((1..=MAX_DIMENSION).contains(&player));
        SubsetMask(self.0 & !(1 << (player - 1)))
    }

    pub fn union(self, other: Self) -> Self {
        SubsetMask(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        SubsetMask(self.0 & other.0)
    }

    pub fn minus(self, other: Self) -> Self {
        SubsetMask(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Whether only the low `d` bits are set.
    pub fn fits(self, d: usize) -> bool {
        d <= 32 && u64::from(self.0) < (1u64 << d)
    }

    pub fn complement(self, d: usize) -> Self {
        Self::full(d).minus(self)
    }

    /// Members in ascending order (1-based).
    pub fn players(self) -> Players {
        Players(self.0)
    }

    /// Maps bit `k` of `self` to the `k`-th smallest member of `positions`:
    /// a subset of `{1, ..., |positions|}` becomes the corresponding subset
    /// of `positions` itself.
    pub fn expand(self, positions: SubsetMask) -> SubsetMask {
        debug_assert!(self.fits(positions.len()));
        let mut out = 0u32;
        let mut src = self.0;
        let mut pos = positions.0;
        while pos != 0 && src != 0 {
            let low = pos & pos.wrapping_neg();
            if src & 1 != 0 {
                out |= low;
            }
            src >>= 1;
            pos &= pos - 1;
        }
        SubsetMask(out)
    }

    /// Inverse of [`expand`](Self::expand): keeps `self ∩ positions` and
    /// renumbers the survivors to `1..=|positions|`.
    pub fn compress(self, positions: SubsetMask) -> SubsetMask {
        let mut out = 0u32;
        let mut k = 0;
        let mut pos = positions.0;
        while pos != 0 {
            let low = pos & pos.wrapping_neg();
            if self.0 & low != 0 {
                out |= 1 << k;
            }
            k += 1;
            pos &= pos - 1;
        }
        SubsetMask(out)
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.players().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Ascending iterator over the members of a mask.
pub struct Players(u32);

impl Iterator for Players {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as usize + 1;
        self.0 &= self.0 - 1;
        Some(p)
    }
}

/// Iterates over every submask of `mask` in ascending numeric order,
/// starting at the empty set and ending at `mask` itself.
pub fn submasks(mask: SubsetMask) -> Submasks {
    Submasks {
        mask: mask.0,
        next: Some(0),
    }
}

pub struct Submasks {
    mask: u32,
    next: Option<u32>,
}

impl Iterator for Submasks {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let cur = self.next?;
        self.next = if cur == self.mask {
            None
        } else {
            Some(cur.wrapping_sub(self.mask) & self.mask)
        };
        Some(SubsetMask(cur))
    }
}

/// The 0/1 vector of length `d` whose entry `i - 1` is 1 iff player `i` is
/// in the subset.
pub fn indicator_vector(s: SubsetMask, d: usize) -> Result<Vec<f64>> {
    if !s.fits(d) {
        return Err(Error::InvalidArgument(format!(
            "subset {s:?} does not fit in width {d}"
        )));
    }
    Ok((1..=d)
        .map(|i| if s.contains(i) { 1.0 } else { 0.0 })
        .collect())
}

/// All proper nonempty subsets of `{1, ..., d}` in ascending bitmask order:
/// masks `1, 2, ..., 2^d - 2`. This fixed order is what makes the regression
/// matrices byte-reproducible.
pub fn proper_subsets(d: usize) -> Result<Vec<SubsetMask>> {
    if !(2..=MAX_DIMENSION).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "proper subset enumeration needs 2 <= d <= {MAX_DIMENSION}, got {d}"
        )));
    }
    Ok((1..(1u32 << d) - 1).map(SubsetMask).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn indicator_matches_membership() {
        // {2,3} in width 3
        let s = SubsetMask::from_players(&[2, 3]).unwrap();
        assert_eq!(indicator_vector(s, 3).unwrap(), vec![0.0, 1.0, 1.0]);
        assert_eq!(
            indicator_vector(SubsetMask::EMPTY, 4).unwrap(),
            vec![0.0; 4]
        );
        assert_eq!(
            indicator_vector(SubsetMask::full(3), 3).unwrap(),
            vec![1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn indicator_rejects_width_mismatch() {
        let s = SubsetMask::from_players(&[4]).unwrap();
        assert!(indicator_vector(s, 3).is_err());
    }

    #[test]
    fn proper_subsets_ascending() {
        let subs = proper_subsets(3).unwrap();
        let players: Vec<Vec<usize>> = subs.iter().map(|s| s.players().collect()).collect();
        assert_eq!(
            players,
            vec![
                vec![1],
                vec![2],
                vec![1, 2],
                vec![3],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(proper_subsets(2).unwrap().len(), 2);
        assert_eq!(proper_subsets(5).unwrap().len(), 30);
        assert!(proper_subsets(1).is_err());
    }

    #[test]
    fn expand_compress_examples() {
        // {1} inside positions {2} of a width-2 space is {2}
        let active = SubsetMask::from_players(&[2]).unwrap();
        assert_eq!(
            SubsetMask::singleton(1).expand(active),
            SubsetMask::singleton(2)
        );
        // {1,3} inside {2,4,5} -> {2,5}
        let pos = SubsetMask::from_players(&[2, 4, 5]).unwrap();
        let t = SubsetMask::from_players(&[1, 3]).unwrap();
        assert_eq!(t.expand(pos), SubsetMask::from_players(&[2, 5]).unwrap());
        assert_eq!(t.expand(pos).compress(pos), t);
    }

    #[test]
    fn submask_iteration_is_ascending_and_complete() {
        let m = SubsetMask::from_bits(0b10110);
        let all: Vec<u32> = submasks(m).map(|s| s.bits()).collect();
        assert_eq!(all.len(), 1 << m.len());
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all[0], 0);
        assert_eq!(*all.last().unwrap(), m.bits());
    }

    proptest! {
        #[test]
        fn expand_then_compress_roundtrips(active_bits in 0u32..(1 << 10), t_bits in 0u32..(1 << 10)) {
            let active = SubsetMask::from_bits(active_bits);
            let t = SubsetMask::from_bits(t_bits & ((1u32 << active.len()) - 1));
            prop_assert_eq!(t.expand(active).compress(active), t);
            prop_assert!(t.expand(active).is_subset_of(active));
        }

        #[test]
        fn submasks_are_exactly_the_subsets(mask_bits in 0u32..(1 << 12)) {
            let m = SubsetMask::from_bits(mask_bits);
            let listed: Vec<u32> = submasks(m).map(|s| s.bits()).collect();
            prop_assert_eq!(listed.len(), 1usize << m.len());
            prop_assert!(listed.iter().all(|&s| SubsetMask(s).is_subset_of(m)));
            prop_assert!(listed.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
