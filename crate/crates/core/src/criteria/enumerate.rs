//! Canonical enumeration of profiles.
//!
//! The m alternatives are named `a`, `b`, `c`, ... and the m! rankings are
//! ordered lexicographically by alternative position, so `a > b > c` comes
//! first and `c > b > a` last. Profiles with n voters are the n-tuples of
//! rankings in lexicographic order, voter 1 most significant; the level for
//! `n_min` voters comes first, then `n_min + 1`, and so on. A profile's index
//! within its level is therefore its base-m! numeral. Consecutive voters with
//! the same ranking are merged into one block.

use crate::model::{Alternative, Profile};

use super::CriteriaError;

/// Largest number of profiles a search will visit unless told otherwise.
pub const DEFAULT_CAP: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SearchBounds {
    pub m: usize,
    pub n_min: u64,
    pub n_max: u64,
}

impl SearchBounds {
    pub fn new(m: usize, n_max: u64) -> Self {
        SearchBounds { m, n_min: 1, n_max }
    }

    pub fn with_min_voters(mut self, n_min: u64) -> Self {
        self.n_min = n_min;
        self
    }

    pub fn validate(&self) -> Result<(), CriteriaError> {
        if self.m == 0 {
            return Err(CriteriaError::InvalidBounds("need at least one alternative".into()));
        }
        if self.m > 26 {
            return Err(CriteriaError::InvalidBounds("at most 26 alternatives".into()));
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(CriteriaError::InvalidBounds(format!(
                "voter range {}..={} must satisfy 1 <= n_min <= n_max",
                self.n_min, self.n_max
            )));
        }
        if self.n_max > 64 {
            return Err(CriteriaError::InvalidBounds("at most 64 voters".into()));
        }
        Ok(())
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<u64> {
        self.n_min..=self.n_max
    }
}

/// Sum of (m!)^n over the voter range, saturating at `u128::MAX`.
pub fn profile_count(bounds: &SearchBounds) -> u128 {
    let rankings: u128 = (1..=bounds.m as u128).product();
    bounds
        .levels()
        .map(|n| rankings.checked_pow(n as u32).unwrap_or(u128::MAX))
        .fold(0u128, |acc, x| acc.saturating_add(x))
}

/// Every profile within `bounds`, in canonical order.
pub fn enumerate_profiles(bounds: SearchBounds, cap: u64) -> Result<impl Iterator<Item = Profile>, CriteriaError> {
    let space = ProfileSpace::checked(&bounds, cap)?;
    Ok(bounds.levels().flat_map(move |n| {
        let space = space.clone();
        (0..space.level_size(n)).map(move |index| space.profile(n, index))
    }))
}

/// The rankings and naming shared by every profile of one alternative count.
#[derive(Clone, Debug)]
pub struct ProfileSpace {
    alternatives: Vec<Alternative>,
    rankings: Vec<Vec<usize>>,
    /// `positions[r][alt]` is where ranking r places alt.
    positions: Vec<Vec<usize>>,
}

impl ProfileSpace {
    pub fn new(m: usize) -> Self {
        let alternatives =
            (0..m).map(|i| Alternative::new(((b'a' + i as u8) as char).to_string()).expect("letter")).collect();
        let rankings = permutations(m);
        let positions = rankings
            .iter()
            .map(|r| {
                let mut pos = vec![0; m];
                for (i, &a) in r.iter().enumerate() {
                    pos[a] = i;
                }
                pos
            })
            .collect();
        ProfileSpace { alternatives, rankings, positions }
    }

    pub(crate) fn checked(bounds: &SearchBounds, cap: u64) -> Result<Self, CriteriaError> {
        bounds.validate()?;
        let total = profile_count(bounds);
        if total > cap as u128 {
            return Err(CriteriaError::CapExceeded { profiles: total, cap });
        }
        Ok(ProfileSpace::new(bounds.m))
    }

    pub fn m(&self) -> usize {
        self.alternatives.len()
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    /// All rankings in canonical order.
    pub fn rankings(&self) -> &[Vec<usize>] {
        &self.rankings
    }

    pub(crate) fn position(&self, ranking: usize, alt: usize) -> usize {
        self.positions[ranking][alt]
    }

    /// Profiles with exactly n voters.
    pub fn level_size(&self, n: u64) -> u64 {
        (self.rankings.len() as u64).pow(n as u32)
    }

    /// Ranking indices of each voter of the `index`-th profile with n voters.
    pub fn digits(&self, n: u64, mut index: u64) -> Vec<usize> {
        let base = self.rankings.len() as u64;
        let mut digits = vec![0; n as usize];
        for d in digits.iter_mut().rev() {
            *d = (index % base) as usize;
            index /= base;
        }
        digits
    }

    pub fn profile(&self, n: u64, index: u64) -> Profile {
        self.profile_of_digits(&self.digits(n, index))
    }

    pub(crate) fn profile_of_digits(&self, digits: &[usize]) -> Profile {
        self.profile_of_orders(digits.iter().map(|&d| self.rankings[d].clone()).collect())
    }

    /// Profile holding one voter per entry, merging equal neighbours.
    pub(crate) fn profile_of_orders(&self, orders: Vec<Vec<usize>>) -> Profile {
        let mut blocks: Vec<(u64, Vec<usize>)> = Vec::new();
        for order in orders {
            match blocks.last_mut() {
                Some((w, last)) if *last == order => *w += 1,
                _ => blocks.push((1, order)),
            }
        }
        Profile::from_parts(self.alternatives.clone(), blocks)
    }
}

/// Permutations of `0..m` in lexicographic order.
fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for a in 0..used.len() {
            if !used[a] {
                used[a] = true;
                prefix.push(a);
                extend(prefix, used, out);
                prefix.pop();
                used[a] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(m), &mut vec![false; m], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballot::serialize_profile;
    use std::collections::HashSet;

    #[test]
    fn counts_match_closed_form() {
        assert_eq!(profile_count(&SearchBounds::new(3, 1)), 6);
        assert_eq!(profile_count(&SearchBounds::new(3, 2).with_min_voters(2)), 36);
        assert_eq!(profile_count(&SearchBounds::new(4, 2)), 600);
        assert_eq!(profile_count(&SearchBounds::new(3, 4)), 1554);
        for (bounds, expected) in [
            (SearchBounds::new(3, 1), 6),
            (SearchBounds::new(3, 2).with_min_voters(2), 36),
            (SearchBounds::new(4, 2), 600),
        ] {
            let seen: Vec<_> = enumerate_profiles(bounds, DEFAULT_CAP).unwrap().collect();
            assert_eq!(seen.len(), expected);
            // Distinct as voter sequences.
            let distinct: HashSet<Vec<Vec<usize>>> =
                seen.iter().map(|p| p.expanded().map(|r| r.as_slice().to_vec()).collect()).collect();
            assert_eq!(distinct.len(), expected);
        }
    }

    #[test]
    fn canonical_order() {
        let all: Vec<_> =
            enumerate_profiles(SearchBounds::new(3, 2), DEFAULT_CAP).unwrap().map(|p| serialize_profile(&p)).collect();
        assert_eq!(all[0], "alternatives: a b c\n1: a > b > c\n");
        assert_eq!(all[1], "alternatives: a b c\n1: a > c > b\n");
        assert_eq!(all[5], "alternatives: a b c\n1: c > b > a\n");
        assert_eq!(all[6], "alternatives: a b c\n2: a > b > c\n");
        assert_eq!(all[7], "alternatives: a b c\n1: a > b > c\n1: a > c > b\n");
        assert_eq!(all[41], "alternatives: a b c\n2: c > b > a\n");
    }

    #[test]
    fn cap_is_reported_not_truncated() {
        let err = enumerate_profiles(SearchBounds::new(4, 6), DEFAULT_CAP).err().unwrap();
        assert_eq!(err, CriteriaError::CapExceeded { profiles: 199_411_800, cap: DEFAULT_CAP });
        assert!(enumerate_profiles(SearchBounds::new(3, 2), 41).is_err());
        assert!(enumerate_profiles(SearchBounds::new(3, 2), 42).is_ok());
    }

    #[test]
    fn invalid_bounds() {
        for b in [SearchBounds::new(0, 2), SearchBounds::new(3, 0), SearchBounds::new(3, 2).with_min_voters(3)] {
            assert!(matches!(enumerate_profiles(b, DEFAULT_CAP).err().unwrap(), CriteriaError::InvalidBounds(_)));
        }
    }
}
