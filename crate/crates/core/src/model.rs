//! Preference profiles and the tallies derived from them.
//!
//! A [`Profile`] stores voters as weighted blocks of identical strict rankings.
//! Every count and comparison is defined over the expanded voter multiset, so
//! a block of weight 3 behaves exactly like three consecutive voters holding
//! the same ranking. Voters are numbered from 1 in expanded block order.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Upper bound on the number of alternatives; winner sets are 64-bit masks.
pub const MAX_ALTERNATIVES: usize = 64;

/// A named option voters rank.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Alternative(String);

impl Alternative {
    pub fn new(name: impl Into<String>) -> Result<Self, ProfileError> {
        let name = name.into();
        if !is_valid_token(&name) {
            return Err(ProfileError::InvalidName(name));
        }
        Ok(Alternative(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Alternative {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_valid_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || matches!(c, '>' | ':' | ',' | '#'))
}

/// A set of alternatives of one profile, addressed by position.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AltSet(u64);

impl AltSet {
    pub const EMPTY: AltSet = AltSet(0);

    pub fn full(m: usize) -> Self {
        debug_assert!(m <= MAX_ALTERNATIVES);
        if m == 64 {
            AltSet(u64::MAX)
        } else {
            AltSet((1u64 << m) - 1)
        }
    }

    pub fn single(alt: usize) -> Self {
        AltSet(1 << alt)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, alt: usize) -> bool {
        self.0 >> alt & 1 == 1
    }

    pub fn insert(&mut self, alt: usize) {
        self.0 |= 1 << alt;
    }

    pub fn remove(&mut self, alt: usize) {
        self.0 &= !(1 << alt);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: AltSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: AltSet) -> AltSet {
        AltSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AltSet) -> AltSet {
        AltSet(self.0 & other.0)
    }

    pub fn difference(self, other: AltSet) -> AltSet {
        AltSet(self.0 & !other.0)
    }

    /// Members in ascending position order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let next = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(next)
        })
    }
}

impl FromIterator<usize> for AltSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = AltSet::EMPTY;
        for alt in iter {
            set.insert(alt);
        }
        set
    }
}

impl fmt::Debug for AltSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// One voter's strict, complete order, top first. Entries are positions in
/// the owning profile's alternative list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ranking(Vec<usize>);

impl Ranking {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn top(&self) -> usize {
        self.0[0]
    }

    pub fn bottom(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    /// Position of `alt` in this ranking, 0 being the top.
    pub fn position(&self, alt: usize) -> usize {
        self.0.iter().position(|&a| a == alt).expect("ranking covers every alternative")
    }

    pub fn prefers(&self, x: usize, y: usize) -> bool {
        self.position(x) < self.position(y)
    }

    /// Most preferred member of `active`.
    pub fn top_within(&self, active: AltSet) -> Option<usize> {
        self.0.iter().copied().find(|&a| active.contains(a))
    }

    /// Least preferred member of `active`.
    pub fn bottom_within(&self, active: AltSet) -> Option<usize> {
        self.0.iter().rev().copied().find(|&a| active.contains(a))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub weight: u64,
    pub ranking: Ranking,
}

/// A validated multiset of rankings over a shared alternative set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Profile {
    alternatives: Vec<Alternative>,
    blocks: Vec<Block>,
    voters: u64,
}

/// Unvalidated input for [`Profile::validate`].
#[derive(Clone, Debug, Default)]
pub struct RawProfile {
    pub alternatives: Vec<String>,
    pub blocks: Vec<(i64, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("invalid alternative name {0:?}")]
    InvalidName(String),
    #[error("alternative {0} is listed twice")]
    DuplicateAlternative(String),
    #[error("no alternatives")]
    NoAlternatives,
    #[error("more than {MAX_ALTERNATIVES} alternatives")]
    TooManyAlternatives,
    #[error("profile has no voters")]
    Empty,
    #[error("block {block}: weight must be positive, got {weight}")]
    NonPositiveWeight { block: usize, weight: i64 },
    #[error("block {block}: unknown alternative {name}")]
    UnknownAlternative { block: usize, name: String },
    #[error("block {block}: alternative {name} appears more than once")]
    DuplicateInRanking { block: usize, name: String },
    #[error("block {block}: ranking is missing {name}")]
    MissingInRanking { block: usize, name: String },
    #[error("restriction must keep at least one alternative")]
    EmptyRestriction,
}

impl Profile {
    /// Checks a candidate profile and builds it; nothing is repaired.
    pub fn validate(raw: RawProfile) -> Result<Profile, ProfileError> {
        if raw.alternatives.is_empty() {
            return Err(ProfileError::NoAlternatives);
        }
        if raw.alternatives.len() > MAX_ALTERNATIVES {
            return Err(ProfileError::TooManyAlternatives);
        }
        let mut alternatives = Vec::with_capacity(raw.alternatives.len());
        for name in raw.alternatives {
            let alt = Alternative::new(name)?;
            if alternatives.contains(&alt) {
                return Err(ProfileError::DuplicateAlternative(alt.0));
            }
            alternatives.push(alt);
        }
        if raw.blocks.is_empty() {
            return Err(ProfileError::Empty);
        }
        let m = alternatives.len();
        let mut blocks = Vec::with_capacity(raw.blocks.len());
        for (i, (weight, names)) in raw.blocks.into_iter().enumerate() {
            let block = i + 1;
            if weight <= 0 {
                return Err(ProfileError::NonPositiveWeight { block, weight });
            }
            let mut seen = AltSet::EMPTY;
            let mut order = Vec::with_capacity(m);
            for name in names {
                let alt = alternatives
                    .iter()
                    .position(|a| a.0 == name)
                    .ok_or_else(|| ProfileError::UnknownAlternative { block, name: name.clone() })?;
                if seen.contains(alt) {
                    return Err(ProfileError::DuplicateInRanking { block, name });
                }
                seen.insert(alt);
                order.push(alt);
            }
            if let Some(missing) = AltSet::full(m).difference(seen).iter().next() {
                return Err(ProfileError::MissingInRanking { block, name: alternatives[missing].0.clone() });
            }
            blocks.push(Block { weight: weight as u64, ranking: Ranking(order) });
        }
        Ok(Profile::assemble(alternatives, blocks))
    }

    /// Builds a profile from position-encoded rankings that are already known
    /// to be permutations of `0..alternatives.len()`.
    pub(crate) fn from_parts(alternatives: Vec<Alternative>, blocks: Vec<(u64, Vec<usize>)>) -> Profile {
        let blocks = blocks
            .into_iter()
            .map(|(weight, order)| {
                debug_assert!(weight > 0 && is_permutation(&order, alternatives.len()));
                Block { weight, ranking: Ranking(order) }
            })
            .collect();
        Profile::assemble(alternatives, blocks)
    }

    fn assemble(alternatives: Vec<Alternative>, blocks: Vec<Block>) -> Profile {
        let voters = blocks.iter().map(|b| b.weight).sum();
        Profile { alternatives, blocks, voters }
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Number of voters, n.
    pub fn voters(&self) -> u64 {
        self.voters
    }

    /// Number of alternatives, m.
    pub fn m(&self) -> usize {
        self.alternatives.len()
    }

    pub fn all(&self) -> AltSet {
        AltSet::full(self.m())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.alternatives.iter().position(|a| a.0 == name)
    }

    pub fn name(&self, alt: usize) -> &Alternative {
        &self.alternatives[alt]
    }

    /// Names of the members of `set`, sorted by name.
    pub fn names(&self, set: AltSet) -> Vec<Alternative> {
        let mut names: Vec<_> = set.iter().map(|a| self.alternatives[a].clone()).collect();
        names.sort();
        names
    }

    /// Resolves names against this profile.
    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<AltSet, String> {
        names.iter().map(|n| self.index_of(n.as_ref()).ok_or_else(|| n.as_ref().to_string())).collect()
    }

    /// Ranking of the 1-based voter `voter` in expanded block order.
    pub fn voter(&self, voter: u64) -> Option<&Ranking> {
        if voter == 0 {
            return None;
        }
        let mut seen = 0;
        for block in &self.blocks {
            seen += block.weight;
            if voter <= seen {
                return Some(&block.ranking);
            }
        }
        None
    }

    /// Rankings of every voter, one entry per voter.
    pub fn expanded(&self) -> impl Iterator<Item = &Ranking> {
        self.blocks.iter().flat_map(|b| std::iter::repeat_n(&b.ranking, b.weight as usize))
    }

    /// Copy with every ranking cut down to `keep`, relative order preserved.
    pub fn restrict(&self, keep: AltSet) -> Result<Profile, ProfileError> {
        let keep = keep.intersection(self.all());
        if keep.is_empty() {
            return Err(ProfileError::EmptyRestriction);
        }
        let remap: Vec<Option<usize>> = {
            let mut next = 0;
            (0..self.m())
                .map(|a| {
                    keep.contains(a).then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let alternatives = keep.iter().map(|a| self.alternatives[a].clone()).collect();
        let blocks = self
            .blocks
            .iter()
            .map(|b| Block {
                weight: b.weight,
                ranking: Ranking(b.ranking.0.iter().filter_map(|&a| remap[a]).collect()),
            })
            .collect();
        Ok(Profile::assemble(alternatives, blocks))
    }

    /// Voters ranking each member of `active` first among `active`.
    pub(crate) fn first_counts_within(&self, active: AltSet) -> Vec<u64> {
        let mut counts = vec![0; self.m()];
        for b in &self.blocks {
            if let Some(top) = b.ranking.top_within(active) {
                counts[top] += b.weight;
            }
        }
        counts
    }

    /// Voters ranking each member of `active` last among `active`.
    pub(crate) fn bottom_counts_within(&self, active: AltSet) -> Vec<u64> {
        let mut counts = vec![0; self.m()];
        for b in &self.blocks {
            if let Some(bottom) = b.ranking.bottom_within(active) {
                counts[bottom] += b.weight;
            }
        }
        counts
    }

    /// Net majority margin matrix, row-major: entry `x * m + y` is the number
    /// of voters preferring x to y minus the number preferring y to x.
    pub(crate) fn margins(&self) -> Vec<i64> {
        let m = self.m();
        let mut margins = vec![0i64; m * m];
        for b in &self.blocks {
            let order = b.ranking.as_slice();
            let w = b.weight as i64;
            for (i, &x) in order.iter().enumerate() {
                for &y in &order[i + 1..] {
                    margins[x * m + y] += w;
                    margins[y * m + x] -= w;
                }
            }
        }
        margins
    }

    pub fn tally(&self) -> TallySummary {
        let all = self.all();
        TallySummary {
            m: self.m(),
            voters: self.voters,
            first: self.first_counts_within(all),
            bottom: self.bottom_counts_within(all),
            margins: self.margins(),
        }
    }
}

pub(crate) fn is_permutation(order: &[usize], m: usize) -> bool {
    order.len() == m && order.iter().copied().collect::<AltSet>() == AltSet::full(m)
}

/// First-place counts, last-place counts and pairwise margins of a profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TallySummary {
    m: usize,
    voters: u64,
    first: Vec<u64>,
    bottom: Vec<u64>,
    margins: Vec<i64>,
}

impl TallySummary {
    pub fn voters(&self) -> u64 {
        self.voters
    }

    pub fn first(&self, alt: usize) -> u64 {
        self.first[alt]
    }

    pub fn bottom(&self, alt: usize) -> u64 {
        self.bottom[alt]
    }

    pub fn first_counts(&self) -> &[u64] {
        &self.first
    }

    pub fn bottom_counts(&self) -> &[u64] {
        &self.bottom
    }

    /// Voters preferring x over y minus voters preferring y over x.
    pub fn margin(&self, x: usize, y: usize) -> i64 {
        self.margins[x * self.m + y]
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn raw(alts: &str, blocks: &[(i64, &str)]) -> RawProfile {
        RawProfile {
            alternatives: alts.split_whitespace().map(String::from).collect(),
            blocks: blocks.iter().map(|(w, r)| (*w, r.split_whitespace().map(String::from).collect())).collect(),
        }
    }

    pub(crate) fn profile(alts: &str, blocks: &[(i64, &str)]) -> Profile {
        Profile::validate(raw(alts, blocks)).unwrap()
    }

    fn drinks() -> Profile {
        profile("Milk Beer Wine", &[(4, "Milk Wine Beer"), (3, "Beer Wine Milk"), (2, "Wine Beer Milk")])
    }

    #[test]
    fn validates_drinks_profile() {
        let p = drinks();
        assert_eq!(p.voters(), 9);
        assert_eq!(p.m(), 3);
    }

    #[test]
    fn singleton_profile() {
        let p = profile("a", &[(1, "a")]);
        assert_eq!((p.voters(), p.m()), (1, 1));
    }

    #[test]
    fn rejects_malformed_profiles() {
        let err = |alts, blocks: &[(i64, &str)]| Profile::validate(raw(alts, blocks)).unwrap_err();
        assert!(matches!(err("a b", &[(1, "a a b")]), ProfileError::DuplicateInRanking { .. }));
        assert!(matches!(err("a b c", &[(1, "a b")]), ProfileError::MissingInRanking { .. }));
        assert!(matches!(err("a b", &[(0, "a b")]), ProfileError::NonPositiveWeight { .. }));
        assert!(matches!(err("a b", &[(-2, "a b")]), ProfileError::NonPositiveWeight { .. }));
        assert!(matches!(err("a b", &[]), ProfileError::Empty));
        assert!(matches!(err("", &[(1, "")]), ProfileError::NoAlternatives));
        assert!(matches!(err("a a", &[(1, "a")]), ProfileError::DuplicateAlternative(_)));
        assert!(matches!(err("a b", &[(1, "a z")]), ProfileError::UnknownAlternative { .. }));
        assert!(matches!(Alternative::new("x>y"), Err(ProfileError::InvalidName(_))));
    }

    #[test]
    fn tally_of_drinks() {
        let p = drinks();
        let t = p.tally();
        let idx = |n| p.index_of(n).unwrap();
        assert_eq!([t.first(idx("Milk")), t.first(idx("Beer")), t.first(idx("Wine"))], [4, 3, 2]);
        assert_eq!([t.bottom(idx("Milk")), t.bottom(idx("Beer")), t.bottom(idx("Wine"))], [5, 4, 0]);
    }

    #[test]
    fn tally_of_single_voter() {
        let t = profile("a b c", &[(1, "a b c")]).tally();
        assert_eq!(t.first(0), 1);
        assert_eq!(t.bottom(2), 1);
        assert_eq!(t.margin(0, 1), 1);
        assert_eq!(t.margin(1, 0), -1);
        assert_eq!(t.margin(1, 1), 0);
    }

    #[test]
    fn paradox_profile_ties_d_with_everyone() {
        // Counted by hand over the six printed lists:
        // d is above a,b,c on lists 1-3 and below them on lists 4-6.
        let p = profile("a b c d", &[(2, "d a b c"), (1, "d c a b"), (1, "c a b d"), (2, "b c a d")]);
        let t = p.tally();
        for x in 0..3 {
            assert_eq!(t.margin(3, x), 0);
        }
    }

    #[test]
    fn restrict_drinks_to_wine_and_beer() {
        let p = drinks();
        let keep = p.set_of(&["Wine", "Beer"]).unwrap();
        let r = p.restrict(keep).unwrap();
        assert_eq!(r, profile("Beer Wine", &[(4, "Wine Beer"), (3, "Beer Wine"), (2, "Wine Beer")]));
        assert_eq!(p.restrict(p.all()).unwrap(), p);
        let single = profile("a b c", &[(1, "a b c")]);
        assert_eq!(single.restrict(AltSet::single(1)).unwrap(), profile("b", &[(1, "b")]));
        assert_eq!(p.restrict(AltSet::EMPTY), Err(ProfileError::EmptyRestriction));
    }

    #[test]
    fn voter_indexing_is_one_based_in_block_order() {
        let p = profile("a b c", &[(2, "a b c"), (1, "c b a")]);
        assert_eq!(p.voter(1).unwrap().top(), 0);
        assert_eq!(p.voter(2).unwrap().top(), 0);
        assert_eq!(p.voter(3).unwrap().top(), 2);
        assert!(p.voter(0).is_none());
        assert!(p.voter(4).is_none());
        assert_eq!(p.expanded().count(), 3);
    }
}
