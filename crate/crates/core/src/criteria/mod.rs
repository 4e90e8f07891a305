//! Axioms for social choice procedures, the social disappointment test, and
//! bounded exhaustive search for counterexamples.
//!
//! A winner is *socially disappointing* when at least half of all voters rank
//! it last on their full ballots. The test only makes sense with three or
//! more alternatives; with two, every winner is someone's last choice.

mod enumerate;
mod search;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::model::{AltSet, Alternative, Profile};
use crate::rules::RuleError;

pub use enumerate::{enumerate_profiles, profile_count, ProfileSpace, SearchBounds, DEFAULT_CAP};
pub use search::{
    check_criterion, AgendaChoice, CriterionVerdict, Detail, RuleTemplate, SearchConfig, Status, Witness,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CriterionId {
    #[serde(rename = "aaw")]
    AlwaysAWinner,
    #[serde(rename = "cwc")]
    CondorcetWinner,
    #[serde(rename = "pareto")]
    Pareto,
    #[serde(rename = "mono")]
    Monotonicity,
    #[serde(rename = "iia")]
    Independence,
    #[serde(rename = "non-sd")]
    NonDisappointment,
}

impl CriterionId {
    pub const ALL: [CriterionId; 6] = [
        CriterionId::AlwaysAWinner,
        CriterionId::CondorcetWinner,
        CriterionId::Pareto,
        CriterionId::Monotonicity,
        CriterionId::Independence,
        CriterionId::NonDisappointment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CriterionId::AlwaysAWinner => "aaw",
            CriterionId::CondorcetWinner => "cwc",
            CriterionId::Pareto => "pareto",
            CriterionId::Monotonicity => "mono",
            CriterionId::Independence => "iia",
            CriterionId::NonDisappointment => "non-sd",
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionId {
    type Err = CriteriaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CriterionId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CriteriaError::UnknownCriterion(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriteriaError {
    #[error("unknown criterion {0:?}")]
    UnknownCriterion(String),
    #[error("social disappointment undefined for m<3 (profile has {0} alternatives)")]
    SdUndefined(usize),
    #[error("invalid search bounds: {0}")]
    InvalidBounds(String),
    #[error("search space of {profiles} profiles exceeds the cap of {cap}")]
    CapExceeded { profiles: u128, cap: u64 },
    #[error("incompatible rule parameters: {0}")]
    IncompatibleRule(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("could not start worker pool: {0}")]
    Workers(String),
}

/// Members of `candidates` ranked last by at least half of all voters.
pub fn sd_tainted(p: &Profile, candidates: AltSet) -> Result<AltSet, CriteriaError> {
    if p.m() < 3 {
        return Err(CriteriaError::SdUndefined(p.m()));
    }
    Ok(taint(p, candidates))
}

/// Like [`sd_tainted`], but empty when fewer than three alternatives exist.
pub(crate) fn taint(p: &Profile, candidates: AltSet) -> AltSet {
    if p.m() < 3 || candidates.is_empty() {
        return AltSet::EMPTY;
    }
    let mut bottoms = vec![0u64; p.m()];
    for b in p.blocks() {
        bottoms[b.ranking.bottom()] += b.weight;
    }
    candidates.iter().filter(|&x| 2 * bottoms[x] >= p.voters()).collect()
}

pub fn socially_disappointing(p: &Profile, winners: AltSet) -> Result<bool, CriteriaError> {
    Ok(!sd_tainted(p, winners)?.is_empty())
}

/// The unique alternative never defeated one-on-one, if there is exactly one.
pub fn condorcet_winner(p: &Profile) -> Option<Alternative> {
    condorcet_winner_index(p).map(|x| p.name(x).clone())
}

pub(crate) fn condorcet_winner_index(p: &Profile) -> Option<usize> {
    let m = p.m();
    let margins = p.margins();
    let mut undefeated = (0..m).filter(|&x| (0..m).all(|y| margins[x * m + y] >= 0));
    match (undefeated.next(), undefeated.next()) {
        (Some(x), None) => Some(x),
        _ => None,
    }
}

/// Facts established on the four-alternative voting-paradox profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImpossibilityReport {
    pub condorcet_winner: Alternative,
    pub bottoms: u64,
    pub voters: u64,
    pub tainted: Vec<Alternative>,
}

const PARADOX: &str = "alternatives: a b c d\n\
                       2: d > a > b > c\n\
                       1: d > c > a > b\n\
                       1: c > a > b > d\n\
                       2: b > c > a > d\n";

/// Six voters over four alternatives where d is the Condorcet winner yet sits
/// last on half of the ballots, so no rule can pick the Condorcet winner and
/// avoid social disappointment at once.
///
/// Panics if the embedded profile fails its own self-check.
pub fn impossibility_witness() -> (Profile, ImpossibilityReport) {
    let p = crate::ballot::parse_profile(PARADOX).expect("embedded profile parses");
    let winner = condorcet_winner_index(&p).expect("paradox profile has a Condorcet winner");
    let bottoms = p.tally().bottom(winner);
    let tainted = sd_tainted(&p, AltSet::single(winner)).expect("four alternatives");
    assert!(2 * bottoms >= p.voters(), "Condorcet winner must be last on half the ballots");
    assert_eq!(tainted, AltSet::single(winner));
    let report = ImpossibilityReport {
        condorcet_winner: p.name(winner).clone(),
        bottoms,
        voters: p.voters(),
        tainted: p.names(tainted),
    };
    (p, report)
}
