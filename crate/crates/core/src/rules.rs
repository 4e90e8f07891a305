//! The eleven voting procedures.
//!
//! Every procedure keeps tied maxima (or minima) whole; nothing is ever
//! broken by name or position. Each one can run silently, producing only a
//! winner set, or with a round-by-round trace for auditing.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::criteria::taint;
use crate::model::{AltSet, Alternative, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Plurality,
    Borda,
    Hare,
    SeqPairs,
    Dictator,
    Condorcet,
    Lpr,
    CondorcetAmend,
    SeqPairsAmend,
    Lu,
    Lur,
}

impl RuleKind {
    pub const ALL: [RuleKind; 11] = [
        RuleKind::Condorcet,
        RuleKind::Plurality,
        RuleKind::Borda,
        RuleKind::Hare,
        RuleKind::SeqPairs,
        RuleKind::Dictator,
        RuleKind::Lpr,
        RuleKind::CondorcetAmend,
        RuleKind::SeqPairsAmend,
        RuleKind::Lu,
        RuleKind::Lur,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Plurality => "plurality",
            RuleKind::Borda => "borda",
            RuleKind::Hare => "hare",
            RuleKind::SeqPairs => "seq-pairs",
            RuleKind::Dictator => "dictator",
            RuleKind::Condorcet => "condorcet",
            RuleKind::Lpr => "lpr",
            RuleKind::CondorcetAmend => "condorcet-amend",
            RuleKind::SeqPairsAmend => "seq-pairs-amend",
            RuleKind::Lu => "lu",
            RuleKind::Lur => "lur",
        }
    }

    pub fn needs_agenda(self) -> bool {
        matches!(self, RuleKind::SeqPairs | RuleKind::SeqPairsAmend)
    }

    pub fn uses_condorcet_strictness(self) -> bool {
        matches!(self, RuleKind::Condorcet | RuleKind::CondorcetAmend)
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| RuleError::UnknownRule(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("unknown rule {0:?}")]
    UnknownRule(String),
    #[error("rule {0} requires an agenda")]
    MissingAgenda(RuleKind),
    #[error("agenda must list every alternative exactly once: {0}")]
    BadAgenda(String),
    #[error("rule dictator requires a dictator voter index")]
    MissingDictator,
    #[error("dictator index {index} is outside 1..={voters}")]
    DictatorOutOfRange { index: u64, voters: u64 },
}

/// A procedure together with its parameters, naming alternatives by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSpec {
    pub kind: RuleKind,
    pub agenda: Option<Vec<Alternative>>,
    pub dictator: Option<u64>,
    pub condorcet_strict: bool,
}

impl RuleSpec {
    pub fn new(kind: RuleKind) -> Self {
        RuleSpec { kind, agenda: None, dictator: None, condorcet_strict: false }
    }

    pub fn with_agenda(mut self, agenda: Vec<Alternative>) -> Self {
        self.agenda = Some(agenda);
        self
    }

    pub fn with_dictator(mut self, voter: u64) -> Self {
        self.dictator = Some(voter);
        self
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.condorcet_strict = strict;
        self
    }

    /// Checks the parameters against `p` and binds them to its positions.
    pub fn resolve(&self, p: &Profile) -> Result<Rule, RuleError> {
        let agenda = if self.kind.needs_agenda() {
            let names = self.agenda.as_ref().ok_or(RuleError::MissingAgenda(self.kind))?;
            resolve_agenda(p, names)?
        } else {
            Vec::new()
        };
        let dictator = if self.kind == RuleKind::Dictator {
            let index = self.dictator.ok_or(RuleError::MissingDictator)?;
            if index == 0 || index > p.voters() {
                return Err(RuleError::DictatorOutOfRange { index, voters: p.voters() });
            }
            index
        } else {
            0
        };
        Ok(Rule { kind: self.kind, agenda, dictator, strict: self.condorcet_strict })
    }

    /// Rule name followed by the parameters that affect it.
    pub fn describe(&self) -> String {
        let mut out = self.kind.name().to_string();
        if let Some(agenda) = self.agenda.as_ref().filter(|_| self.kind.needs_agenda()) {
            let names: Vec<_> = agenda.iter().map(Alternative::as_str).collect();
            out.push_str(&format!(" agenda={}", names.join(",")));
        }
        if let Some(d) = self.dictator.filter(|_| self.kind == RuleKind::Dictator) {
            out.push_str(&format!(" dictator={d}"));
        }
        if self.kind.uses_condorcet_strictness() {
            out.push_str(if self.condorcet_strict { " semantics=strict" } else { " semantics=weak" });
        }
        out
    }
}

fn resolve_agenda(p: &Profile, names: &[Alternative]) -> Result<Vec<usize>, RuleError> {
    let mut order = Vec::with_capacity(names.len());
    let mut seen = AltSet::EMPTY;
    for name in names {
        let alt =
            p.index_of(name.as_str()).ok_or_else(|| RuleError::BadAgenda(format!("unknown alternative {name}")))?;
        if seen.contains(alt) {
            return Err(RuleError::BadAgenda(format!("{name} listed twice")));
        }
        seen.insert(alt);
        order.push(alt);
    }
    if seen != p.all() {
        let missing = p.names(p.all().difference(seen));
        let missing: Vec<_> = missing.iter().map(Alternative::as_str).collect();
        return Err(RuleError::BadAgenda(format!("missing {}", missing.join(","))));
    }
    Ok(order)
}

/// A [`RuleSpec`] bound to the alternative positions of a profile shape.
///
/// A resolved rule can be reused on any profile with the same alternative
/// list; the dictator index must stay within the voter count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    kind: RuleKind,
    agenda: Vec<usize>,
    dictator: u64,
    strict: bool,
}

/// One audited step of a procedure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Round {
    pub index: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// Rule name and parameters.
    pub rule: String,
    pub set: AltSet,
    /// Winners sorted by name.
    pub winners: Vec<Alternative>,
    pub rounds: Vec<Round>,
}

impl Outcome {
    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

trait Trace {
    fn round(&mut self, text: impl FnOnce() -> String);
}

struct Silent;

impl Trace for Silent {
    #[inline]
    fn round(&mut self, _text: impl FnOnce() -> String) {}
}

impl Trace for Vec<String> {
    fn round(&mut self, text: impl FnOnce() -> String) {
        self.push(text());
    }
}

impl Rule {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn agenda(&self) -> &[usize] {
        &self.agenda
    }

    /// Winner set without building a trace.
    pub fn winners(&self, p: &Profile) -> AltSet {
        self.run(p, &mut Silent)
    }

    pub fn evaluate(&self, p: &Profile) -> Outcome {
        let mut rounds = Vec::new();
        let set = self.run(p, &mut rounds);
        Outcome {
            rule: self.describe(p),
            set,
            winners: p.names(set),
            rounds: rounds.into_iter().enumerate().map(|(i, text)| Round { index: i + 1, text }).collect(),
        }
    }

    pub fn describe(&self, p: &Profile) -> String {
        let mut spec = RuleSpec::new(self.kind).strict(self.strict);
        if self.kind.needs_agenda() {
            spec.agenda = Some(self.agenda.iter().map(|&a| p.name(a).clone()).collect());
        }
        if self.kind == RuleKind::Dictator {
            spec.dictator = Some(self.dictator);
        }
        spec.describe()
    }

    fn run(&self, p: &Profile, t: &mut impl Trace) -> AltSet {
        match self.kind {
            RuleKind::Plurality => plurality_run(p, t),
            RuleKind::Borda => borda_run(p, t),
            RuleKind::Hare => hare_run(p, t),
            RuleKind::SeqPairs => seq_pairs_run(p, &self.agenda, t),
            RuleKind::Dictator => dictator_run(p, self.dictator, t),
            RuleKind::Condorcet => condorcet_run(p, self.strict, t),
            RuleKind::Lpr => lpr_run(p, t),
            RuleKind::CondorcetAmend => {
                let winners = condorcet_run(p, self.strict, t);
                amend(p, winners, t)
            }
            RuleKind::SeqPairsAmend => {
                let winners = seq_pairs_run(p, &self.agenda, t);
                amend(p, winners, t)
            }
            RuleKind::Lu => lu_run(p, t),
            RuleKind::Lur => lur_run(p, t),
        }
    }
}

/// Dispatches `spec` on `p`.
pub fn evaluate(spec: &RuleSpec, p: &Profile) -> Result<Outcome, RuleError> {
    Ok(spec.resolve(p)?.evaluate(p))
}

pub fn plurality(p: &Profile) -> Outcome {
    infallible(RuleSpec::new(RuleKind::Plurality), p)
}

pub fn borda(p: &Profile) -> Outcome {
    infallible(RuleSpec::new(RuleKind::Borda), p)
}

pub fn hare(p: &Profile) -> Outcome {
    infallible(RuleSpec::new(RuleKind::Hare), p)
}

pub fn seq_pairs(p: &Profile, agenda: &[Alternative]) -> Result<Outcome, RuleError> {
    evaluate(&RuleSpec::new(RuleKind::SeqPairs).with_agenda(agenda.to_vec()), p)
}

pub fn dictatorship(p: &Profile, voter: u64) -> Result<Outcome, RuleError> {
    evaluate(&RuleSpec::new(RuleKind::Dictator).with_dictator(voter), p)
}

pub fn condorcet(p: &Profile, strict: bool) -> Outcome {
    infallible(RuleSpec::new(RuleKind::Condorcet).strict(strict), p)
}

pub fn lpr(p: &Profile) -> Outcome {
    infallible(RuleSpec::new(RuleKind::Lpr), p)
}

pub fn condorcet_amend(p: &Profile, strict: bool) -> Outcome {
    infallible(RuleSpec::new(RuleKind::CondorcetAmend).strict(strict), p)
}

pub fn seq_pairs_amend(p: &Profile, agenda: &[Alternative]) -> Result<Outcome, RuleError> {
    evaluate(&RuleSpec::new(RuleKind::SeqPairsAmend).with_agenda(agenda.to_vec()), p)
}

pub fn lu(p: &Profile) -> Outcome {
    infallible(RuleSpec::new(RuleKind::Lu), p)
}

pub fn lur(p: &Profile) -> Outcome {
    infallible(RuleSpec::new(RuleKind::Lur), p)
}

fn infallible(spec: RuleSpec, p: &Profile) -> Outcome {
    evaluate(&spec, p).expect("rule takes no parameters")
}

fn argmax(values: &[u64], among: AltSet) -> AltSet {
    let best = among.iter().map(|a| values[a]).max().unwrap_or(0);
    among.iter().filter(|&a| values[a] == best).collect()
}

fn argmin(values: &[u64], among: AltSet) -> AltSet {
    let best = among.iter().map(|a| values[a]).min().unwrap_or(0);
    among.iter().filter(|&a| values[a] == best).collect()
}

fn show_counts(p: &Profile, label: &str, values: &[u64], among: AltSet) -> String {
    let parts: Vec<_> = among.iter().map(|a| format!("{}={}", p.name(a), values[a])).collect();
    format!("{label}: {}", parts.join(" "))
}

fn show_set(p: &Profile, set: AltSet) -> String {
    if set.is_empty() {
        return "none".to_string();
    }
    let names: Vec<_> = p.names(set).iter().map(|a| a.to_string()).collect();
    names.join(" ")
}

fn plurality_run(p: &Profile, t: &mut impl Trace) -> AltSet {
    let all = p.all();
    let counts = p.first_counts_within(all);
    let winners = argmax(&counts, all);
    t.round(|| format!("{}; highest: {}", show_counts(p, "first-place counts", &counts, all), show_set(p, winners)));
    winners
}

fn borda_run(p: &Profile, t: &mut impl Trace) -> AltSet {
    let m = p.m();
    let mut scores = vec![0u64; m];
    for b in p.blocks() {
        for (pos, &alt) in b.ranking.as_slice().iter().enumerate() {
            scores[alt] += b.weight * (m - 1 - pos) as u64;
        }
    }
    let winners = argmax(&scores, p.all());
    t.round(|| format!("{}; highest: {}", show_counts(p, "borda scores", &scores, p.all()), show_set(p, winners)));
    winners
}

fn hare_run(p: &Profile, t: &mut impl Trace) -> AltSet {
    let mut active = p.all();
    loop {
        let counts = p.first_counts_within(active);
        let fewest = argmin(&counts, active);
        if fewest == active {
            t.round(|| {
                format!(
                    "{}; all remaining tie, winners: {}",
                    show_counts(p, "first-place counts", &counts, active),
                    show_set(p, active)
                )
            });
            return active;
        }
        t.round(|| {
            format!("{}; delete {}", show_counts(p, "first-place counts", &counts, active), show_set(p, fewest))
        });
        active = active.difference(fewest);
    }
}

fn seq_pairs_run(p: &Profile, agenda: &[usize], t: &mut impl Trace) -> AltSet {
    let margins = p.margins();
    let m = p.m();
    let n = p.voters() as i64;
    let margin = |x: usize, y: usize| margins[x * m + y];
    let mut survivors = AltSet::single(agenda[0]);
    t.round(|| format!("agenda opens with {}", p.name(agenda[0])));
    for &next in &agenda[1..] {
        let mut kept: AltSet = survivors.iter().filter(|&s| margin(s, next) >= 0).collect();
        if survivors.iter().all(|s| margin(next, s) >= 0) {
            kept.insert(next);
        }
        t.round(|| {
            let duels: Vec<_> = survivors
                .iter()
                .map(|s| {
                    let d = margin(s, next);
                    format!("{} vs {} {}-{}", p.name(s), p.name(next), (n + d) / 2, (n - d) / 2)
                })
                .collect();
            format!("{}; survivors: {}", duels.join(", "), show_set(p, kept))
        });
        survivors = kept;
    }
    survivors
}

fn dictator_run(p: &Profile, voter: u64, t: &mut impl Trace) -> AltSet {
    let top = p.voter(voter).expect("dictator index checked at resolution").top();
    t.round(|| format!("voter {voter} ranks {} first", p.name(top)));
    AltSet::single(top)
}

fn condorcet_run(p: &Profile, strict: bool, t: &mut impl Trace) -> AltSet {
    let margins = p.margins();
    let m = p.m();
    let winners: AltSet = (0..m)
        .filter(|&x| {
            (0..m).filter(|&y| y != x).all(|y| {
                let d = margins[x * m + y];
                if strict {
                    d > 0
                } else {
                    d >= 0
                }
            })
        })
        .collect();
    t.round(|| {
        let mut parts = Vec::new();
        for x in 0..m {
            for y in x + 1..m {
                parts.push(format!("{}-{}:{:+}", p.name(x), p.name(y), margins[x * m + y]));
            }
        }
        let label = if strict { "beating every rival" } else { "undefeated" };
        format!("margins {}; {label}: {}", parts.join(" "), show_set(p, winners))
    });
    winners
}

fn amend(p: &Profile, winners: AltSet, t: &mut impl Trace) -> AltSet {
    let tainted = taint(p, winners);
    let kept = winners.difference(tainted);
    t.round(|| {
        format!(
            "drop winners ranked last by at least half of {} voters: {}; remaining: {}",
            p.voters(),
            show_set(p, tainted),
            show_set(p, kept)
        )
    });
    kept
}

fn lpr_run(p: &Profile, t: &mut impl Trace) -> AltSet {
    let mut active = p.all();
    loop {
        let counts = p.bottom_counts_within(active);
        let most = argmax(&counts, active);
        if most == active {
            t.round(|| {
                format!(
                    "{}; all remaining tie, winners: {}",
                    show_counts(p, "last-place counts", &counts, active),
                    show_set(p, active)
                )
            });
            return active;
        }
        t.round(|| format!("{}; delete {}", show_counts(p, "last-place counts", &counts, active), show_set(p, most)));
        active = active.difference(most);
    }
}

fn lu_run(p: &Profile, t: &mut impl Trace) -> AltSet {
    let all = p.all();
    let counts = p.bottom_counts_within(all);
    let winners = argmin(&counts, all);
    t.round(|| format!("{}; fewest: {}", show_counts(p, "last-place counts", &counts, all), show_set(p, winners)));
    winners
}

fn lur_run(p: &Profile, t: &mut impl Trace) -> AltSet {
    let mut current = p.all();
    loop {
        let counts = p.bottom_counts_within(current);
        let next = argmin(&counts, current);
        let done = next.len() == 1 || next == current;
        t.round(|| {
            format!(
                "{}; fewest: {}{}",
                show_counts(p, "last-place counts", &counts, current),
                show_set(p, next),
                if done { " (final)" } else { "" }
            )
        });
        if done {
            return next;
        }
        current = next;
    }
}
