//! Bounded exhaustive search for axiom violations.
//!
//! Each voter-count level is split into fixed-size chunks that workers scan
//! in canonical order; a batch of chunks is evaluated concurrently and the
//! lowest-indexed witness wins. Chunking does not depend on the worker count,
//! so verdicts, witnesses and counters are identical for any thread count.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{AltSet, Alternative, Profile, RawProfile};
use crate::rules::{self, Rule, RuleKind, RuleSpec};

use super::enumerate::{profile_count, ProfileSpace, SearchBounds, DEFAULT_CAP};
use super::{condorcet_winner_index, taint, CriteriaError, CriterionId};

const CHUNK: u64 = 2048;
const BATCH: u64 = 64;

/// Which agendas a sequential-pairs check quantifies over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AgendaChoice {
    All,
    Fixed(Vec<Alternative>),
}

/// A rule family to check: parameters that are not fixed are quantified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTemplate {
    pub kind: RuleKind,
    pub agenda: AgendaChoice,
    /// Dictator voter index; voter 1 unless set.
    pub dictator: u64,
    pub condorcet_strict: bool,
}

impl RuleTemplate {
    pub fn new(kind: RuleKind) -> Self {
        RuleTemplate { kind, agenda: AgendaChoice::All, dictator: 1, condorcet_strict: false }
    }

    pub fn with_agenda(mut self, agenda: Vec<Alternative>) -> Self {
        self.agenda = AgendaChoice::Fixed(agenda);
        self
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.condorcet_strict = strict;
        self
    }

    pub fn describe(&self) -> String {
        let mut out = self.kind.name().to_string();
        if self.kind.needs_agenda() {
            match &self.agenda {
                AgendaChoice::All => out.push_str(" agenda=all"),
                AgendaChoice::Fixed(a) => {
                    let names: Vec<_> = a.iter().map(Alternative::as_str).collect();
                    out.push_str(&format!(" agenda={}", names.join(",")));
                }
            }
        }
        if self.kind == RuleKind::Dictator {
            out.push_str(&format!(" dictator={}", self.dictator));
        }
        if self.kind.uses_condorcet_strictness() {
            out.push_str(if self.condorcet_strict { " semantics=strict" } else { " semantics=weak" });
        }
        out
    }

    fn specs(&self, space: &ProfileSpace) -> Vec<RuleSpec> {
        let base = RuleSpec::new(self.kind).strict(self.condorcet_strict);
        match self.kind {
            k if k.needs_agenda() => match &self.agenda {
                AgendaChoice::Fixed(a) => vec![base.with_agenda(a.clone())],
                AgendaChoice::All => space
                    .rankings()
                    .iter()
                    .map(|r| base.clone().with_agenda(r.iter().map(|&a| space.alternatives()[a].clone()).collect()))
                    .collect(),
            },
            RuleKind::Dictator => vec![base.with_dictator(self.dictator)],
            _ => vec![base],
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Largest number of profiles the bounds may span.
    pub cap: u64,
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { cap: DEFAULT_CAP, threads: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    PassWithinBounds,
    Violated,
}

/// What a counterexample shows, in profile positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Detail {
    NoWinner,
    MissedCondorcetWinner { winner: usize },
    Dominated { dominant: usize, dominated: usize },
    Lift { alternative: usize, voter: u64, lifted: Profile, lifted_winners: AltSet },
    Irrelevant { winner: usize, loser: usize, changed: Profile, changed_winners: AltSet },
    Disappointing { tainted: AltSet },
}

/// A concrete profile (and, for Mono and IIA, its companion) on which a rule
/// breaks an axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub rule: RuleSpec,
    pub profile: Profile,
    pub winners: AltSet,
    pub detail: Detail,
}

impl Witness {
    pub fn criterion(&self) -> CriterionId {
        match self.detail {
            Detail::NoWinner => CriterionId::AlwaysAWinner,
            Detail::MissedCondorcetWinner { .. } => CriterionId::CondorcetWinner,
            Detail::Dominated { .. } => CriterionId::Pareto,
            Detail::Lift { .. } => CriterionId::Monotonicity,
            Detail::Irrelevant { .. } => CriterionId::Independence,
            Detail::Disappointing { .. } => CriterionId::NonDisappointment,
        }
    }

    /// The companion profile of a Mono or IIA witness.
    pub fn variant(&self) -> Option<(&Profile, AltSet)> {
        match &self.detail {
            Detail::Lift { lifted, lifted_winners, .. } => Some((lifted, *lifted_winners)),
            Detail::Irrelevant { changed, changed_winners, .. } => Some((changed, *changed_winners)),
            _ => None,
        }
    }

    pub fn explanation(&self) -> String {
        let p = &self.profile;
        let name = |a: usize| p.name(a).to_string();
        let set = |s: AltSet| {
            let names: Vec<_> = p.names(s).iter().map(|a| a.to_string()).collect();
            if names.is_empty() {
                "none".to_string()
            } else {
                names.join(" ")
            }
        };
        match &self.detail {
            Detail::NoWinner => "no alternative wins".to_string(),
            Detail::MissedCondorcetWinner { winner } => format!(
                "{} is the Condorcet winner but the winners are {}",
                name(*winner),
                set(self.winners)
            ),
            Detail::Dominated { dominant, dominated } => format!(
                "every voter ranks {} above {}, yet {} wins",
                name(*dominant),
                name(*dominated),
                name(*dominated)
            ),
            Detail::Lift { alternative, voter, lifted_winners, .. } => format!(
                "voter {voter} moves {x} up one place; {x} wins before (winners {}) but not after (winners {})",
                set(self.winners),
                set(*lifted_winners),
                x = name(*alternative)
            ),
            Detail::Irrelevant { winner, loser, changed_winners, .. } => format!(
                "{x} wins and {y} does not (winners {}); in the changed profile every voter keeps the same {x}-vs-{y} order, yet {y} wins (winners {})",
                set(self.winners),
                set(*changed_winners),
                x = name(*winner),
                y = name(*loser)
            ),
            Detail::Disappointing { tainted } => {
                let t = p.tally();
                let parts: Vec<_> = tainted
                    .iter()
                    .map(|x| format!("{} is last for {} of {} voters", name(x), t.bottom(x), p.voters()))
                    .collect();
                format!("winners {}; {}", set(self.winners), parts.join(", "))
            }
        }
    }

    /// Re-derives the violation from the stored profiles alone, through the
    /// traced evaluation path and direct ballot inspection.
    pub fn replay(&self) -> bool {
        let Ok(outcome) = rules::evaluate(&self.rule, &self.profile) else {
            return false;
        };
        let winners = outcome.set;
        if winners != self.winners {
            return false;
        }
        let p = &self.profile;
        let voters: Vec<&[usize]> = p.expanded().map(|r| r.as_slice()).collect();
        let above = |order: &[usize], x: usize, y: usize| {
            order.iter().position(|&a| a == x) < order.iter().position(|&a| a == y)
        };
        match &self.detail {
            Detail::NoWinner => winners.is_empty(),
            Detail::MissedCondorcetWinner { winner } => {
                let weak = rules::condorcet(p, false).set;
                weak == AltSet::single(*winner) && winners != weak
            }
            Detail::Dominated { dominant, dominated } => {
                winners.contains(*dominated) && voters.iter().all(|v| above(v, *dominant, *dominated))
            }
            Detail::Lift { alternative, voter, lifted, .. } => {
                let x = *alternative;
                let mut orders: Vec<Vec<usize>> = voters.iter().map(|v| v.to_vec()).collect();
                let Some(order) = orders.get_mut(*voter as usize - 1) else {
                    return false;
                };
                let Some(pos) = order.iter().position(|&a| a == x).filter(|&pos| pos > 0) else {
                    return false;
                };
                order.swap(pos - 1, pos);
                let rebuilt = rebuild(p, &orders);
                if !same_voters(&rebuilt, lifted) {
                    return false;
                }
                let after = rules::evaluate(&self.rule, &rebuilt).map(|o| o.set);
                winners.contains(x) && matches!(after, Ok(s) if !s.contains(x))
            }
            Detail::Irrelevant { winner, loser, changed, .. } => {
                let (x, y) = (*winner, *loser);
                let others: Vec<&[usize]> = changed.expanded().map(|r| r.as_slice()).collect();
                let kept = others.len() == voters.len()
                    && changed.alternatives() == p.alternatives()
                    && voters.iter().zip(&others).all(|(a, b)| above(a, x, y) == above(b, x, y));
                let after = rules::evaluate(&self.rule, changed).map(|o| o.set);
                kept && winners.contains(x) && !winners.contains(y) && matches!(after, Ok(s) if s.contains(y))
            }
            Detail::Disappointing { tainted } => {
                let n = voters.len() as u64;
                p.m() >= 3
                    && !tainted.is_empty()
                    && tainted.is_subset(winners)
                    && tainted.iter().all(|x| 2 * voters.iter().filter(|v| v[v.len() - 1] == x).count() as u64 >= n)
            }
        }
    }
}

fn rebuild(template: &Profile, orders: &[Vec<usize>]) -> Profile {
    let names = |order: &Vec<usize>| order.iter().map(|&a| template.name(a).to_string()).collect();
    Profile::validate(RawProfile {
        alternatives: template.alternatives().iter().map(|a| a.to_string()).collect(),
        blocks: orders.iter().map(|o| (1, names(o))).collect(),
    })
    .expect("rebuilt from a valid profile")
}

fn same_voters(a: &Profile, b: &Profile) -> bool {
    a.alternatives() == b.alternatives() && a.expanded().eq(b.expanded())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionVerdict {
    pub rule: String,
    pub criterion: CriterionId,
    pub bounds: SearchBounds,
    /// Profiles visited, up to and including the witness when one is found.
    pub profiles_checked: u64,
    /// Lifted profiles (Mono) or winner/non-winner pairs (IIA) examined.
    pub variants_checked: u64,
    pub witness: Option<Witness>,
}

impl CriterionVerdict {
    pub fn status(&self) -> Status {
        if self.witness.is_some() {
            Status::Violated
        } else {
            Status::PassWithinBounds
        }
    }
}

/// Searches every profile within `bounds` for a violation of `criterion` by
/// the rule family `template`, returning the first witness in canonical order.
pub fn check_criterion(
    template: &RuleTemplate,
    criterion: CriterionId,
    bounds: SearchBounds,
    config: &SearchConfig,
) -> Result<CriterionVerdict, CriteriaError> {
    let space = ProfileSpace::checked(&bounds, config.cap)?;
    if criterion == CriterionId::NonDisappointment && bounds.m < 3 {
        return Err(CriteriaError::SdUndefined(bounds.m));
    }
    if template.kind == RuleKind::Dictator && !(1..=bounds.n_min).contains(&template.dictator) {
        return Err(CriteriaError::IncompatibleRule(format!(
            "dictator {} is not a voter of every profile with {}..={} voters",
            template.dictator, bounds.n_min, bounds.n_max
        )));
    }
    let sample = space.profile(bounds.n_min, 0);
    let rules = template
        .specs(&space)
        .into_iter()
        .map(|spec| Ok((spec.resolve(&sample)?, spec)))
        .collect::<Result<Vec<_>, CriteriaError>>()?;
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = config.threads {
            builder = builder.num_threads(t);
        }
        builder.build().map_err(|e| CriteriaError::Workers(e.to_string()))?
    };
    let search = Search { space: &space, pool: &pool };

    let mut checked = 0u64;
    let mut variants = 0u64;
    for n in bounds.levels() {
        let level = space.level_size(n);
        for (i, (rule, spec)) in rules.iter().enumerate() {
            let scan = search.level(criterion, rule, spec, n);
            variants += scan.variants;
            if let Some(witness) = scan.witness {
                checked += if i == 0 { scan.checked } else { level };
                return Ok(CriterionVerdict {
                    rule: template.describe(),
                    criterion,
                    bounds,
                    profiles_checked: checked,
                    variants_checked: variants,
                    witness: Some(witness),
                });
            }
        }
        checked += level;
    }
    debug_assert_eq!(checked as u128, profile_count(&bounds));
    Ok(CriterionVerdict {
        rule: template.describe(),
        criterion,
        bounds,
        profiles_checked: checked,
        variants_checked: variants,
        witness: None,
    })
}

struct Scan {
    checked: u64,
    variants: u64,
    witness: Option<Witness>,
}

struct Search<'a> {
    space: &'a ProfileSpace,
    pool: &'a rayon::ThreadPool,
}

impl Search<'_> {
    /// Visits the profiles of one level in canonical order until `visit`
    /// reports a witness.
    fn scan<F>(&self, n: u64, visit: F) -> Scan
    where
        F: Fn(u64) -> (u64, Option<Witness>) + Sync,
    {
        let size = self.space.level_size(n);
        let chunks = size.div_ceil(CHUNK);
        let mut variants = 0;
        let mut start = 0;
        while start < chunks {
            let end = (start + BATCH).min(chunks);
            let results: Vec<(u64, Option<(u64, Witness)>)> = self.pool.install(|| {
                (start as usize..end as usize)
                    .into_par_iter()
                    .map(|c| {
                        let lo = c as u64 * CHUNK;
                        let hi = (lo + CHUNK).min(size);
                        let mut seen = 0;
                        for index in lo..hi {
                            let (v, found) = visit(index);
                            seen += v;
                            if let Some(w) = found {
                                return (seen, Some((index, w)));
                            }
                        }
                        (seen, None)
                    })
                    .collect()
            });
            for (v, found) in results {
                variants += v;
                if let Some((index, witness)) = found {
                    return Scan { checked: index + 1, variants, witness: Some(witness) };
                }
            }
            start = end;
        }
        Scan { checked: size, variants, witness: None }
    }

    fn level(&self, criterion: CriterionId, rule: &Rule, spec: &RuleSpec, n: u64) -> Scan {
        let space = self.space;
        let witness = |profile: Profile, winners: AltSet, detail: Detail| Witness {
            rule: spec.clone(),
            profile,
            winners,
            detail,
        };
        match criterion {
            CriterionId::AlwaysAWinner => self.scan(n, |index| {
                let p = space.profile(n, index);
                let w = rule.winners(&p);
                (0, w.is_empty().then(|| witness(p, w, Detail::NoWinner)))
            }),
            CriterionId::CondorcetWinner => self.scan(n, |index| {
                let p = space.profile(n, index);
                let Some(cw) = condorcet_winner_index(&p) else {
                    return (0, None);
                };
                let w = rule.winners(&p);
                let missed = w != AltSet::single(cw);
                (0, missed.then(|| witness(p, w, Detail::MissedCondorcetWinner { winner: cw })))
            }),
            CriterionId::Pareto => self.scan(n, |index| {
                let p = space.profile(n, index);
                let w = rule.winners(&p);
                let m = p.m();
                let margins = p.margins();
                let everyone = p.voters() as i64;
                let pair =
                    w.iter().find_map(|y| (0..m).find(|&x| x != y && margins[x * m + y] == everyone).map(|x| (x, y)));
                let found = pair.map(|(dominant, dominated)| witness(p, w, Detail::Dominated { dominant, dominated }));
                (0, found)
            }),
            CriterionId::NonDisappointment => self.scan(n, |index| {
                let p = space.profile(n, index);
                let w = rule.winners(&p);
                let tainted = taint(&p, w);
                (0, (!tainted.is_empty()).then(|| witness(p, w, Detail::Disappointing { tainted })))
            }),
            CriterionId::Monotonicity => self.scan(n, |index| {
                let digits = space.digits(n, index);
                let p = space.profile_of_digits(&digits);
                let w = rule.winners(&p);
                let mut lifts = 0;
                for x in w.iter() {
                    for (voter, &d) in digits.iter().enumerate() {
                        let pos = space.position(d, x);
                        if pos == 0 {
                            continue;
                        }
                        let orders: Vec<Vec<usize>> = digits
                            .iter()
                            .enumerate()
                            .map(|(i, &e)| {
                                let mut order = space.rankings()[e].clone();
                                if i == voter {
                                    order.swap(pos - 1, pos);
                                }
                                order
                            })
                            .collect();
                        let lifted = space.profile_of_orders(orders);
                        let lifted_winners = rule.winners(&lifted);
                        lifts += 1;
                        if !lifted_winners.contains(x) {
                            let detail =
                                Detail::Lift { alternative: x, voter: voter as u64 + 1, lifted, lifted_winners };
                            return (lifts, Some(witness(p, w, detail)));
                        }
                    }
                }
                (lifts, None)
            }),
            CriterionId::Independence => self.independence(rule, n, witness),
        }
    }

    /// Two passes over a level. The first records, for every ordered pair
    /// (x, y) and every pattern of which voters put x above y, the earliest
    /// profile where y wins. The second finds the earliest profile where x
    /// wins, y loses, and some profile with the same x-vs-y pattern lets y win.
    fn independence(&self, rule: &Rule, n: u64, witness: impl Fn(Profile, AltSet, Detail) -> Witness + Sync) -> Scan {
        let space = self.space;
        let m = space.m();
        let pattern = |digits: &[usize], x: usize, y: usize| {
            digits
                .iter()
                .enumerate()
                .fold(0u64, |bits, (i, &d)| bits | ((space.position(d, x) < space.position(d, y)) as u64) << i)
        };
        let size = space.level_size(n);
        let chunks = size.div_ceil(CHUNK) as usize;
        let earliest: HashMap<(usize, usize, u64), u64> = self.pool.install(|| {
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut local = HashMap::new();
                    let lo = c as u64 * CHUNK;
                    for index in lo..(lo + CHUNK).min(size) {
                        let digits = space.digits(n, index);
                        let w = rule.winners(&space.profile_of_digits(&digits));
                        for y in w.iter() {
                            for x in (0..m).filter(|&x| x != y) {
                                local.entry((x, y, pattern(&digits, x, y))).or_insert(index);
                            }
                        }
                    }
                    local
                })
                .reduce(HashMap::new, |mut a, b| {
                    for (k, v) in b {
                        a.entry(k).and_modify(|e: &mut u64| *e = (*e).min(v)).or_insert(v);
                    }
                    a
                })
        });
        self.scan(n, |index| {
            let digits = space.digits(n, index);
            let p = space.profile_of_digits(&digits);
            let w = rule.winners(&p);
            let mut pairs = 0;
            for x in w.iter() {
                for y in (0..m).filter(|&y| !w.contains(y)) {
                    pairs += 1;
                    if let Some(&other) = earliest.get(&(x, y, pattern(&digits, x, y))) {
                        let changed = space.profile(n, other);
                        let changed_winners = rule.winners(&changed);
                        let detail = Detail::Irrelevant { winner: x, loser: y, changed, changed_winners };
                        return (pairs, Some(witness(p, w, detail)));
                    }
                }
            }
            (pairs, None)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballot::serialize_profile;

    fn check(kind: RuleKind, c: CriterionId, m: usize, n: u64) -> CriterionVerdict {
        check_criterion(&RuleTemplate::new(kind), c, SearchBounds::new(m, n), &SearchConfig::default()).unwrap()
    }

    #[test]
    fn plurality_disappoints_within_three_voters() {
        let v = check(RuleKind::Plurality, CriterionId::NonDisappointment, 3, 4);
        let w = v.witness.as_ref().unwrap();
        assert!(w.replay());
        // No single voter's top is last for anyone. With two voters, the
        // first three pairs keep a alone or tie a,b with c last; the fourth,
        // a>b>c and b>c>a, ties a and b while a is last for one of two voters.
        assert_eq!(v.profiles_checked, 6 + 4);
        assert_eq!(serialize_profile(&w.profile), "alternatives: a b c\n1: a > b > c\n1: b > c > a\n");
    }

    #[test]
    fn condorcet_fails_aaw_on_a_cycle() {
        let v = check(RuleKind::Condorcet, CriterionId::AlwaysAWinner, 3, 3);
        let w = v.witness.unwrap();
        assert!(w.replay());
        assert!(w.winners.is_empty());
    }

    #[test]
    fn passing_search_visits_every_profile() {
        let v = check(RuleKind::Lpr, CriterionId::NonDisappointment, 3, 4);
        assert_eq!(v.status(), Status::PassWithinBounds);
        assert_eq!(v.profiles_checked, 1554);
    }

    #[test]
    fn mono_counts_every_lift() {
        let v = check(RuleKind::Lu, CriterionId::Monotonicity, 3, 3);
        assert_eq!(v.status(), Status::PassWithinBounds);
        // Independent recount of lifts: every (profile, winner, voter with
        // the winner below the top).
        let mut expected = 0;
        for n in 1..=3u64 {
            let space = ProfileSpace::new(3);
            for index in 0..space.level_size(n) {
                let p = space.profile(n, index);
                let w = rules::lu(&p).set;
                for x in w.iter() {
                    expected += p.expanded().filter(|r| r.top() != x).count() as u64;
                }
            }
        }
        assert_eq!(v.variants_checked, expected);
        let bound: u64 = (1..=3u32).map(|n| 6u64.pow(n) * 3 * n as u64).sum();
        assert!(v.variants_checked <= bound);
    }

    #[test]
    fn thread_count_does_not_change_verdicts() {
        for (kind, c) in [
            (RuleKind::Lpr, CriterionId::Independence),
            (RuleKind::Hare, CriterionId::Monotonicity),
            (RuleKind::SeqPairs, CriterionId::Pareto),
        ] {
            let run = |threads| {
                check_criterion(
                    &RuleTemplate::new(kind),
                    c,
                    SearchBounds::new(3, 4),
                    &SearchConfig { threads: Some(threads), ..Default::default() },
                )
                .unwrap()
            };
            assert_eq!(run(1), run(8));
        }
    }

    #[test]
    fn parameter_errors() {
        let mut t = RuleTemplate::new(RuleKind::Dictator);
        t.dictator = 3;
        let err =
            check_criterion(&t, CriterionId::Pareto, SearchBounds::new(3, 4), &SearchConfig::default()).unwrap_err();
        assert!(matches!(err, CriteriaError::IncompatibleRule(_)));
        let err = check_criterion(
            &RuleTemplate::new(RuleKind::Lu),
            CriterionId::NonDisappointment,
            SearchBounds::new(2, 3),
            &SearchConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, CriteriaError::SdUndefined(2));
    }

    #[test]
    fn tampered_witness_fails_replay() {
        let v = check(RuleKind::Plurality, CriterionId::NonDisappointment, 3, 2);
        let mut w = v.witness.unwrap();
        assert!(w.replay());
        w.profile = ProfileSpace::new(3).profile(1, 0);
        assert!(!w.replay());
    }
}
