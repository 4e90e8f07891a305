//! Named reference profiles with their expected outcomes.
//!
//! Each fixture's profile is embedded from `corpus/<name>.ballots`. Where the
//! published outcome cannot be reproduced by the procedure as implemented,
//! the fixture expects the computed outcome and carries a discrepancy note
//! with the published one, so the difference stays visible.

use serde::Serialize;
use thiserror::Error;

use crate::ballot::parse_profile;
use crate::criteria::socially_disappointing;
use crate::model::{Alternative, Profile};
use crate::rules::{evaluate, RuleKind, RuleSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown fixture {0:?}")]
pub struct UnknownFixture(pub String);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub published: Vec<Alternative>,
    pub note: &'static str,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub text: &'static str,
    pub profile: Profile,
    pub rule: RuleSpec,
    pub expected_winners: Vec<Alternative>,
    /// `None` when the winner set is empty or m < 3.
    pub expected_sd: Option<bool>,
    pub source: &'static str,
    pub discrepancy: Option<Discrepancy>,
    /// Further rules checked on the same profile.
    pub also: Vec<(RuleSpec, Vec<Alternative>)>,
}

/// An extra rule to run on a fixture, with its expected winners.
type ExtraCheck = (fn() -> RuleSpec, &'static str);

struct Entry {
    name: &'static str,
    text: &'static str,
    rule: fn() -> RuleSpec,
    winners: &'static str,
    sd: Option<bool>,
    source: &'static str,
    discrepancy: Option<(&'static str, &'static str)>,
    also: &'static [ExtraCheck],
}

macro_rules! ballots {
    ($name:literal) => {
        include_str!(concat!("../corpus/", $name, ".ballots"))
    };
}

fn alts(list: &str) -> Vec<Alternative> {
    list.split_whitespace().map(|a| Alternative::new(a).expect("fixture token")).collect()
}

fn rule(kind: RuleKind) -> RuleSpec {
    RuleSpec::new(kind)
}

const ENTRIES: &[Entry] = &[
    Entry {
        name: "ex21-drinks",
        text: ballots!("ex21-drinks"),
        rule: || rule(RuleKind::Plurality),
        winners: "milk",
        sd: Some(true),
        source: "lunch-drink example: plurality picks the drink that five of nine voters rank last",
        discrepancy: None,
        also: &[],
    },
    Entry {
        name: "claim22-borda",
        text: ballots!("claim22-borda"),
        rule: || rule(RuleKind::Borda),
        winners: "a b c",
        sd: Some(true),
        source: "Borda three-way tie at 4 points; a and c are each last for two of four voters",
        discrepancy: None,
        also: &[],
    },
    Entry {
        name: "claim23-hare",
        text: ballots!("claim23-hare"),
        rule: || rule(RuleKind::Hare),
        winners: "a",
        sd: Some(true),
        source: "Hare deletes b and c together (3 first places each); a is last for six of ten",
        discrepancy: None,
        also: &[],
    },
    Entry {
        name: "claim24-seqpairs",
        text: ballots!("claim24-seqpairs"),
        rule: || rule(RuleKind::SeqPairs).with_agenda(alts("b c a")),
        winners: "a b",
        sd: Some(true),
        source: "sequential pairs on agenda b,c,a: b beats c 3-1, a ties b 2-2",
        discrepancy: None,
        also: &[(|| rule(RuleKind::SeqPairsAmend).with_agenda(alts("b c a")), "b")],
    },
    Entry {
        name: "claim25-dictator",
        text: ballots!("claim25-dictator"),
        rule: || rule(RuleKind::Dictator).with_dictator(1),
        winners: "a",
        sd: Some(true),
        source: "voter 1 dictates a, which two of four voters rank last",
        discrepancy: None,
        also: &[(|| rule(RuleKind::Dictator).with_dictator(3), "c")],
    },
    Entry {
        name: "ex23-lpr",
        text: ballots!("ex23-lpr"),
        rule: || rule(RuleKind::Lpr),
        winners: "wine",
        sd: Some(false),
        source: "lunch-drink example under least public resentment: milk goes, then beer (last on 6 of 9 shortened lists)",
        discrepancy: None,
        also: &[(|| rule(RuleKind::Borda), "wine")],
    },
    Entry {
        name: "prop29-cwc",
        text: ballots!("prop29-cwc"),
        rule: || rule(RuleKind::Lpr),
        winners: "b",
        sd: Some(false),
        source: "least public resentment elects b although a is the Condorcet winner",
        discrepancy: None,
        also: &[(|| rule(RuleKind::Condorcet), "a")],
    },
    Entry {
        name: "prop29-mono-before",
        text: ballots!("prop29-mono-before"),
        rule: || rule(RuleKind::Lpr),
        winners: "a",
        sd: Some(false),
        source: "least public resentment deletes b and c together and elects a",
        discrepancy: None,
        also: &[],
    },
    Entry {
        name: "prop29-mono-after",
        text: ballots!("prop29-mono-after"),
        rule: || rule(RuleKind::Lpr),
        winners: "b",
        sd: Some(false),
        source: "after voter 5 lifts a one place, c then a are deleted and b wins",
        discrepancy: None,
        also: &[],
    },
    Entry {
        name: "prop29-iia-before",
        text: ballots!("prop29-iia-before"),
        rule: || rule(RuleKind::Lpr),
        winners: "b",
        sd: Some(false),
        source: "least public resentment elects b; a is a non-winner",
        discrepancy: None,
        also: &[],
    },
    Entry {
        name: "prop29-iia-after",
        text: ballots!("prop29-iia-after"),
        rule: || rule(RuleKind::Lpr),
        winners: "b",
        sd: Some(false),
        source: "voter 4 swaps a and c keeping b above a",
        discrepancy: Some((
            "a b",
            "published outcome is a tie between a and b; recounting on the shortened lists deletes c (2 last places), then a (3 of 4), leaving b alone",
        )),
        also: &[],
    },
    Entry {
        name: "thm31-paradox",
        text: ballots!("thm31-paradox"),
        rule: || rule(RuleKind::Condorcet),
        winners: "d",
        sd: Some(true),
        source: "voting paradox on a,b,c with d tying each of them; d is undefeated and last for three of six",
        discrepancy: None,
        also: &[
            (|| rule(RuleKind::Condorcet).strict(true), ""),
            (|| rule(RuleKind::CondorcetAmend), ""),
            (|| rule(RuleKind::SeqPairs).with_agenda(alts("a b c d")), "c d"),
        ],
    },
    Entry {
        name: "prop32-agenda-abcd",
        text: ballots!("prop32-agenda-abcd"),
        rule: || rule(RuleKind::SeqPairsAmend).with_agenda(alts("a b c d")),
        winners: "c",
        sd: Some(false),
        source: "amended sequential pairs on agenda a,b,c,d drops d from {c, d}; amended Condorcet has no winner",
        discrepancy: None,
        also: &[(|| rule(RuleKind::CondorcetAmend), "")],
    },
    Entry {
        name: "prop33-lu-pareto",
        text: ballots!("prop33-lu-pareto"),
        rule: || rule(RuleKind::Lu),
        winners: "a b",
        sd: Some(false),
        source: "least unpopular elects b although every voter prefers a to b",
        discrepancy: None,
        also: &[(|| rule(RuleKind::Lur), "a")],
    },
    Entry {
        name: "prop33-lu-cwc-before",
        text: ballots!("prop33-lu-cwc-before"),
        rule: || rule(RuleKind::Lu),
        winners: "b",
        sd: Some(false),
        source: "least unpopular elects b although a is the Condorcet winner",
        discrepancy: None,
        also: &[(|| rule(RuleKind::Condorcet), "a")],
    },
    Entry {
        name: "prop33-lu-cwc-after",
        text: ballots!("prop33-lu-cwc-after"),
        rule: || rule(RuleKind::Lu),
        winners: "a b",
        sd: Some(false),
        source: "voter 3 swaps a and c keeping b above a; a joins the winners",
        discrepancy: None,
        also: &[],
    },
    Entry {
        name: "cycle3",
        text: ballots!("cycle3"),
        rule: || rule(RuleKind::Condorcet),
        winners: "",
        sd: None,
        source: "three-voter majority cycle a>b>c>a",
        discrepancy: None,
        also: &[
            (|| rule(RuleKind::Condorcet).strict(true), ""),
            (|| rule(RuleKind::Lur), "a b c"),
            (|| rule(RuleKind::Hare), "a b c"),
        ],
    },
];

/// Fixture names in published order.
pub fn fixture_names() -> impl Iterator<Item = &'static str> {
    ENTRIES.iter().map(|e| e.name)
}

pub fn load_fixture(name: &str) -> Result<Fixture, UnknownFixture> {
    let entry = ENTRIES.iter().find(|e| e.name == name).ok_or_else(|| UnknownFixture(name.to_string()))?;
    Ok(Fixture {
        name: entry.name,
        text: entry.text,
        profile: parse_profile(entry.text).expect("embedded fixture parses"),
        rule: (entry.rule)(),
        expected_winners: alts(entry.winners),
        expected_sd: entry.sd,
        source: entry.source,
        discrepancy: entry.discrepancy.map(|(published, note)| Discrepancy { published: alts(published), note }),
        also: entry.also.iter().map(|(r, w)| (r(), alts(w))).collect(),
    })
}

pub fn all_fixtures() -> Vec<Fixture> {
    fixture_names().map(|n| load_fixture(n).expect("listed fixture")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleCheck {
    pub rule: String,
    pub expected: Vec<Alternative>,
    pub actual: Vec<Alternative>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixtureResult {
    pub name: &'static str,
    pub source: &'static str,
    pub primary: RuleCheck,
    pub expected_sd: Option<bool>,
    pub actual_sd: Option<bool>,
    pub also: Vec<RuleCheck>,
    pub discrepancy: Option<Discrepancy>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusReport {
    pub fixtures: Vec<FixtureResult>,
}

impl CorpusReport {
    /// False iff some fixture without a recorded discrepancy mismatches.
    pub fn ok(&self) -> bool {
        self.fixtures.iter().all(|f| f.pass || f.discrepancy.is_some())
    }

    pub fn discrepancies(&self) -> impl Iterator<Item = &FixtureResult> {
        self.fixtures.iter().filter(|f| f.discrepancy.is_some())
    }

    pub fn render(&self) -> String {
        let list = |alts: &[Alternative]| {
            if alts.is_empty() {
                "{}".to_string()
            } else {
                let names: Vec<_> = alts.iter().map(Alternative::as_str).collect();
                format!("{{{}}}", names.join(","))
            }
        };
        let mut out = String::new();
        for f in &self.fixtures {
            let sd = match f.actual_sd {
                Some(true) => "sd=yes",
                Some(false) => "sd=no",
                None => "sd=n/a",
            };
            out.push_str(&format!(
                "{} {} [{}] winners={} {}\n",
                if f.pass { "PASS" } else { "FAIL" },
                f.name,
                f.primary.rule,
                list(&f.primary.actual),
                sd
            ));
            for c in f.also.iter().chain(std::iter::once(&f.primary)).filter(|c| !c.pass) {
                out.push_str(&format!(
                    "  mismatch [{}]: expected {} got {}\n",
                    c.rule,
                    list(&c.expected),
                    list(&c.actual)
                ));
            }
            if f.expected_sd != f.actual_sd {
                out.push_str(&format!("  mismatch sd: expected {:?} got {:?}\n", f.expected_sd, f.actual_sd));
            }
        }
        let passed = self.fixtures.iter().filter(|f| f.pass).count();
        out.push_str(&format!(
            "{} fixtures, {} pass, {} fail, {} discrepancies logged\n",
            self.fixtures.len(),
            passed,
            self.fixtures.len() - passed,
            self.discrepancies().count()
        ));
        for f in self.discrepancies() {
            let d = f.discrepancy.as_ref().expect("filtered");
            out.push_str(&format!(
                "DISCREPANCY {}: published {} computed {}; {}\n",
                f.name,
                list(&d.published),
                list(&f.primary.actual),
                d.note
            ));
        }
        out
    }
}

fn run_check(profile: &Profile, rule: &RuleSpec, expected: &[Alternative]) -> RuleCheck {
    let (description, actual) = match evaluate(rule, profile) {
        Ok(outcome) => (outcome.rule, outcome.winners),
        Err(e) => (format!("{} ({e})", rule.describe()), Vec::new()),
    };
    RuleCheck { rule: description, pass: actual == expected, expected: expected.to_vec(), actual }
}

pub fn run_fixture(f: &Fixture) -> FixtureResult {
    let primary = run_check(&f.profile, &f.rule, &f.expected_winners);
    let actual_sd = match f.profile.set_of(&primary.actual) {
        Ok(set) if !set.is_empty() => socially_disappointing(&f.profile, set).ok(),
        _ => None,
    };
    let also: Vec<_> = f.also.iter().map(|(r, w)| run_check(&f.profile, r, w)).collect();
    let pass = primary.pass && also.iter().all(|c| c.pass) && actual_sd == f.expected_sd;
    FixtureResult {
        name: f.name,
        source: f.source,
        primary,
        expected_sd: f.expected_sd,
        actual_sd,
        also,
        discrepancy: f.discrepancy.clone(),
        pass,
    }
}

/// Evaluates every fixture; results are ordered by fixture name.
pub fn run_corpus() -> CorpusReport {
    let mut fixtures: Vec<_> = all_fixtures().iter().map(run_fixture).collect();
    fixtures.sort_by_key(|f| f.name);
    CorpusReport { fixtures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballot::serialize_profile;

    #[test]
    fn seventeen_fixtures() {
        assert_eq!(fixture_names().count(), 17);
        assert!(matches!(load_fixture("nope"), Err(UnknownFixture(_))));
    }

    #[test]
    fn named_fixtures() {
        let f = load_fixture("ex21-drinks").unwrap();
        assert_eq!(f.rule, RuleSpec::new(RuleKind::Plurality));
        assert_eq!(f.expected_winners, alts("milk"));
        assert_eq!(f.expected_sd, Some(true));
        let f = load_fixture("thm31-paradox").unwrap();
        assert_eq!(f.rule, RuleSpec::new(RuleKind::Condorcet));
        assert_eq!(f.expected_winners, alts("d"));
        let f = load_fixture("prop29-iia-after").unwrap();
        assert_eq!(f.expected_winners, alts("b"));
        assert_eq!(f.discrepancy.unwrap().published, alts("a b"));
    }

    #[test]
    fn corpus_passes_with_one_discrepancy() {
        let report = run_corpus();
        assert!(report.fixtures.iter().all(|f| f.pass), "{}", report.render());
        assert!(report.ok());
        assert_eq!(report.discrepancies().map(|f| f.name).collect::<Vec<_>>(), ["prop29-iia-after"]);
        assert_eq!(report.render(), run_corpus().render());
    }

    #[test]
    fn expected_sd_matches_predicate() {
        for f in all_fixtures() {
            let set = f.profile.set_of(&f.expected_winners).unwrap();
            let computed = (!set.is_empty()).then(|| socially_disappointing(&f.profile, set).ok()).flatten();
            assert_eq!(computed, f.expected_sd, "{}", f.name);
        }
    }

    #[test]
    fn mutated_expectation_is_reported() {
        let mut f = load_fixture("claim22-borda").unwrap();
        f.expected_winners = alts("b");
        let result = run_fixture(&f);
        assert!(!result.pass);
        let report = CorpusReport { fixtures: vec![result] };
        assert!(!report.ok());
        assert!(report.render().starts_with("FAIL claim22-borda"));
    }

    #[test]
    fn fixtures_round_trip() {
        for f in all_fixtures() {
            assert_eq!(parse_profile(&serialize_profile(&f.profile)).unwrap(), f.profile, "{}", f.name);
        }
    }
}
