use std::collections::BTreeSet;

use proptest::prelude::*;

use votelab::ballot::{parse_profile, serialize_profile};
use votelab::criteria::{
    check_criterion, socially_disappointing, CriterionId, RuleTemplate, SearchBounds, SearchConfig,
};
use votelab::model::RawProfile;
use votelab::rules::{self, evaluate, RuleKind, RuleSpec};
use votelab::{AltSet, Alternative, Profile};

const POOL: [&str; 5] = ["a", "b", "c", "d", "e"];

/// Alternatives (in a shuffled declaration order) and weighted rankings over
/// them, at most `max_voters` voters in total.
fn raw_profile(max_m: usize, max_voters: u64) -> impl Strategy<Value = RawProfile> {
    (1..=max_m)
        .prop_flat_map(|m| {
            let names = Just(POOL[..m].to_vec()).prop_shuffle();
            let ranking = Just((0..m).collect::<Vec<_>>()).prop_shuffle();
            (names, prop::collection::vec((1..=5u64, ranking), 1..=8))
        })
        .prop_map(move |(names, blocks)| {
            let mut total = 0;
            let mut kept = Vec::new();
            for (w, r) in blocks {
                if total == max_voters {
                    break;
                }
                let w = w.min(max_voters - total);
                total += w;
                kept.push((w as i64, r.iter().map(|&i| names[i].to_string()).collect()));
            }
            RawProfile { alternatives: names.iter().map(|s| s.to_string()).collect(), blocks: kept }
        })
}

fn profile(max_m: usize, max_voters: u64) -> impl Strategy<Value = Profile> {
    raw_profile(max_m, max_voters).prop_map(|raw| Profile::validate(raw).expect("generated profiles are valid"))
}

fn rebuild(p: &Profile, blocks: Vec<(u64, Vec<usize>)>) -> Profile {
    Profile::validate(RawProfile {
        alternatives: p.alternatives().iter().map(|a| a.to_string()).collect(),
        blocks: blocks
            .into_iter()
            .map(|(w, r)| (w as i64, r.iter().map(|&a| p.name(a).to_string()).collect()))
            .collect(),
    })
    .unwrap()
}

fn blocks_of(p: &Profile) -> Vec<(u64, Vec<usize>)> {
    p.blocks().iter().map(|b| (b.weight, b.ranking.as_slice().to_vec())).collect()
}

/// Every rule, with the declaration order as agenda and voter 1 as dictator.
fn specs(p: &Profile) -> Vec<RuleSpec> {
    RuleKind::ALL
        .iter()
        .map(|&k| {
            let s = RuleSpec::new(k);
            match k {
                RuleKind::SeqPairs | RuleKind::SeqPairsAmend => s.with_agenda(p.alternatives().to_vec()),
                RuleKind::Dictator => s.with_dictator(1),
                _ => s,
            }
        })
        .collect()
}

fn winners(spec: &RuleSpec, p: &Profile) -> BTreeSet<String> {
    evaluate(spec, p).unwrap().winners.iter().map(|a| a.to_string()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn serialize_then_parse_is_identity(p in profile(5, 20)) {
        let text = serialize_profile(&p);
        let back = parse_profile(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(serialize_profile(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn tally_is_antisymmetric_and_complete(p in profile(5, 20)) {
        let t = p.tally();
        let m = p.m();
        prop_assert_eq!(t.first_counts().iter().sum::<u64>(), p.voters());
        prop_assert_eq!(t.bottom_counts().iter().sum::<u64>(), p.voters());
        for x in 0..m {
            prop_assert_eq!(t.margin(x, x), 0);
            for y in 0..m {
                prop_assert_eq!(t.margin(x, y), -t.margin(y, x));
                if x != y {
                    prop_assert_eq!((t.margin(x, y) + p.voters() as i64) % 2, 0);
                }
            }
        }
    }

    #[test]
    fn restriction_keeps_pairwise_margins(p in profile(5, 20), mask in 1u64..32) {
        let keep = AltSet::from_iter((0..p.m()).filter(|&i| mask >> i & 1 == 1));
        prop_assume!(!keep.is_empty());
        let r = p.restrict(keep).unwrap();
        prop_assert_eq!(r.voters(), p.voters());
        let (t, rt) = (p.tally(), r.tally());
        for x in keep.iter() {
            for y in keep.iter() {
                let (rx, ry) = (r.index_of(p.name(x).as_str()).unwrap(), r.index_of(p.name(y).as_str()).unwrap());
                prop_assert_eq!(t.margin(x, y), rt.margin(rx, ry));
            }
        }
    }

    #[test]
    fn splitting_blocks_changes_nothing(p in profile(5, 20)) {
        let mut split = Vec::new();
        for (w, r) in blocks_of(&p) {
            if w > 1 {
                split.push((w / 2, r.clone()));
                split.push((w - w / 2, r));
            } else {
                split.push((w, r));
            }
        }
        let q = rebuild(&p, split);
        prop_assert_eq!(q.voters(), p.voters());
        for spec in specs(&p) {
            prop_assert_eq!(winners(&spec, &p), winners(&spec, &q), "{}", spec.describe());
        }
    }

    #[test]
    fn anonymous_rules_ignore_block_order(p in profile(5, 20), seed in any::<u64>()) {
        let mut blocks = blocks_of(&p);
        let len = blocks.len();
        blocks.rotate_left(seed as usize % len);
        if seed & 1 == 1 {
            blocks.reverse();
        }
        let q = rebuild(&p, blocks);
        for spec in specs(&p).into_iter().filter(|s| s.kind != RuleKind::Dictator) {
            prop_assert_eq!(winners(&spec, &p), winners(&spec, &q), "{}", spec.describe());
        }
    }

    #[test]
    fn renaming_alternatives_renames_winners(
        p in profile(5, 20),
        perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let rename = |a: &Alternative| {
            let i = POOL.iter().position(|&s| s == a.as_str()).unwrap();
            POOL[perm[i]].to_string()
        };
        let q = Profile::validate(RawProfile {
            alternatives: p.alternatives().iter().map(rename).collect(),
            blocks: p
                .blocks()
                .iter()
                .map(|b| (b.weight as i64, b.ranking.as_slice().iter().map(|&a| rename(p.name(a))).collect()))
                .collect(),
        })
        .unwrap();
        for spec in specs(&p) {
            let mut renamed = spec.clone();
            if let Some(agenda) = &spec.agenda {
                renamed = renamed.with_agenda(agenda.iter().map(|a| Alternative::new(rename(a)).unwrap()).collect());
            }
            let expected: BTreeSet<String> = evaluate(&spec, &p).unwrap().winners.iter().map(rename).collect();
            prop_assert_eq!(winners(&renamed, &q), expected, "{}", spec.describe());
        }
    }

    #[test]
    fn elimination_rules_finish_within_m_rounds(p in profile(5, 20)) {
        for outcome in [rules::hare(&p), rules::lpr(&p), rules::lur(&p)] {
            prop_assert!(outcome.rounds.len() <= p.m(), "{}: {} rounds", outcome.rule, outcome.rounds.len());
            prop_assert!(!outcome.is_empty());
        }
    }

    #[test]
    fn winners_exist_for_total_rules(p in profile(5, 20)) {
        for spec in specs(&p) {
            let out = evaluate(&spec, &p).unwrap();
            prop_assert!(out.set.is_subset(p.all()));
            let total = !matches!(spec.kind, RuleKind::Condorcet | RuleKind::CondorcetAmend | RuleKind::SeqPairsAmend);
            if total {
                prop_assert!(!out.is_empty(), "{} gave no winner", spec.describe());
            }
        }
    }

    #[test]
    fn strict_condorcet_refines_weak(p in profile(5, 20)) {
        let weak = rules::condorcet(&p, false).set;
        let strict = rules::condorcet(&p, true).set;
        prop_assert!(strict.is_subset(weak));
        prop_assert!(strict.len() <= 1);
    }

    #[test]
    fn amendment_only_removes_winners(p in profile(5, 20)) {
        let agenda = p.alternatives().to_vec();
        prop_assert!(rules::condorcet_amend(&p, false).set.is_subset(rules::condorcet(&p, false).set));
        prop_assert!(rules::condorcet_amend(&p, true).set.is_subset(rules::condorcet(&p, true).set));
        prop_assert!(rules::seq_pairs_amend(&p, &agenda).unwrap().set.is_subset(rules::seq_pairs(&p, &agenda).unwrap().set));
    }

    #[test]
    fn resentment_based_rules_never_disappoint(p in profile(5, 20)) {
        prop_assume!(p.m() >= 3);
        let agenda = p.alternatives().to_vec();
        for out in [
            rules::lpr(&p),
            rules::lu(&p),
            rules::lur(&p),
            rules::condorcet_amend(&p, false),
            rules::seq_pairs_amend(&p, &agenda).unwrap(),
        ] {
            prop_assert!(!socially_disappointing(&p, out.set).unwrap(), "{}", out.rule);
        }
    }
}

#[test]
fn amended_rules_pass_non_disappointment_exhaustively() {
    let config = SearchConfig::default();
    for kind in [RuleKind::CondorcetAmend, RuleKind::SeqPairsAmend] {
        for bounds in [SearchBounds::new(3, 4), SearchBounds::new(4, 2)] {
            let v = check_criterion(&RuleTemplate::new(kind), CriterionId::NonDisappointment, bounds, &config).unwrap();
            assert!(v.witness.is_none(), "{} at {:?}", kind, bounds);
        }
    }
}
