//! The rule-by-criterion property matrix, computed by exhaustive search and
//! compared against the published reference tables.

use serde::Serialize;

use crate::ballot::serialize_profile;
use crate::criteria::{check_criterion, CriteriaError, CriterionId, RuleTemplate, SearchBounds, SearchConfig, Witness};
use crate::rules::RuleKind;

/// One published property table: `true` means the rule satisfies the criterion.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceTable {
    pub id: &'static str,
    pub title: &'static str,
    pub cells: &'static [(RuleKind, CriterionId, bool)],
}

use CriterionId::{
    AlwaysAWinner as Aaw, CondorcetWinner as Cwc, Independence as Iia, Monotonicity as Mono,
    NonDisappointment as NonSd, Pareto,
};
use RuleKind::*;

macro_rules! row {
    ($rule:expr; $aaw:expr, $cwc:expr, $pareto:expr, $mono:expr, $iia:expr, $nonsd:expr) => {
        [
            ($rule, Aaw, $aaw),
            ($rule, Cwc, $cwc),
            ($rule, Pareto, $pareto),
            ($rule, Mono, $mono),
            ($rule, Iia, $iia),
            ($rule, NonSd, $nonsd),
        ]
    };
}

const SUMMARY: [[(RuleKind, CriterionId, bool); 6]; 11] = [
    row!(Condorcet; false, true, true, true, true, false),
    row!(Plurality; true, false, true, true, false, false),
    row!(Borda; true, false, true, true, false, false),
    row!(Hare; true, false, true, false, false, false),
    row!(SeqPairs; true, false, false, true, false, false),
    row!(Dictator; true, false, true, true, false, false),
    row!(Lpr; true, false, true, true, false, true),
    row!(CondorcetAmend; false, false, true, true, true, true),
    row!(SeqPairsAmend; true, false, true, true, false, true),
    row!(Lu; true, false, false, true, false, true),
    row!(Lur; true, false, true, true, false, true),
];

const SUMMARY_FLAT: [(RuleKind, CriterionId, bool); 66] = {
    let mut out = [(Condorcet, Aaw, false); 66];
    let mut i = 0;
    while i < 66 {
        out[i] = SUMMARY[i / 6][i % 6];
        i += 1;
    }
    out
};

const LPR_ROW: [(RuleKind, CriterionId, bool); 6] = row!(Lpr; true, false, true, false, false, true);

const AMENDMENTS: [(RuleKind, CriterionId, bool); 12] = {
    let c = row!(CondorcetAmend; false, false, true, true, true, true);
    let s = row!(SeqPairsAmend; true, false, true, true, false, true);
    [c[0], c[1], c[2], c[3], c[4], c[5], s[0], s[1], s[2], s[3], s[4], s[5]]
};

const DISAPPOINTMENT: [(RuleKind, CriterionId, bool); 6] = [
    (Plurality, NonSd, false),
    (Borda, NonSd, false),
    (Hare, NonSd, false),
    (SeqPairs, NonSd, false),
    (Dictator, NonSd, false),
    (Condorcet, NonSd, false),
];

pub const REFERENCE_TABLES: [ReferenceTable; 4] = [
    ReferenceTable {
        id: "disappointment-table",
        title: "which classic procedures admit social disappointment",
        cells: &DISAPPOINTMENT,
    },
    ReferenceTable { id: "lpr-table", title: "properties of least public resentment", cells: &LPR_ROW },
    ReferenceTable {
        id: "amendment-table",
        title: "properties of the amended Condorcet and sequential-pairs procedures",
        cells: &AMENDMENTS,
    },
    ReferenceTable { id: "summary-table", title: "closing summary of all eleven procedures", cells: &SUMMARY_FLAT },
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Cell {
    /// No violation within the bounds.
    Yes {
        profiles: u64,
    },
    No {
        witness: String,
    },
    /// Criterion undefined at these bounds.
    NotApplicable,
}

impl Cell {
    pub fn satisfied(&self) -> Option<bool> {
        match self {
            Cell::Yes { .. } => Some(true),
            Cell::No { .. } => Some(false),
            Cell::NotApplicable => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Cell::Yes { .. } => "yes".to_string(),
            Cell::No { witness } => format!("no({witness})"),
            Cell::NotApplicable => "n/a".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Row {
    pub rule: RuleKind,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessRecord {
    pub id: String,
    pub rule: String,
    pub criterion: CriterionId,
    pub profile: String,
    pub winners: Vec<String>,
    pub variant: Option<String>,
    pub variant_winners: Option<Vec<String>>,
    pub explanation: String,
}

impl WitnessRecord {
    fn new(id: String, w: &Witness) -> Self {
        let names = |p: &crate::model::Profile, s| p.names(s).iter().map(|a| a.to_string()).collect();
        WitnessRecord {
            id,
            rule: w.rule.describe(),
            criterion: w.criterion(),
            profile: serialize_profile(&w.profile),
            winners: names(&w.profile, w.winners),
            variant: w.variant().map(|(p, _)| serialize_profile(p)),
            variant_winners: w.variant().map(|(p, s)| names(p, s)),
            explanation: w.explanation(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reference {
    pub table: &'static str,
    pub satisfied: bool,
}

/// A cell where the computed value and a reference table disagree, or where
/// the reference tables disagree with each other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffEntry {
    pub rule: RuleKind,
    pub criterion: CriterionId,
    pub computed: Cell,
    pub references: Vec<Reference>,
    pub tables_conflict: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyMatrix {
    pub bounds: SearchBounds,
    pub criteria: Vec<CriterionId>,
    pub rows: Vec<Row>,
    pub witnesses: Vec<WitnessRecord>,
    pub diff: Vec<DiffEntry>,
}

impl PropertyMatrix {
    pub fn cell(&self, rule: RuleKind, criterion: CriterionId) -> &Cell {
        let row = self.rows.iter().find(|r| r.rule == rule).expect("every rule has a row");
        let col = self.criteria.iter().position(|&c| c == criterion).expect("every criterion");
        &row.cells[col]
    }
}

/// Checks all eleven rules against all six criteria within `bounds`.
///
/// Sequential-pairs rules quantify over every agenda and the dictator is
/// voter 1. Social disappointment cells are not applicable below three
/// alternatives.
pub fn property_matrix(bounds: SearchBounds, config: &SearchConfig) -> Result<PropertyMatrix, CriteriaError> {
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    for rule in RuleKind::ALL {
        let mut cells = Vec::new();
        for criterion in CriterionId::ALL {
            if criterion == NonSd && bounds.m < 3 {
                cells.push(Cell::NotApplicable);
                continue;
            }
            let verdict = check_criterion(&RuleTemplate::new(rule), criterion, bounds, config)?;
            cells.push(match verdict.witness {
                Some(w) => {
                    let id = format!("w{}", witnesses.len() + 1);
                    witnesses.push(WitnessRecord::new(id.clone(), &w));
                    Cell::No { witness: id }
                }
                None => Cell::Yes { profiles: verdict.profiles_checked },
            });
        }
        rows.push(Row { rule, cells });
    }
    let mut matrix = PropertyMatrix { bounds, criteria: CriterionId::ALL.to_vec(), rows, witnesses, diff: Vec::new() };
    matrix.diff = diff(&matrix);
    Ok(matrix)
}

fn diff(matrix: &PropertyMatrix) -> Vec<DiffEntry> {
    let mut out = Vec::new();
    for rule in RuleKind::ALL {
        for criterion in CriterionId::ALL {
            let references: Vec<Reference> = REFERENCE_TABLES
                .iter()
                .filter_map(|t| {
                    t.cells
                        .iter()
                        .find(|(r, c, _)| *r == rule && *c == criterion)
                        .map(|&(_, _, satisfied)| Reference { table: t.id, satisfied })
                })
                .collect();
            let computed = matrix.cell(rule, criterion).clone();
            let tables_conflict = references.windows(2).any(|w| w[0].satisfied != w[1].satisfied);
            let disagrees = computed.satisfied().is_some_and(|s| references.iter().any(|r| r.satisfied != s));
            if tables_conflict || disagrees {
                out.push(DiffEntry { rule, criterion, computed, references, tables_conflict });
            }
        }
    }
    out
}
