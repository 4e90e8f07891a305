//! Command implementations for the `votelab` binary.
//!
//! [`run`] takes the argument vector and returns everything the process
//! would print together with its exit status, so commands can be exercised
//! without spawning a process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use votelab::ballot::{parse_profile, serialize_profile};
use votelab::corpus::{all_fixtures, run_corpus};
use votelab::criteria::{
    check_criterion, sd_tainted, CriterionId, CriterionVerdict, RuleTemplate, SearchBounds, SearchConfig, Status,
    DEFAULT_CAP,
};
use votelab::rules::{evaluate, RuleKind, RuleSpec};
use votelab::table::{property_matrix, Cell, PropertyMatrix};
use votelab::{Alternative, Profile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_WINNER: i32 = 2;
pub const EXIT_VIOLATED: i32 = 3;

/// Environment variable capping the number of search workers.
pub const THREADS_VAR: &str = "VOTELAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "votelab", version, about = "Voting procedures and social choice axioms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a voting procedure on a ballot file.
    Tally(TallyArgs),
    /// List alternatives ranked last by at least half of the voters.
    Sd(SdArgs),
    /// Search all profiles within bounds for a violation of one criterion.
    Check(CheckArgs),
    /// Check one rule against every criterion.
    Search(SearchArgs),
    /// Compute the rule-by-criterion matrix and compare it with the reference tables.
    Table(TableArgs),
    /// Replay the built-in reference profiles.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
struct RuleArgs {
    /// plurality, borda, hare, seq-pairs, dictator, condorcet, lpr,
    /// condorcet-amend, seq-pairs-amend, lu or lur
    #[arg(long)]
    rule: String,
    /// Comma-separated agenda for seq-pairs rules.
    #[arg(long)]
    agenda: Option<String>,
    /// 1-based voter index for the dictator rule.
    #[arg(long)]
    dictator: Option<u64>,
    /// Require Condorcet winners to beat every rival outright.
    #[arg(long)]
    strict_condorcet: bool,
}

#[derive(Debug, Args)]
struct TallyArgs {
    file: PathBuf,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct SdArgs {
    file: PathBuf,
    /// Comma-separated alternatives to audit (default: all).
    #[arg(long)]
    winners: Option<String>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Number of alternatives.
    #[arg(long)]
    alts: usize,
    /// Maximum number of voters.
    #[arg(long)]
    voters: u64,
    /// Minimum number of voters.
    #[arg(long, default_value_t = 1)]
    min_voters: u64,
    /// Refuse bounds spanning more profiles than this.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    rule: RuleArgs,
    /// aaw, cwc, pareto, mono, iia or non-sd
    #[arg(long)]
    criterion: String,
    #[command(flatten)]
    bounds: BoundsArgs,
    /// Quantify over every agenda (the default for seq-pairs rules).
    #[arg(long, conflicts_with = "agenda")]
    agenda_all: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    rule: RuleArgs,
    #[command(flatten)]
    bounds: BoundsArgs,
    #[arg(long, conflicts_with = "agenda")]
    agenda_all: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    bounds: BoundsArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CorpusArgs {
    #[arg(long)]
    json: bool,
    /// Also write every fixture as `<name>.ballots` into this directory.
    #[arg(long)]
    export: Option<PathBuf>,
}

/// Captured result of one invocation.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String, code: i32) -> Self {
        Output { stdout, stderr: String::new(), code }
    }

    fn error(message: impl std::fmt::Display) -> Self {
        Output { stdout: String::new(), stderr: format!("error: {message}\n"), code: EXIT_ERROR }
    }
}

/// Runs one invocation. `threads` is the raw value of `VOTELAB_THREADS`.
pub fn run<I, S>(args: I, threads: Option<&str>) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output { stdout: String::new(), stderr: text, code: EXIT_ERROR }
            } else {
                Output::ok(text, EXIT_OK)
            };
        }
    };
    let threads = match parse_threads(threads) {
        Ok(t) => t,
        Err(e) => return Output::error(e),
    };
    let result = match cli.command {
        Command::Tally(a) => tally(a),
        Command::Sd(a) => sd(a),
        Command::Check(a) => check(a, threads),
        Command::Search(a) => search(a, threads),
        Command::Table(a) => table(a, threads),
        Command::Corpus(a) => corpus(a),
    };
    result.unwrap_or_else(Output::error)
}

fn parse_threads(raw: Option<&str>) -> Result<Option<usize>, String> {
    match raw {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_VAR} must be a positive integer, got {s:?}")),
        },
    }
}

fn load(path: &Path) -> Result<Profile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_profile(&text).map_err(|e| format!("{}:{e}", path.display()))
}

fn csv(list: &str) -> Result<Vec<Alternative>, String> {
    list.split(',').map(|t| Alternative::new(t.trim()).map_err(|e| e.to_string())).collect()
}

fn rule_kind(args: &RuleArgs) -> Result<RuleKind, String> {
    args.rule.parse().map_err(|e: votelab::rules::RuleError| e.to_string())
}

fn rule_spec(args: &RuleArgs) -> Result<RuleSpec, String> {
    let mut spec = RuleSpec::new(rule_kind(args)?).strict(args.strict_condorcet);
    if let Some(a) = &args.agenda {
        spec = spec.with_agenda(csv(a)?);
    }
    if let Some(d) = args.dictator {
        spec = spec.with_dictator(d);
    }
    Ok(spec)
}

fn join(alts: &[Alternative]) -> String {
    alts.iter().map(Alternative::as_str).collect::<Vec<_>>().join(" ")
}

fn tally(args: TallyArgs) -> Result<Output, String> {
    let spec = rule_spec(&args.rule)?;
    let profile = load(&args.file)?;
    let outcome = evaluate(&spec, &profile).map_err(|e| e.to_string())?;
    let code = if outcome.is_empty() { EXIT_NO_WINNER } else { EXIT_OK };
    if args.json {
        let tainted = sd_tainted(&profile, outcome.set).ok().map(|s| profile.names(s));
        let value = json!({
            "winners": outcome.winners,
            "rounds": outcome.rounds,
            "sd_tainted": tainted,
        });
        return Ok(Output::ok(format!("{value}\n"), code));
    }
    let mut out = if outcome.is_empty() { "NO WINNER\n".to_string() } else { format!("{}\n", join(&outcome.winners)) };
    if args.trace {
        writeln!(out, "rule: {}", outcome.rule).unwrap();
        for r in &outcome.rounds {
            writeln!(out, "round {}: {}", r.index, r.text).unwrap();
        }
    }
    Ok(Output::ok(out, code))
}

fn sd(args: SdArgs) -> Result<Output, String> {
    let profile = load(&args.file)?;
    let candidates = match &args.winners {
        Some(list) => profile.set_of(&csv(list)?).map_err(|name| format!("unknown alternative {name}"))?,
        None => profile.all(),
    };
    let tainted = sd_tainted(&profile, candidates).map_err(|e| e.to_string())?;
    let out: String = profile.names(tainted).iter().map(|a| format!("{a}\n")).collect();
    Ok(Output::ok(out, EXIT_OK))
}

fn bounds(args: &BoundsArgs, threads: Option<usize>) -> (SearchBounds, SearchConfig) {
    (
        SearchBounds::new(args.alts, args.voters).with_min_voters(args.min_voters),
        SearchConfig { cap: args.cap, threads },
    )
}

fn template(args: &RuleArgs, agenda_all: bool) -> Result<RuleTemplate, String> {
    let kind = rule_kind(args)?;
    let mut t = RuleTemplate::new(kind).strict(args.strict_condorcet);
    if let (Some(a), false) = (&args.agenda, agenda_all) {
        t = t.with_agenda(csv(a)?);
    }
    if let Some(d) = args.dictator {
        t.dictator = d;
    }
    Ok(t)
}

fn bounds_label(b: &SearchBounds) -> String {
    if b.n_min == 1 {
        format!("m={}, n<={}", b.m, b.n_max)
    } else {
        format!("m={}, n={}..{}", b.m, b.n_min, b.n_max)
    }
}

fn render_verdict(v: &CriterionVerdict) -> String {
    let mut out = String::new();
    let head = match v.status() {
        Status::PassWithinBounds => "PASS",
        Status::Violated => "VIOLATED",
    };
    writeln!(out, "{head} (bounds: {}, profiles={})", bounds_label(&v.bounds), v.profiles_checked).unwrap();
    if let Some(w) = &v.witness {
        writeln!(out, "rule: {}", w.rule.describe()).unwrap();
        writeln!(out, "criterion: {}", v.criterion).unwrap();
        out.push_str("witness:\n");
        out.push_str(&serialize_profile(&w.profile));
        writeln!(out, "winners: {}", names_or_none(&w.profile.names(w.winners))).unwrap();
        if let Some((p, set)) = w.variant() {
            out.push_str("variant:\n");
            out.push_str(&serialize_profile(p));
            writeln!(out, "variant winners: {}", names_or_none(&p.names(set))).unwrap();
        }
        writeln!(out, "explanation: {}", w.explanation()).unwrap();
    }
    out
}

fn names_or_none(alts: &[Alternative]) -> String {
    if alts.is_empty() {
        "none".to_string()
    } else {
        join(alts)
    }
}

#[derive(Serialize)]
struct WitnessJson {
    rule: String,
    profile: String,
    winners: Vec<Alternative>,
    variant: Option<String>,
    variant_winners: Option<Vec<Alternative>>,
    explanation: String,
}

fn verdict_json(v: &CriterionVerdict) -> serde_json::Value {
    let witness = v.witness.as_ref().map(|w| WitnessJson {
        rule: w.rule.describe(),
        profile: serialize_profile(&w.profile),
        winners: w.profile.names(w.winners),
        variant: w.variant().map(|(p, _)| serialize_profile(p)),
        variant_winners: w.variant().map(|(p, s)| p.names(s)),
        explanation: w.explanation(),
    });
    json!({
        "rule": v.rule,
        "criterion": v.criterion,
        "status": v.status(),
        "bounds": v.bounds,
        "profiles_checked": v.profiles_checked,
        "variants_checked": v.variants_checked,
        "witness": witness,
    })
}

fn check(args: CheckArgs, threads: Option<usize>) -> Result<Output, String> {
    let criterion: CriterionId = args.criterion.parse().map_err(|e: votelab::criteria::CriteriaError| e.to_string())?;
    let t = template(&args.rule, args.agenda_all)?;
    let (b, config) = bounds(&args.bounds, threads);
    let v = check_criterion(&t, criterion, b, &config).map_err(|e| e.to_string())?;
    let code = match v.status() {
        Status::PassWithinBounds => EXIT_OK,
        Status::Violated => EXIT_VIOLATED,
    };
    let out = if args.json { format!("{}\n", verdict_json(&v)) } else { render_verdict(&v) };
    Ok(Output::ok(out, code))
}

fn search(args: SearchArgs, threads: Option<usize>) -> Result<Output, String> {
    let t = template(&args.rule, args.agenda_all)?;
    let (b, config) = bounds(&args.bounds, threads);
    let mut verdicts = Vec::new();
    for criterion in CriterionId::ALL {
        if criterion == CriterionId::NonDisappointment && b.m < 3 {
            continue;
        }
        verdicts.push(check_criterion(&t, criterion, b, &config).map_err(|e| e.to_string())?);
    }
    let violated = verdicts.iter().any(|v| v.status() == Status::Violated);
    let code = if violated { EXIT_VIOLATED } else { EXIT_OK };
    let out = if args.json {
        let all: Vec<_> = verdicts.iter().map(verdict_json).collect();
        format!("{}\n", json!({ "rule": t.describe(), "verdicts": all }))
    } else {
        let mut out = format!("rule: {}\n", t.describe());
        for v in &verdicts {
            write!(out, "\n[{}] {}", v.criterion, render_verdict(v)).unwrap();
        }
        out
    };
    Ok(Output::ok(out, code))
}

/// Text form of a property matrix.
pub fn render_matrix(m: &PropertyMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "PROPERTY MATRIX ({}; yes = no violation within bounds)", bounds_label(&m.bounds)).unwrap();
    write!(out, "{:<16}", "rule").unwrap();
    for c in &m.criteria {
        write!(out, " {:<8}", c.name()).unwrap();
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    for row in &m.rows {
        let mut line = format!("{:<16}", row.rule.name());
        for cell in &row.cells {
            write!(line, " {:<8}", cell.label()).unwrap();
        }
        writeln!(out, "{}", line.trim_end()).unwrap();
    }
    out.push_str("\nWITNESSES\n");
    for w in &m.witnesses {
        writeln!(out, "{} [{}] {}: {}", w.id, w.rule, w.criterion, w.explanation).unwrap();
        for line in w.profile.lines() {
            writeln!(out, "  {line}").unwrap();
        }
        writeln!(out, "  winners: {}", list_or_none(&w.winners)).unwrap();
        if let (Some(v), Some(vw)) = (&w.variant, &w.variant_winners) {
            out.push_str("  variant:\n");
            for line in v.lines() {
                writeln!(out, "  {line}").unwrap();
            }
            writeln!(out, "  variant winners: {}", list_or_none(vw)).unwrap();
        }
    }
    out.push_str("\nPAPER-DIFF\n");
    if m.diff.is_empty() {
        out.push_str("(none)\n");
    }
    for d in &m.diff {
        let refs: Vec<_> =
            d.references.iter().map(|r| format!("{}={}", r.table, if r.satisfied { "yes" } else { "no" })).collect();
        let computed = match &d.computed {
            Cell::Yes { .. } => "yes (within bounds)".to_string(),
            other => other.label(),
        };
        write!(out, "{} {}: computed {}; {}", d.rule, d.criterion, computed, refs.join(" ")).unwrap();
        if d.tables_conflict {
            out.push_str(" [reference tables disagree]");
        }
        out.push('\n');
    }
    out
}

fn list_or_none(names: &[String]) -> String {
    if names.is_empty() {
        "none".to_string()
    } else {
        names.join(" ")
    }
}

fn table(args: TableArgs, threads: Option<usize>) -> Result<Output, String> {
    let (b, config) = bounds(&args.bounds, threads);
    let m = property_matrix(b, &config).map_err(|e| e.to_string())?;
    let out = if args.json {
        format!("{}\n", serde_json::to_string(&m).map_err(|e| e.to_string())?)
    } else {
        render_matrix(&m)
    };
    Ok(Output::ok(out, EXIT_OK))
}

fn corpus(args: CorpusArgs) -> Result<Output, String> {
    if let Some(dir) = &args.export {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        for f in all_fixtures() {
            let path = dir.join(format!("{}.ballots", f.name));
            std::fs::write(&path, f.text).map_err(|e| format!("{}: {e}", path.display()))?;
        }
    }
    let report = run_corpus();
    let code = if report.ok() { EXIT_OK } else { EXIT_ERROR };
    let out = if args.json {
        format!("{}\n", serde_json::to_string(&report).map_err(|e| e.to_string())?)
    } else {
        report.render()
    };
    Ok(Output::ok(out, code))
}
