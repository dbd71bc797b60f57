//! Subcommand implementations. Each writes human-readable text (or JSON)
//! to the given writer and returns a [`CliError`] on failure.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use it2fgp::dialogue::{open_session, Decision, DialogueError, Iteration, Relinearization, Session, SessionConfig, SessionStatus, Verdict};
use it2fgp::nlpcore::{payoff_table, variable_box, NlpConfig, PayoffTable, RestartRecord};
use it2fgp::sigmodel::Sense;
use it2fgp::Execution;

use crate::input::{load_decisions, load_program, load_program_logged};
use crate::numfmt::to_rounded_string_pretty;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelinearizeAt {
    Incumbent,
    Argmax,
}

/// Solver options shared by the commands that optimize.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Seed for the multistart sampler.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of multistart restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Run restarts on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Add surplus deviations to every goal row.
    #[arg(long)]
    pub surplus: bool,
    /// Expansion point for nonlinear memberships after a revision.
    #[arg(long, value_enum, default_value = "incumbent")]
    pub relinearize: RelinearizeAt,
    /// Write one JSON line per restart of the payoff optimizations.
    #[arg(long, value_name = "FILE")]
    pub run_log: Option<PathBuf>,
}

impl Default for SolverArgs {
    fn default() -> Self {
        SolverArgs { seed: None, restarts: None, sequential: false, surplus: false, relinearize: RelinearizeAt::Incumbent, run_log: None }
    }
}

impl SolverArgs {
    pub fn nlp(&self) -> NlpConfig {
        let mut cfg = NlpConfig::default();
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if self.sequential {
            cfg.execution = Execution::Sequential;
        }
        cfg
    }

    pub fn session(&self) -> SessionConfig {
        SessionConfig {
            nlp: self.nlp(),
            surplus: self.surplus,
            relinearization: match self.relinearize {
                RelinearizeAt::Incumbent => Relinearization::Incumbent,
                RelinearizeAt::Argmax => Relinearization::Argmax,
            },
        }
    }
}

#[derive(Serialize)]
struct RunLogLine<'a> {
    objective: usize,
    sense: Sense,
    #[serde(flatten)]
    record: &'a RestartRecord,
}

pub fn write_run_log(path: &Path, t: &PayoffTable) -> Result<(), CliError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in &t.rows {
        for (sense, e) in [(Sense::Maximize, &r.max), (Sense::Minimize, &r.min)] {
            for record in &e.log {
                serde_json::to_writer(&mut f, &RunLogLine { objective: r.objective, sense, record })?;
                writeln!(f)?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

pub fn validate(path: &Path, strict: bool, out: &mut impl Write) -> Result<(), CliError> {
    let (p, report) = load_program(path, strict)?;
    writeln!(
        out,
        "{}: ok ({} variables, {} objectives, {} constraints, {})",
        path.display(),
        p.dimension(),
        p.objectives.len(),
        p.constraints.len(),
        if p.is_crisp() { "crisp" } else { "fuzzy" }
    )?;
    for w in &report.warnings {
        writeln!(out, "warning: {}: {}", w.location, w.message)?;
    }
    Ok(())
}

pub fn defuzzify(path: &Path, strict: bool, output: Option<&Path>, out: &mut impl Write) -> Result<(), CliError> {
    let p = load_program_logged(path, strict)?;
    let text = to_rounded_string_pretty(&p.defuzzify())?;
    match output {
        Some(o) => std::fs::write(o, text + "\n")?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn nlp_error(e: it2fgp::nlpcore::NlpError) -> CliError {
    use it2fgp::nlpcore::NlpError;
    fn infeasible(e: &NlpError) -> bool {
        match e {
            NlpError::InfeasibleOrUnbounded { .. } => true,
            NlpError::Payoff { source, .. } => infeasible(source),
            _ => false,
        }
    }
    if infeasible(&e) {
        CliError::Infeasible(e.to_string())
    } else {
        CliError::Internal(e.to_string())
    }
}

pub fn payoff(path: &Path, strict: bool, solver: &SolverArgs, json: bool, out: &mut impl Write) -> Result<(), CliError> {
    let p = load_program_logged(path, strict)?;
    let crisp = p.defuzzify();
    let t = payoff_table(&crisp, &solver.nlp()).map_err(nlp_error)?;
    if let Some(log) = &solver.run_log {
        write_run_log(log, &t)?;
    }
    let b = variable_box(&t);
    if json {
        #[derive(Serialize)]
        struct Out<'a> {
            payoff: &'a PayoffTable,
            #[serde(rename = "box")]
            bounds: &'a it2fgp::nlpcore::VariableBox,
        }
        writeln!(out, "{}", to_rounded_string_pretty(&Out { payoff: &t, bounds: &b })?)?;
        return Ok(());
    }
    write!(out, "{}", t.render(&crisp.variables))?;
    writeln!(out)?;
    for (l, name) in crisp.variables.iter().enumerate() {
        writeln!(out, "{:.3} <= {name} <= {:.3}", b.lower[l], b.upper[l])?;
    }
    Ok(())
}

/// Proposal of one iteration with the tolerance intervals it was solved under.
pub fn render_iteration(s: &Session, it: &Iteration) -> String {
    let p = &it.proposal;
    let mut text = format!("iteration {}\n", p.iteration);
    for (name, v) in s.crisp.variables.iter().zip(&p.x) {
        text += &format!("  {name:<6} = {v:.6}\n");
    }
    for (k, f) in p.objective_values.iter().enumerate() {
        let g = &it.goals[k];
        text += &format!(
            "  f{:<5} = {f:.6}   mu = {:.4}   mu under current limits = {:.4}   tolerance [{:.3}, {:.3}]\n",
            k + 1,
            p.membership[k],
            p.membership_current[k],
            g.aspiration.min(g.limit),
            g.aspiration.max(g.limit),
        );
    }
    text += &format!("  beta   = {:.6}\n", p.beta);
    text
}

fn dump_last_lp(s: &Session, dump: bool) {
    if let (true, Some(m)) = (dump, s.last_model()) {
        eprintln!("goal LP, iteration {}:\n{}", s.iterations.len(), m.lp.dump());
    }
}

fn check_open(s: &Session) -> Result<(), CliError> {
    match &s.failure {
        Some(f) if f.infeasible => Err(CliError::Infeasible(format!("{} stage: {}", f.stage, f.message))),
        Some(f) => Err(CliError::Internal(format!("{} stage: {}", f.stage, f.message))),
        None => Ok(()),
    }
}

fn decision_error(e: DialogueError) -> CliError {
    match e {
        DialogueError::Stage { infeasible: true, .. } => CliError::Infeasible(e.to_string()),
        DialogueError::Stage { .. } => CliError::Internal(e.to_string()),
        other => CliError::BadInput(other.to_string()),
    }
}

fn write_trace(s: &Session, trace: Option<&Path>) -> Result<(), CliError> {
    if let Some(t) = trace {
        std::fs::write(t, to_rounded_string_pretty(&s.trace())? + "\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct SolveArgs {
    pub strict: bool,
    pub solver: SolverArgs,
    pub decisions: Option<PathBuf>,
    pub dump_lp: bool,
    pub trace: Option<PathBuf>,
    pub json: bool,
}

/// Opens a session and applies the scripted decisions. Without a script
/// the first proposal is reported.
pub fn solve(path: &Path, args: &SolveArgs, out: &mut impl Write) -> Result<Session, CliError> {
    let p = load_program_logged(path, args.strict)?;
    let script = args.decisions.as_deref().map(load_decisions).transpose()?.unwrap_or_default();
    let mut s = open_session(&p, args.solver.session());
    if let (Some(log), Some(t)) = (&args.solver.run_log, &s.payoff) {
        write_run_log(log, t)?;
    }
    let result = check_open(&s).and_then(|()| {
        dump_last_lp(&s, args.dump_lp);
        for d in script.decisions {
            if s.status != SessionStatus::AwaitingDecision {
                break;
            }
            let revise = d.verdict == Verdict::Revise;
            s.decide(d).map_err(decision_error)?;
            dump_last_lp(&s, args.dump_lp && revise);
        }
        Ok(())
    });
    write_trace(&s, args.trace.as_deref())?;
    result?;
    if args.json {
        writeln!(out, "{}", to_rounded_string_pretty(&s.trace())?)?;
    } else {
        for it in &s.iterations {
            let mut text = render_iteration(&s, it);
            if let Some(d) = &it.decision {
                text += &format!("  decision: {}\n", describe(d));
            }
            write!(out, "{text}")?;
        }
        writeln!(out, "status: {}", s.status)?;
    }
    Ok(s)
}

fn describe(d: &Decision) -> String {
    if d.targets.is_empty() {
        "satisfied".into()
    } else {
        let t: Vec<String> = d.targets.iter().map(|k| format!("f{}", k + 1)).collect();
        format!("revise {}", t.join(", "))
    }
}

/// Parses one line of the interactive prompt. Objectives are numbered
/// from 1 on the terminal.
pub fn parse_answer(line: &str) -> Result<Option<Decision>, String> {
    let mut words = line.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty());
    match words.next() {
        None => Err("enter 's', 'r <objective...>' or 'q'".into()),
        Some("s" | "satisfied" | "y" | "yes") => Ok(Some(Decision::satisfied())),
        Some("q" | "quit") => Ok(None),
        Some("r" | "revise") => {
            let targets = words
                .map(|w| match w.trim_start_matches('f').parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(format!("not an objective number: {w}")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if targets.is_empty() {
                return Err("name at least one objective to revise".into());
            }
            Ok(Some(Decision::revise(targets)))
        }
        Some(w) => Err(format!("unknown answer: {w}")),
    }
}

pub fn interactive(
    path: &Path,
    args: &SolveArgs,
    input: &mut impl BufRead,
    out: &mut impl Write,
) -> Result<Session, CliError> {
    let p = load_program_logged(path, args.strict)?;
    let mut s = open_session(&p, args.solver.session());
    check_open(&s)?;
    dump_last_lp(&s, args.dump_lp);
    write!(out, "{}", render_iteration(&s, s.iterations.last().expect("open session has a proposal")))?;
    let mut line = String::new();
    while s.status == SessionStatus::AwaitingDecision {
        write!(out, "satisfied (s), revise objectives (r 1 2), quit (q)? ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        let d = match parse_answer(&line) {
            Ok(Some(d)) => d,
            Ok(None) => break,
            Err(msg) => {
                writeln!(out, "{msg}")?;
                continue;
            }
        };
        let satisfied = d.targets.is_empty();
        match s.decide(d).map(|p| p.iteration) {
            Ok(k) if satisfied => {
                writeln!(out, "final compromise solution is iteration {k}")?;
            }
            Ok(_) => {
                let text = render_iteration(&s, s.iterations.last().expect("just proposed"));
                dump_last_lp(&s, args.dump_lp);
                write!(out, "{text}")?;
            }
            Err(e @ DialogueError::Stage { .. }) => {
                writeln!(out, "revision failed: {e}")?;
            }
            Err(e) => writeln!(out, "{e}")?,
        }
    }
    write_trace(&s, args.trace.as_deref())?;
    Ok(s)
}
