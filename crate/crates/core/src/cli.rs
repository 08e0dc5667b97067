//! The `rms` command-line interface.
//!
//! Five subcommands: `check` types every annotated session against its
//! global type and reports well-formedness of named globals, `project`
//! prints endpoint projections, `simulate` drives the operational
//! semantics (scripted, seeded-random, or interactive), `verify` runs the
//! bounded checks, and `fmt` reprints a file in canonical form.
//!
//! Exit codes: 0 success, 1 negative analysis result (rejected session,
//! undefined projection, violated property, inapplicable script
//! directive), 2 malformed input, 3 I/O failure. `--json` switches every
//! report to JSON on stdout. Colors honor `RMS_COLOR=0`.

use std::io::{BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::kernel::{GlobalPair, Participant, Session};
use crate::parser::{
    self, parse_file, parse_script, print_session, print_source, print_stype, Directive,
};
use crate::projection::{participants_global, project, Proj};
use crate::semantics::{
    find_directive_step, normalize, render_step, session_moves, SessionStep, ValuePolicy,
};
use crate::typing::type_session;
use crate::verify::{check_progress, verify_session, ExploreConfig, Prop, Verdict};

#[derive(Parser)]
#[command(
    name = "rms",
    version,
    about = "reversible multiparty sessions with named checkpoints"
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check annotated sessions and report global well-formedness.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Project a named global type onto participants.
    Project {
        file: PathBuf,
        /// Name of the declared global type.
        #[arg(long = "type")]
        type_name: String,
        /// Project onto this participant only.
        #[arg(long)]
        on: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run the operational semantics and print a trace.
    Simulate {
        file: PathBuf,
        /// Follow a script of directives instead of random choice.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Seed for random scheduling (default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Maximum number of steps (default 20; scripts are also bounded
        /// by their own length).
        #[arg(long)]
        steps: Option<usize>,
        /// Pick each step interactively on stdin.
        #[arg(long)]
        interactive: bool,
        #[arg(long)]
        json: bool,
    },
    /// Bounded verification of subject reduction, fidelity, and progress.
    Verify {
        file: PathBuf,
        /// Exploration depth bound.
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Cap on distinct states per property.
        #[arg(long = "state-cap", default_value_t = 10_000)]
        state_cap: usize,
        /// Comma-separated properties: sr, fidelity, progress.
        #[arg(long)]
        props: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Reprint a file in canonical form.
    Fmt {
        file: PathBuf,
        /// Rewrite the file in place instead of printing to stdout.
        #[arg(long)]
        write: bool,
    },
}

pub fn run(cli: Cli) -> i32 {
    match cli.cmd {
        Cmd::Check { file, json } => cmd_check(&file, json),
        Cmd::Project { file, type_name, on, json } => cmd_project(&file, &type_name, on, json),
        Cmd::Simulate { file, script, seed, steps, interactive, json } => {
            cmd_simulate(&file, script, seed, steps, interactive, json)
        }
        Cmd::Verify { file, depth, state_cap, props, json } => {
            cmd_verify(&file, depth, state_cap, props, json)
        }
        Cmd::Fmt { file, write } => cmd_fmt(&file, write),
    }
}

fn color_enabled() -> bool {
    std::env::var_os("RMS_COLOR").map(|v| v != "0").unwrap_or(true)
        && std::io::stdout().is_terminal()
}

fn paint(s: &str, code: &str) -> String {
    if color_enabled() {
        format!("\x1b[{code}m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}

fn good(s: &str) -> String {
    paint(s, "32")
}

fn bad(s: &str) -> String {
    paint(s, "31")
}

fn warn(s: &str) -> String {
    paint(s, "33")
}

fn read_file(path: &Path) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        3
    })
}

fn load(path: &Path) -> Result<parser::SourceFile, i32> {
    let text = read_file(path)?;
    parse_file(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        2
    })
}

fn cmd_check(file: &Path, json: bool) -> i32 {
    let src = match load(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let (ok, doc, lines) = check_report(&src);
    if json {
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        for l in lines {
            println!("{l}");
        }
    }
    if ok {
        0
    } else {
        1
    }
}

/// Checks every global for well-formedness and every annotated session
/// against its pair; returns the verdict, the JSON document, and the
/// human-readable lines.
fn check_report(src: &parser::SourceFile) -> (bool, serde_json::Value, Vec<String>) {
    let mut ok = true;
    let mut globals_json = Vec::new();
    let mut sessions_json = Vec::new();
    let mut lines = Vec::new();

    for (name, g) in &src.globals {
        match crate::projection::well_formed(g) {
            Ok(()) => {
                lines.push(format!("global {name}: {}", good("well-formed")));
                globals_json.push(json!({ "name": name, "wellFormed": true }));
            }
            Err((p, reason, path)) => {
                ok = false;
                lines.push(format!(
                    "global {name}: {} (projection onto {p} at {path}: {reason})",
                    bad("ill-formed")
                ));
                globals_json.push(json!({
                    "name": name,
                    "wellFormed": false,
                    "participant": p.as_str(),
                    "path": path,
                    "reason": reason,
                }));
            }
        }
    }

    for decl in &src.sessions {
        match &decl.pair {
            None => {
                lines.push(format!(
                    "session {}: {} (no global type annotation)",
                    decl.name,
                    warn("skipped")
                ));
                sessions_json.push(json!({ "name": decl.name, "skipped": true }));
            }
            Some(gp) => {
                let report = type_session(&decl.session, gp);
                if report.accepted() {
                    lines.push(format!("session {}: {}", decl.name, good("accepted")));
                } else {
                    ok = false;
                    lines.push(format!("session {}: {}", decl.name, bad("rejected")));
                    for f in &report.failures {
                        let who = f
                            .participant
                            .as_ref()
                            .map(|p| format!(" ({p})"))
                            .unwrap_or_default();
                        lines.push(format!("  - {}{who}: {}", f.condition, f.locus));
                    }
                }
                sessions_json.push(json!({
                    "name": decl.name,
                    "skipped": false,
                    "report": report,
                }));
            }
        }
    }

    let doc = json!({
        "globals": globals_json,
        "sessions": sessions_json,
        "outcome": if ok { "accepted" } else { "rejected" },
    });
    (ok, doc, lines)
}

/// `check` as a library call: the verdict plus the same JSON document the
/// CLI prints. Exposed for the C API.
pub fn check_doc(src: &parser::SourceFile) -> (bool, serde_json::Value) {
    let (ok, doc, _) = check_report(src);
    (ok, doc)
}

fn cmd_project(file: &Path, type_name: &str, on: Option<String>, json: bool) -> i32 {
    let src = match load(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let (all_defined, doc, rows) = match project_report(&src, type_name, on.as_deref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e} in {}", file.display());
            return 2;
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        for (p, r) in &rows {
            match r {
                Ok(t) => println!("{p}: {t}"),
                Err((reason, path)) => {
                    println!("{p}: {} at {path}: {reason}", bad("undefined"))
                }
            }
        }
    }
    if all_defined {
        0
    } else {
        1
    }
}

type ProjRows = Vec<(Participant, Result<String, (String, String)>)>;

/// Projects a named global onto one or all participants; `Err` when the
/// file has no global of that name.
fn project_report(
    src: &parser::SourceFile,
    type_name: &str,
    on: Option<&str>,
) -> Result<(bool, serde_json::Value, ProjRows), String> {
    let Some(g) = src.global(type_name) else {
        return Err(format!("no global type named `{type_name}`"));
    };
    let targets: Vec<Participant> = match on {
        Some(p) => vec![Participant::new(p)],
        None => participants_global(g).into_iter().collect(),
    };
    let mut all_defined = true;
    let mut rows: ProjRows = Vec::new();
    for p in &targets {
        match project(g, p) {
            Proj::Defined(t) => rows.push((p.clone(), Ok(print_stype(&t)))),
            Proj::Undefined { reason, path } => {
                all_defined = false;
                rows.push((p.clone(), Err((reason, path))));
            }
        }
    }
    let projections: Vec<_> = rows
        .iter()
        .map(|(p, r)| match r {
            Ok(t) => json!({ "participant": p.as_str(), "defined": true, "type": t }),
            Err((reason, path)) => json!({
                "participant": p.as_str(),
                "defined": false,
                "reason": reason,
                "path": path,
            }),
        })
        .collect();
    let doc = json!({ "global": type_name, "projections": projections });
    Ok((all_defined, doc, rows))
}

/// `project` as a library call. Exposed for the C API.
pub fn project_doc(
    src: &parser::SourceFile,
    type_name: &str,
    on: Option<&str>,
) -> Result<(bool, serde_json::Value), String> {
    let (all_defined, doc, _) = project_report(src, type_name, on)?;
    Ok((all_defined, doc))
}

/// The network being simulated: named sessions, stepped independently.
struct Sim {
    sessions: Vec<(String, Session)>,
}

impl Sim {
    fn from_source(src: &parser::SourceFile) -> Result<Sim, String> {
        let sessions: Vec<(String, Session)> = src
            .network_sessions()
            .into_iter()
            .map(|d| (d.name.clone(), d.session.clone()))
            .collect();
        if sessions.is_empty() {
            return Err("nothing to simulate: the file declares no sessions".into());
        }
        Ok(Sim { sessions })
    }

    /// All enabled steps, tagged with the index of the session they move.
    fn steps(&self) -> Vec<(usize, SessionStep)> {
        let mut out = Vec::new();
        for (i, (_, s)) in self.sessions.iter().enumerate() {
            for step in session_moves(s, &ValuePolicy::SenderEval).steps {
                out.push((i, step));
            }
        }
        out
    }

    fn apply(&mut self, i: usize, step: &SessionStep) {
        self.sessions[i].1 = step.next.clone();
    }

    fn render(&self, n: usize, i: usize, step: &SessionStep) -> String {
        let line = render_step(n, step);
        if self.sessions.len() > 1 {
            format!("[{}] {line}", self.sessions[i].0)
        } else {
            line
        }
    }

    fn terminated(&self) -> bool {
        self.sessions.iter().all(|(_, s)| normalize(s).0.is_empty())
    }

    fn final_lines(&self) -> Vec<String> {
        self.sessions
            .iter()
            .map(|(name, s)| format!("final {name}: {}", print_session(&normalize(s))))
            .collect()
    }

    fn fault_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, s) in &self.sessions {
            for (p, f) in session_moves(s, &ValuePolicy::SenderEval).faults {
                out.push(format!(
                    "note: in {name}, {p} commits {}!{} but its payload does not evaluate: {}",
                    f.to, f.label, f.error
                ));
            }
        }
        out
    }
}

/// Runs a directive script against the file's network and returns the
/// rendered trace followed by the final session states; `Err` when a
/// directive is not enabled or there is nothing to simulate. Exposed for
/// the C API.
pub fn script_outcome(
    src: &parser::SourceFile,
    directives: &[Directive],
) -> Result<String, String> {
    let mut sim = Sim::from_source(src)?;
    let mut lines = Vec::new();
    for (k, d) in directives.iter().enumerate() {
        let enabled = sim.steps();
        let found = sim.sessions.iter().enumerate().find_map(|(i, _)| {
            let mine: Vec<SessionStep> = enabled
                .iter()
                .filter(|(j, _)| *j == i)
                .map(|(_, s)| s.clone())
                .collect();
            find_directive_step(&mine, d).cloned().map(|s| (i, s))
        });
        match found {
            Some((i, step)) => {
                lines.push(sim.render(k + 1, i, &step));
                sim.apply(i, &step);
            }
            None => return Err(format!("directive {} `{d}` is not enabled", k + 1)),
        }
    }
    lines.extend(sim.final_lines());
    Ok(lines.join("\n"))
}

fn cmd_simulate(
    file: &Path,
    script: Option<PathBuf>,
    seed: Option<u64>,
    steps: Option<usize>,
    interactive: bool,
    json: bool,
) -> i32 {
    let src = match load(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let mut sim = match Sim::from_source(&src) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    let directives: Option<Vec<Directive>> = match &script {
        Some(path) => {
            let text = match read_file(path) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match parse_script(&text) {
                Ok(ds) => Some(ds),
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return 2;
                }
            }
        }
        None => src.script.clone(),
    };

    let max_steps = steps.unwrap_or(20);
    let mut trace: Vec<String> = Vec::new();
    let mut stuck_note: Option<String> = None;
    let mut code = 0;

    if let Some(directives) = directives {
        for (k, d) in directives.iter().enumerate() {
            if k >= max_steps {
                break;
            }
            let enabled = sim.steps();
            let found = sim.sessions.iter().enumerate().find_map(|(i, _)| {
                let mine: Vec<SessionStep> = enabled
                    .iter()
                    .filter(|(j, _)| *j == i)
                    .map(|(_, s)| s.clone())
                    .collect();
                find_directive_step(&mine, d).cloned().map(|s| (i, s))
            });
            match found {
                Some((i, step)) => {
                    trace.push(sim.render(k + 1, i, &step));
                    sim.apply(i, &step);
                }
                None => {
                    eprintln!("error: directive {} `{d}` is not enabled", k + 1);
                    for line in sim.fault_lines() {
                        eprintln!("{line}");
                    }
                    if enabled.is_empty() {
                        eprintln!("no step is enabled");
                    } else {
                        eprintln!("enabled steps:");
                        for (i, s) in &enabled {
                            eprintln!("  {}", sim.render(k + 1, *i, s));
                        }
                    }
                    code = 1;
                    break;
                }
            }
        }
    } else if interactive {
        let stdin = std::io::stdin();
        let mut n = 0;
        loop {
            if n >= max_steps {
                break;
            }
            let enabled = sim.steps();
            if enabled.is_empty() {
                stuck_note = Some(stuck_text(&sim));
                break;
            }
            eprintln!("enabled steps:");
            for (k, (i, s)) in enabled.iter().enumerate() {
                eprintln!("  {k}: {}", sim.render(n + 1, *i, s));
            }
            eprint!("step (index, or q to stop)> ");
            let _ = std::io::stderr().flush();
            let mut line = String::new();
            match stdin.lock().read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {}
                Err(e) => {
                    eprintln!("error: {e}");
                    return 3;
                }
            }
            let line = line.trim();
            if line == "q" || line == "quit" {
                break;
            }
            let Ok(k) = line.parse::<usize>() else {
                eprintln!("enter an index between 0 and {}", enabled.len() - 1);
                continue;
            };
            let Some((i, step)) = enabled.get(k) else {
                eprintln!("enter an index between 0 and {}", enabled.len() - 1);
                continue;
            };
            n += 1;
            let rendered = sim.render(n, *i, step);
            println!("{rendered}");
            trace.push(rendered);
            let (i, step) = (*i, step.clone());
            sim.apply(i, &step);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
        for n in 1..=max_steps {
            let enabled = sim.steps();
            if enabled.is_empty() {
                stuck_note = Some(stuck_text(&sim));
                break;
            }
            let (i, step) = &enabled[rng.gen_range(0..enabled.len())];
            trace.push(sim.render(n, *i, step));
            let (i, step) = (*i, step.clone());
            sim.apply(i, &step);
        }
    }

    if json {
        let doc = json!({
            "trace": trace,
            "final": sim
                .sessions
                .iter()
                .map(|(name, s)| json!({
                    "session": name,
                    "state": print_session(&normalize(s)),
                }))
                .collect::<Vec<_>>(),
            "terminated": sim.terminated(),
            "note": stuck_note,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        if !interactive {
            for line in &trace {
                println!("{line}");
            }
        }
        if let Some(note) = &stuck_note {
            println!("{note}");
        }
        for line in sim.final_lines() {
            println!("{line}");
        }
    }
    code
}

fn stuck_text(sim: &Sim) -> String {
    if sim.terminated() {
        "terminated: every participant has completed".to_string()
    } else {
        let mut s = String::from("stuck: no step is enabled");
        for line in sim.fault_lines() {
            s.push('\n');
            s.push_str(&line);
        }
        s
    }
}

fn cmd_verify(
    file: &Path,
    depth: usize,
    state_cap: usize,
    props: Option<String>,
    json: bool,
) -> i32 {
    let src = match load(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let explicit: Option<Vec<Prop>> = match &props {
        None => None,
        Some(csv) => {
            let mut ps = Vec::new();
            for item in csv.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match item.parse::<Prop>() {
                    Ok(p) => ps.push(p),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return 2;
                    }
                }
            }
            if ps.is_empty() {
                eprintln!("error: --props names no properties");
                return 2;
            }
            Some(ps)
        }
    };
    if src.sessions.is_empty() {
        eprintln!("error: nothing to verify: the file declares no sessions");
        return 2;
    }

    let cfg = ExploreConfig { depth, state_cap, values: ValuePolicy::Canonical };
    let mut overall = Verdict::Holds;
    let mut sessions_json = Vec::new();
    let mut lines = Vec::new();

    for decl in &src.sessions {
        let wanted: Vec<Prop> = match (&explicit, &decl.pair) {
            (Some(ps), _) => ps.clone(),
            (None, Some(_)) => vec![Prop::SubjectReduction, Prop::Fidelity, Prop::Progress],
            (None, None) => vec![Prop::Progress],
        };
        let needs_pair = wanted.iter().any(|p| *p != Prop::Progress);
        if needs_pair && decl.pair.is_none() {
            eprintln!(
                "error: session {} has no global type annotation, required by the requested properties",
                decl.name
            );
            return 2;
        }
        let report = match &decl.pair {
            Some(gp) => verify_session(&decl.session, gp, &cfg, &wanted),
            None => crate::verify::VerifyReport {
                properties: wanted.iter().map(|_| check_progress(&decl.session, &cfg)).collect(),
            },
        };
        match report.overall() {
            Verdict::Violated => overall = Verdict::Violated,
            Verdict::Inconclusive => {
                if overall == Verdict::Holds {
                    overall = Verdict::Inconclusive;
                }
            }
            Verdict::Holds => {}
        }
        lines.push(format!("session {}:", decl.name));
        for p in &report.properties {
            let v = match p.verdict {
                Verdict::Holds => good("holds"),
                Verdict::Violated => bad("violated"),
                Verdict::Inconclusive => warn("inconclusive"),
            };
            lines.push(format!("  {}: {v} ({} states) — {}", p.property, p.states, p.detail));
            if let Some(ce) = &p.counterexample {
                if !ce.steps.is_empty() {
                    lines.push("    trace:".into());
                    for s in &ce.steps {
                        lines.push(format!("      {s}"));
                    }
                }
                lines.push(format!("    state: {}", ce.state));
                if let Some(pair) = &ce.pair {
                    lines.push(format!("    pair: {pair}"));
                }
                lines.push(format!("    reason: {}", ce.reason));
            }
        }
        sessions_json.push(json!({ "name": decl.name, "report": report }));
    }

    if json {
        let doc = json!({ "sessions": sessions_json, "overall": overall });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        for l in lines {
            println!("{l}");
        }
        let v = match overall {
            Verdict::Holds => good("holds"),
            Verdict::Violated => bad("violated"),
            Verdict::Inconclusive => warn("inconclusive"),
        };
        println!("overall: {v}");
    }
    if overall == Verdict::Violated {
        1
    } else {
        0
    }
}

fn cmd_fmt(file: &Path, write: bool) -> i32 {
    let src = match load(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let formatted = print_source(&src);
    if write {
        if let Err(e) = std::fs::write(file, &formatted) {
            eprintln!("error: cannot write {}: {e}", file.display());
            return 3;
        }
    } else {
        print!("{formatted}");
    }
    0
}

/// Types one session against a pair and returns the JSON report. Exposed
/// for the C API.
pub fn typing_outcome(s: &Session, gp: &GlobalPair) -> (bool, serde_json::Value) {
    let report = type_session(s, gp);
    let ok = report.accepted();
    let doc = serde_json::to_value(&report).expect("json");
    (ok, doc)
}

/// Runs the default property set on one annotated session and returns the
/// JSON report. Exposed for the C API.
pub fn verify_outcome(
    s: &Session,
    gp: &GlobalPair,
    depth: usize,
    state_cap: usize,
) -> (Verdict, serde_json::Value) {
    let cfg = ExploreConfig { depth, state_cap, values: ValuePolicy::Canonical };
    let report = verify_session(
        s,
        gp,
        &cfg,
        &[Prop::SubjectReduction, Prop::Fidelity, Prop::Progress],
    );
    let v = report.overall();
    let doc = serde_json::to_value(&report).expect("json");
    (v, doc)
}
