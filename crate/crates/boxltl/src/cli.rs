//! The `boxltl` command line. [`run`] takes the arguments and output streams
//! so the whole interface can be driven from tests.
//!
//! Exit codes: 0 success or holds, 1 fails, refused or rejected input,
//! 2 I/O failure or malformed proof file, 3 indeterminate within budget.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::Error;
use crate::machine::{Machine, DEFAULT_GRAPH_BUDGET};
use crate::oracle::{holds_fast, verdict_json, verdict_text, Verdict, DEFAULT_LASSO_BUDGET};
use crate::proof::{
    tree_from_json, tree_to_json, tree_to_text, ProofContext, ProofHints, DEFAULT_TRACE_DEPTH,
};
use crate::refine::{
    check_conv_projection, check_div_projection, div_edge_facts, refine_for_conv, refine_for_div, RefineMode,
};
use crate::fol::{check_var_c, check_var_d, SideConditionReport};
use crate::speclang::{parse_ltl_file, parse_machine, parse_state_formula, parse_temporal_for, print_machine, print_temporal};

/// Environment variable overriding the default node budget.
pub const BUDGET_ENV: &str = "BOXLTL_BUDGET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Conv,
    Div,
}

#[derive(Debug, Parser)]
#[command(name = "boxltl", version, about = "Check, prove and refine box-LTL properties of Event-B style machines")]
pub struct Cli {
    /// Maximum number of graph nodes (default 100000, or $BOXLTL_BUDGET).
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Maximum number of lassos enumerated by the fallback checker.
    #[arg(long, global = true, default_value_t = DEFAULT_LASSO_BUDGET)]
    pub lasso_budget: usize,
    /// Depth of the projected-trace comparison for refinements.
    #[arg(long, global = true, default_value_t = DEFAULT_TRACE_DEPTH)]
    pub depth: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// JSON file with variant and φ3 hints for `prove`.
    #[arg(long, global = true)]
    pub hints: Option<PathBuf>,
    /// Let `prove` take variants from the refinement constructions.
    #[arg(long, global = true)]
    pub auto_refine: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a machine, optionally with a formula file, and print it back.
    Parse {
        machine: PathBuf,
        /// `.ltl` file of `name : formula` lines checked against the machine.
        #[arg(long)]
        ltl: Option<PathBuf>,
    },
    /// Decide a formula on the machine's trivial extension.
    Check {
        machine: PathBuf,
        /// A formula, or `@file.ltl` to check every formula in the file.
        formula: String,
    },
    /// Derive a formula and print the proof tree.
    Prove {
        machine: PathBuf,
        formula: String,
        /// Also write the proof as JSON to this file.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Re-check a JSON proof against a machine.
    Verify { proof: PathBuf, machine: PathBuf },
    /// Build the refinement introducing a variant for conv(φ) or div(φ).
    Refine {
        machine: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// The state formula φ.
        #[arg(long)]
        phi: String,
        /// Refine the trivial extension instead of the machine itself.
        #[arg(long)]
        extend: bool,
        /// Write the refined machine here and the sidecar next to it as `.json`.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Print one pseudo-random run.
    Simulate {
        machine: PathBuf,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Run the trivial extension, which never deadlocks.
        #[arg(long)]
        extend: bool,
    },
}

/// Settings shared by every command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub node_budget: usize,
    pub lasso_budget: usize,
    pub depth: usize,
    pub format: Format,
    pub hints: Option<PathBuf>,
    pub auto_refine: bool,
    pub seed: u64,
}

impl RunConfig {
    fn from_cli(c: &Cli) -> std::result::Result<RunConfig, String> {
        let node_budget = match c.budget {
            Some(b) => b,
            None => match std::env::var(BUDGET_ENV) {
                Ok(v) => v.trim().parse().map_err(|_| format!("{BUDGET_ENV} must be a positive integer, found `{v}`"))?,
                Err(_) => DEFAULT_GRAPH_BUDGET,
            },
        };
        if node_budget == 0 || c.lasso_budget == 0 {
            return Err("budgets must be at least 1".into());
        }
        Ok(RunConfig {
            node_budget,
            lasso_budget: c.lasso_budget,
            depth: c.depth,
            format: c.format,
            hints: c.hints.clone(),
            auto_refine: c.auto_refine,
            seed: c.seed,
        })
    }
}

/// A command's result: exit code, standard output, standard error.
struct Outcome {
    code: i32,
    out: String,
    err: String,
}

impl Outcome {
    fn ok(out: String) -> Outcome {
        Outcome { code: EXIT_OK, out, err: String::new() }
    }

    fn with(code: i32, out: String, err: String) -> Outcome {
        Outcome { code, out, err }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Indeterminate(_) => EXIT_INDETERMINATE,
        Error::Invalid(m) if m.starts_with("malformed proof") => EXIT_IO,
        _ => EXIT_FAIL,
    }
}

fn from_error(e: Error) -> Outcome {
    Outcome::with(exit_code(&e), String::new(), format!("{e}\n"))
}

fn read(path: &Path) -> std::result::Result<String, Outcome> {
    fs::read_to_string(path)
        .map_err(|e| Outcome::with(EXIT_IO, String::new(), format!("cannot read {}: {e}\n", path.display())))
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Outcome> {
    fs::write(path, text)
        .map_err(|e| Outcome::with(EXIT_IO, String::new(), format!("cannot write {}: {e}\n", path.display())))
}

fn load_machine(path: &Path) -> std::result::Result<Machine, Outcome> {
    let text = read(path)?;
    parse_machine(&text).map_err(|e| Outcome::with(EXIT_FAIL, String::new(), format!("{}:\n{e}\n", path.display())))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Parses `args` (including the program name), runs the command and writes
/// its output. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let o = match RunConfig::from_cli(&cli) {
        Ok(cfg) => dispatch(&cli.command, &cfg).unwrap_or_else(|o| o),
        Err(msg) => Outcome::with(EXIT_IO, String::new(), format!("{msg}\n")),
    };
    let _ = out.write_all(o.out.as_bytes());
    let _ = err.write_all(o.err.as_bytes());
    o.code
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> std::result::Result<Outcome, Outcome> {
    match cmd {
        Command::Parse { machine, ltl } => cmd_parse(machine, ltl.as_deref(), cfg),
        Command::Check { machine, formula } => cmd_check(machine, formula, cfg),
        Command::Prove { machine, formula, out } => cmd_prove(machine, formula, out.as_deref(), cfg),
        Command::Verify { proof, machine } => cmd_verify(proof, machine, cfg),
        Command::Refine { machine, mode, phi, extend, out } => {
            let mode = match mode {
                ModeArg::Conv => RefineMode::Conv,
                ModeArg::Div => RefineMode::Div,
            };
            cmd_refine(machine, mode, phi, *extend, out.as_deref(), cfg)
        }
        Command::Simulate { machine, steps, extend } => cmd_simulate(machine, *steps, *extend, cfg),
    }
}

fn cmd_parse(path: &Path, ltl: Option<&Path>, cfg: &RunConfig) -> std::result::Result<Outcome, Outcome> {
    let m = load_machine(path)?;
    let formulas = match ltl {
        Some(p) => {
            let text = read(p)?;
            parse_ltl_file(&text, Some(&m))
                .map_err(|e| Outcome::with(EXIT_FAIL, String::new(), format!("{}:\n{e}\n", p.display())))?
        }
        None => Vec::new(),
    };
    Ok(Outcome::ok(match cfg.format {
        Format::Text => {
            let mut s = print_machine(&m);
            for (name, f) in &formulas {
                s += &format!("// {name} : {}\n", print_temporal(f));
            }
            s
        }
        Format::Json => pretty(&json!({
            "machine": m.name,
            "variables": m.variables,
            "events": m.events.iter().map(|e| e.name.clone()).collect::<Vec<_>>(),
            "predicates": m.predicates.iter().map(|(p, _)| p.clone()).collect::<Vec<_>>(),
            "formulas": formulas.iter().map(|(n, f)| json!({ "name": n, "formula": print_temporal(f) })).collect::<Vec<_>>(),
            "text": print_machine(&m),
        })),
    }))
}

/// `name : formula` pairs from the argument: one unnamed formula, or every
/// line of an `@file`.
fn formulas(
    arg: &str,
    m: &Machine,
) -> std::result::Result<Vec<(String, crate::oracle::TemporalFormula)>, Outcome> {
    let reject = |e: Error| Outcome::with(EXIT_FAIL, String::new(), format!("{e}\n"));
    match arg.strip_prefix('@') {
        Some(path) => parse_ltl_file(&read(Path::new(path))?, Some(m)).map_err(reject),
        None => Ok(vec![(String::new(), parse_temporal_for(arg, m).map_err(reject)?)]),
    }
}

fn cmd_check(path: &Path, arg: &str, cfg: &RunConfig) -> std::result::Result<Outcome, Outcome> {
    let m = load_machine(path)?;
    let fs = formulas(arg, &m)?;
    let g = m.trivial_extension().build_graph(cfg.node_budget).map_err(from_error)?;
    let mut code = EXIT_OK;
    let mut text = String::new();
    let mut reports = Vec::new();
    for (name, f) in &fs {
        let v = holds_fast(&g, f, cfg.lasso_budget).map_err(from_error)?;
        code = code.max(match v {
            Verdict::Holds => EXIT_OK,
            Verdict::Fails(_) => EXIT_FAIL,
            Verdict::Indeterminate(_) => EXIT_INDETERMINATE,
        });
        let label = if name.is_empty() { print_temporal(f) } else { format!("{name} : {}", print_temporal(f)) };
        text += &verdict_text(&g, &label, &v);
        let mut j = verdict_json(&g, &print_temporal(f), &v);
        if !name.is_empty() {
            j["name"] = json!(name);
        }
        reports.push(j);
    }
    let out = match cfg.format {
        Format::Text => text,
        Format::Json if reports.len() == 1 && !arg.starts_with('@') => pretty(&reports[0]),
        Format::Json => pretty(&json!(reports)),
    };
    Ok(Outcome::with(code, out, String::new()))
}

fn load_hints(cfg: &RunConfig) -> std::result::Result<ProofHints, Outcome> {
    let mut h = match &cfg.hints {
        Some(p) => ProofHints::from_json(&read(p)?).map_err(|e| Outcome::with(EXIT_IO, String::new(), format!("{e}\n")))?,
        None => ProofHints::default(),
    };
    h.auto_refine |= cfg.auto_refine;
    Ok(h)
}

fn context(m: &Machine, cfg: &RunConfig) -> std::result::Result<ProofContext, Outcome> {
    let mut ctx = ProofContext::with_budgets(m, cfg.node_budget, cfg.lasso_budget).map_err(from_error)?;
    ctx.trace_depth = cfg.depth;
    Ok(ctx)
}

fn cmd_prove(path: &Path, arg: &str, out: Option<&Path>, cfg: &RunConfig) -> std::result::Result<Outcome, Outcome> {
    let m = load_machine(path)?;
    let hints = load_hints(cfg)?;
    let fs = formulas(arg, &m)?;
    if fs.len() != 1 {
        return Err(Outcome::with(EXIT_FAIL, String::new(), "prove takes exactly one formula\n".into()));
    }
    let ctx = context(&m, cfg)?;
    let tree = ctx.prove(&fs[0].1, &hints).map_err(from_error)?;
    let j = tree_to_json(&tree);
    if let Some(p) = out {
        write_file(p, &pretty(&j))?;
    }
    Ok(Outcome::ok(match cfg.format {
        Format::Text => tree_to_text(&tree),
        Format::Json => pretty(&j),
    }))
}

fn cmd_verify(proof: &Path, path: &Path, cfg: &RunConfig) -> std::result::Result<Outcome, Outcome> {
    let text = read(proof)?;
    let m = load_machine(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Outcome::with(EXIT_IO, String::new(), format!("malformed proof JSON: {e}\n")))?;
    let tree = tree_from_json(&v, &m).map_err(from_error)?;
    let report = match ProofContext::with_budgets(&m, cfg.node_budget, cfg.lasso_budget) {
        Ok(mut ctx) => {
            ctx.trace_depth = cfg.depth;
            ctx.check_proof(&tree)
        }
        Err(e) => return Err(from_error(e)),
    };
    let code = if report.ok { EXIT_OK } else { EXIT_FAIL };
    let out = match cfg.format {
        Format::Json => pretty(&json!(report)),
        Format::Text => match &report.failure {
            None => format!("ok: {} nodes checked\n", report.nodes),
            Some(f) => format!(
                "rejected at premise path {:?}\n  [{}] {}\n  {}\n",
                f.path, f.rule, f.conclusion, f.reason
            ),
        },
    };
    Ok(Outcome::with(code, out, String::new()))
}

fn report_lines(reports: &[SideConditionReport]) -> String {
    reports
        .iter()
        .map(|r| {
            let mut s = format!("{}: {}\n", r.condition, if r.holds { "holds" } else { "FAILS" });
            if let Some(w) = &r.witness {
                s += &format!("  at {}: {}\n", w.state, w.reason);
            }
            s
        })
        .collect()
}

fn cmd_refine(
    path: &Path,
    mode: RefineMode,
    phi: &str,
    extend: bool,
    out: Option<&Path>,
    cfg: &RunConfig,
) -> std::result::Result<Outcome, Outcome> {
    let base = load_machine(path)?;
    let m = if extend { base.trivial_extension() } else { base };
    let phi = parse_state_formula(phi, Some(&m)).map_err(from_error)?;
    let b = cfg.node_budget;
    let (refined, mut sidecar, reports) = match mode {
        RefineMode::Conv => {
            let r = refine_for_conv(&m, &phi, b).map_err(from_error)?;
            let g = r.machine.build_graph(b).map_err(from_error)?;
            let reports = vec![
                check_var_c(&g, &r.variant, &phi).map_err(from_error)?,
                check_conv_projection(&m, &r, &g, b, cfg.depth).map_err(from_error)?,
            ];
            (r.machine.clone(), r.sidecar(), reports)
        }
        RefineMode::Div => {
            let r = refine_for_div(&m, &phi, b).map_err(from_error)?;
            let g = r.machine.build_graph(b).map_err(from_error)?;
            let mut reports = vec![
                check_var_d(&g, &r.variant, &phi).map_err(from_error)?,
                check_div_projection(&m, &g, b, cfg.depth).map_err(from_error)?,
            ];
            reports.extend(div_edge_facts(&r, &g).map_err(from_error)?);
            (r.machine.clone(), r.sidecar(), reports)
        }
    };
    sidecar["checks"] = json!(reports);
    let text = print_machine(&refined);
    let code = if reports.iter().all(|r| r.holds) { EXIT_OK } else { EXIT_FAIL };
    let listing = match out {
        Some(p) => {
            write_file(p, &text)?;
            write_file(&p.with_extension("json"), &pretty(&sidecar))?;
            format!("wrote {} and {}\n", p.display(), p.with_extension("json").display())
        }
        None => text,
    };
    Ok(Outcome::with(
        code,
        match cfg.format {
            Format::Text => listing,
            Format::Json => pretty(&sidecar),
        },
        report_lines(&reports),
    ))
}

fn cmd_simulate(path: &Path, steps: usize, extend: bool, cfg: &RunConfig) -> std::result::Result<Outcome, Outcome> {
    let base = load_machine(path)?;
    let m = if extend { base.trivial_extension() } else { base };
    let env = m.env().map_err(from_error)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let inits = m.initial_states(&env).map_err(from_error)?;
    let mut state = inits[rng.gen_range(0..inits.len())].clone();
    let mut trace = vec![json!({ "state": m.render_state(&state) })];
    let mut end = "steps";
    for _ in 0..steps {
        let succ = m.successors(&env, &state).map_err(from_error)?;
        if succ.is_empty() {
            end = "deadlock";
            break;
        }
        let (firing, next) = succ[rng.gen_range(0..succ.len())].clone();
        let ev = &m.events[firing.event].name;
        let label = if firing.binding.is_empty() {
            ev.clone()
        } else {
            let b: Vec<String> = firing.binding.iter().map(|(x, v)| format!("{x} = {}", v.pretty())).collect();
            format!("{ev}({})", b.join(", "))
        };
        trace.last_mut().expect("trace is never empty")["event"] = json!(label);
        state = next;
        trace.push(json!({ "state": m.render_state(&state) }));
    }
    if end == "steps" && m.successors(&env, &state).map_err(from_error)?.is_empty() {
        end = "deadlock";
    }
    Ok(Outcome::ok(match cfg.format {
        Format::Json => pretty(&json!({ "seed": cfg.seed, "trace": trace, "end": end })),
        Format::Text => {
            let mut s = String::new();
            for (i, step) in trace.iter().enumerate() {
                s += &format!("{i:>4}  {}\n", step["state"].as_str().unwrap_or_default());
                if let Some(e) = step.get("event").and_then(|e| e.as_str()) {
                    s += &format!("        --{e}-->\n");
                }
            }
            if end == "deadlock" {
                s += "      <deadlock>\n";
            }
            s
        }
    }))
}
