//! Acceptance run: one line per criterion. Failures that fall into a
//! documented limitation are reported as FAIL with their accounting, but only
//! unexplained failures make the run exit non-zero.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use boxltl::cli;
use boxltl::fol::{check_var_c, check_var_d, StateFormula, Term};
use boxltl::hfset::HfSet;
use boxltl::machine::{Machine, StateGraph};
use boxltl::oracle::{
    check_conv, check_conv_finite, check_div, check_div_finite, holds_bruteforce, holds_fast, tail_homogeneous,
    TailClass, TemporalFormula, Verdict,
};
use boxltl::proof::{tree_from_json, tree_to_json, ProofContext, ProofHints};
use boxltl::refine::{
    check_conv_projection, check_div_projection, div_edge_facts, refine_for_conv, refine_for_div, sufficiently_refined,
    DivRefinement,
};
use boxltl::speclang::{parse_machine, parse_temporal_for, print_formula, print_machine, print_temporal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

const GRAPH_BUDGET: usize = 200_000;
const LASSO_BUDGET: usize = 5_000_000;
const TRACE_DEPTH: usize = 12;

struct Outcome {
    pass: bool,
    /// A failure entirely explained by a documented limitation.
    documented: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Outcome {
        Outcome { pass, documented: false, detail }
    }
}

fn main() {
    let criteria: Vec<(&str, Duration, fn() -> Outcome)> = vec![
        ("1 hf order", Duration::from_secs(10), criterion_1),
        ("2 oracle agreement", Duration::from_secs(300), criterion_2),
        ("3 rule soundness", Duration::from_secs(300), criterion_3),
        ("4 conv refinement", Duration::from_secs(120), criterion_4),
        ("5 div refinement", Duration::from_secs(120), criterion_5),
        ("6+7 completeness", Duration::from_secs(600), criterion_6_and_7),
        ("8 extension laws", Duration::from_secs(60), criterion_8),
        ("9 round trip and determinism", Duration::from_secs(60), criterion_9),
    ];
    let mut unexplained = 0;
    for (name, limit, run) in criteria {
        let t0 = Instant::now();
        let o = run();
        let took = t0.elapsed();
        let in_time = took <= limit;
        let status = if o.pass && in_time { "PASS" } else { "FAIL" };
        let note = if !o.pass && o.documented { " [documented limitation]" } else { "" };
        let over = if in_time { String::new() } else { format!(", over the {}s limit", limit.as_secs()) };
        println!("criterion {name}: {status}{note} ({}; {:.1}s{over})", o.detail, took.as_secs_f64());
        if !(o.pass || o.documented) || !in_time {
            unexplained += 1;
        }
    }
    if unexplained > 0 {
        eprintln!("{unexplained} criteria failed without a documented explanation");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// 1. The order on hereditarily finite sets.

/// Transitive closure computed directly from the element lists.
fn tc_oracle(x: &HfSet) -> BTreeSet<HfSet> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<HfSet> = x.elements().to_vec();
    while let Some(y) = stack.pop() {
        if out.insert(y.clone()) {
            stack.extend(y.elements().iter().cloned());
        }
    }
    out
}

/// A set above `x` in the order about half of the time: `x` itself, one of
/// its elements or a union with it goes into the result.
fn related<R: Rng>(rng: &mut R, x: &HfSet) -> HfSet {
    let noise = random_hfset(rng, 2);
    match rng.gen_range(0..4) {
        0 => HfSet::set([x.clone(), noise]),
        1 if !x.is_atom() => x.union(&HfSet::set([noise])).unwrap(),
        2 => HfSet::set([x.clone()]),
        _ => random_hfset(rng, 3),
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = Vec::new();
    let (mut lt_pairs, mut chains) = (0, 0);
    for i in 0..10_000 {
        let x = random_hfset(&mut rng, 3);
        let y = related(&mut rng, &x);
        let z = related(&mut rng, &y);
        let (tx, ty, tz) = (tc_oracle(&x), tc_oracle(&y), tc_oracle(&z));
        let lt_oracle = |a: &BTreeSet<HfSet>, b: &BTreeSet<HfSet>| a.len() < b.len() && a.is_subset(b);
        if x.lt(&y) != lt_oracle(&tx, &ty) || x.leq(&y) != tx.is_subset(&ty) {
            bad.push(format!("pair {i}: order disagrees with the closure oracle"));
        }
        if x.lt(&y) {
            lt_pairs += 1;
            if x.tc_size() >= y.tc_size() || tx.len() >= ty.len() {
                bad.push(format!("pair {i}: lt without a smaller closure"));
            }
        }
        if x.lt(&x) {
            bad.push(format!("pair {i}: lt is reflexive"));
        }
        if x.lt(&y) && y.lt(&z) {
            chains += 1;
            if !x.lt(&z) || !lt_oracle(&tx, &tz) {
                bad.push(format!("triple {i}: lt is not transitive"));
            }
        }
    }
    let detail = format!("10000 pairs, {lt_pairs} strictly ordered, {chains} chains, {} violations", bad.len());
    Outcome::check(bad.is_empty() && lt_pairs > 1000 && chains > 100, detail)
}

// ---------------------------------------------------------------------------
// 2 and 3 share a corpus: every fixture plus 200 random machines.

struct CorpusEntry {
    name: String,
    machine: Machine,
    hints: ProofHints,
    atoms: Vec<StateFormula>,
}

fn corpus() -> Vec<CorpusEntry> {
    let mut out: Vec<CorpusEntry> = all_fixtures()
        .into_iter()
        .map(|f| {
            let mut atoms = f.atoms();
            atoms.truncate(3);
            CorpusEntry { name: f.name.clone(), machine: f.machine, hints: f.hints, atoms }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..200 {
        let m = random_machine(&mut rng, i);
        let atoms = named_atoms(&m);
        out.push(CorpusEntry { name: m.name.clone(), machine: m, hints: ProofHints::auto(), atoms });
    }
    out
}

fn criterion_2() -> Outcome {
    let (mut checked, mut largest) = (0, 0);
    let mut bad = Vec::new();
    for e in corpus() {
        let g = e.machine.trivial_extension().build_graph(GRAPH_BUDGET).unwrap();
        assert!(g.complete, "{}", e.name);
        largest = largest.max(g.len());
        for f in TemporalFormula::enumerate(&e.atoms, 2) {
            let fast = holds_fast(&g, &f, LASSO_BUDGET).unwrap();
            let brute = holds_bruteforce(&g, &f, LASSO_BUDGET).unwrap();
            checked += 1;
            let same = matches!(
                (&fast, &brute),
                (Verdict::Holds, Verdict::Holds) | (Verdict::Fails(_), Verdict::Fails(_))
            );
            if !same {
                bad.push(format!("{}: {f}: fast {} brute {}", e.name, fast.label(), brute.label()));
            }
        }
    }
    let shown = bad.iter().take(3).cloned().collect::<Vec<_>>().join("; ");
    let detail = format!("{checked} formula checks, largest graph {largest} nodes, {} disagreements {shown}", bad.len());
    Outcome::check(bad.is_empty(), detail)
}

/// Swaps the printed text of two named formulas everywhere in a stored tree.
fn swap_atoms(json: &str, a: &str, b: &str) -> String {
    const MARK: &str = "\u{1}";
    json.replace(a, MARK).replace(b, a).replace(MARK, b)
}

fn criterion_3() -> Outcome {
    let (mut trees, mut accepted, mut mutants, mut mutants_accepted) = (0, 0, 0, 0);
    let mut violations = Vec::new();
    for e in corpus() {
        let ctx = ProofContext::with_budgets(&e.machine, GRAPH_BUDGET, LASSO_BUDGET).unwrap();
        let printed: Vec<String> = e.atoms.iter().map(print_formula).collect();
        let mut judge = |t: &boxltl::ProofTree, f: &TemporalFormula| -> bool {
            let r = ctx.check_proof(t);
            if r.ok && !holds_fast(&ctx.ext_graph, f, LASSO_BUDGET).unwrap().holds() {
                violations.push(format!("{}: accepted proof of {f}", e.name));
            }
            r.ok
        };
        for f in TemporalFormula::enumerate(&e.atoms, 2) {
            // The search runs without the oracle's verdict, so false goals
            // reach the checker whenever a derivation can be assembled.
            let Ok(t) = ctx.derive_unchecked(&f, &e.hints) else { continue };
            trees += 1;
            if !judge(&t, &f) {
                continue;
            }
            accepted += 1;
            let json = serde_json::to_string(&tree_to_json(&t)).unwrap();
            for i in 0..printed.len() {
                for j in i + 1..printed.len() {
                    let text = swap_atoms(&json, &printed[i], &printed[j]);
                    if text == json {
                        continue;
                    }
                    let Ok(value) = serde_json::from_str(&text) else { continue };
                    let Ok(mutant) = tree_from_json(&value, &e.machine) else { continue };
                    let Some(g) = mutant.formula().cloned() else { continue };
                    mutants += 1;
                    if judge(&mutant, &g) {
                        mutants_accepted += 1;
                    }
                }
            }
        }
    }
    let shown = violations.iter().take(3).cloned().collect::<Vec<_>>().join("; ");
    let detail = format!(
        "{trees} derived trees ({accepted} accepted), {mutants} mutated trees ({mutants_accepted} accepted), {} violations {shown}",
        violations.len()
    );
    Outcome::check(violations.is_empty() && accepted > 0, detail)
}

// ---------------------------------------------------------------------------
// 4 and 5: the refinement constructions, on every fixture formula that the
// extension converges (diverges) in, non-vacuously.

fn candidate_formulas(f: &Fixture) -> Vec<StateFormula> {
    let mut phis = f.atoms();
    phis.extend(f.atoms().into_iter().map(StateFormula::not));
    phis
}

fn refined_graph(m: &Machine) -> StateGraph {
    let g = m.build_graph(GRAPH_BUDGET).unwrap();
    assert!(g.complete, "{}: refined graph truncated", m.name);
    g
}

fn criterion_4() -> Outcome {
    let mut machines = BTreeSet::new();
    let (mut instances, mut bad) = (0, Vec::new());
    for f in all_fixtures() {
        let ext = f.machine.trivial_extension();
        let g = ext.build_graph(GRAPH_BUDGET).unwrap();
        for phi in candidate_formulas(&f) {
            let vacuous = !g.sat(&phi).unwrap().iter().any(|&b| b);
            if vacuous || !check_conv(&g, &phi).unwrap().holds() {
                continue;
            }
            instances += 1;
            let r = refine_for_conv(&ext, &phi, GRAPH_BUDGET).unwrap();
            let rg = refined_graph(&r.machine);
            let var = check_var_c(&rg, &r.variant, &phi).unwrap();
            let proj = check_conv_projection(&ext, &r, &rg, GRAPH_BUDGET, TRACE_DEPTH).unwrap();
            let len_variant = matches!(&r.variant, Term::Len(l) if **l == Term::var(&r.list_var));
            if var.holds && proj.holds && len_variant {
                machines.insert(f.name.clone());
            } else {
                bad.push(format!("{} conv({}): var {} projection {}", f.name, print_formula(&phi), var.holds, proj.holds));
            }
        }
    }
    let detail = format!(
        "{instances} convergent instances over {} machines, {} failures {}",
        machines.len(),
        bad.len(),
        bad.join("; ")
    );
    Outcome::check(bad.is_empty() && machines.len() >= 5, detail)
}

/// True when every `¬φ` step of the refined graph removes something from
/// some component `b_i \ c_i` while keeping the others: the construction
/// shrinks the variant as sets even where the closure order does not see it.
fn shrinks_componentwise(r: &DivRefinement, g: &StateGraph) -> bool {
    let sat = g.sat(&r.phi).unwrap();
    let pos = |v: &str| g.vars.iter().position(|x| x == v).unwrap();
    let comps: Vec<(usize, usize)> = r.bounds.iter().map(|b| (pos(&b.bound), pos(&b.collected))).collect();
    let rest = |n: usize| -> Vec<HfSet> {
        comps.iter().map(|&(b, c)| g.nodes[n][b].difference(&g.nodes[n][c]).unwrap()).collect()
    };
    g.edges.iter().filter(|e| !sat[e.from]).all(|e| {
        let (before, after) = (rest(e.from), rest(e.to));
        before.iter().zip(&after).all(|(x, y)| y.is_subset(x)) && before != after
    })
}

fn criterion_5() -> Outcome {
    let mut machines = BTreeSet::new();
    let (mut instances, mut bad, mut documented) = (0, Vec::new(), Vec::new());
    for f in all_fixtures() {
        let ext = f.machine.trivial_extension();
        let g = ext.build_graph(GRAPH_BUDGET).unwrap();
        for phi in candidate_formulas(&f) {
            let vacuous = g.sat(&phi).unwrap().iter().all(|&b| b);
            if vacuous || !check_div(&g, &phi).unwrap().holds() {
                continue;
            }
            instances += 1;
            let r = refine_for_div(&ext, &phi, GRAPH_BUDGET).unwrap();
            let rg = refined_graph(&r.machine);
            let var = check_var_d(&rg, &r.variant, &phi).unwrap();
            let proj = check_div_projection(&ext, &rg, GRAPH_BUDGET, TRACE_DEPTH).unwrap();
            let facts = div_edge_facts(&r, &rg).unwrap();
            let label = format!("{} div({})", f.name, print_formula(&phi));
            if var.holds && proj.holds && facts.iter().all(|x| x.holds) {
                machines.insert(f.name.clone());
                continue;
            }
            // Known shortfall: the strict decrease fails in the closure order
            // although every step removes an element from the bounds.
            let only_order = proj.holds && facts[0].holds && facts[2].holds && shrinks_componentwise(&r, &rg);
            if only_order {
                documented.push(label);
            } else {
                bad.push(format!("{label}: var {} projection {} edge facts {:?}", var.holds, proj.holds,
                    facts.iter().map(|x| x.holds).collect::<Vec<_>>()));
            }
        }
    }
    let detail = format!(
        "{instances} divergent instances over {} fully passing machines; {} fail only the closure-order decrease [{}]; {} other failures {}",
        machines.len(),
        documented.len(),
        documented.join(", "),
        bad.len(),
        bad.join("; ")
    );
    let pass = bad.is_empty() && documented.is_empty() && machines.len() >= 5;
    Outcome { pass, documented: bad.is_empty() && machines.len() >= 5, detail }
}

// ---------------------------------------------------------------------------
// 6 and 7: prove against the oracle.

fn criterion_6_and_7() -> Outcome {
    let mut lines = Vec::new();
    let (mut thm_total, mut thm_agree, mut gap, mut thm_other) = (0, 0, 0, Vec::new());
    let (mut slice_total, mut slice_bad) = (0, Vec::new());
    let mut misclassified = Vec::new();
    for f in all_fixtures() {
        let ctx = ProofContext::with_budgets(&f.machine, GRAPH_BUDGET, LASSO_BUDGET).unwrap();
        let atoms = f.atoms();
        let in_corpus = REFINED_CORPUS.contains(&f.name.as_str());
        if in_corpus {
            let th = atoms.iter().all(|a| tail_homogeneous(&ctx.ext_graph, a).unwrap() != TailClass::Neither);
            let phis = candidate_formulas(&f);
            let sr = sufficiently_refined(&f.machine, &phis, &f.hint_terms, true, GRAPH_BUDGET, TRACE_DEPTH).unwrap();
            if !(th && sr.holds) {
                misclassified.push(f.name.clone());
            }
        }
        for tf in TemporalFormula::enumerate(&atoms, 2) {
            let oracle = holds_fast(&ctx.ext_graph, &tf, LASSO_BUDGET).unwrap().holds();
            let proved = match ctx.prove(&tf, &f.hints) {
                Ok(t) => {
                    let r = ctx.check_proof(&t);
                    assert!(r.ok, "{}: {tf}: produced proof rejected: {:?}", f.name, r.failure);
                    true
                }
                Err(_) => false,
            };
            if in_corpus {
                thm_total += 1;
                if oracle == proved {
                    thm_agree += 1;
                } else if oracle && nested_progress_gap(&tf) {
                    gap += 1;
                } else {
                    thm_other.push(format!("{}: {tf}", f.name));
                }
            }
            if !tf.has_progress() {
                slice_total += 1;
                if oracle != proved {
                    slice_bad.push(format!("{}: {tf}", f.name));
                }
            }
        }
    }
    lines.push(format!(
        "criterion 6: {thm_agree}/{thm_total} agree on {} refined tail-homogeneous machines, {gap} valid nested-progress formulas unproved, {} other disagreements {}, {} misclassified {:?}",
        REFINED_CORPUS.len(),
        thm_other.len(),
        thm_other.iter().take(3).cloned().collect::<Vec<_>>().join("; "),
        misclassified.len(),
        misclassified
    ));
    lines.push(format!(
        "criterion 7: {}/{slice_total} progress-free formulas agree on all fixtures {}",
        slice_total - slice_bad.len(),
        slice_bad.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
    ));
    let c6 = thm_agree == thm_total && misclassified.is_empty();
    let c6_explained = thm_other.is_empty() && misclassified.is_empty();
    let c7 = slice_bad.is_empty();
    for l in &lines {
        println!("  {l}");
    }
    Outcome {
        pass: c6 && c7,
        documented: c6_explained && c7,
        detail: format!(
            "criterion 6 {}, criterion 7 {}",
            if c6 { "PASS" } else { "FAIL" },
            if c7 { "PASS" } else { "FAIL" }
        ),
    }
}

// ---------------------------------------------------------------------------
// 8. The trivial extension.

fn criterion_8() -> Outcome {
    let mut bad = Vec::new();
    let mut checks = 0;
    for f in all_fixtures() {
        let m = &f.machine;
        let ext = m.trivial_extension();
        let base = m.build_graph(GRAPH_BUDGET).unwrap();
        let g = ext.build_graph(GRAPH_BUDGET).unwrap();
        if !g.complete || !base.complete {
            bad.push(format!("{}: truncated", f.name));
            continue;
        }
        if !g.deadlocked_nodes().is_empty() {
            bad.push(format!("{}: extension deadlocks", f.name));
        }
        let env = m.env().unwrap();
        let ext_event: BTreeSet<&str> = ext.events.iter().map(|e| e.name.as_str()).filter(|n| m.event(n).is_none()).collect();
        let mut same_states = base.nodes.len() == g.nodes.len();
        for (n, state) in g.nodes.iter().enumerate() {
            same_states &= base.index.contains_key(state);
            let dead = m.deadlocked(&env, state).unwrap();
            let ext_edges: Vec<_> = g.out[n].iter().map(|&i| &g.edges[i]).filter(|e| ext_event.contains(e.event.as_str())).collect();
            let expected = if dead { 1 } else { 0 };
            if ext_edges.len() != expected || ext_edges.iter().any(|e| e.to != n) || (dead && g.out[n].len() != 1) {
                bad.push(format!("{}: ext edges wrong at {}", f.name, g.render_state(n)));
            }
        }
        if !same_states {
            bad.push(format!("{}: reachable states differ", f.name));
        }
        for phi in candidate_formulas(&f) {
            checks += 2;
            let pairs = [
                (check_conv_finite(&base, &phi).unwrap(), check_conv(&g, &phi).unwrap(), "conv"),
                (check_div_finite(&base, &phi).unwrap(), check_div(&g, &phi).unwrap(), "div"),
            ];
            for (finite, extended, what) in pairs {
                if finite.holds() != extended.holds() {
                    bad.push(format!("{}: {what}({}) differs", f.name, print_formula(&phi)));
                }
            }
        }
    }
    let detail = format!("{} fixtures, {checks} conv/div transfers, {} violations {}", all_fixture_names().len(), bad.len(), bad.join("; "));
    Outcome::check(bad.is_empty(), detail)
}

// ---------------------------------------------------------------------------
// 9. Round trips and CLI determinism.

fn run_cli(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("boxltl").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, out, err)
}

fn criterion_9() -> Outcome {
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let fixtures = all_fixtures();
    for i in 0..1000 {
        let n = rng.gen_range(1..=12);
        let m = parse_machine(&random_machine_text(&mut rng, i, n)).unwrap();
        let text = print_machine(&m);
        match parse_machine(&text) {
            Ok(back) if back == m && print_machine(&back) == text => {}
            _ => bad.push(format!("machine {i}")),
        }
    }
    for i in 0..1000 {
        let m = &fixtures[i % fixtures.len()].machine;
        let f = random_temporal(&mut rng, m, 3);
        let text = print_temporal(&f);
        match parse_temporal_for(&text, m) {
            Ok(back) if back == f => {}
            other => bad.push(format!("formula {text}: {:?}", other.map(|b| print_temporal(&b)))),
        }
    }
    for f in &fixtures {
        let text = print_machine(&f.machine);
        if parse_machine(&text).ok().as_ref() != Some(&f.machine) {
            bad.push(format!("fixture {}", f.name));
        }
    }

    let dir = std::env::temp_dir().join(format!("boxltl-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let fx = fixture_dir();
    let path = |name: &str| fx.join(name).to_string_lossy().into_owned();
    let counter = path("counter.ebm");
    let ltl = format!("@{}", path("counter.ltl"));
    let hints = path("counter.hints.json");
    let out_a = dir.join("a.ebm").to_string_lossy().into_owned();
    let out_b = dir.join("b.ebm").to_string_lossy().into_owned();
    let proof = dir.join("p.json").to_string_lossy().into_owned();
    let mut runs: Vec<Vec<String>> = Vec::new();
    for name in all_fixture_names() {
        let p = path(&format!("{name}.ebm"));
        for seed in ["1", "7", "42"] {
            runs.push(["--seed", seed, "simulate", &p, "--steps", "30"].map(String::from).to_vec());
            runs.push(["--seed", seed, "--format", "json", "simulate", &p, "--extend"].map(String::from).to_vec());
        }
        runs.push(["parse", p.as_str()].map(String::from).to_vec());
    }
    runs.push(["check", counter.as_str(), ltl.as_str()].map(String::from).to_vec());
    runs.push(["--format", "json", "check", counter.as_str(), "<> [] n = 2"].map(String::from).to_vec());
    runs.push(["--auto-refine", "prove", counter.as_str(), "[] <> n = 0"].map(String::from).to_vec());
    for args in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        if run_cli(&args) != run_cli(&args) {
            bad.push(format!("cli {}", args.join(" ")));
        }
    }
    let mut files = Vec::new();
    for out in [&out_a, &out_b] {
        run_cli(&["refine", &counter, "--mode", "conv", "--phi", "n != 0", "--extend", "-o", out]);
        files.push(std::fs::read(out).unwrap_or_default());
    }
    if files[0].is_empty() || files[0] != files[1] {
        bad.push("refine output differs between runs".into());
    }
    let mut proofs = Vec::new();
    for _ in 0..2 {
        run_cli(&["--hints", &hints, "prove", &counter, "<> [] n = 0", "-o", &proof]);
        proofs.push(std::fs::read(&proof).unwrap_or_default());
    }
    if proofs[0].is_empty() || proofs[0] != proofs[1] {
        bad.push("proof file differs between runs".into());
    }
    let _ = std::fs::remove_dir_all(&dir);
    let detail = format!(
        "1000 machines, 1000 formulas, {} fixtures, {} repeated CLI runs, {} mismatches {}",
        fixtures.len(),
        runs.len() + 4,
        bad.len(),
        bad.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
    );
    Outcome::check(bad.is_empty(), detail)
}
