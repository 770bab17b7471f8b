//! Shared helpers for the integration tests: fixture loading, random
//! machines and random sets.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use boxltl::fol::{StateFormula, Term};
use boxltl::hfset::HfSet;
use boxltl::machine::Machine;
use boxltl::oracle::TemporalFormula;
use boxltl::proof::{collapse, word, Modality, ProofHints};
use boxltl::speclang::{parse_machine, parse_term};
use rand::seq::SliceRandom;
use rand::Rng;

pub struct Fixture {
    pub name: String,
    pub machine: Machine,
    /// Hints from `<name>.hints.json` with auto-refine switched on.
    pub hints: ProofHints,
    pub hint_terms: Vec<Term>,
}

impl Fixture {
    pub fn atoms(&self) -> Vec<StateFormula> {
        named_atoms(&self.machine)
    }
}

pub fn named_atoms(m: &Machine) -> Vec<StateFormula> {
    m.predicates.iter().map(|p| p.1.clone()).collect()
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> Fixture {
    let dir = fixture_dir();
    let text = std::fs::read_to_string(dir.join(format!("{name}.ebm"))).unwrap();
    let machine = parse_machine(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    let hp = dir.join(format!("{name}.hints.json"));
    let mut hints = match std::fs::read_to_string(&hp) {
        Ok(t) => ProofHints::from_json(&t).unwrap(),
        Err(_) => ProofHints::default(),
    };
    hints.auto_refine = true;
    let hint_terms = hints.variants.iter().map(|v| parse_term(&v.term, Some(&machine)).unwrap()).collect();
    Fixture { name: name.to_string(), machine, hints, hint_terms }
}

pub fn all_fixture_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "ebm").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

pub fn all_fixtures() -> Vec<Fixture> {
    all_fixture_names().iter().map(|n| fixture(n)).collect()
}

/// Fixtures that are tail-homogeneous and sufficiently refined for every
/// named predicate and its negation.
pub const REFINED_CORPUS: [&str; 11] =
    ["clock", "countdown", "counter", "drain", "elevator", "fill", "handshake", "pingpong", "settle", "startup", "traffic"];

/// Formulas outside the derivable class: a progress formula sitting under an
/// eventually-always context, whose collapsed modal word contains `◇` directly
/// followed by `□(φ → ·)`. Such a formula can hold because its antecedent
/// eventually stops holding, which no rule concludes under `◇□`.
pub fn nested_progress_gap(f: &TemporalFormula) -> bool {
    collapse(&word(f)).prefix.windows(2).any(|w| matches!(w, [Modality::Eventually, Modality::Implies(_)]))
}

/// Source of a random machine with one variable over `0..n`, a random
/// transition relation of low out-degree (one event per edge), a random non-empty set of
/// initial values and three named predicates `s in P`.
pub fn random_machine_text<R: Rng>(rng: &mut R, index: usize, n: usize) -> String {
    let all: Vec<usize> = (0..n).collect();
    let subset = |rng: &mut R, nonempty: bool| -> Vec<usize> {
        loop {
            let s: Vec<usize> = all.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
            if !nonempty || !s.is_empty() {
                return s;
            }
        }
    };
    let lit = |xs: &[usize]| format!("{{{}}}", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "));
    let mut text = format!("machine Random{index}\nconstants N = {}\nvariables s\n", lit(&all));
    for name in ["p", "q", "r"] {
        let set = subset(rng, false);
        text.push_str(&format!("predicate {name} : s in {}\n", lit(&set)));
    }
    let init = subset(rng, true);
    let init_action = if init.len() == 1 { format!("s := {}", init[0]) } else { format!("s :in {}", lit(&init)) };
    text.push_str(&format!("\ninit\n  {init_action}\nend\n"));
    // Zero to two successors per value keeps the lasso count small enough
    // for exhaustive enumeration.
    let mut e = 0;
    for a in 0..n {
        let k = *[0, 1, 1, 1, 2, 2].choose(rng).unwrap();
        for &b in all.choose_multiple(rng, k) {
            text.push_str(&format!("\nevent e{e}\n  where s = {a}\n  then\n    s := {b}\nend\n"));
            e += 1;
        }
    }
    // Sometimes one parameterised event covering several targets at once.
    if rng.gen_bool(0.3) {
        let a = *all.choose(rng).unwrap();
        let targets = subset(rng, true);
        text.push_str(&format!("\nevent jump\n  any x from {}\n  where s = {a}\n  then\n    s := x\nend\n", lit(&targets)));
    }
    text
}

pub fn random_machine<R: Rng>(rng: &mut R, index: usize) -> Machine {
    let n = rng.gen_range(2..=12);
    let text = random_machine_text(rng, index, n);
    parse_machine(&text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

/// A random hereditarily finite set of bounded depth and width over atoms
/// `a`, `b`, `c`.
pub fn random_hfset<R: Rng>(rng: &mut R, depth: usize) -> HfSet {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => HfSet::empty(),
            1 => HfSet::atom("a"),
            2 => HfSet::atom("b"),
            _ => HfSet::atom("c"),
        };
    }
    let width = rng.gen_range(0..4);
    HfSet::set((0..width).map(|_| random_hfset(rng, depth - 1)))
}

pub fn random_state_formula<R: Rng>(rng: &mut R, m: &Machine, depth: usize) -> StateFormula {
    let atoms = named_atoms(m);
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..4) {
            0 => atoms[rng.gen_range(0..atoms.len())].clone(),
            1 => StateFormula::True,
            2 => StateFormula::False,
            _ => {
                let v = &m.variables[rng.gen_range(0..m.variables.len())];
                let lit = Term::lit(HfSet::von_neumann(rng.gen_range(0..5)));
                match rng.gen_range(0..3) {
                    0 => StateFormula::eq(Term::var(v), lit),
                    1 => StateFormula::Le(Term::var(v), lit),
                    _ => StateFormula::In(lit, Term::singleton(Term::var(v))),
                }
            }
        };
    }
    let a = random_state_formula(rng, m, depth - 1);
    let b = random_state_formula(rng, m, depth - 1);
    match rng.gen_range(0..4) {
        0 => StateFormula::not(a),
        1 => StateFormula::and(a, b),
        2 => StateFormula::or(a, b),
        _ => StateFormula::implies(a, b),
    }
}

pub fn random_temporal<R: Rng>(rng: &mut R, m: &Machine, depth: usize) -> TemporalFormula {
    let inner = if depth == 0 { None } else { Some(random_temporal(rng, m, depth - 1)) };
    let Some(x) = inner.filter(|_| rng.gen_bool(0.8)) else {
        return TemporalFormula::State(random_state_formula(rng, m, 2));
    };
    match rng.gen_range(0..4) {
        0 => TemporalFormula::always(x),
        1 => TemporalFormula::always_eventually(x),
        2 => TemporalFormula::eventually_always(x),
        _ => TemporalFormula::progress(random_state_formula(rng, m, 2), x),
    }
}
