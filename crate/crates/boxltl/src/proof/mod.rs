//! Derivation rules for □LTL over machines, proof trees whose first-order
//! side conditions are discharged on the complete state graph, an independent
//! checker, and a proof search driven by the shape of the goal formula.

mod check;
mod json;
mod rules;
mod search;

use std::fmt;

use crate::error::Result;
use crate::fol::{SideConditionReport, StateFormula, Term};
use crate::machine::{Machine, StateGraph, DEFAULT_GRAPH_BUDGET};
use crate::oracle::{TemporalFormula, DEFAULT_LASSO_BUDGET};
use crate::speclang::{print_formula, print_temporal, print_term};

pub use crate::refine::RefineMode;
pub use check::{check_proof, CheckFailure, CheckReport};
pub use json::{tree_from_json, tree_to_json, tree_to_text};
pub use search::{prove, PhiHint, ProofHints, VariantHint};

/// Depth of the bounded trace comparison used for refinement-backed evidence.
pub const DEFAULT_TRACE_DEPTH: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Claim {
    Temporal(TemporalFormula),
    Conv(StateFormula),
    Div(StateFormula),
    Leadsto(StateFormula, StateFormula),
    Dlf(StateFormula),
    VarC(Term, StateFormula),
    VarD(Term, StateFormula),
    /// `φ` holds in every reachable state.
    Valid(StateFormula),
    /// `ψ_init → φ`.
    Init(StateFormula),
}

impl Claim {
    pub fn kind(&self) -> &'static str {
        match self {
            Claim::Temporal(_) => "temporal",
            Claim::Conv(_) => "conv",
            Claim::Div(_) => "div",
            Claim::Leadsto(..) => "leadsto",
            Claim::Dlf(_) => "dlf",
            Claim::VarC(..) => "var_c",
            Claim::VarD(..) => "var_d",
            Claim::Valid(_) => "valid",
            Claim::Init(_) => "init",
        }
    }

    /// Leaf claims are decided directly on the state graph.
    pub fn is_side_condition(&self) -> bool {
        !matches!(self, Claim::Temporal(_) | Claim::Conv(_) | Claim::Div(_))
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = print_formula;
        match self {
            Claim::Temporal(x) => write!(f, "{}", print_temporal(x)),
            Claim::Conv(x) => write!(f, "conv({})", p(x)),
            Claim::Div(x) => write!(f, "div({})", p(x)),
            Claim::Leadsto(a, b) => write!(f, "leadsto({}, {})", p(a), p(b)),
            Claim::Dlf(x) => write!(f, "dlf({})", p(x)),
            Claim::VarC(t, x) => write!(f, "var_c({}, {})", print_term(t), p(x)),
            Claim::VarD(t, x) => write!(f, "var_d({}, {})", print_term(t), p(x)),
            Claim::Valid(x) => write!(f, "valid({})", p(x)),
            Claim::Init(x) => write!(f, "init -> {}", p(x)),
        }
    }
}

/// `M ⊢ claim` or `M̃ ⊢ claim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgment {
    pub on_extension: bool,
    pub claim: Claim,
}

impl Judgment {
    pub fn new(on_extension: bool, claim: Claim) -> Judgment {
        Judgment { on_extension, claim }
    }

    pub fn machine_label(&self) -> &'static str {
        if self.on_extension {
            "M~"
        } else {
            "M"
        }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.machine_label(), self.claim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Conv,
    Div,
    Inv1,
    Inv2,
    Live,
    Prog,
    Pers,
    Box,
    BoxOr,
    BoxDia1,
    BoxDia2,
    BoxDia3,
    DiaBox1,
    DiaBox2,
    DiaBox3,
    Ext,
    /// A state formula as a temporal claim: it only constrains the first state.
    Fol,
    /// Rewriting by `◇◇ ≡ ◇`, `□□ ≡ □`.
    Norm,
    /// A side condition evaluated on the graph.
    Check,
}

pub const ALL_RULES: [Rule; 19] = [
    Rule::Conv,
    Rule::Div,
    Rule::Inv1,
    Rule::Inv2,
    Rule::Live,
    Rule::Prog,
    Rule::Pers,
    Rule::Box,
    Rule::BoxOr,
    Rule::BoxDia1,
    Rule::BoxDia2,
    Rule::BoxDia3,
    Rule::DiaBox1,
    Rule::DiaBox2,
    Rule::DiaBox3,
    Rule::Ext,
    Rule::Fol,
    Rule::Norm,
    Rule::Check,
];

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Conv => "CONV",
            Rule::Div => "DIV",
            Rule::Inv1 => "INV1",
            Rule::Inv2 => "INV2",
            Rule::Live => "LIVE",
            Rule::Prog => "PROG",
            Rule::Pers => "PERS",
            Rule::Box => "BOX",
            Rule::BoxOr => "BOX_OR",
            Rule::BoxDia1 => "BOX_DIA_1",
            Rule::BoxDia2 => "BOX_DIA_2",
            Rule::BoxDia3 => "BOX_DIA_3",
            Rule::DiaBox1 => "DIA_BOX_1",
            Rule::DiaBox2 => "DIA_BOX_2",
            Rule::DiaBox3 => "DIA_BOX_3",
            Rule::Ext => "EXT",
            Rule::Fol => "FOL",
            Rule::Norm => "NORM",
            Rule::Check => "CHECK",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        ALL_RULES.into_iter().find(|r| r.name() == s)
    }

    pub fn is_modal(self) -> bool {
        matches!(
            self,
            Rule::Box | Rule::BoxDia1 | Rule::BoxDia2 | Rule::BoxDia3 | Rule::DiaBox1 | Rule::DiaBox2 | Rule::DiaBox3
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    Report(SideConditionReport),
    Variant(Term),
    /// The variant lives on a refinement of the machine built by the refine
    /// module; the reports cover the variant formula and the trace comparison.
    Refinement { mode: RefineMode, variant: Term, reports: Vec<SideConditionReport> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofTree {
    pub rule: Rule,
    pub conclusion: Judgment,
    pub evidence: Option<Evidence>,
    pub premises: Vec<ProofTree>,
}

impl ProofTree {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::size).sum::<usize>()
    }

    pub fn rules_used(&self) -> Vec<Rule> {
        let mut out = vec![self.rule];
        for p in &self.premises {
            out.extend(p.rules_used());
        }
        out
    }

    /// The temporal formula concluded, if any.
    pub fn formula(&self) -> Option<&TemporalFormula> {
        match &self.conclusion.claim {
            Claim::Temporal(f) => Some(f),
            _ => None,
        }
    }
}

/// The machine, its trivial extension and both state graphs.
#[derive(Clone, Debug)]
pub struct ProofContext {
    pub base: Machine,
    pub extension: Machine,
    pub base_graph: StateGraph,
    pub ext_graph: StateGraph,
    pub node_budget: usize,
    pub lasso_budget: usize,
    pub trace_depth: usize,
}

impl ProofContext {
    pub fn new(m: &Machine) -> Result<ProofContext> {
        ProofContext::with_budgets(m, DEFAULT_GRAPH_BUDGET, DEFAULT_LASSO_BUDGET)
    }

    pub fn with_budgets(m: &Machine, node_budget: usize, lasso_budget: usize) -> Result<ProofContext> {
        let extension = m.trivial_extension();
        Ok(ProofContext {
            base_graph: m.build_graph(node_budget)?,
            ext_graph: extension.build_graph(node_budget)?,
            base: m.clone(),
            extension,
            node_budget,
            lasso_budget,
            trace_depth: DEFAULT_TRACE_DEPTH,
        })
    }

    pub fn machine(&self, on_extension: bool) -> &Machine {
        if on_extension {
            &self.extension
        } else {
            &self.base
        }
    }

    pub fn graph(&self, on_extension: bool) -> &StateGraph {
        if on_extension {
            &self.ext_graph
        } else {
            &self.base_graph
        }
    }
}

/// One modal prefix symbol. `Implies(φ)` stands for `□(φ → ·)` and is always
/// followed by `Eventually`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Modality {
    Always,
    Eventually,
    Implies(StateFormula),
}

/// A temporal formula read as its modal prefix over a state formula. Two
/// formulas with equal words are the same LTL formula up to `□(true → ·) ≡ □·`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    pub prefix: Vec<Modality>,
    pub base: StateFormula,
}

pub fn word(f: &TemporalFormula) -> Word {
    use Modality as W;
    use TemporalFormula as T;
    let mut prefix = Vec::new();
    let mut cur = f;
    loop {
        match cur {
            T::State(s) => return Word { prefix, base: s.clone() },
            T::Always(x) => {
                prefix.push(W::Always);
                cur = x;
            }
            T::AlwaysEventually(x) => {
                prefix.extend([W::Always, W::Eventually]);
                cur = x;
            }
            T::EventuallyAlways(x) => {
                prefix.extend([W::Eventually, W::Always]);
                cur = x;
            }
            T::Progress(p, x) => {
                if *p == StateFormula::True {
                    prefix.push(W::Always);
                } else {
                    prefix.push(W::Implies(p.clone()));
                }
                prefix.push(W::Eventually);
                cur = x;
            }
        }
    }
}

/// Applies `◇◇ → ◇`, `□□ → □` and `□□(φ → ·) → □(φ → ·)` until none applies.
pub fn collapse(w: &Word) -> Word {
    use Modality as W;
    let mut out: Vec<Modality> = Vec::new();
    for m in &w.prefix {
        match (out.last(), m) {
            (Some(W::Eventually), W::Eventually) | (Some(W::Always), W::Always) => {}
            (Some(W::Always), W::Implies(_)) => {
                out.pop();
                out.push(m.clone());
            }
            _ => out.push(m.clone()),
        }
    }
    Word { prefix: out, base: w.base.clone() }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.prefix {
            match m {
                Modality::Always => f.write_str("[] ")?,
                Modality::Eventually => f.write_str("<> ")?,
                Modality::Implies(p) => write!(f, "[]({} -> ", print_formula(p))?,
            }
        }
        f.write_str(&print_formula(&self.base))
    }
}

#[cfg(test)]
mod tests;
