//! Goal-directed proof search on the trivial extension.
//!
//! The goal is first decided by the oracle; only valid goals are searched.
//! Each case builds the derivation prescribed for its outermost shape and
//! the result is moved to the unextended machine with `EXT`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fol::{StateFormula, Term};
use crate::machine::Machine;
use crate::oracle::{holds_fast, tail_homogeneous, verdict_text, TailClass, TemporalFormula as T, Verdict};
use crate::refine::RefineMode;
use crate::speclang::{parse_state_formula, parse_term, print_formula, print_temporal};

use super::{ProofContext, ProofTree, Rule};

/// A variant term, optionally restricted to one rule and one formula.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantHint {
    /// `CONV` or `DIV`; any when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    /// The formula argument of conv/div; any when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    pub term: String,
}

/// An invariant `φ3` for proving `□(φ1 → ◇φ2)` with `PROG`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiHint {
    pub phi1: String,
    pub phi2: String,
    pub phi3: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofHints {
    #[serde(default)]
    pub variants: Vec<VariantHint>,
    #[serde(default)]
    pub phi3: Vec<PhiHint>,
    /// Allow variants taken from the refinement constructions.
    #[serde(default)]
    pub auto_refine: bool,
}

impl ProofHints {
    pub fn from_json(text: &str) -> Result<ProofHints> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed hints: {e}")))
    }

    pub fn auto() -> ProofHints {
        ProofHints { auto_refine: true, ..ProofHints::default() }
    }
}

struct ParsedVariant {
    mode: Option<RefineMode>,
    formula: Option<StateFormula>,
    term: Term,
}

struct Search<'c> {
    ctx: &'c ProofContext,
    variants: Vec<ParsedVariant>,
    phi3: Vec<(StateFormula, StateFormula, StateFormula)>,
    auto_refine: bool,
}

fn fail<X>(msg: String) -> Result<X> {
    Err(Error::Invalid(msg))
}

impl<'c> Search<'c> {
    fn new(ctx: &'c ProofContext, hints: &ProofHints) -> Result<Search<'c>> {
        let m = Some(&ctx.base);
        let mut variants = Vec::new();
        for h in &hints.variants {
            let mode = match h.rule.as_deref() {
                None => None,
                Some("CONV") => Some(RefineMode::Conv),
                Some("DIV") => Some(RefineMode::Div),
                Some(other) => return fail(format!("hint rule must be CONV or DIV, found `{other}`")),
            };
            let formula = h.formula.as_deref().map(|f| parse_state_formula(f, m)).transpose()?;
            variants.push(ParsedVariant { mode, formula, term: parse_term(&h.term, m)? });
        }
        let phi3 = hints
            .phi3
            .iter()
            .map(|h| {
                Ok((
                    parse_state_formula(&h.phi1, m)?,
                    parse_state_formula(&h.phi2, m)?,
                    parse_state_formula(&h.phi3, m)?,
                ))
            })
            .collect::<Result<_>>()?;
        Ok(Search { ctx, variants, phi3, auto_refine: hints.auto_refine })
    }

    /// CONV or DIV on the extension: formula-specific hints, then generic
    /// hints, then the empty term (which suffices when the obligation is
    /// vacuous), then the refinement construction if permitted.
    fn variant_rule(&self, mode: RefineMode, phi: &StateFormula) -> Result<ProofTree> {
        let applies = |v: &&ParsedVariant| v.mode.is_none_or(|m| m == mode);
        let specific = self.variants.iter().filter(applies).filter(|v| v.formula.as_ref() == Some(phi));
        let generic = self.variants.iter().filter(applies).filter(|v| v.formula.is_none());
        let empty = Term::Empty;
        let mut last = None;
        for t in specific.chain(generic).map(|v| &v.term).chain(std::iter::once(&empty)) {
            let r = match mode {
                RefineMode::Conv => self.ctx.apply_conv(true, t, phi),
                RefineMode::Div => self.ctx.apply_div(true, t, phi),
            };
            match r {
                Ok(tree) => return Ok(tree),
                Err(e @ Error::Indeterminate(_)) => return Err(e),
                Err(e) => last = Some(e),
            }
        }
        if self.auto_refine {
            return self.ctx.apply_refined(true, mode, phi);
        }
        let what = match mode {
            RefineMode::Conv => "conv",
            RefineMode::Div => "div",
        };
        let tried = last.map(|e| format!(" (last attempt: {e})")).unwrap_or_default();
        fail(format!(
            "no variant establishes {what}({}); add a variant hint or enable auto-refine{tried}",
            print_formula(phi)
        ))
    }

    fn modal(&self, rule: Rule, target: &T, premise: ProofTree) -> Result<ProofTree> {
        self.ctx.apply_modal(rule, target, premise)
    }

    fn derive(&self, f: &T) -> Result<ProofTree> {
        let ctx = self.ctx;
        match f {
            T::State(phi) => ctx.apply_fol(true, phi),
            T::Always(x) => match &**x {
                T::State(phi) => ctx.apply_inv1(true, phi),
                T::EventuallyAlways(_) => self.modal(Rule::BoxDia2, f, self.derive(x)?),
                _ => self.modal(Rule::Box, f, self.derive(x)?),
            },
            T::AlwaysEventually(x) => match &**x {
                T::State(psi) => {
                    let conv = self.variant_rule(RefineMode::Conv, &StateFormula::not(psi.clone()))?;
                    ctx.apply_live(psi, conv)
                }
                T::Always(chi) => {
                    let p = self.derive(&T::eventually_always((**chi).clone()))?;
                    self.modal(Rule::BoxDia2, f, p)
                }
                T::AlwaysEventually(_) | T::Progress(..) => self.modal(Rule::BoxDia3, f, self.derive(x)?),
                T::EventuallyAlways(chi) => {
                    let p = self.derive(&T::always_eventually(T::always((**chi).clone())))?;
                    ctx.apply_norm(f, p)
                }
            },
            T::EventuallyAlways(x) => match &**x {
                T::State(phi) => {
                    let div = self.variant_rule(RefineMode::Div, phi)?;
                    ctx.apply_pers(phi, div)
                }
                T::Always(chi) => {
                    let p = self.derive(&T::eventually_always((**chi).clone()))?;
                    self.modal(Rule::DiaBox1, f, p)
                }
                T::AlwaysEventually(_) | T::Progress(..) => self.modal(Rule::DiaBox2, f, self.derive(x)?),
                T::EventuallyAlways(_) => self.modal(Rule::DiaBox3, f, self.derive(x)?),
            },
            T::Progress(p1, x) => self.progress(f, p1, x),
        }
    }

    /// `□(φ1 → ◇x)`.
    fn progress(&self, f: &T, p1: &StateFormula, x: &T) -> Result<ProofTree> {
        let main = match x {
            T::State(p2) => self.progress_state(f, p1, p2),
            _ => self
                .derive(&T::always_eventually(x.clone()))
                .and_then(|p| self.modal(Rule::BoxDia1, f, p)),
        };
        match main {
            Ok(t) => Ok(t),
            Err(e @ Error::Indeterminate(_)) => Err(e),
            Err(e) => self.box_or(f, p1).map_err(|_| e),
        }
    }

    fn box_or(&self, f: &T, p1: &StateFormula) -> Result<ProofTree> {
        let inv = self.ctx.apply_inv1(true, &StateFormula::not(p1.clone()))?;
        self.modal(Rule::BoxOr, f, inv)
    }

    fn progress_state(&self, f: &T, p1: &StateFormula, p2: &StateFormula) -> Result<ProofTree> {
        match tail_homogeneous(&self.ctx.ext_graph, p2)? {
            TailClass::Both | TailClass::ConvSide => {
                let live = self.derive(&T::always_eventually(T::State(p2.clone())))?;
                self.modal(Rule::BoxDia1, f, live)
            }
            TailClass::DivSide => {
                let p3 = match self.phi3.iter().find(|(a, b, _)| a == p1 && b == p2) {
                    Some((_, _, p3)) => p3.clone(),
                    None => self.synthesize_phi3(p2)?,
                };
                let div = self.variant_rule(RefineMode::Div, &StateFormula::not(p3.clone()))?;
                let inv_formula =
                    StateFormula::implies(StateFormula::and(p1.clone(), StateFormula::not(p2.clone())), p3.clone());
                let inv = self.ctx.apply_inv1(true, &inv_formula)?;
                self.ctx.apply_prog(p1, p2, &p3, div, inv)
            }
            TailClass::Neither => fail(format!(
                "the machine is not tail-homogeneous for {} (classification: neither)",
                print_formula(p2)
            )),
        }
    }

    /// Disjunction of literal state descriptions of the reachable `¬φ2`
    /// states from which every continuation reaches `φ2`.
    fn synthesize_phi3(&self, p2: &StateFormula) -> Result<StateFormula> {
        let g = &self.ctx.ext_graph;
        let s2 = g.sat(p2)?;
        let mut must = s2.clone();
        loop {
            let mut changed = false;
            for v in 0..g.len() {
                if !must[v] && !g.out[v].is_empty() && g.out[v].iter().all(|&e| must[g.edges[e].to]) {
                    must[v] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(StateFormula::or_all((0..g.len()).filter(|&v| must[v] && !s2[v]).map(|v| {
            StateFormula::and_all(
                g.vars
                    .iter()
                    .zip(&g.nodes[v])
                    .map(|(x, val)| StateFormula::eq(Term::var(x), Term::lit(val.clone()))),
            )
        })))
    }
}

impl ProofContext {
    /// Decides `f` on the extension, then derives it there and transfers it
    /// to the machine with `EXT`.
    pub fn prove(&self, f: &T, hints: &ProofHints) -> Result<ProofTree> {
        let search = Search::new(self, hints)?;
        match holds_fast(&self.ext_graph, f, self.lasso_budget)? {
            Verdict::Holds => {}
            v @ Verdict::Fails(_) => {
                return Err(Error::Refused(verdict_text(&self.ext_graph, &print_temporal(f), &v)));
            }
            Verdict::Indeterminate(r) => return Err(Error::Indeterminate(r)),
        }
        let tree = search.derive(f)?;
        self.apply_ext(tree)
    }

    /// Runs the search without deciding `f` first. Whatever comes back is
    /// only as good as `check_proof` says it is.
    pub fn derive_unchecked(&self, f: &T, hints: &ProofHints) -> Result<ProofTree> {
        let tree = Search::new(self, hints)?.derive(f)?;
        self.apply_ext(tree)
    }
}

pub fn prove(m: &Machine, f: &T, hints: &ProofHints) -> Result<ProofTree> {
    ProofContext::new(m)?.prove(f, hints)
}
