//! Per-node schema validation and the rule constructors.

use crate::error::{Error, Result};
use crate::fol::{
    check_dlf, check_init, check_leadsto, check_valid, check_var_c, check_var_d, SideConditionReport, StateFormula,
    Term,
};
use crate::oracle::TemporalFormula as T;
use crate::refine::{refinement_evidence, RefineMode};
use crate::speclang::print_term;

use super::{collapse, word, Claim, Evidence, Judgment, Modality, ProofContext, ProofTree, Rule, Word};

type Check = std::result::Result<(), String>;

fn not(f: &StateFormula) -> StateFormula {
    StateFormula::not(f.clone())
}

fn temporal(ext: bool, f: T) -> Judgment {
    Judgment::new(ext, Claim::Temporal(f))
}

fn always_state(f: StateFormula) -> T {
    T::always(T::State(f))
}

/// Recomputes a side-condition report on the judgment's graph.
pub(crate) fn fresh_report(ctx: &ProofContext, j: &Judgment) -> Result<SideConditionReport> {
    let g = ctx.graph(j.on_extension);
    match &j.claim {
        Claim::Leadsto(a, b) => check_leadsto(g, a, b),
        Claim::Dlf(f) => check_dlf(g, f),
        Claim::VarC(t, f) => check_var_c(g, t, f),
        Claim::VarD(t, f) => check_var_d(g, t, f),
        Claim::Valid(f) => check_valid(g, f),
        Claim::Init(f) => check_init(g, f),
        other => Err(Error::Invalid(format!("`{other}` is not a side condition"))),
    }
}

fn describe_failure(r: &SideConditionReport) -> String {
    match &r.witness {
        Some(w) => {
            let mut s = format!("{} fails at {}", r.condition, w.state);
            if let Some(e) = &w.event {
                s += &format!(" via event {e}");
                if let Some(b) = w.binding.as_ref().filter(|b| !b.is_empty()) {
                    s += &format!(" [{b}]");
                }
            }
            if let Some(succ) = &w.successor {
                s += &format!(" to {succ}");
            }
            s + &format!(": {}", w.reason)
        }
        None => format!("{} fails", r.condition),
    }
}

fn expect_premises(node: &ProofTree, expected: &[Judgment]) -> Check {
    let got: Vec<&Judgment> = node.premises.iter().map(|p| &p.conclusion).collect();
    if got.len() != expected.len() {
        return Err(format!("expected {} premise(s), found {}", expected.len(), got.len()));
    }
    for (i, (g, e)) in got.iter().zip(expected).enumerate() {
        if *g != e {
            return Err(format!("premise {} should be `{e}`, found `{g}`", i + 1));
        }
    }
    Ok(())
}

fn expect_no_evidence(node: &ProofTree) -> Check {
    match node.evidence {
        None => Ok(()),
        Some(_) => Err(format!("rule {} carries no evidence", node.rule)),
    }
}

fn temporal_claim(j: &Judgment) -> std::result::Result<&T, String> {
    match &j.claim {
        Claim::Temporal(f) => Ok(f),
        other => Err(format!("expected a temporal formula, found `{other}`")),
    }
}

fn single_premise(node: &ProofTree) -> std::result::Result<&ProofTree, String> {
    match node.premises.as_slice() {
        [p] => Ok(p),
        ps => Err(format!("expected 1 premise, found {}", ps.len())),
    }
}

fn starts_with(w: &Word, pattern: &[fn(&Modality) -> bool]) -> bool {
    w.prefix.len() >= pattern.len() && pattern.iter().zip(&w.prefix).all(|(p, m)| p(m))
}

fn is_always(m: &Modality) -> bool {
    *m == Modality::Always
}
fn is_eventually(m: &Modality) -> bool {
    *m == Modality::Eventually
}
fn is_boxlike(m: &Modality) -> bool {
    matches!(m, Modality::Always | Modality::Implies(_))
}

/// Conclusion word of a modal rule applied to `pw`. `target` supplies the
/// antecedent of `BOX_DIA_1`, which the premise does not determine.
fn modal_conclusion(rule: Rule, pw: &Word, target: &Word) -> std::result::Result<Word, String> {
    use Modality as M;
    let with = |head: Vec<Modality>, rest: &[Modality]| Word {
        prefix: head.into_iter().chain(rest.iter().cloned()).collect(),
        base: pw.base.clone(),
    };
    let need = |ok: bool, shape: &str| {
        if ok {
            Ok(())
        } else {
            Err(format!("{rule} needs a premise of the form {shape}, found `{pw}`"))
        }
    };
    match rule {
        Rule::Box => {
            need(starts_with(pw, &[is_boxlike]), "[] x")?;
            Ok(with(vec![M::Always], &pw.prefix))
        }
        Rule::BoxDia1 => {
            need(starts_with(pw, &[is_always, is_eventually]), "[] <> x")?;
            let head = match target.prefix.first() {
                Some(m @ (M::Always | M::Implies(_))) => m.clone(),
                _ => return Err(format!("{rule} concludes a formula [] (p -> <> x), found `{target}`")),
            };
            Ok(with(vec![head, M::Eventually], &pw.prefix[2..]))
        }
        Rule::BoxDia2 => {
            need(starts_with(pw, &[is_eventually, is_always]), "<> [] x")?;
            Ok(with(vec![M::Always], &pw.prefix))
        }
        Rule::BoxDia3 => {
            need(starts_with(pw, &[is_boxlike, is_eventually]), "[] (p -> <> x)")?;
            Ok(with(vec![M::Always, M::Eventually], &pw.prefix))
        }
        Rule::DiaBox1 => {
            need(starts_with(pw, &[is_eventually, is_always]), "<> [] x")?;
            Ok(with(vec![M::Eventually, M::Always, M::Always], &pw.prefix[2..]))
        }
        Rule::DiaBox2 => {
            need(starts_with(pw, &[is_boxlike, is_eventually]), "[] (p -> <> x)")?;
            Ok(with(vec![M::Eventually, M::Always], &pw.prefix))
        }
        Rule::DiaBox3 => {
            need(starts_with(pw, &[is_eventually, is_always]), "<> [] x")?;
            Ok(with(vec![M::Eventually, M::Always], &pw.prefix))
        }
        other => Err(format!("{other} is not a modal rule")),
    }
}

fn check_leaf(ctx: &ProofContext, node: &ProofTree) -> Check {
    if !node.conclusion.claim.is_side_condition() {
        return Err(format!("CHECK cannot conclude `{}`", node.conclusion.claim));
    }
    if !node.premises.is_empty() {
        return Err("CHECK has no premises".into());
    }
    let Some(Evidence::Report(recorded)) = &node.evidence else {
        return Err("CHECK needs a side-condition report as evidence".into());
    };
    let fresh = fresh_report(ctx, &node.conclusion).map_err(|e| e.to_string())?;
    if !fresh.holds {
        return Err(describe_failure(&fresh));
    }
    if *recorded != fresh {
        return Err(format!("recorded evidence for {} does not match a fresh evaluation", fresh.condition));
    }
    Ok(())
}

fn check_refined(ctx: &ProofContext, ext: bool, mode: RefineMode, phi: &StateFormula, ev: &Evidence) -> Check {
    let Evidence::Refinement { mode: m, variant, reports } = ev else {
        unreachable!("caller matched the refinement variant")
    };
    if *m != mode {
        return Err("refinement evidence is for the other rule".into());
    }
    let (fresh_variant, fresh_reports) =
        refinement_evidence(ctx.machine(ext), phi, mode, ctx.node_budget, ctx.trace_depth)
            .map_err(|e| e.to_string())?;
    if print_term(&fresh_variant) != print_term(variant) {
        return Err(format!(
            "refinement variant `{}` differs from the rebuilt `{}`",
            print_term(variant),
            print_term(&fresh_variant)
        ));
    }
    if let Some(bad) = fresh_reports.iter().find(|r| !r.holds) {
        return Err(describe_failure(bad));
    }
    if *reports != fresh_reports {
        return Err("recorded refinement reports do not match a fresh evaluation".into());
    }
    Ok(())
}

/// Validates one node against its rule schema and re-verifies leaf evidence.
/// Premises are only inspected through their conclusions.
pub(crate) fn validate(ctx: &ProofContext, node: &ProofTree) -> Check {
    let ext = node.conclusion.on_extension;
    let claim = &node.conclusion.claim;
    let j = |c: Claim| Judgment::new(ext, c);
    match node.rule {
        Rule::Check => check_leaf(ctx, node),
        Rule::Conv | Rule::Div => {
            let (phi, conv) = match (node.rule, claim) {
                (Rule::Conv, Claim::Conv(f)) => (f, true),
                (Rule::Div, Claim::Div(f)) => (f, false),
                _ => return Err(format!("{} cannot conclude `{claim}`", node.rule)),
            };
            match &node.evidence {
                Some(Evidence::Variant(t)) if conv => {
                    expect_premises(node, &[j(Claim::VarC(t.clone(), phi.clone())), j(Claim::Dlf(phi.clone()))])
                }
                Some(Evidence::Variant(t)) => expect_premises(node, &[j(Claim::VarD(t.clone(), phi.clone()))]),
                Some(ev @ Evidence::Refinement { .. }) => {
                    if conv {
                        expect_premises(node, &[j(Claim::Dlf(phi.clone()))])?;
                        check_refined(ctx, ext, RefineMode::Conv, phi, ev)
                    } else {
                        expect_premises(node, &[])?;
                        check_refined(ctx, ext, RefineMode::Div, phi, ev)
                    }
                }
                _ => Err(format!("{} needs a variant term or refinement as evidence", node.rule)),
            }
        }
        Rule::Inv1 => {
            expect_no_evidence(node)?;
            let T::Always(inner) = temporal_claim(&node.conclusion)? else {
                return Err(format!("INV1 concludes [] p, found `{claim}`"));
            };
            let T::State(phi) = &**inner else {
                return Err("INV1 needs a state formula under []".into());
            };
            expect_premises(node, &[j(Claim::Init(phi.clone())), j(Claim::Leadsto(phi.clone(), phi.clone()))])
        }
        Rule::Inv2 => {
            expect_no_evidence(node)?;
            let T::Always(inner) = temporal_claim(&node.conclusion)? else {
                return Err(format!("INV2 concludes [] p, found `{claim}`"));
            };
            let T::State(psi) = &**inner else {
                return Err("INV2 needs a state formula under []".into());
            };
            let phi = match node.premises.get(1).map(|p| &p.conclusion.claim) {
                Some(Claim::Temporal(T::Always(x))) => match &**x {
                    T::State(phi) => phi.clone(),
                    _ => return Err("INV2's second premise must be [] p for a state formula p".into()),
                },
                _ => return Err("INV2's second premise must be [] p".into()),
            };
            expect_premises(
                node,
                &[
                    j(Claim::Valid(StateFormula::implies(phi.clone(), psi.clone()))),
                    temporal(ext, always_state(phi)),
                ],
            )
        }
        Rule::Live => {
            expect_no_evidence(node)?;
            let T::AlwaysEventually(inner) = temporal_claim(&node.conclusion)? else {
                return Err(format!("LIVE concludes [] <> p, found `{claim}`"));
            };
            let T::State(phi) = &**inner else {
                return Err("LIVE needs a state formula under [] <>".into());
            };
            expect_premises(node, &[j(Claim::Conv(not(phi)))])
        }
        Rule::Pers => {
            expect_no_evidence(node)?;
            let T::EventuallyAlways(inner) = temporal_claim(&node.conclusion)? else {
                return Err(format!("PERS concludes <> [] p, found `{claim}`"));
            };
            let T::State(phi) = &**inner else {
                return Err("PERS needs a state formula under <> []".into());
            };
            expect_premises(node, &[j(Claim::Div(phi.clone())), j(Claim::Dlf(not(phi)))])
        }
        Rule::Prog => {
            expect_no_evidence(node)?;
            let T::Progress(p1, inner) = temporal_claim(&node.conclusion)? else {
                return Err(format!("PROG concludes [] (p -> <> q), found `{claim}`"));
            };
            let T::State(p2) = &**inner else {
                return Err("PROG needs a state formula after <>".into());
            };
            let p3 = match node.premises.get(2).map(|p| &p.conclusion.claim) {
                Some(Claim::Temporal(T::Always(x))) => match &**x {
                    T::State(StateFormula::Implies(_, p3)) => (**p3).clone(),
                    _ => return Err("PROG's third premise must be [] (p1 & !p2 -> p3)".into()),
                },
                _ => return Err("PROG's third premise must be [] (p1 & !p2 -> p3)".into()),
            };
            let stay = StateFormula::and(p3.clone(), not(p2));
            let mut expected = vec![
                j(Claim::Div(not(&p3))),
                j(Claim::Leadsto(stay.clone(), StateFormula::or(p3.clone(), p2.clone()))),
                temporal(ext, always_state(StateFormula::implies(StateFormula::and(p1.clone(), not(p2)), p3))),
            ];
            // On the unextended machine a trace may stop inside p3 & !p2.
            if !ext {
                expected.push(j(Claim::Dlf(stay)));
            }
            expect_premises(node, &expected)
        }
        Rule::BoxOr => {
            expect_no_evidence(node)?;
            let T::Progress(p1, _) = temporal_claim(&node.conclusion)? else {
                return Err(format!("BOX_OR concludes [] (p -> <> x), found `{claim}`"));
            };
            expect_premises(node, &[temporal(ext, always_state(not(p1)))])
        }
        r if r.is_modal() => {
            expect_no_evidence(node)?;
            let target = word(temporal_claim(&node.conclusion)?);
            let p = single_premise(node)?;
            if p.conclusion.on_extension != ext {
                return Err(format!("{r} keeps the machine of its premise"));
            }
            let got = modal_conclusion(r, &word(temporal_claim(&p.conclusion)?), &target)?;
            if got != target {
                return Err(format!("{r} yields `{got}` from its premise, not `{target}`"));
            }
            Ok(())
        }
        Rule::Norm => {
            expect_no_evidence(node)?;
            let target = word(temporal_claim(&node.conclusion)?);
            let p = single_premise(node)?;
            if p.conclusion.on_extension != ext {
                return Err("NORM keeps the machine of its premise".into());
            }
            let pw = word(temporal_claim(&p.conclusion)?);
            if collapse(&pw) != collapse(&target) {
                return Err(format!("`{pw}` and `{target}` differ after collapsing repeated modalities"));
            }
            Ok(())
        }
        Rule::Ext => {
            expect_no_evidence(node)?;
            if ext {
                return Err("EXT concludes a judgment on the unextended machine".into());
            }
            temporal_claim(&node.conclusion)?;
            expect_premises(node, &[Judgment::new(true, claim.clone())])
        }
        Rule::Fol => {
            expect_no_evidence(node)?;
            let T::State(phi) = temporal_claim(&node.conclusion)? else {
                return Err(format!("FOL concludes a state formula, found `{claim}`"));
            };
            expect_premises(node, &[j(Claim::Init(phi.clone()))])
        }
        _ => unreachable!("modal rules handled above"),
    }
}

impl ProofContext {
    fn finish(&self, node: ProofTree) -> Result<ProofTree> {
        match validate(self, &node) {
            Ok(()) => Ok(node),
            Err(reason) => Err(Error::Invalid(format!("{} not applicable to `{}`: {reason}", node.rule, node.conclusion))),
        }
    }

    fn node(&self, rule: Rule, conclusion: Judgment, premises: Vec<ProofTree>) -> Result<ProofTree> {
        self.finish(ProofTree { rule, conclusion, evidence: None, premises })
    }

    /// A side-condition leaf with its freshly computed report.
    pub fn apply_check(&self, on_extension: bool, claim: Claim) -> Result<ProofTree> {
        let conclusion = Judgment::new(on_extension, claim);
        let report = fresh_report(self, &conclusion)?;
        if !report.holds {
            return Err(Error::Invalid(format!("side condition not satisfied: {}", describe_failure(&report))));
        }
        self.finish(ProofTree { rule: Rule::Check, conclusion, evidence: Some(Evidence::Report(report)), premises: vec![] })
    }

    pub fn apply_conv(&self, ext: bool, t: &Term, phi: &StateFormula) -> Result<ProofTree> {
        let premises = vec![
            self.apply_check(ext, Claim::VarC(t.clone(), phi.clone()))?,
            self.apply_check(ext, Claim::Dlf(phi.clone()))?,
        ];
        self.finish(ProofTree {
            rule: Rule::Conv,
            conclusion: Judgment::new(ext, Claim::Conv(phi.clone())),
            evidence: Some(Evidence::Variant(t.clone())),
            premises,
        })
    }

    pub fn apply_div(&self, ext: bool, t: &Term, phi: &StateFormula) -> Result<ProofTree> {
        let premises = vec![self.apply_check(ext, Claim::VarD(t.clone(), phi.clone()))?];
        self.finish(ProofTree {
            rule: Rule::Div,
            conclusion: Judgment::new(ext, Claim::Div(phi.clone())),
            evidence: Some(Evidence::Variant(t.clone())),
            premises,
        })
    }

    /// CONV or DIV with the variant taken from the refinement construction.
    pub fn apply_refined(&self, ext: bool, mode: RefineMode, phi: &StateFormula) -> Result<ProofTree> {
        let (variant, reports) =
            refinement_evidence(self.machine(ext), phi, mode, self.node_budget, self.trace_depth)?;
        let (rule, claim, premises) = match mode {
            RefineMode::Conv => (Rule::Conv, Claim::Conv(phi.clone()), vec![self.apply_check(ext, Claim::Dlf(phi.clone()))?]),
            RefineMode::Div => (Rule::Div, Claim::Div(phi.clone()), vec![]),
        };
        self.finish(ProofTree {
            rule,
            conclusion: Judgment::new(ext, claim),
            evidence: Some(Evidence::Refinement { mode, variant, reports }),
            premises,
        })
    }

    pub fn apply_inv1(&self, ext: bool, phi: &StateFormula) -> Result<ProofTree> {
        let premises = vec![
            self.apply_check(ext, Claim::Init(phi.clone()))?,
            self.apply_check(ext, Claim::Leadsto(phi.clone(), phi.clone()))?,
        ];
        self.node(Rule::Inv1, temporal(ext, always_state(phi.clone())), premises)
    }

    /// From a proof of `□φ` derive `□ψ`.
    pub fn apply_inv2(&self, psi: &StateFormula, premise: ProofTree) -> Result<ProofTree> {
        let ext = premise.conclusion.on_extension;
        let phi = match premise.formula() {
            Some(T::Always(x)) => match &**x {
                T::State(phi) => phi.clone(),
                _ => return Err(Error::Invalid("INV2 needs a premise [] p with p a state formula".into())),
            },
            _ => return Err(Error::Invalid("INV2 needs a premise [] p".into())),
        };
        let valid = self.apply_check(ext, Claim::Valid(StateFormula::implies(phi, psi.clone())))?;
        self.node(Rule::Inv2, temporal(ext, always_state(psi.clone())), vec![valid, premise])
    }

    /// From `conv(¬φ)` derive `□◇φ`.
    pub fn apply_live(&self, phi: &StateFormula, premise: ProofTree) -> Result<ProofTree> {
        let ext = premise.conclusion.on_extension;
        self.node(Rule::Live, temporal(ext, T::always_eventually(T::State(phi.clone()))), vec![premise])
    }

    /// From `div(¬φ3)` and `□(φ1 ∧ ¬φ2 → φ3)` derive `□(φ1 → ◇φ2)`.
    pub fn apply_prog(
        &self,
        p1: &StateFormula,
        p2: &StateFormula,
        p3: &StateFormula,
        div: ProofTree,
        inv: ProofTree,
    ) -> Result<ProofTree> {
        let ext = div.conclusion.on_extension;
        let stay = StateFormula::and(p3.clone(), not(p2));
        let mut premises = vec![
            div,
            self.apply_check(ext, Claim::Leadsto(stay.clone(), StateFormula::or(p3.clone(), p2.clone())))?,
            inv,
        ];
        if !ext {
            premises.push(self.apply_check(ext, Claim::Dlf(stay))?);
        }
        self.node(Rule::Prog, temporal(ext, T::progress(p1.clone(), T::State(p2.clone()))), premises)
    }

    /// From `div(φ)` derive `◇□φ`; the `dlf(¬φ)` leaf is built here.
    pub fn apply_pers(&self, phi: &StateFormula, div: ProofTree) -> Result<ProofTree> {
        let ext = div.conclusion.on_extension;
        let dlf = self.apply_check(ext, Claim::Dlf(not(phi)))?;
        self.node(Rule::Pers, temporal(ext, T::eventually_always(T::State(phi.clone()))), vec![div, dlf])
    }

    /// The modal rules, `BOX_OR`, `NORM` and `EXT`: `target` is the concluded formula.
    pub fn apply_modal(&self, rule: Rule, target: &T, premise: ProofTree) -> Result<ProofTree> {
        let ext = match rule {
            Rule::Ext => false,
            r if r.is_modal() || matches!(r, Rule::BoxOr | Rule::Norm) => premise.conclusion.on_extension,
            other => return Err(Error::Invalid(format!("{other} is not a modal rule"))),
        };
        self.node(rule, temporal(ext, target.clone()), vec![premise])
    }

    pub fn apply_ext(&self, premise: ProofTree) -> Result<ProofTree> {
        let target = match premise.formula() {
            Some(f) => f.clone(),
            None => return Err(Error::Invalid("EXT transfers temporal judgments only".into())),
        };
        self.apply_modal(Rule::Ext, &target, premise)
    }

    pub fn apply_norm(&self, target: &T, premise: ProofTree) -> Result<ProofTree> {
        self.apply_modal(Rule::Norm, target, premise)
    }

    /// A top-level state formula from its truth in every initial state.
    pub fn apply_fol(&self, ext: bool, phi: &StateFormula) -> Result<ProofTree> {
        let init = self.apply_check(ext, Claim::Init(phi.clone()))?;
        self.node(Rule::Fol, temporal(ext, T::State(phi.clone())), vec![init])
    }
}
