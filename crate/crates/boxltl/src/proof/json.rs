//! JSON form of proof trees and the indented text listing.
//!
//! Formulas and terms are stored as printed text and parsed back against the
//! machine, so a stored tree is re-checked from its surface syntax.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fol::{SideConditionReport, StateFormula, Term};
use crate::machine::Machine;
use crate::refine::RefineMode;
use crate::speclang::{parse_state_formula, parse_temporal_for, parse_term, print_formula, print_temporal, print_term};

use super::{Claim, Evidence, Judgment, ProofTree, Rule};

fn claim_to_json(c: &Claim) -> Value {
    let f = print_formula;
    let mut o = Map::new();
    o.insert("kind".into(), json!(c.kind()));
    match c {
        Claim::Temporal(x) => {
            o.insert("formula".into(), json!(print_temporal(x)));
        }
        Claim::Conv(p) | Claim::Div(p) | Claim::Dlf(p) | Claim::Valid(p) | Claim::Init(p) => {
            o.insert("phi".into(), json!(f(p)));
        }
        Claim::Leadsto(a, b) => {
            o.insert("from".into(), json!(f(a)));
            o.insert("to".into(), json!(f(b)));
        }
        Claim::VarC(t, p) | Claim::VarD(t, p) => {
            o.insert("variant".into(), json!(print_term(t)));
            o.insert("phi".into(), json!(f(p)));
        }
    }
    Value::Object(o)
}

fn mode_name(m: RefineMode) -> &'static str {
    match m {
        RefineMode::Conv => "conv",
        RefineMode::Div => "div",
    }
}

fn evidence_to_json(e: &Evidence) -> Value {
    match e {
        Evidence::Report(r) => json!({ "report": r }),
        Evidence::Variant(t) => json!({ "variant": print_term(t) }),
        Evidence::Refinement { mode, variant, reports } => json!({
            "refinement": { "mode": mode_name(*mode), "variant": print_term(variant), "reports": reports }
        }),
    }
}

pub fn tree_to_json(t: &ProofTree) -> Value {
    let mut o = Map::new();
    o.insert("rule".into(), json!(t.rule.name()));
    o.insert("machine".into(), json!(t.conclusion.machine_label()));
    o.insert("claim".into(), claim_to_json(&t.conclusion.claim));
    o.insert("conclusion".into(), json!(t.conclusion.to_string()));
    if let Some(e) = &t.evidence {
        o.insert("evidence".into(), evidence_to_json(e));
    }
    o.insert("premises".into(), Value::Array(t.premises.iter().map(tree_to_json).collect()));
    Value::Object(o)
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Invalid(format!("malformed proof: {}", msg.into()))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| malformed(format!("missing field `{key}`")))
}

fn text<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    field(v, key)?.as_str().ok_or_else(|| malformed(format!("field `{key}` must be a string")))
}

struct Reader<'m> {
    m: &'m Machine,
}

impl Reader<'_> {
    fn formula(&self, v: &Value, key: &str) -> Result<StateFormula> {
        parse_state_formula(text(v, key)?, Some(self.m))
    }

    fn term(&self, v: &Value, key: &str) -> Result<Term> {
        parse_term(text(v, key)?, Some(self.m))
    }

    fn claim(&self, v: &Value) -> Result<Claim> {
        Ok(match text(v, "kind")? {
            "temporal" => Claim::Temporal(parse_temporal_for(text(v, "formula")?, self.m)?),
            "conv" => Claim::Conv(self.formula(v, "phi")?),
            "div" => Claim::Div(self.formula(v, "phi")?),
            "dlf" => Claim::Dlf(self.formula(v, "phi")?),
            "valid" => Claim::Valid(self.formula(v, "phi")?),
            "init" => Claim::Init(self.formula(v, "phi")?),
            "leadsto" => Claim::Leadsto(self.formula(v, "from")?, self.formula(v, "to")?),
            "var_c" => Claim::VarC(self.term(v, "variant")?, self.formula(v, "phi")?),
            "var_d" => Claim::VarD(self.term(v, "variant")?, self.formula(v, "phi")?),
            other => return Err(malformed(format!("unknown claim kind `{other}`"))),
        })
    }

    fn reports(v: &Value) -> Result<Vec<SideConditionReport>> {
        serde_json::from_value(v.clone()).map_err(|e| malformed(format!("bad report: {e}")))
    }

    fn evidence(&self, v: &Value) -> Result<Evidence> {
        if let Some(r) = v.get("report") {
            let r = serde_json::from_value(r.clone()).map_err(|e| malformed(format!("bad report: {e}")))?;
            return Ok(Evidence::Report(r));
        }
        if v.get("variant").is_some() {
            return Ok(Evidence::Variant(self.term(v, "variant")?));
        }
        if let Some(r) = v.get("refinement") {
            let mode = match text(r, "mode")? {
                "conv" => RefineMode::Conv,
                "div" => RefineMode::Div,
                other => return Err(malformed(format!("unknown refinement mode `{other}`"))),
            };
            // The variant ranges over the refined machine's variables.
            let variant = parse_term(text(r, "variant")?, None)?;
            let reports = Self::reports(field(r, "reports")?)?;
            return Ok(Evidence::Refinement { mode, variant, reports });
        }
        Err(malformed("evidence must hold `report`, `variant` or `refinement`"))
    }

    fn tree(&self, v: &Value) -> Result<ProofTree> {
        let rule_name = text(v, "rule")?;
        let rule = Rule::from_name(rule_name).ok_or_else(|| malformed(format!("unknown rule `{rule_name}`")))?;
        let on_extension = match text(v, "machine")? {
            "M" => false,
            "M~" => true,
            other => return Err(malformed(format!("machine must be `M` or `M~`, found `{other}`"))),
        };
        let claim = self.claim(field(v, "claim")?)?;
        let evidence = match v.get("evidence") {
            None | Some(Value::Null) => None,
            Some(e) => Some(self.evidence(e)?),
        };
        let premises = match v.get("premises") {
            None => Vec::new(),
            Some(Value::Array(ps)) => ps.iter().map(|p| self.tree(p)).collect::<Result<_>>()?,
            Some(_) => return Err(malformed("`premises` must be an array")),
        };
        Ok(ProofTree { rule, conclusion: Judgment::new(on_extension, claim), evidence, premises })
    }
}

/// Reads a tree written by [`tree_to_json`], resolving names against `m`.
pub fn tree_from_json(v: &Value, m: &Machine) -> Result<ProofTree> {
    Reader { m }.tree(v)
}

fn evidence_note(e: &Evidence) -> String {
    match e {
        Evidence::Report(r) => format!("{}: {}", r.condition, if r.holds { "checked" } else { "FAILS" }),
        Evidence::Variant(t) => format!("variant {}", print_term(t)),
        Evidence::Refinement { mode, variant, reports } => format!(
            "variant {} on the {} refinement ({} checks)",
            print_term(variant),
            mode_name(*mode),
            reports.len()
        ),
    }
}

fn listing(t: &ProofTree, indent: usize, out: &mut String) {
    out.push_str(&"  ".repeat(indent));
    out.push_str(&format!("[{}] {}", t.rule, t.conclusion));
    if let Some(e) = &t.evidence {
        out.push_str(&format!("    -- {}", evidence_note(e)));
    }
    out.push('\n');
    for p in &t.premises {
        listing(p, indent + 1, out);
    }
}

/// Indented listing: each node's premises appear beneath it, one level deeper.
pub fn tree_to_text(t: &ProofTree) -> String {
    let mut s = String::new();
    listing(t, 0, &mut s);
    s
}
