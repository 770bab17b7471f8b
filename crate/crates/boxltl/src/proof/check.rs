//! Independent re-verification of a whole proof tree.

use serde::Serialize;

use crate::error::Result;
use crate::machine::Machine;

use super::rules::validate;
use super::{ProofContext, ProofTree};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckFailure {
    /// Premise indices from the root, e.g. `[0, 2]`.
    pub path: Vec<usize>,
    pub rule: String,
    pub conclusion: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub ok: bool,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<CheckFailure>,
}

/// Builds fresh graphs for `m` and its extension and checks `tree` against them.
pub fn check_proof(m: &Machine, tree: &ProofTree) -> Result<CheckReport> {
    let ctx = ProofContext::new(m)?;
    Ok(ctx.check_proof(tree))
}

impl ProofContext {
    /// Pre-order walk; the first node whose schema or evidence fails is reported.
    pub fn check_proof(&self, tree: &ProofTree) -> CheckReport {
        let mut path = Vec::new();
        let failure = self.walk(tree, &mut path);
        CheckReport { ok: failure.is_none(), nodes: tree.size(), failure }
    }

    fn walk(&self, node: &ProofTree, path: &mut Vec<usize>) -> Option<CheckFailure> {
        if let Err(reason) = validate(self, node) {
            return Some(CheckFailure {
                path: path.clone(),
                rule: node.rule.name().to_string(),
                conclusion: node.conclusion.to_string(),
                reason,
            });
        }
        for (i, p) in node.premises.iter().enumerate() {
            path.push(i);
            let f = self.walk(p, path);
            path.pop();
            if f.is_some() {
                return f;
            }
        }
        None
    }
}
