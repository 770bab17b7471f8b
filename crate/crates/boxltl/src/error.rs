use thiserror::Error;

use crate::speclang::Diagnostic;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("malformed literal: {0}")]
    Literal(String),
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("action infeasible: event `{event}` in state {state}")]
    Infeasible { event: String, state: String },
    #[error("no initial state")]
    NoInitialState,
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("{}", render_diagnostics(.0))]
    Parse(Vec<Diagnostic>),
    #[error("precondition refused: {0}")]
    Refused(String),
    #[error("{0}")]
    Invalid(String),
}

fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
