//! Surface language for machines (`.ebm`), formula files (`.ltl`), state
//! formulas and terms. Parsing is the only way text becomes an AST; the
//! printer emits text that parses back to an equal AST.

mod lexer;
mod parser;
mod printer;

use std::fmt;

pub use lexer::{lex, Tok, Token};
pub use parser::{
    parse_ltl_file, parse_machine, parse_state_formula, parse_temporal, parse_temporal_for, parse_term,
};
pub use printer::{print_formula, print_machine, print_temporal, print_term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub severity: Severity,
}

impl Diagnostic {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic { line, col, message: message.into(), severity: Severity::Error }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.col, self.message)
    }
}

/// Message prefix shared by every rejection of a well-formed but non-□LTL formula.
pub const FRAGMENT_MSG: &str = "not in □LTL fragment";
