//! Event-B style machines over hereditarily finite sets, checked and proved
//! against liveness properties of the box-LTL fragment.
//!
//! The library is organised bottom-up:
//!
//! - [`hfset`]: canonical hereditarily finite sets and their well-founded order.
//! - [`speclang`]: parser and printer for `.ebm` machines and `.ltl` formulas.
//! - [`machine`]: operational semantics, trivial extension, state graphs.
//! - [`fol`]: terms, state formulas, and the first-order trace side conditions.
//! - [`oracle`]: lasso semantics, brute-force and cycle-based model checking.
//! - [`proof`]: derivation rules, proof trees, checker and proof search.
//! - [`refine`]: the variant-introducing refinements for convergence and divergence.
//! - [`cli`]: the `boxltl` command line.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```text
//! cargo run --example hfsets
//! cargo run --example parse_and_print
//! cargo run --example state_graph
//! cargo run --example model_check
//! cargo run --example prove_liveness
//! cargo run --example refine_variants
//! cargo run --example simulate
//! ```

pub mod cli;
pub mod error;
pub mod fol;
pub mod hfset;
pub mod machine;
pub mod oracle;
pub mod proof;
pub mod refine;
pub mod speclang;

pub use error::{Error, Result};
pub use fol::{StateFormula, Term};
pub use hfset::HfSet;
pub use machine::{Machine, StateGraph};
pub use oracle::{TemporalFormula, Verdict};
pub use proof::ProofTree;
