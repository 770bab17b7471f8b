use crate::fol::{StateFormula, Term};
use crate::machine::{AssignKind, Assignment, Machine};
use crate::oracle::TemporalFormula;

fn join(ts: &[Term]) -> String {
    ts.iter().map(print_term).collect::<Vec<_>>().join(", ")
}

pub fn print_term(t: &Term) -> String {
    let f1 = |name: &str, a: &Term| format!("{name}({})", print_term(a));
    let f2 = |name: &str, a: &Term, b: &Term| format!("{name}({}, {})", print_term(a), print_term(b));
    match t {
        Term::Var(v) | Term::Const(v) | Term::Atom(v) => v.clone(),
        Term::Lit(x) => x.pretty(),
        Term::Empty => "{}".to_string(),
        Term::Nat(n) => n.to_string(),
        Term::Atoms => "Atoms".to_string(),
        Term::Nil => "nil".to_string(),
        Term::BigUnion(a) => f1("bigunion", a),
        Term::TheUnique(a) => f1("theunique", a),
        Term::Len(a) => f1("len", a),
        Term::Head(a) => f1("head", a),
        Term::Tail(a) => f1("tail", a),
        Term::Pair(a, b) => f2("pair", a, b),
        Term::Union(a, b) => f2("cup", a, b),
        Term::Diff(a, b) => f2("minus", a, b),
        Term::Append(a, b) => f2("append", a, b),
        Term::Tuple(ts) => format!("tuple({})", join(ts)),
        Term::SetOf(ts) => format!("{{{}}}", join(ts)),
        Term::Proj(a, i, n) => format!("proj({}, {i}, {n})", print_term(a)),
    }
}

fn prec(f: &StateFormula) -> u8 {
    match f {
        StateFormula::Implies(..) => 1,
        StateFormula::Or(..) => 2,
        StateFormula::And(..) => 3,
        StateFormula::Not(g) if !matches!(**g, StateFormula::Eq(..)) => 4,
        _ => 5,
    }
}

fn formula_at(f: &StateFormula, min: u8) -> String {
    let s = formula_raw(f);
    if prec(f) < min {
        format!("({s})")
    } else {
        s
    }
}

fn formula_raw(f: &StateFormula) -> String {
    use StateFormula as F;
    let rel = |a: &Term, op: &str, b: &Term| format!("{} {op} {}", print_term(a), print_term(b));
    match f {
        F::True => "true".into(),
        F::False => "false".into(),
        F::In(a, b) => rel(a, "in", b),
        F::Eq(a, b) => rel(a, "=", b),
        F::Lt(a, b) => rel(a, "<", b),
        F::Le(a, b) => rel(a, "<=", b),
        F::Not(g) => match &**g {
            F::Eq(a, b) => rel(a, "!=", b),
            // `!a != b` parses back but reads badly
            F::Not(h) if matches!(**h, F::Eq(..)) => format!("!({})", formula_raw(g)),
            g => format!("!{}", formula_at(g, 4)),
        },
        F::And(a, b) => format!("{} & {}", formula_at(a, 3), formula_at(b, 4)),
        F::Or(a, b) => format!("{} | {}", formula_at(a, 2), formula_at(b, 3)),
        F::Implies(a, b) => format!("{} -> {}", formula_at(a, 2), formula_at(b, 1)),
        F::Forall(x, d, body) => format!("(forall {x} in {} . {})", print_term(d), formula_raw(body)),
        F::Exists(x, d, body) => format!("(exists {x} in {} . {})", print_term(d), formula_raw(body)),
    }
}

pub fn print_formula(f: &StateFormula) -> String {
    formula_raw(f)
}

/// Operand position: state formulas parse greedily, so they are wrapped when
/// they are not atomic.
fn operand(t: &TemporalFormula) -> String {
    match t {
        TemporalFormula::State(f) => formula_at(f, 5),
        other => print_temporal(other),
    }
}

pub fn print_temporal(t: &TemporalFormula) -> String {
    match t {
        TemporalFormula::State(f) => print_formula(f),
        TemporalFormula::Always(x) => match &**x {
            // `[] <> ...` and `[] (p -> <> ...)` would read back differently
            TemporalFormula::EventuallyAlways(_) => format!("[] ({})", print_temporal(x)),
            _ => format!("[] {}", operand(x)),
        },
        TemporalFormula::AlwaysEventually(x) => format!("[] <> {}", operand(x)),
        TemporalFormula::EventuallyAlways(x) => format!("<> [] {}", operand(x)),
        TemporalFormula::Progress(p, x) => {
            format!("[] ({} -> <> {})", formula_at(p, 2), operand(x))
        }
    }
}

fn print_assignment(a: &Assignment) -> String {
    match &a.kind {
        AssignKind::Becomes(t) => format!("{} := {}", a.var, print_term(t)),
        AssignKind::In(t) => format!("{} :in {}", a.var, print_term(t)),
        AssignKind::Such { pred, domain } => {
            format!("{} :| {} from {}", a.var, print_formula(pred), print_term(domain))
        }
    }
}

pub fn print_machine(m: &Machine) -> String {
    let mut s = format!("machine {}\n", m.name);
    if !m.atoms.is_empty() {
        s += &format!("atoms {}\n", m.atoms.join(", "));
    }
    if !m.constants.is_empty() {
        let cs: Vec<String> = m.constants.iter().map(|(c, t)| format!("{c} = {}", print_term(t))).collect();
        s += &format!("constants {}\n", cs.join(",\n  "));
    }
    if !m.variables.is_empty() {
        s += &format!("variables {}\n", m.variables.join(", "));
    }
    for (p, f) in &m.predicates {
        s += &format!("predicate {p} : {}\n", print_formula(f));
    }
    s += "\ninit\n";
    for a in &m.init {
        s += &format!("  {}\n", print_assignment(a));
    }
    s += "end\n";
    for e in &m.events {
        s += &format!("\nevent {}\n", e.name);
        if !e.params.is_empty() {
            let ps: Vec<String> = e.params.iter().map(|(x, d)| format!("{x} from {}", print_term(d))).collect();
            s += &format!("  any {}\n", ps.join(", "));
        }
        if e.guard != crate::fol::StateFormula::True {
            s += &format!("  where {}\n", print_formula(&e.guard));
        }
        if !e.action.is_empty() {
            s += "  then\n";
            for a in &e.action {
                s += &format!("    {}\n", print_assignment(a));
            }
        }
        s += "end\n";
    }
    s
}
