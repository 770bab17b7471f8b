//! Terms and bounded state formulas over HF(A), their evaluation, the
//! next-state formula, and the first-order side conditions checked over a
//! complete reachable state graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hfset::HfSet;
use crate::machine::{Machine, StateGraph};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// State variable, parameter, bound variable or primed after-value (`v'`).
    Var(String),
    Const(String),
    Atom(String),
    /// Literal set; never empty, an atom or a natural (see [`Term::lit`]).
    Lit(HfSet),
    Empty,
    Nat(usize),
    Atoms,
    BigUnion(Box<Term>),
    TheUnique(Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Tuple(Vec<Term>),
    /// Set display `{t1, ..., tn}` with at least one non-literal element.
    SetOf(Vec<Term>),
    Union(Box<Term>, Box<Term>),
    Diff(Box<Term>, Box<Term>),
    Nil,
    Len(Box<Term>),
    Head(Box<Term>),
    Tail(Box<Term>),
    Append(Box<Term>, Box<Term>),
    /// Component `index` of a tuple of the given arity.
    Proj(Box<Term>, usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateFormula {
    True,
    False,
    In(Term, Term),
    Eq(Term, Term),
    Lt(Term, Term),
    Le(Term, Term),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Or(Box<StateFormula>, Box<StateFormula>),
    Implies(Box<StateFormula>, Box<StateFormula>),
    Forall(String, Term, Box<StateFormula>),
    Exists(String, Term, Box<StateFormula>),
}

pub fn primed(v: &str) -> String {
    format!("{v}'")
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    /// Literal term in normal form: ∅ becomes `Empty`, atoms become `Atom`,
    /// nonzero naturals become `Nat`.
    pub fn lit(x: HfSet) -> Term {
        if let Some(a) = x.atom_name() {
            Term::Atom(a.to_string())
        } else if x.is_empty_set() {
            Term::Empty
        } else if let Some(n) = x.as_natural() {
            Term::Nat(n)
        } else {
            Term::Lit(x)
        }
    }

    /// Closed literal value, if this term is one.
    pub fn literal_value(&self) -> Option<HfSet> {
        match self {
            Term::Atom(a) => Some(HfSet::atom(a)),
            Term::Lit(x) => Some(x.clone()),
            Term::Empty => Some(HfSet::empty()),
            Term::Nat(n) => Some(HfSet::von_neumann(*n)),
            _ => None,
        }
    }

    pub fn singleton(t: Term) -> Term {
        Term::SetOf(vec![t])
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Term {
        let r = |t: &Term| Box::new(t.rename(map));
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::Const(_) | Term::Atom(_) | Term::Lit(_) | Term::Empty | Term::Nat(_) | Term::Atoms | Term::Nil => {
                self.clone()
            }
            Term::BigUnion(t) => Term::BigUnion(r(t)),
            Term::TheUnique(t) => Term::TheUnique(r(t)),
            Term::Pair(a, b) => Term::Pair(r(a), r(b)),
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|t| t.rename(map)).collect()),
            Term::SetOf(ts) => Term::SetOf(ts.iter().map(|t| t.rename(map)).collect()),
            Term::Union(a, b) => Term::Union(r(a), r(b)),
            Term::Diff(a, b) => Term::Diff(r(a), r(b)),
            Term::Len(t) => Term::Len(r(t)),
            Term::Head(t) => Term::Head(r(t)),
            Term::Tail(t) => Term::Tail(r(t)),
            Term::Append(a, b) => Term::Append(r(a), r(b)),
            Term::Proj(t, i, n) => Term::Proj(r(t), *i, *n),
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) | Term::Atom(_) | Term::Lit(_) | Term::Empty | Term::Nat(_) | Term::Atoms | Term::Nil => {}
            Term::BigUnion(t) | Term::TheUnique(t) | Term::Len(t) | Term::Head(t) | Term::Tail(t) | Term::Proj(t, _, _) => {
                t.free_vars(out)
            }
            Term::Pair(a, b) | Term::Union(a, b) | Term::Diff(a, b) | Term::Append(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Term::Tuple(ts) | Term::SetOf(ts) => ts.iter().for_each(|t| t.free_vars(out)),
        }
    }
}

impl StateFormula {
    pub fn not(f: StateFormula) -> StateFormula {
        StateFormula::Not(Box::new(f))
    }

    pub fn and(a: StateFormula, b: StateFormula) -> StateFormula {
        StateFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: StateFormula, b: StateFormula) -> StateFormula {
        StateFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: StateFormula, b: StateFormula) -> StateFormula {
        StateFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn eq(a: Term, b: Term) -> StateFormula {
        StateFormula::Eq(a, b)
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn and_all<I: IntoIterator<Item = StateFormula>>(fs: I) -> StateFormula {
        fs.into_iter()
            .reduce(StateFormula::and)
            .unwrap_or(StateFormula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn or_all<I: IntoIterator<Item = StateFormula>>(fs: I) -> StateFormula {
        fs.into_iter()
            .reduce(StateFormula::or)
            .unwrap_or(StateFormula::False)
    }

    /// `∃ x1 ∈ D1 ... ∃ xk ∈ Dk . body`.
    pub fn exists_all(params: &[(String, Term)], body: StateFormula) -> StateFormula {
        params.iter().rev().fold(body, |acc, (x, d)| {
            StateFormula::Exists(x.clone(), d.clone(), Box::new(acc))
        })
    }

    pub fn forall_all(params: &[(String, Term)], body: StateFormula) -> StateFormula {
        params.iter().rev().fold(body, |acc, (x, d)| {
            StateFormula::Forall(x.clone(), d.clone(), Box::new(acc))
        })
    }

    /// Renames free variables, leaving bound occurrences alone.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> StateFormula {
        use StateFormula as F;
        let r = |f: &F| Box::new(f.rename(map));
        match self {
            F::True | F::False => self.clone(),
            F::In(a, b) => F::In(a.rename(map), b.rename(map)),
            F::Eq(a, b) => F::Eq(a.rename(map), b.rename(map)),
            F::Lt(a, b) => F::Lt(a.rename(map), b.rename(map)),
            F::Le(a, b) => F::Le(a.rename(map), b.rename(map)),
            F::Not(f) => F::Not(r(f)),
            F::And(a, b) => F::And(r(a), r(b)),
            F::Or(a, b) => F::Or(r(a), r(b)),
            F::Implies(a, b) => F::Implies(r(a), r(b)),
            F::Forall(x, d, body) | F::Exists(x, d, body) => {
                let mut inner = map.clone();
                inner.remove(x);
                let body = Box::new(body.rename(&inner));
                if matches!(self, F::Forall(..)) {
                    F::Forall(x.clone(), d.rename(map), body)
                } else {
                    F::Exists(x.clone(), d.rename(map), body)
                }
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        use StateFormula as F;
        match self {
            F::True | F::False => {}
            F::In(a, b) | F::Eq(a, b) | F::Lt(a, b) | F::Le(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            F::Not(f) => f.collect_free(out),
            F::And(a, b) | F::Or(a, b) | F::Implies(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            F::Forall(x, d, body) | F::Exists(x, d, body) => {
                d.free_vars(out);
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                inner.remove(x);
                out.extend(inner);
            }
        }
    }
}

/// Evaluation context shared by every state of a machine.
#[derive(Clone, Debug, PartialEq)]
pub struct Env {
    pub atoms: Vec<String>,
    pub constants: BTreeMap<String, HfSet>,
    pub budget: usize,
}

impl Env {
    pub fn new(atoms: Vec<String>) -> Env {
        Env {
            atoms,
            constants: BTreeMap::new(),
            budget: crate::hfset::DEFAULT_NODE_BUDGET,
        }
    }
}

/// Variable binding; later entries shadow earlier ones.
pub type Scope = Vec<(String, HfSet)>;

fn lookup<'a>(scope: &'a Scope, name: &str) -> Option<&'a HfSet> {
    scope.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
}

fn domain_err(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub fn list_nil() -> HfSet {
    HfSet::kpair(&HfSet::empty(), &HfSet::empty())
}

fn list_parts(l: &HfSet) -> Result<(usize, HfSet)> {
    let (n, body) = HfSet::decode_kpair(l).ok_or_else(|| domain_err(format!("{} is not a list", l.pretty())))?;
    let n = n
        .as_natural()
        .ok_or_else(|| domain_err(format!("{} is not a list", l.pretty())))?;
    Ok((n, body))
}

/// Encodes a list as ⟨length, x1 :: x2 :: ... :: ∅⟩ with Kuratowski cons cells.
pub fn list_encode(xs: &[HfSet]) -> HfSet {
    let body = xs
        .iter()
        .rev()
        .fold(HfSet::empty(), |acc, x| HfSet::kpair(x, &acc));
    HfSet::kpair(&HfSet::von_neumann(xs.len()), &body)
}

pub fn list_decode(l: &HfSet) -> Result<Vec<HfSet>> {
    let (n, mut body) = list_parts(l)?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, rest) = HfSet::decode_kpair(&body).ok_or_else(|| domain_err("malformed list cell"))?;
        out.push(x);
        body = rest;
    }
    Ok(out)
}

pub fn eval_term(t: &Term, env: &Env, scope: &Scope) -> Result<HfSet> {
    let v = eval_term_inner(t, env, scope)?;
    v.check_budget(env.budget)?;
    Ok(v)
}

fn eval_term_inner(t: &Term, env: &Env, scope: &Scope) -> Result<HfSet> {
    let ev = |t: &Term| eval_term_inner(t, env, scope);
    Ok(match t {
        Term::Var(v) => lookup(scope, v)
            .cloned()
            .ok_or_else(|| Error::Unbound(v.clone()))?,
        Term::Const(c) => env
            .constants
            .get(c)
            .cloned()
            .ok_or_else(|| Error::Unbound(c.clone()))?,
        Term::Atom(a) => HfSet::atom(a),
        Term::Lit(x) => x.clone(),
        Term::Empty => HfSet::empty(),
        Term::Nat(n) => HfSet::von_neumann(*n),
        Term::Atoms => HfSet::atoms(&env.atoms),
        Term::BigUnion(t) => ev(t)?.big_union()?,
        Term::TheUnique(t) => ev(t)?.the_unique()?,
        Term::Pair(a, b) => HfSet::pair(&ev(a)?, &ev(b)?),
        Term::Tuple(ts) => HfSet::encode_tuple(&ts.iter().map(ev).collect::<Result<Vec<_>>>()?),
        Term::SetOf(ts) => HfSet::set(ts.iter().map(ev).collect::<Result<Vec<_>>>()?),
        Term::Union(a, b) => ev(a)?.union(&ev(b)?)?,
        Term::Diff(a, b) => ev(a)?.difference(&ev(b)?)?,
        Term::Nil => list_nil(),
        Term::Len(l) => HfSet::von_neumann(list_parts(&ev(l)?)?.0),
        Term::Head(l) => {
            let xs = list_decode(&ev(l)?)?;
            xs.first().cloned().ok_or_else(|| domain_err("head of empty list"))?
        }
        Term::Tail(l) => {
            let xs = list_decode(&ev(l)?)?;
            if xs.is_empty() {
                return Err(domain_err("tail of empty list"));
            }
            list_encode(&xs[1..])
        }
        Term::Append(l, x) => {
            let mut xs = list_decode(&ev(l)?)?;
            xs.push(ev(x)?);
            list_encode(&xs)
        }
        Term::Proj(t, i, n) => {
            let v = ev(t)?;
            let parts = HfSet::decode_tuple(&v, *n)
                .ok_or_else(|| domain_err(format!("{} is not a {n}-tuple", v.pretty())))?;
            parts
                .get(*i)
                .cloned()
                .ok_or_else(|| domain_err(format!("projection {i} out of range for arity {n}")))?
        }
    })
}

fn bound_elements(d: &Term, env: &Env, scope: &Scope) -> Result<HfSet> {
    let dom = eval_term(d, env, scope)?;
    if dom.is_atom() {
        return Err(domain_err(format!("quantifier bound {} is an atom", dom.pretty())));
    }
    Ok(dom)
}

pub fn eval_formula(f: &StateFormula, env: &Env, scope: &Scope) -> Result<bool> {
    let mut scope = scope.clone();
    eval_in(f, env, &mut scope)
}

fn eval_in(f: &StateFormula, env: &Env, scope: &mut Scope) -> Result<bool> {
    use StateFormula as F;
    Ok(match f {
        F::True => true,
        F::False => false,
        F::In(a, b) => {
            let y = eval_term(b, env, scope)?;
            if y.is_atom() {
                return Err(domain_err(format!("membership in atom {}", y.pretty())));
            }
            y.contains(&eval_term(a, env, scope)?)
        }
        F::Eq(a, b) => eval_term(a, env, scope)? == eval_term(b, env, scope)?,
        F::Lt(a, b) => eval_term(a, env, scope)?.lt(&eval_term(b, env, scope)?),
        F::Le(a, b) => eval_term(a, env, scope)?.leq(&eval_term(b, env, scope)?),
        F::Not(g) => !eval_in(g, env, scope)?,
        F::And(a, b) => eval_in(a, env, scope)? && eval_in(b, env, scope)?,
        F::Or(a, b) => eval_in(a, env, scope)? || eval_in(b, env, scope)?,
        F::Implies(a, b) => !eval_in(a, env, scope)? || eval_in(b, env, scope)?,
        F::Forall(x, d, body) | F::Exists(x, d, body) => {
            let universal = matches!(f, F::Forall(..));
            let dom = bound_elements(d, env, scope)?;
            for e in dom.elements() {
                scope.push((x.clone(), e.clone()));
                let r = eval_in(body, env, scope);
                scope.pop();
                if r? != universal {
                    return Ok(!universal);
                }
            }
            universal
        }
    })
}

/// The next-state formula: `φ` holds in every successor.
pub fn next_formula(machine: &Machine, phi: &StateFormula) -> StateFormula {
    StateFormula::and_all(machine.events.iter().map(|e| {
        let assigned: Vec<&str> = e.action.iter().map(|a| a.var.as_str()).collect();
        let map: BTreeMap<String, String> = assigned.iter().map(|v| (v.to_string(), primed(v))).collect();
        let after: Vec<(String, Term)> = e
            .action
            .iter()
            .map(|a| (primed(&a.var), a.candidates()))
            .collect();
        let ba = StateFormula::and_all(e.action.iter().map(|a| a.before_after()));
        let inner = StateFormula::forall_all(&after, StateFormula::implies(ba, phi.rename(&map)));
        StateFormula::forall_all(&e.params, StateFormula::implies(e.guard.clone(), inner))
    }))
}

/// A refuting (state, event, binding, successor) tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub node: usize,
    pub state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binding: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub successor: Option<String>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideConditionReport {
    pub condition: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl SideConditionReport {
    fn ok(condition: String) -> Self {
        SideConditionReport { condition, holds: true, witness: None }
    }
}

fn require_complete(g: &StateGraph, what: &str) -> Result<()> {
    if g.complete {
        Ok(())
    } else {
        Err(Error::Indeterminate(format!(
            "{what} cannot be decided on a graph truncated at {} nodes",
            g.budget
        )))
    }
}

fn node_witness(g: &StateGraph, node: usize, reason: &str) -> Witness {
    Witness {
        node,
        state: g.render_state(node),
        event: None,
        binding: None,
        successor: None,
        reason: reason.to_string(),
    }
}

fn edge_witness(g: &StateGraph, edge: usize, reason: &str) -> Witness {
    let e = &g.edges[edge];
    Witness {
        node: e.from,
        state: g.render_state(e.from),
        event: Some(e.event.clone()),
        binding: Some(g.render_binding(&e.binding)),
        successor: Some(g.render_state(e.to)),
        reason: reason.to_string(),
    }
}

fn fail(condition: String, w: Witness) -> SideConditionReport {
    SideConditionReport { condition, holds: false, witness: Some(w) }
}

pub fn check_leadsto(g: &StateGraph, p1: &StateFormula, p2: &StateFormula) -> Result<SideConditionReport> {
    require_complete(g, "leadsto")?;
    let name = format!("leadsto({}, {})", crate::speclang::print_formula(p1), crate::speclang::print_formula(p2));
    let s1 = g.sat(p1)?;
    let s2 = g.sat(p2)?;
    for (i, e) in g.edges.iter().enumerate() {
        if s1[e.from] && !s2[e.to] {
            return Ok(fail(name, edge_witness(g, i, "successor violates the target formula")));
        }
    }
    Ok(SideConditionReport::ok(name))
}

pub fn check_dlf(g: &StateGraph, phi: &StateFormula) -> Result<SideConditionReport> {
    require_complete(g, "dlf")?;
    let name = format!("dlf({})", crate::speclang::print_formula(phi));
    let s = g.sat(phi)?;
    for n in 0..g.nodes.len() {
        if s[n] && g.out[n].is_empty() {
            return Ok(fail(name, node_witness(g, n, "deadlocked state satisfies the formula")));
        }
    }
    Ok(SideConditionReport::ok(name))
}

fn variant_values(g: &StateGraph, t: &Term) -> Result<Vec<HfSet>> {
    (0..g.nodes.len())
        .map(|n| eval_term(t, &g.env, &g.scope(n)))
        .collect()
}

pub fn check_var_c(g: &StateGraph, t: &Term, phi: &StateFormula) -> Result<SideConditionReport> {
    require_complete(g, "var_c")?;
    let name = format!("var_c({}, {})", crate::speclang::print_term(t), crate::speclang::print_formula(phi));
    let s = g.sat(phi)?;
    let tv = variant_values(g, t)?;
    for n in 0..g.nodes.len() {
        if !s[n] || g.out[n].is_empty() {
            continue;
        }
        if tv[n].is_empty_set() {
            return Ok(fail(name, node_witness(g, n, "variant is empty in an enabled state")));
        }
        for &ei in &g.out[n] {
            if !tv[g.edges[ei].to].lt(&tv[n]) {
                return Ok(fail(name, edge_witness(g, ei, "variant does not strictly decrease")));
            }
        }
    }
    Ok(SideConditionReport::ok(name))
}

pub fn check_var_d(g: &StateGraph, t: &Term, phi: &StateFormula) -> Result<SideConditionReport> {
    require_complete(g, "var_d")?;
    let name = format!("var_d({}, {})", crate::speclang::print_term(t), crate::speclang::print_formula(phi));
    let s = g.sat(phi)?;
    let tv = variant_values(g, t)?;
    for n in 0..g.nodes.len() {
        if g.out[n].is_empty() {
            continue;
        }
        if s[n] {
            for &ei in &g.out[n] {
                if !tv[g.edges[ei].to].leq(&tv[n]) {
                    return Ok(fail(name, edge_witness(g, ei, "variant increases")));
                }
            }
        } else {
            if tv[n].is_empty_set() {
                return Ok(fail(name, node_witness(g, n, "variant is empty in an enabled state")));
            }
            for &ei in &g.out[n] {
                if !tv[g.edges[ei].to].lt(&tv[n]) {
                    return Ok(fail(name, edge_witness(g, ei, "variant does not strictly decrease")));
                }
            }
        }
    }
    Ok(SideConditionReport::ok(name))
}

/// `φ` holds in every reachable state.
pub fn check_valid(g: &StateGraph, phi: &StateFormula) -> Result<SideConditionReport> {
    require_complete(g, "validity")?;
    let name = format!("valid({})", crate::speclang::print_formula(phi));
    let s = g.sat(phi)?;
    match s.iter().position(|b| !b) {
        Some(n) => Ok(fail(name, node_witness(g, n, "reachable state violates the formula"))),
        None => Ok(SideConditionReport::ok(name)),
    }
}

/// `φ` holds in every initial state.
pub fn check_init(g: &StateGraph, phi: &StateFormula) -> Result<SideConditionReport> {
    let name = format!("init -> {}", crate::speclang::print_formula(phi));
    let s = g.sat(phi)?;
    match g.initial.iter().find(|&&n| !s[n]) {
        Some(&n) => Ok(fail(name, node_witness(g, n, "initial state violates the formula"))),
        None => Ok(SideConditionReport::ok(name)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use StateFormula as F;

    fn env() -> Env {
        Env::new(vec!["a".into(), "b".into()])
    }

    #[test]
    fn term_examples() {
        let e = env();
        let s: Scope = vec![];
        let pair = Term::Pair(Box::new(Term::Empty), Box::new(Term::Empty));
        assert_eq!(eval_term(&pair, &e, &s).unwrap(), HfSet::set([HfSet::empty()]));
        let bound: Scope = vec![("v".into(), HfSet::set([HfSet::atom("a")]))];
        assert_eq!(eval_term(&Term::var("v"), &e, &bound).unwrap(), HfSet::set([HfSet::atom("a")]));
        let one = HfSet::von_neumann(1);
        let t = Term::BigUnion(Box::new(Term::Pair(
            Box::new(Term::lit(one.clone())),
            Box::new(Term::lit(HfSet::set([one.clone()]))),
        )));
        // {∅} ∪ {{∅}} computed from the hfset operators directly
        let expected = one.union(&HfSet::set([one.clone()])).unwrap();
        assert_eq!(eval_term(&t, &e, &s).unwrap(), expected);
        assert!(matches!(eval_term(&Term::var("zz"), &e, &s), Err(Error::Unbound(_))));
        assert!(eval_term(&Term::BigUnion(Box::new(Term::Atom("a".into()))), &e, &s).is_err());
    }

    #[test]
    fn formula_examples() {
        let e = env();
        let s: Scope = vec![];
        let f = F::Forall("x".into(), Term::Empty, Box::new(F::False));
        assert!(eval_formula(&f, &e, &s).unwrap());
        let f = F::Exists(
            "x".into(),
            Term::SetOf(vec![Term::Empty]),
            Box::new(F::Eq(Term::var("x"), Term::Empty)),
        );
        assert!(eval_formula(&f, &e, &s).unwrap());
        let n2: Scope = vec![("n".into(), HfSet::von_neumann(2))];
        assert!(eval_formula(&F::Lt(Term::var("n"), Term::Nat(3)), &e, &n2).unwrap());
        let bad = F::Forall("x".into(), Term::Atom("a".into()), Box::new(F::True));
        assert!(eval_formula(&bad, &e, &s).is_err());
    }

    #[test]
    fn lists() {
        let xs = vec![HfSet::atom("a"), HfSet::empty(), HfSet::atom("a")];
        let l = list_encode(&xs);
        assert_eq!(list_decode(&l).unwrap(), xs);
        assert_eq!(list_encode(&[]), list_nil());
        let e = env();
        let s: Scope = vec![("l".into(), l)];
        let len = eval_term(&Term::Len(Box::new(Term::var("l"))), &e, &s).unwrap();
        assert_eq!(len.as_natural(), Some(3));
        let head = eval_term(&Term::Head(Box::new(Term::var("l"))), &e, &s).unwrap();
        assert_eq!(head, HfSet::atom("a"));
        let tail = eval_term(&Term::Tail(Box::new(Term::var("l"))), &e, &s).unwrap();
        assert_eq!(list_decode(&tail).unwrap(), xs[1..].to_vec());
        assert!(eval_term(&Term::Head(Box::new(Term::Nil)), &e, &s).is_err());
    }

    #[test]
    fn rename_respects_binders() {
        let f = F::and(
            F::Eq(Term::var("n"), Term::Empty),
            F::Exists("n".into(), Term::var("n"), Box::new(F::Eq(Term::var("n"), Term::Empty))),
        );
        let map: BTreeMap<String, String> = [("n".to_string(), "n'".to_string())].into();
        let g = f.rename(&map);
        let expected = F::and(
            F::Eq(Term::var("n'"), Term::Empty),
            F::Exists("n".into(), Term::var("n'"), Box::new(F::Eq(Term::var("n"), Term::Empty))),
        );
        assert_eq!(g, expected);
        assert_eq!(f.free_vars(), ["n".to_string()].into());
    }
}
