//! Elaborated machines, their operational semantics, the trivial extension,
//! and breadth-first construction of the reachable state graph.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde_json::json;

use crate::error::{Error, Result};
use crate::fol::{eval_formula, eval_term, primed, Env, Scope, StateFormula, Term};
use crate::hfset::HfSet;

pub const DEFAULT_GRAPH_BUDGET: usize = 100_000;
pub const EXT_EVENT: &str = "ext";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssignKind {
    /// `v := E`
    Becomes(Term),
    /// `v :in E`
    In(Term),
    /// `v :| P from D`
    Such { pred: StateFormula, domain: Term },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub var: String,
    pub kind: AssignKind,
}

impl Assignment {
    pub fn becomes(var: &str, t: Term) -> Assignment {
        Assignment { var: var.to_string(), kind: AssignKind::Becomes(t) }
    }

    /// The before-after predicate over `v'`.
    pub fn before_after(&self) -> StateFormula {
        let after = Term::Var(primed(&self.var));
        match &self.kind {
            AssignKind::Becomes(e) => StateFormula::Eq(after, e.clone()),
            AssignKind::In(e) => StateFormula::In(after, e.clone()),
            AssignKind::Such { pred, .. } => pred.clone(),
        }
    }

    /// Finite term enumerating candidate after-values.
    pub fn candidates(&self) -> Term {
        match &self.kind {
            AssignKind::Becomes(e) => Term::singleton(e.clone()),
            AssignKind::In(e) => e.clone(),
            AssignKind::Such { domain, .. } => domain.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventDef {
    pub name: String,
    pub params: Vec<(String, Term)>,
    pub guard: StateFormula,
    pub action: Vec<Assignment>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub name: String,
    pub atoms: Vec<String>,
    pub constants: Vec<(String, Term)>,
    pub variables: Vec<String>,
    pub init: Vec<Assignment>,
    pub events: Vec<EventDef>,
    /// Named state formulas; references inside the machine are already inlined.
    pub predicates: Vec<(String, StateFormula)>,
}

pub type State = Vec<HfSet>;

/// One enabled event instance: event index and parameter binding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Firing {
    pub event: usize,
    pub binding: Scope,
}

impl Machine {
    pub fn env(&self) -> Result<Env> {
        let mut env = Env::new(self.atoms.clone());
        for (name, t) in &self.constants {
            let v = eval_term(t, &env, &Vec::new())?;
            env.constants.insert(name.clone(), v);
        }
        Ok(env)
    }

    pub fn predicate(&self, name: &str) -> Option<&StateFormula> {
        self.predicates.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    pub fn event(&self, name: &str) -> Option<&EventDef> {
        self.events.iter().find(|e| e.name == name)
    }

    pub fn state_scope(&self, state: &[HfSet]) -> Scope {
        self.variables.iter().cloned().zip(state.iter().cloned()).collect()
    }

    pub fn render_state(&self, state: &[HfSet]) -> String {
        render_assignment(&self.variables, state)
    }

    /// Every parameter binding under which the guard holds, in canonical order.
    fn bindings(&self, env: &Env, ev: &EventDef, scope: &mut Scope, k: usize, out: &mut Vec<Scope>, base: usize) -> Result<()> {
        if k == ev.params.len() {
            if eval_formula(&ev.guard, env, scope)? {
                out.push(scope[base..].to_vec());
            }
            return Ok(());
        }
        let (x, d) = &ev.params[k];
        let dom = eval_term(d, env, scope)?;
        if dom.is_atom() {
            return Err(Error::Domain(format!("parameter domain of `{x}` in `{}` is an atom", ev.name)));
        }
        for v in dom.elements() {
            scope.push((x.clone(), v.clone()));
            let r = self.bindings(env, ev, scope, k + 1, out, base);
            scope.pop();
            r?;
        }
        Ok(())
    }

    pub fn enabled(&self, env: &Env, state: &[HfSet]) -> Result<Vec<Firing>> {
        let mut res = Vec::new();
        for (i, ev) in self.events.iter().enumerate() {
            let mut scope = self.state_scope(state);
            let base = scope.len();
            let mut bs = Vec::new();
            self.bindings(env, ev, &mut scope, 0, &mut bs, base)?;
            res.extend(bs.into_iter().map(|binding| Firing { event: i, binding }));
        }
        Ok(res)
    }

    pub fn deadlocked(&self, env: &Env, state: &[HfSet]) -> Result<bool> {
        Ok(self.enabled(env, state)?.is_empty())
    }

    /// All after-states of an action from a scope (state and parameters bound).
    fn after_states(&self, env: &Env, scope: &Scope, state: Option<&[HfSet]>, action: &[Assignment]) -> Result<Vec<State>> {
        let assigned: BTreeSet<&str> = action.iter().map(|a| a.var.as_str()).collect();
        let mut scope = scope.clone();
        if let Some(st) = state {
            for (v, x) in self.variables.iter().zip(st) {
                if !assigned.contains(v.as_str()) {
                    scope.push((primed(v), x.clone()));
                }
            }
        }
        let mut out = BTreeSet::new();
        self.assign_rec(env, &mut scope, action, 0, &mut out)?;
        Ok(out.into_iter().collect())
    }

    fn assign_rec(&self, env: &Env, scope: &mut Scope, action: &[Assignment], k: usize, out: &mut BTreeSet<State>) -> Result<()> {
        if k == action.len() {
            for a in action {
                if !eval_formula(&a.before_after(), env, scope)? {
                    return Ok(());
                }
            }
            let lookup = |name: &str| {
                scope.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v.clone())
            };
            let st: Option<State> = self.variables.iter().map(|v| lookup(&primed(v))).collect();
            out.insert(st.ok_or_else(|| Error::Invalid("after-state misses a variable".into()))?);
            return Ok(());
        }
        let a = &action[k];
        let dom = eval_term(&a.candidates(), env, scope)?;
        if dom.is_atom() {
            return Err(Error::Domain(format!("candidate domain of `{}` is an atom", a.var)));
        }
        for c in dom.elements() {
            scope.push((primed(&a.var), c.clone()));
            let r = self.assign_rec(env, scope, action, k + 1, out);
            scope.pop();
            r?;
        }
        Ok(())
    }

    pub fn initial_states(&self, env: &Env) -> Result<Vec<State>> {
        let states = self.after_states(env, &Vec::new(), None, &self.init)?;
        if states.is_empty() {
            return Err(Error::NoInitialState);
        }
        Ok(states)
    }

    /// Successors as (firing, after-state), in firing order then state order.
    pub fn successors(&self, env: &Env, state: &[HfSet]) -> Result<Vec<(Firing, State)>> {
        let mut res = Vec::new();
        for f in self.enabled(env, state)? {
            let ev = &self.events[f.event];
            let mut scope = self.state_scope(state);
            scope.extend(f.binding.iter().cloned());
            let afters = self.after_states(env, &scope, Some(state), &ev.action)?;
            if afters.is_empty() {
                return Err(Error::Infeasible {
                    event: ev.name.clone(),
                    state: self.render_state(state),
                });
            }
            res.extend(afters.into_iter().map(|s| (f.clone(), s)));
        }
        Ok(res)
    }

    fn fresh_event_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        let mut i = 1;
        while self.events.iter().any(|e| e.name == name) {
            name = format!("{base}_{i}");
            i += 1;
        }
        name
    }

    /// Adds the stuttering event enabled exactly when every other event is disabled.
    pub fn trivial_extension(&self) -> Machine {
        let guard = StateFormula::and_all(self.events.iter().map(|e| {
            StateFormula::not(StateFormula::exists_all(&e.params, e.guard.clone()))
        }));
        let action = self
            .variables
            .iter()
            .map(|v| Assignment::becomes(v, Term::var(v)))
            .collect();
        let mut m = self.clone();
        m.events.push(EventDef {
            name: self.fresh_event_name(EXT_EVENT),
            params: vec![],
            guard,
            action,
        });
        m
    }

    pub fn build_graph(&self, budget: usize) -> Result<StateGraph> {
        let env = self.env()?;
        let budget = budget.max(1);
        let mut g = StateGraph {
            vars: self.variables.clone(),
            nodes: Vec::new(),
            index: HashMap::new(),
            initial: Vec::new(),
            edges: Vec::new(),
            out: Vec::new(),
            complete: true,
            budget,
            env: env.clone(),
        };
        let mut queue = VecDeque::new();
        for s in self.initial_states(&env)? {
            match g.intern(s) {
                Some((id, true)) => {
                    g.initial.push(id);
                    queue.push_back(id);
                }
                Some((id, false)) => g.initial.push(id),
                None => g.complete = false,
            }
        }
        g.initial.sort_unstable();
        g.initial.dedup();
        'bfs: while let Some(n) = queue.pop_front() {
            let state = g.nodes[n].clone();
            for (f, s) in self.successors(&env, &state)? {
                match g.intern(s) {
                    Some((to, fresh)) => {
                        if fresh {
                            queue.push_back(to);
                        }
                        g.out[n].push(g.edges.len());
                        g.edges.push(Edge {
                            from: n,
                            to,
                            event: self.events[f.event].name.clone(),
                            binding: f.binding,
                        });
                    }
                    None => {
                        g.complete = false;
                        break 'bfs;
                    }
                }
            }
        }
        Ok(g)
    }
}

pub fn render_assignment(vars: &[String], values: &[HfSet]) -> String {
    vars.iter()
        .zip(values)
        .map(|(v, x)| format!("{v} = {}", x.pretty()))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub event: String,
    pub binding: Scope,
}

#[derive(Clone, Debug)]
pub struct StateGraph {
    pub vars: Vec<String>,
    pub nodes: Vec<State>,
    pub index: HashMap<State, usize>,
    pub initial: Vec<usize>,
    pub edges: Vec<Edge>,
    /// Outgoing edge indices per node.
    pub out: Vec<Vec<usize>>,
    pub complete: bool,
    pub budget: usize,
    pub env: Env,
}

impl StateGraph {
    /// Returns `(id, newly_added)`, or `None` when the node budget is exhausted.
    fn intern(&mut self, s: State) -> Option<(usize, bool)> {
        if let Some(&id) = self.index.get(&s) {
            return Some((id, false));
        }
        if self.nodes.len() >= self.budget {
            return None;
        }
        let id = self.nodes.len();
        self.index.insert(s.clone(), id);
        self.nodes.push(s);
        self.out.push(Vec::new());
        Some((id, true))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn scope(&self, n: usize) -> Scope {
        self.vars.iter().cloned().zip(self.nodes[n].iter().cloned()).collect()
    }

    /// Truth value of a state formula at every node.
    pub fn sat(&self, phi: &StateFormula) -> Result<Vec<bool>> {
        (0..self.nodes.len())
            .map(|n| eval_formula(phi, &self.env, &self.scope(n)))
            .collect()
    }

    /// Sorted, deduplicated successor nodes.
    pub fn succ(&self, n: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.out[n].iter().map(|&e| self.edges[e].to).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn successor_lists(&self) -> Vec<Vec<usize>> {
        (0..self.nodes.len()).map(|n| self.succ(n)).collect()
    }

    pub fn deadlocked_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&n| self.out[n].is_empty()).collect()
    }

    pub fn render_state(&self, n: usize) -> String {
        render_assignment(&self.vars, &self.nodes[n])
    }

    pub fn render_binding(&self, b: &Scope) -> String {
        b.iter()
            .map(|(x, v)| format!("{x} = {}", v.pretty()))
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "variables": self.vars,
            "complete": self.complete,
            "budget": self.budget,
            "initial": self.initial,
            "nodes": (0..self.nodes.len()).map(|n| json!({
                "id": n,
                "state": self.vars.iter().zip(&self.nodes[n])
                    .map(|(v, x)| (v.clone(), serde_json::Value::String(x.pretty())))
                    .collect::<serde_json::Map<_, _>>(),
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| json!({
                "from": e.from,
                "to": e.to,
                "event": e.event,
                "binding": self.render_binding(&e.binding),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph states {\n");
        for n in 0..self.nodes.len() {
            let shape = if self.initial.contains(&n) { "doublecircle" } else { "circle" };
            s.push_str(&format!(
                "  s{n} [shape={shape}, label=\"{}\"];\n",
                self.render_state(n).replace('"', "\\\"")
            ));
        }
        for e in &self.edges {
            let mut label = e.event.clone();
            if !e.binding.is_empty() {
                label = format!("{label}({})", self.render_binding(&e.binding));
            }
            s.push_str(&format!("  s{} -> s{} [label=\"{}\"];\n", e.from, e.to, label.replace('"', "\\\"")));
        }
        if !self.complete {
            s.push_str("  // truncated\n");
        }
        s.push_str("}\n");
        s
    }
}
