//! Refinements that introduce explicit variant terms.
//!
//! `refine_for_conv` buffers runs of `φ`-states in a list and replays them
//! once a `¬φ`-state is reached, so `len(l)` bounds every `φ`-stretch of the
//! visible copy `v̄`. `refine_for_div` records every value seen in a `¬φ`-step
//! and measures the distance to the precomputed set of all such values.
//! Both results are checked on the refined machine's state graph, together
//! with a bounded comparison of projected traces.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fol::{
    check_var_c, check_var_d, eval_term, primed, SideConditionReport, StateFormula as F, Term, Witness,
};
use crate::hfset::HfSet;
use crate::machine::{AssignKind, Assignment, EventDef, Machine, StateGraph};
use crate::oracle::{check_conv, check_div, verdict_text, Verdict};
use crate::speclang::{print_formula, print_term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineMode {
    Conv,
    Div,
}

impl RefineMode {
    pub fn name(self) -> &'static str {
        match self {
            RefineMode::Conv => "conv",
            RefineMode::Div => "div",
        }
    }
}

/// Names of the three events built from one source event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvEventCopies {
    pub source: String,
    /// Steps in a `φ`-state: buffer the state.
    pub a: String,
    /// Steps in a `¬φ`-state with a non-empty buffer: start replaying.
    pub b: String,
    /// Steps in a `¬φ`-state with an empty buffer: show the state at once.
    pub c: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvRefinement {
    pub machine: Machine,
    pub phi: F,
    pub variant: Term,
    /// Source variable and its hidden copy.
    pub copies: Vec<(String, String)>,
    pub list_var: String,
    pub shown_var: String,
    pub phase_var: String,
    pub first_a: String,
    pub first_b: String,
    pub replay: String,
    pub resume: String,
    pub event_map: Vec<ConvEventCopies>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivEventCopies {
    pub source: String,
    pub plus: String,
    pub minus: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivRefinement {
    pub machine: Machine,
    pub phi: F,
    pub variant: Term,
    /// Source variable, its collector `c_i`, its bound `b_i` and the bound's value.
    pub bounds: Vec<DivBound>,
    pub event_map: Vec<DivEventCopies>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivBound {
    pub var: String,
    pub collected: String,
    pub bound: String,
    pub values: HfSet,
}

fn nat(k: usize) -> Term {
    Term::lit(HfSet::von_neumann(k))
}

fn eq_var(v: &str, t: Term) -> F {
    F::eq(Term::var(v), t)
}

fn identifiers(m: &Machine) -> BTreeSet<String> {
    let mut used: BTreeSet<String> = m.variables.iter().cloned().collect();
    used.extend(m.atoms.iter().cloned());
    used.extend(m.constants.iter().map(|(c, _)| c.clone()));
    used.extend(m.predicates.iter().map(|(p, _)| p.clone()));
    for e in &m.events {
        used.extend(e.params.iter().map(|(x, _)| x.clone()));
        used.extend(e.guard.free_vars());
    }
    used
}

fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut name = base.to_string();
    let mut i = 1;
    while used.contains(&name) {
        name = format!("{base}_{i}");
        i += 1;
    }
    used.insert(name.clone());
    name
}

fn rename_assignment(a: &Assignment, map: &BTreeMap<String, String>) -> Assignment {
    let kind = match &a.kind {
        AssignKind::Becomes(t) => AssignKind::Becomes(t.rename(map)),
        AssignKind::In(t) => AssignKind::In(t.rename(map)),
        AssignKind::Such { pred, domain } => AssignKind::Such { pred: pred.rename(map), domain: domain.rename(map) },
    };
    Assignment { var: map.get(&a.var).cloned().unwrap_or_else(|| a.var.clone()), kind }
}

fn rename_params(ps: &[(String, Term)], map: &BTreeMap<String, String>) -> Vec<(String, Term)> {
    ps.iter().map(|(x, d)| (x.clone(), d.rename(map))).collect()
}

/// Graph of the trivial extension, required complete, on which `mode(φ)` holds.
fn require_precondition(m: &Machine, phi: &F, mode: RefineMode, budget: usize) -> Result<StateGraph> {
    let g = m.trivial_extension().build_graph(budget)?;
    if !g.complete {
        return Err(Error::Indeterminate(format!(
            "{}({}) cannot be established on a graph truncated at {} nodes",
            mode.name(),
            print_formula(phi),
            g.budget
        )));
    }
    let v = match mode {
        RefineMode::Conv => check_conv(&g, phi)?,
        RefineMode::Div => check_div(&g, phi)?,
    };
    match v {
        Verdict::Holds => Ok(g),
        Verdict::Indeterminate(r) => Err(Error::Indeterminate(r)),
        v @ Verdict::Fails(_) => {
            let label = format!("{}({})", mode.name(), print_formula(phi));
            Err(Error::Refused(format!(
                "the trivial extension of `{}` violates the precondition\n{}",
                m.name,
                verdict_text(&g, &label, &v)
            )))
        }
    }
}

/// Builds the buffering refinement of `m` for a formula `φ` in which `m`'s
/// trivial extension is convergent.
pub fn refine_for_conv(m: &Machine, phi: &F, budget: usize) -> Result<ConvRefinement> {
    let g = require_precondition(m, phi, RefineMode::Conv, budget)?;
    // The visible copy starts in a ¬φ-state so that var_c holds initially.
    let sat = g.sat(phi)?;
    let start = (0..g.len()).find(|&n| !sat[n]).or(g.initial.first().copied()).expect("graph has an initial node");
    let start_values = g.nodes[start].clone();

    let mut used = identifiers(m);
    let copies: Vec<(String, String)> =
        m.variables.iter().map(|v| (v.clone(), fresh(&format!("w_{v}"), &mut used))).collect();
    let l = fresh("l", &mut used);
    let s = fresh("s", &mut used);
    let u = fresh("u", &mut used);
    let mut ren = BTreeMap::new();
    for (v, w) in &copies {
        ren.insert(v.clone(), w.clone());
        ren.insert(primed(v), primed(w));
    }
    let k = copies.len();
    let hidden = Term::Tuple(copies.iter().map(|(_, w)| Term::var(w)).collect());
    let show_hidden = || copies.iter().map(|(v, w)| Assignment::becomes(v, Term::var(w)));
    let show_head = || {
        let head = Term::Head(Box::new(Term::var(&l)));
        copies
            .iter()
            .enumerate()
            .map(move |(j, (v, _))| Assignment::becomes(v, Term::Proj(Box::new(head.clone()), j, k)))
    };
    let lv = || Term::var(&l);

    let mut init: Vec<Assignment> = m.init.iter().map(|a| rename_assignment(a, &ren)).collect();
    init.push(Assignment::becomes(&s, nat(0)));
    init.push(Assignment::becomes(&u, nat(0)));
    init.push(Assignment::becomes(&l, Term::Nil));
    init.extend(m.variables.iter().zip(&start_values).map(|(v, x)| Assignment::becomes(v, Term::lit(x.clone()))));

    let some_guard = |e: &EventDef| F::exists_all(&rename_params(&e.params, &ren), e.guard.rename(&ren));
    let mut taken: BTreeSet<String> = BTreeSet::new();
    let first_a = fresh("e_firstA", &mut taken);
    let first_b = fresh("e_firstB", &mut taken);
    let mut events = vec![
        EventDef {
            name: first_a.clone(),
            params: vec![],
            guard: F::and(eq_var(&u, nat(0)), F::and_all(m.events.iter().map(|e| F::not(some_guard(e))))),
            action: [Assignment::becomes(&s, nat(1)), Assignment::becomes(&u, nat(2))]
                .into_iter()
                .chain(show_hidden())
                .collect(),
        },
        EventDef {
            name: first_b.clone(),
            params: vec![],
            guard: F::and(eq_var(&u, nat(0)), F::or_all(m.events.iter().map(some_guard))),
            action: vec![Assignment::becomes(&u, nat(1))],
        },
    ];

    let phi_w = phi.rename(&ren);
    let running = || F::and(eq_var(&s, nat(0)), eq_var(&u, nat(1)));
    let push_hidden = |list: Term| Term::Append(Box::new(list), Box::new(hidden.clone()));
    let mut event_map = Vec::new();
    for e in &m.events {
        let params = rename_params(&e.params, &ren);
        let guard = e.guard.rename(&ren);
        let action: Vec<Assignment> = e.action.iter().map(|a| rename_assignment(a, &ren)).collect();
        let names = ConvEventCopies {
            source: e.name.clone(),
            a: fresh(&format!("{}_a", e.name), &mut taken),
            b: fresh(&format!("{}_b", e.name), &mut taken),
            c: fresh(&format!("{}_c", e.name), &mut taken),
        };
        events.push(EventDef {
            name: names.a.clone(),
            params: params.clone(),
            guard: F::and_all([guard.clone(), phi_w.clone(), running()]),
            action: action.iter().cloned().chain([Assignment::becomes(&l, push_hidden(lv()))]).collect(),
        });
        events.push(EventDef {
            name: names.b.clone(),
            params: params.clone(),
            guard: F::and_all([guard.clone(), F::not(phi_w.clone()), running(), F::not(eq_var(&l, Term::Nil))]),
            action: action
                .iter()
                .cloned()
                .chain([Assignment::becomes(&s, nat(1))])
                .chain(show_head())
                .chain([Assignment::becomes(&l, push_hidden(Term::Tail(Box::new(lv()))))])
                .collect(),
        });
        events.push(EventDef {
            name: names.c.clone(),
            params,
            guard: F::and_all([guard, F::not(phi_w.clone()), running(), eq_var(&l, Term::Nil)]),
            action: action.into_iter().chain([Assignment::becomes(&s, nat(1))]).chain(show_hidden()).collect(),
        });
        event_map.push(names);
    }
    let replaying = |nonempty: bool| {
        let l_test = if nonempty { F::not(eq_var(&l, Term::Nil)) } else { eq_var(&l, Term::Nil) };
        F::and_all([l_test, eq_var(&s, nat(1)), eq_var(&u, nat(1))])
    };
    let replay = fresh("e_r", &mut taken);
    let resume = fresh("e_s", &mut taken);
    events.push(EventDef {
        name: replay.clone(),
        params: vec![],
        guard: replaying(true),
        action: show_head().chain([Assignment::becomes(&l, Term::Tail(Box::new(lv())))]).collect(),
    });
    events.push(EventDef {
        name: resume.clone(),
        params: vec![],
        guard: replaying(false),
        action: vec![Assignment::becomes(&s, nat(0))],
    });

    let mut variables = m.variables.clone();
    variables.extend(copies.iter().map(|(_, w)| w.clone()));
    variables.extend([l.clone(), s.clone(), u.clone()]);
    let machine = Machine {
        name: format!("{}_conv", m.name),
        atoms: m.atoms.clone(),
        constants: m.constants.clone(),
        variables,
        init,
        events,
        predicates: m.predicates.clone(),
    };
    Ok(ConvRefinement {
        machine,
        phi: phi.clone(),
        variant: Term::Len(Box::new(Term::var(&l))),
        copies,
        list_var: l,
        shown_var: s,
        phase_var: u,
        first_a,
        first_b,
        replay,
        resume,
        event_map,
    })
}

impl ConvRefinement {
    /// Number of constructed events: three per source event plus four.
    pub fn event_count(&self) -> usize {
        self.machine.events.len()
    }

    pub fn sidecar(&self) -> Value {
        json!({
            "mode": "conv",
            "source": self.machine.name.trim_end_matches("_conv"),
            "phi": print_formula(&self.phi),
            "variant": print_term(&self.variant),
            "copies": self.copies.iter().map(|(v, w)| json!({ "var": v, "copy": w })).collect::<Vec<_>>(),
            "list": self.list_var,
            "shown": self.shown_var,
            "phase": self.phase_var,
            "events": {
                "e_firstA": self.first_a,
                "e_firstB": self.first_b,
                "e_r": self.replay,
                "e_s": self.resume,
                "per_source": self.event_map,
            },
        })
    }
}

/// Builds the collecting refinement of `m` for a formula `φ` in which `m`'s
/// trivial extension is divergent.
pub fn refine_for_div(m: &Machine, phi: &F, budget: usize) -> Result<DivRefinement> {
    let g = require_precondition(m, phi, RefineMode::Div, budget)?;
    let sat = g.sat(phi)?;
    let mut used = identifiers(m);
    let bounds: Vec<DivBound> = m
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| DivBound {
            var: v.clone(),
            collected: fresh(&format!("c_{v}"), &mut used),
            bound: fresh(&format!("b_{v}"), &mut used),
            values: HfSet::set((0..g.len()).filter(|&n| !sat[n]).map(|n| g.nodes[n][i].clone())),
        })
        .collect();

    let mut init = m.init.clone();
    for b in &bounds {
        init.push(Assignment::becomes(&b.collected, Term::Empty));
        init.push(Assignment::becomes(&b.bound, Term::lit(b.values.clone())));
    }
    // Each ¬φ-step records the values it leaves, which are the values of a ¬φ-state.
    let collect = || {
        bounds.iter().map(|b| {
            let grown = Term::Union(Box::new(Term::var(&b.collected)), Box::new(Term::singleton(Term::var(&b.var))));
            Assignment::becomes(&b.collected, grown)
        })
    };
    let mut taken = BTreeSet::new();
    let mut events = Vec::new();
    let mut event_map = Vec::new();
    for e in &m.events {
        let names = DivEventCopies {
            source: e.name.clone(),
            plus: fresh(&format!("{}_plus", e.name), &mut taken),
            minus: fresh(&format!("{}_minus", e.name), &mut taken),
        };
        events.push(EventDef {
            name: names.plus.clone(),
            params: e.params.clone(),
            guard: F::and(e.guard.clone(), phi.clone()),
            action: e.action.clone(),
        });
        events.push(EventDef {
            name: names.minus.clone(),
            params: e.params.clone(),
            guard: F::and(e.guard.clone(), F::not(phi.clone())),
            action: e.action.iter().cloned().chain(collect()).collect(),
        });
        event_map.push(names);
    }

    let mut variables = m.variables.clone();
    variables.extend(bounds.iter().map(|b| b.collected.clone()));
    variables.extend(bounds.iter().map(|b| b.bound.clone()));
    let variant = Term::Tuple(
        bounds
            .iter()
            .map(|b| Term::Diff(Box::new(Term::var(&b.bound)), Box::new(Term::var(&b.collected))))
            .collect(),
    );
    let machine = Machine {
        name: format!("{}_div", m.name),
        atoms: m.atoms.clone(),
        constants: m.constants.clone(),
        variables,
        init,
        events,
        predicates: m.predicates.clone(),
    };
    Ok(DivRefinement { machine, phi: phi.clone(), variant, bounds, event_map })
}

impl DivRefinement {
    pub fn sidecar(&self) -> Value {
        json!({
            "mode": "div",
            "source": self.machine.name.trim_end_matches("_div"),
            "phi": print_formula(&self.phi),
            "variant": print_term(&self.variant),
            "bounds": self.bounds.iter().map(|b| json!({
                "var": b.var,
                "collected": b.collected,
                "bound": b.bound,
                "values": b.values.pretty(),
            })).collect::<Vec<_>>(),
            "events": self.event_map,
        })
    }
}

fn complete_graph(m: &Machine, budget: usize) -> Result<StateGraph> {
    let g = m.build_graph(budget)?;
    if !g.complete {
        return Err(Error::Indeterminate(format!(
            "the refined machine `{}` exceeds {} states",
            m.name, g.budget
        )));
    }
    Ok(g)
}

fn render_word(g: &StateGraph, word: &[usize]) -> String {
    word.iter().map(|&n| g.render_state(n)).collect::<Vec<_>>().join(" ; ")
}

fn failure(condition: &str, node: usize, state: String, reason: String) -> SideConditionReport {
    SideConditionReport {
        condition: condition.to_string(),
        holds: false,
        witness: Some(Witness { node, state, event: None, binding: None, successor: None, reason }),
    }
}

/// Compares prefixes of length `1..=depth` of the source traces with the
/// projections of the refined traces, in both directions.
///
/// `emit(n)` is the source node shown by refined node `n`, `Some(None)` when
/// the shown values are no reachable source state, and `None` when `n` shows
/// nothing.
fn compare_projection(
    source: &StateGraph,
    refined: &StateGraph,
    emit: &dyn Fn(usize) -> Option<Option<usize>>,
    depth: usize,
) -> SideConditionReport {
    let condition = format!("projected traces agree to depth {depth}");
    let shown: Vec<Option<Option<usize>>> = (0..refined.len()).map(emit).collect();
    let source_succ = source.successor_lists();
    let allowed = |last: Option<usize>, x: usize| match last {
        None => source.initial.contains(&x),
        Some(p) => source_succ[p].contains(&x),
    };

    // Refined into source: each shown state must extend the shown word.
    let mut seen = HashMap::new();
    let mut queue = VecDeque::new();
    for &n in &refined.initial {
        queue.push_back((n, None::<usize>, Vec::<usize>::new(), true));
    }
    while let Some((n, last, word, arrived)) = queue.pop_front() {
        let (last, word) = match (arrived, shown[n]) {
            (true, Some(None)) => {
                return failure(
                    &condition,
                    n,
                    refined.render_state(n),
                    "refined state shows values that are no reachable source state".into(),
                )
            }
            (true, Some(Some(x))) => {
                if !allowed(last, x) {
                    let mut w = word.clone();
                    w.push(x);
                    return failure(
                        &condition,
                        n,
                        render_word(source, &w),
                        "projection of a refined trace is not a source trace".into(),
                    );
                }
                let mut w = word;
                w.push(x);
                (Some(x), w)
            }
            _ => (last, word),
        };
        // Revisit a (node, last shown) pair only with a shorter shown word.
        if word.len() >= depth || seen.get(&(n, last)).is_some_and(|&k| k <= word.len()) {
            continue;
        }
        seen.insert((n, last), word.len());
        for m in refined.succ(n) {
            queue.push_back((m, last, word.clone(), true));
        }
    }

    // Source into refined: the refined nodes that can have shown exactly the
    // word so far, tracked per source word up to identical (last, set) pairs.
    let silent_closure = |start: &BTreeSet<usize>| {
        let mut out = start.clone();
        let mut stack: Vec<usize> = start.iter().copied().collect();
        while let Some(n) = stack.pop() {
            for m in refined.succ(n) {
                if shown[m].is_none() && out.insert(m) {
                    stack.push(m);
                }
            }
        }
        out
    };
    let step = |from: &BTreeSet<usize>, x: usize| -> BTreeSet<usize> {
        silent_closure(from)
            .iter()
            .flat_map(|&n| refined.succ(n))
            .filter(|&m| shown[m] == Some(Some(x)))
            .collect()
    };
    let silent_init: BTreeSet<usize> = refined.initial.iter().copied().filter(|&n| shown[n].is_none()).collect();
    let mut visited = HashSet::new();
    let mut queue = VecDeque::new();
    for &x in &source.initial {
        let mut reach = step(&silent_init, x);
        reach.extend(refined.initial.iter().copied().filter(|&n| shown[n] == Some(Some(x))));
        queue.push_back((x, reach, vec![x]));
    }
    while let Some((x, reach, word)) = queue.pop_front() {
        if reach.is_empty() {
            return failure(
                &condition,
                x,
                render_word(source, &word),
                "source trace prefix is not the projection of any refined trace".into(),
            );
        }
        if word.len() >= depth || !visited.insert((x, reach.clone())) {
            continue;
        }
        for &y in &source_succ[x] {
            let mut w = word.clone();
            w.push(y);
            queue.push_back((y, step(&reach, y), w));
        }
    }
    SideConditionReport { condition, holds: true, witness: None }
}

fn shown_node(source: &StateGraph, values: &[HfSet]) -> Option<usize> {
    source.index.get(values).copied()
}

/// Projection to `(s = 1, v̄)`, compared with the traces of `source`.
pub fn check_conv_projection(
    source: &Machine,
    r: &ConvRefinement,
    refined: &StateGraph,
    budget: usize,
    depth: usize,
) -> Result<SideConditionReport> {
    let sg = complete_graph(source, budget)?;
    let k = source.variables.len();
    let s_idx = refined.vars.iter().position(|v| *v == r.shown_var).expect("shown flag is a variable");
    let one = HfSet::von_neumann(1);
    let emit = |n: usize| {
        let st = &refined.nodes[n];
        (st[s_idx] == one).then(|| shown_node(&sg, &st[..k]))
    };
    Ok(compare_projection(&sg, refined, &emit, depth))
}

/// Projection to `v̄`, compared with the traces of `source`.
pub fn check_div_projection(source: &Machine, refined: &StateGraph, budget: usize, depth: usize) -> Result<SideConditionReport> {
    let sg = complete_graph(source, budget)?;
    let k = source.variables.len();
    let emit = |n: usize| Some(shown_node(&sg, &refined.nodes[n][..k]));
    Ok(compare_projection(&sg, refined, &emit, depth))
}

/// The three edge-wise facts behind var_d on the collecting refinement:
/// `φ`-edges keep the variant, `¬φ`-edges shrink it, and it is non-empty
/// wherever a `¬φ`-state can step.
pub fn div_edge_facts(r: &DivRefinement, g: &StateGraph) -> Result<Vec<SideConditionReport>> {
    let sat = g.sat(&r.phi)?;
    let t: Vec<HfSet> = (0..g.len()).map(|n| eval_term(&r.variant, &g.env, &g.scope(n))).collect::<Result<_>>()?;
    let edge_fail = |cond: &str, ei: usize, reason: &str| {
        let e = &g.edges[ei];
        SideConditionReport {
            condition: cond.to_string(),
            holds: false,
            witness: Some(Witness {
                node: e.from,
                state: g.render_state(e.from),
                event: Some(e.event.clone()),
                binding: Some(g.render_binding(&e.binding)),
                successor: Some(g.render_state(e.to)),
                reason: reason.to_string(),
            }),
        }
    };
    let ok = |cond: &str| SideConditionReport { condition: cond.to_string(), holds: true, witness: None };
    let phi = print_formula(&r.phi);
    let keep = format!("{phi} steps keep the variant");
    let shrink = format!("!({phi}) steps shrink the variant");
    let nonempty = format!("variant non-empty where !({phi}) can step");

    let keep_r = (0..g.edges.len())
        .find(|&i| sat[g.edges[i].from] && t[g.edges[i].to] != t[g.edges[i].from])
        .map_or_else(|| ok(&keep), |i| edge_fail(&keep, i, "variant changes"));
    let shrink_r = (0..g.edges.len())
        .find(|&i| !sat[g.edges[i].from] && !t[g.edges[i].to].lt(&t[g.edges[i].from]))
        .map_or_else(|| ok(&shrink), |i| edge_fail(&shrink, i, "variant does not strictly decrease"));
    let nonempty_r = (0..g.len())
        .find(|&n| !sat[n] && !g.out[n].is_empty() && t[n].is_empty_set())
        .map_or_else(
            || ok(&nonempty),
            |n| failure(&nonempty, n, g.render_state(n), "variant is empty in an enabled state".into()),
        );
    Ok(vec![keep_r, shrink_r, nonempty_r])
}

/// Builds the refinement for `mode`, and checks its variant formula and the
/// trace projection on the refined graph. Returns the variant with the reports.
pub fn refinement_evidence(
    m: &Machine,
    phi: &F,
    mode: RefineMode,
    node_budget: usize,
    depth: usize,
) -> Result<(Term, Vec<SideConditionReport>)> {
    match mode {
        RefineMode::Conv => {
            let r = refine_for_conv(m, phi, node_budget)?;
            let g = complete_graph(&r.machine, node_budget)?;
            let var = check_var_c(&g, &r.variant, phi)?;
            let proj = check_conv_projection(m, &r, &g, node_budget, depth)?;
            Ok((r.variant, vec![var, proj]))
        }
        RefineMode::Div => {
            let r = refine_for_div(m, phi, node_budget)?;
            let g = complete_graph(&r.machine, node_budget)?;
            let var = check_var_d(&g, &r.variant, phi)?;
            let proj = check_div_projection(m, &g, node_budget, depth)?;
            Ok((r.variant, vec![var, proj]))
        }
    }
}

/// How one state formula fares in [`sufficiently_refined`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormulaSufficiency {
    pub phi: String,
    pub conv: bool,
    pub div: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_c: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_d: Option<String>,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SufficiencyReport {
    pub holds: bool,
    pub formulas: Vec<FormulaSufficiency>,
}

impl SufficiencyReport {
    pub fn failing(&self) -> impl Iterator<Item = &FormulaSufficiency> {
        self.formulas.iter().filter(|f| !f.holds)
    }
}

/// For each `φ`, on the trivial extension: whichever of conv(φ), div(φ) holds
/// must be witnessed by a variant, taken from `hints`, the empty term, or
/// (with `auto`) the matching refinement. A `φ` with neither property fails.
pub fn sufficiently_refined(
    m: &Machine,
    phis: &[F],
    hints: &[Term],
    auto: bool,
    budget: usize,
    depth: usize,
) -> Result<SufficiencyReport> {
    let ext = m.trivial_extension();
    let g = ext.build_graph(budget)?;
    if !g.complete {
        return Err(Error::Indeterminate(format!(
            "sufficient refinement cannot be decided on a graph truncated at {} nodes",
            g.budget
        )));
    }
    let decided = |v: Verdict| match v {
        Verdict::Indeterminate(r) => Err(Error::Indeterminate(r)),
        v => Ok(v.holds()),
    };
    let candidates: Vec<Term> = hints.iter().cloned().chain([Term::Empty]).collect();
    let find = |mode: RefineMode, phi: &F| -> Result<Option<Term>> {
        for t in &candidates {
            let r = match mode {
                RefineMode::Conv => check_var_c(&g, t, phi),
                RefineMode::Div => check_var_d(&g, t, phi),
            };
            // Terms that do not evaluate on this machine are simply unsuitable.
            if matches!(r, Ok(ref r) if r.holds) {
                return Ok(Some(t.clone()));
            }
        }
        if auto {
            let (t, reports) = refinement_evidence(&ext, phi, mode, budget, depth)?;
            if reports.iter().all(|r| r.holds) {
                return Ok(Some(t));
            }
        }
        Ok(None)
    };
    let mut formulas = Vec::new();
    for phi in phis {
        let conv = decided(check_conv(&g, phi)?)?;
        let div = decided(check_div(&g, phi)?)?;
        let var_c = if conv { find(RefineMode::Conv, phi)? } else { None };
        let var_d = if div { find(RefineMode::Div, phi)? } else { None };
        let reason = if !conv && !div {
            Some("neither conv nor div holds, so no variant can exist".to_string())
        } else if conv && var_c.is_none() {
            Some("conv holds but no var_c term was found".to_string())
        } else if div && var_d.is_none() {
            Some("div holds but no var_d term was found".to_string())
        } else {
            None
        };
        formulas.push(FormulaSufficiency {
            phi: print_formula(phi),
            conv,
            div,
            var_c: var_c.as_ref().map(print_term),
            var_d: var_d.as_ref().map(print_term),
            holds: reason.is_none(),
            reason,
        });
    }
    Ok(SufficiencyReport { holds: formulas.iter().all(|f| f.holds), formulas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::DEFAULT_GRAPH_BUDGET as B;
    use crate::speclang::{parse_machine, parse_state_formula};

    fn counter() -> Machine {
        parse_machine(include_str!("../fixtures/counter.ebm")).unwrap()
    }

    fn two_loop() -> Machine {
        parse_machine(include_str!("../fixtures/two_loop.ebm")).unwrap()
    }

    fn phi(m: &Machine, s: &str) -> F {
        parse_state_formula(s, Some(m)).unwrap()
    }

    #[test]
    fn conv_refinement_of_counter_has_seven_events() {
        let m = counter();
        let r = refine_for_conv(&m, &phi(&m, "n != 0"), B).unwrap();
        assert_eq!(r.event_count(), 3 * m.events.len() + 4);
        assert_eq!(r.event_count(), 7);
        let g = complete_graph(&r.machine, B).unwrap();
        assert!(check_var_c(&g, &r.variant, &r.phi).unwrap().holds);
    }

    #[test]
    fn conv_refinement_of_extension_reproduces_traces() {
        let m = counter().trivial_extension();
        let (t, reports) = refinement_evidence(&m, &phi(&m, "n != 0"), RefineMode::Conv, B, 12).unwrap();
        assert_eq!(print_term(&t), "len(l)");
        assert!(reports.iter().all(|r| r.holds), "{reports:?}");
    }

    #[test]
    fn deadlocked_source_is_not_reproduced_by_buffering() {
        // The final deadlocked state is never replayed.
        let m = counter();
        let r = refine_for_conv(&m, &phi(&m, "n != 0"), B).unwrap();
        let g = complete_graph(&r.machine, B).unwrap();
        assert!(!check_conv_projection(&m, &r, &g, B, 12).unwrap().holds);
    }

    #[test]
    fn div_bounds_are_the_nonzero_values() {
        let m = counter().trivial_extension();
        let r = refine_for_div(&m, &phi(&m, "n = 0"), B).unwrap();
        assert_eq!(r.bounds.len(), 1);
        assert_eq!(r.bounds[0].values, HfSet::set((1..=10).map(HfSet::von_neumann)));
        let g = complete_graph(&r.machine, B).unwrap();
        assert!(check_div_projection(&m, &g, B, 12).unwrap().holds);
        // Jumping from 10 to 5 removes 10 but keeps 5 in the transitive
        // closure through 6..9, so the difference does not shrink under lt.
        let var = check_var_d(&g, &r.variant, &r.phi).unwrap();
        assert!(!var.holds);
        let facts = div_edge_facts(&r, &g).unwrap();
        assert!(facts[0].holds && !facts[1].holds && facts[2].holds, "{facts:?}");
    }

    #[test]
    fn div_refinement_of_deterministic_countdown() {
        let m = parse_machine(include_str!("../fixtures/countdown.ebm")).unwrap().trivial_extension();
        let r = refine_for_div(&m, &phi(&m, "n = 0"), B).unwrap();
        let g = complete_graph(&r.machine, B).unwrap();
        assert!(check_var_d(&g, &r.variant, &r.phi).unwrap().holds);
        assert!(div_edge_facts(&r, &g).unwrap().iter().all(|f| f.holds));
        assert!(check_div_projection(&m, &g, B, 12).unwrap().holds);
    }

    #[test]
    fn preconditions_are_enforced() {
        let m = two_loop();
        let p = phi(&m, "p");
        assert!(matches!(refine_for_conv(&m, &p, B), Err(Error::Refused(_))));
        assert!(matches!(refine_for_div(&m, &p, B), Err(Error::Refused(_))));
    }

    #[test]
    fn refined_machines_print_and_parse_back() {
        let m = counter().trivial_extension();
        let c = refine_for_conv(&m, &phi(&m, "n != 0"), B).unwrap();
        let d = refine_for_div(&m, &phi(&m, "n = 0"), B).unwrap();
        for r in [c.machine, d.machine] {
            let text = crate::speclang::print_machine(&r);
            let back = parse_machine(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
            assert_eq!(back.build_graph(B).unwrap().len(), r.build_graph(B).unwrap().len());
        }
    }

    #[test]
    fn sufficiency_of_counter_and_two_loop() {
        let m = counter();
        let r = sufficiently_refined(&m, &[phi(&m, "n != 0")], &[], true, B, 12).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(sufficiently_refined(&m, &[], &[], false, B, 12).unwrap().holds);

        let m = two_loop();
        let r = sufficiently_refined(&m, &[phi(&m, "p")], &[], true, B, 12).unwrap();
        assert!(!r.holds);
        assert_eq!(r.failing().next().unwrap().phi, "x = a");
    }

    #[test]
    fn truncated_graph_is_indeterminate() {
        let m = counter();
        let r = sufficiently_refined(&m, &[phi(&m, "n != 0")], &[], true, 3, 12);
        assert!(matches!(r, Err(Error::Indeterminate(_))));
    }
}
