//! Ground-truth □LTL checking over complete state graphs: exact evaluation on
//! lassos, exhaustive lasso enumeration, cycle-analysis checks, conv/div and
//! tail-homogeneity.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fol::StateFormula;
use crate::machine::StateGraph;
use crate::speclang::print_temporal;

pub const DEFAULT_LASSO_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemporalFormula {
    State(StateFormula),
    Always(Box<TemporalFormula>),
    AlwaysEventually(Box<TemporalFormula>),
    EventuallyAlways(Box<TemporalFormula>),
    /// `□(φ → ◇ψ)`.
    Progress(StateFormula, Box<TemporalFormula>),
}

use TemporalFormula as T;

impl TemporalFormula {
    pub fn always(x: TemporalFormula) -> Self {
        T::Always(Box::new(x))
    }
    pub fn always_eventually(x: TemporalFormula) -> Self {
        T::AlwaysEventually(Box::new(x))
    }
    pub fn eventually_always(x: TemporalFormula) -> Self {
        T::EventuallyAlways(Box::new(x))
    }
    pub fn progress(p: StateFormula, x: TemporalFormula) -> Self {
        T::Progress(p, Box::new(x))
    }

    /// Number of nested temporal productions.
    pub fn depth(&self) -> usize {
        match self {
            T::State(_) => 0,
            T::Always(x) | T::AlwaysEventually(x) | T::EventuallyAlways(x) | T::Progress(_, x) => 1 + x.depth(),
        }
    }

    pub fn inner(&self) -> Option<&TemporalFormula> {
        match self {
            T::State(_) => None,
            T::Always(x) | T::AlwaysEventually(x) | T::EventuallyAlways(x) | T::Progress(_, x) => Some(x),
        }
    }

    pub fn has_progress(&self) -> bool {
        match self {
            T::State(_) => false,
            T::Progress(..) => true,
            other => other.inner().is_some_and(|x| x.has_progress()),
        }
    }

    pub fn state_formulas(&self) -> Vec<&StateFormula> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                T::State(f) => {
                    out.push(f);
                    return out;
                }
                T::Progress(p, x) => {
                    out.push(p);
                    cur = x;
                }
                T::Always(x) | T::AlwaysEventually(x) | T::EventuallyAlways(x) => cur = x,
            }
        }
    }

    /// Every fragment formula of depth at most `max_depth` built from `atoms`
    /// (also used as progress antecedents), shallow first.
    pub fn enumerate(atoms: &[StateFormula], max_depth: usize) -> Vec<TemporalFormula> {
        let mut layers: Vec<Vec<TemporalFormula>> = vec![atoms.iter().cloned().map(T::State).collect()];
        for _ in 0..max_depth {
            let prev = layers.last().unwrap();
            let mut next = Vec::new();
            for x in prev {
                next.push(T::always(x.clone()));
                next.push(T::always_eventually(x.clone()));
                next.push(T::eventually_always(x.clone()));
                for p in atoms {
                    next.push(T::progress(p.clone(), x.clone()));
                }
            }
            layers.push(next);
        }
        layers.concat()
    }
}

impl fmt::Display for TemporalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_temporal(self))
    }
}

/// Ultimately periodic path: `stem · cycle^ω`; the stem starts at an initial
/// node and its last node has an edge to `cycle[0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Lasso {
    pub fn positions(&self) -> Vec<usize> {
        self.stem.iter().chain(&self.cycle).copied().collect()
    }

    pub fn is_well_formed(&self, g: &StateGraph) -> bool {
        let edge = |a: usize, b: usize| g.out[a].iter().any(|&e| g.edges[e].to == b);
        let pos = self.positions();
        !self.cycle.is_empty()
            && !self.stem.is_empty()
            && g.initial.contains(&self.stem[0])
            && pos.windows(2).all(|w| edge(w[0], w[1]))
            && edge(*self.cycle.last().unwrap(), self.cycle[0])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    Lasso(Lasso),
    /// Finite trace ending in a deadlocked state.
    Finite(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Counterexample),
    Indeterminate(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Indeterminate(_) => "indeterminate",
        }
    }
}

#[derive(Serialize)]
struct StepJson {
    state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    event: Option<String>,
}

fn edge_label(g: &StateGraph, a: usize, b: usize) -> Option<String> {
    g.out[a].iter().map(|&e| &g.edges[e]).find(|e| e.to == b).map(|e| {
        if e.binding.is_empty() {
            e.event.clone()
        } else {
            format!("{}({})", e.event, g.render_binding(&e.binding))
        }
    })
}

fn steps(g: &StateGraph, nodes: &[usize], next: Option<usize>) -> Vec<StepJson> {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let to = nodes.get(i + 1).copied().or(next);
            StepJson { state: g.render_state(n), event: to.and_then(|t| edge_label(g, n, t)) }
        })
        .collect()
}

/// JSON report of a verdict; `formula` is printed as given.
pub fn verdict_json(g: &StateGraph, formula: &str, v: &Verdict) -> serde_json::Value {
    let mut o = json!({ "formula": formula, "verdict": v.label() });
    match v {
        Verdict::Holds => {}
        Verdict::Indeterminate(r) => o["reason"] = json!(r),
        Verdict::Fails(Counterexample::Lasso(l)) => {
            o["counterexample"] = json!({
                "stem": steps(g, &l.stem, l.cycle.first().copied()),
                "cycle": steps(g, &l.cycle, l.cycle.first().copied()),
            })
        }
        Verdict::Fails(Counterexample::Finite(t)) => {
            o["counterexample"] = json!({ "finite": steps(g, t, None), "deadlock": true })
        }
    }
    o
}

pub fn verdict_text(g: &StateGraph, formula: &str, v: &Verdict) -> String {
    let mut s = format!("{formula}: {}\n", v.label());
    let line = |st: &StepJson| match &st.event {
        Some(e) => format!("  {}   --{}-->\n", st.state, e),
        None => format!("  {}\n", st.state),
    };
    match v {
        Verdict::Holds => {}
        Verdict::Indeterminate(r) => s += &format!("  reason: {r}\n"),
        Verdict::Fails(Counterexample::Lasso(l)) => {
            s += "stem:\n";
            steps(g, &l.stem, l.cycle.first().copied()).iter().for_each(|x| s += &line(x));
            s += "cycle:\n";
            steps(g, &l.cycle, l.cycle.first().copied()).iter().for_each(|x| s += &line(x));
        }
        Verdict::Fails(Counterexample::Finite(t)) => {
            s += "finite trace:\n";
            steps(g, t, None).iter().for_each(|x| s += &line(x));
            s += "  <deadlock>\n";
        }
    }
    s
}

/// Truth values of every state subformula at every node.
pub struct SatCache<'g> {
    g: &'g StateGraph,
    map: HashMap<StateFormula, Vec<bool>>,
}

impl<'g> SatCache<'g> {
    pub fn new(g: &'g StateGraph) -> Self {
        SatCache { g, map: HashMap::new() }
    }

    pub fn get(&mut self, f: &StateFormula) -> Result<&Vec<bool>> {
        if !self.map.contains_key(f) {
            let v = self.g.sat(f)?;
            self.map.insert(f.clone(), v);
        }
        Ok(&self.map[f])
    }

    fn load(&mut self, f: &TemporalFormula) -> Result<()> {
        for p in f.state_formulas() {
            self.get(p)?;
        }
        Ok(())
    }
}

/// Positionwise truth values along `stem · cycle` (cycle positions stand for
/// all their infinitely many repetitions).
fn values(f: &TemporalFormula, sat: &HashMap<StateFormula, Vec<bool>>, pos: &[usize], cs: usize) -> Vec<bool> {
    let n = pos.len();
    let eventually = |x: &[bool]| {
        let c = x[cs..].iter().any(|&b| b);
        let mut e = vec![c; n];
        for i in (0..cs).rev() {
            e[i] = x[i] || e[i + 1];
        }
        e
    };
    match f {
        T::State(p) => pos.iter().map(|&v| sat[p][v]).collect(),
        T::Always(x) => {
            let x = values(x, sat, pos, cs);
            let c = x[cs..].iter().all(|&b| b);
            let mut v = vec![c; n];
            for i in (0..cs).rev() {
                v[i] = x[i] && v[i + 1];
            }
            v
        }
        T::AlwaysEventually(x) => {
            let x = values(x, sat, pos, cs);
            vec![x[cs..].iter().any(|&b| b); n]
        }
        T::EventuallyAlways(x) => {
            let x = values(x, sat, pos, cs);
            vec![x[cs..].iter().all(|&b| b); n]
        }
        T::Progress(p, x) => {
            let e = eventually(&values(x, sat, pos, cs));
            let imp: Vec<bool> = (0..n).map(|i| !sat[p][pos[i]] || e[i]).collect();
            let c = imp[cs..].iter().all(|&b| b);
            let mut v = vec![c; n];
            for i in (0..cs).rev() {
                v[i] = imp[i] && v[i + 1];
            }
            v
        }
    }
}

/// Exact satisfaction of `f` by the infinite trace induced by the lasso.
pub fn eval_on_lasso(g: &StateGraph, f: &TemporalFormula, lasso: &Lasso) -> Result<bool> {
    let mut cache = SatCache::new(g);
    cache.load(f)?;
    Ok(values(f, &cache.map, &lasso.positions(), lasso.stem.len())[0])
}

fn require_extended(g: &StateGraph) -> Result<Option<Verdict>> {
    if !g.complete {
        return Ok(Some(Verdict::Indeterminate(format!(
            "state graph truncated at {} nodes",
            g.budget
        ))));
    }
    if let Some(&d) = g.deadlocked_nodes().first() {
        return Err(Error::Refused(format!(
            "state {} is deadlocked; check the trivial extension instead",
            g.render_state(d)
        )));
    }
    Ok(None)
}

/// Simple cycles `[c0, ..., cm]` starting at `c0`, in DFS order over sorted successors.
fn simple_cycles_from(succ: &[Vec<usize>], c0: usize, limit: usize) -> Option<Vec<Vec<usize>>> {
    fn go(succ: &[Vec<usize>], c0: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>, limit: usize) -> bool {
        let last = *path.last().unwrap();
        for &n in &succ[last] {
            if n == c0 {
                out.push(path.clone());
                if out.len() > limit {
                    return false;
                }
            } else if !on[n] {
                on[n] = true;
                path.push(n);
                let ok = go(succ, c0, path, on, out, limit);
                path.pop();
                on[n] = false;
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let mut on = vec![false; succ.len()];
    on[c0] = true;
    let mut out = Vec::new();
    go(succ, c0, &mut vec![c0], &mut on, &mut out, limit).then_some(out)
}

struct Brute<'a> {
    succ: Vec<Vec<usize>>,
    cycles: Vec<Option<Vec<Vec<usize>>>>,
    sat: &'a HashMap<StateFormula, Vec<bool>>,
    f: &'a TemporalFormula,
    max_segments: usize,
    budget: usize,
    count: usize,
}

enum Search {
    Continue,
    Found(Lasso),
    OutOfBudget,
}

impl Brute<'_> {
    fn cycles_at(&mut self, c0: usize) -> Option<&Vec<Vec<usize>>> {
        if self.cycles[c0].is_none() {
            self.cycles[c0] = Some(simple_cycles_from(&self.succ, c0, self.budget)?);
        }
        self.cycles[c0].as_ref()
    }

    fn try_stem(&mut self, stem: &[usize]) -> Search {
        let last = *stem.last().unwrap();
        for c0 in self.succ[last].clone() {
            let Some(cycles) = self.cycles_at(c0).cloned() else {
                return Search::OutOfBudget;
            };
            for cycle in cycles {
                self.count += 1;
                if self.count > self.budget {
                    return Search::OutOfBudget;
                }
                let pos: Vec<usize> = stem.iter().chain(&cycle).copied().collect();
                if !values(self.f, self.sat, &pos, stem.len())[0] {
                    return Search::Found(Lasso { stem: stem.to_vec(), cycle });
                }
            }
        }
        Search::Continue
    }

    fn dfs(&mut self, stem: &mut Vec<usize>, seg: &mut Vec<bool>, segments: usize) -> Search {
        match self.try_stem(stem) {
            Search::Continue => {}
            other => return other,
        }
        let last = *stem.last().unwrap();
        for n in self.succ[last].clone() {
            let r = if !seg[n] {
                seg[n] = true;
                stem.push(n);
                let r = self.dfs(stem, seg, segments);
                stem.pop();
                seg[n] = false;
                r
            } else if segments < self.max_segments {
                let mut fresh = vec![false; seg.len()];
                fresh[n] = true;
                stem.push(n);
                let r = self.dfs(stem, &mut fresh, segments + 1);
                stem.pop();
                r
            } else {
                Search::Continue
            };
            if !matches!(r, Search::Continue) {
                return r;
            }
        }
        Search::Continue
    }
}

/// Exhaustive lasso enumeration. Stems are split greedily into simple
/// segments (a new segment starts at a node already in the current one); at
/// most `depth + 1` segments are explored, cycles are simple.
pub fn holds_bruteforce(g: &StateGraph, f: &TemporalFormula, lasso_budget: usize) -> Result<Verdict> {
    if let Some(v) = require_extended(g)? {
        return Ok(v);
    }
    let mut cache = SatCache::new(g);
    cache.load(f)?;
    let n = g.len();
    let mut b = Brute {
        succ: g.successor_lists(),
        cycles: vec![None; n],
        sat: &cache.map,
        f,
        max_segments: f.depth() + 1,
        budget: lasso_budget,
        count: 0,
    };
    for &i in &g.initial {
        let mut seg = vec![false; n];
        seg[i] = true;
        match b.dfs(&mut vec![i], &mut seg, 1) {
            Search::Continue => {}
            Search::Found(l) => return Ok(Verdict::Fails(Counterexample::Lasso(l))),
            Search::OutOfBudget => {
                return Ok(Verdict::Indeterminate(format!("lasso budget of {lasso_budget} exhausted")))
            }
        }
    }
    Ok(Verdict::Holds)
}

/// Rewrites using trace equivalences valid on infinite traces, innermost first.
pub fn normalize(f: &TemporalFormula) -> TemporalFormula {
    let f = match f {
        T::State(_) => return f.clone(),
        T::Always(x) => T::always(normalize(x)),
        T::AlwaysEventually(x) => T::always_eventually(normalize(x)),
        T::EventuallyAlways(x) => T::eventually_always(normalize(x)),
        T::Progress(p, x) => T::progress(p.clone(), normalize(x)),
    };
    let step = match &f {
        T::Always(x) => match &**x {
            T::State(_) => None,
            inner => Some(inner.clone()),
        },
        T::AlwaysEventually(x) => match &**x {
            T::Always(y) | T::EventuallyAlways(y) => Some(T::eventually_always((**y).clone())),
            T::AlwaysEventually(_) => Some((**x).clone()),
            T::Progress(..) => Some(T::eventually_always((**x).clone())),
            T::State(_) => None,
        },
        T::EventuallyAlways(x) => match &**x {
            T::Always(y) => Some(T::eventually_always((**y).clone())),
            T::AlwaysEventually(_) | T::EventuallyAlways(_) => Some((**x).clone()),
            _ => None,
        },
        T::Progress(p, x) => match &**x {
            T::Always(y) => Some(T::progress(p.clone(), T::eventually_always((**y).clone()))),
            _ => None,
        },
        T::State(_) => None,
    };
    match step {
        Some(g) => normalize(&g),
        None => f,
    }
}

/// Graph helpers for cycle analysis on a complete graph.
struct Analysis<'g> {
    g: &'g StateGraph,
    succ: Vec<Vec<usize>>,
}

impl<'g> Analysis<'g> {
    fn new(g: &'g StateGraph) -> Self {
        Analysis { g, succ: g.successor_lists() }
    }

    fn all(&self) -> Vec<bool> {
        vec![true; self.g.len()]
    }

    /// Nodes of `mask` lying on a cycle that stays inside `mask`.
    fn on_cycle(&self, mask: &[bool]) -> Vec<bool> {
        let n = self.g.len();
        // Tarjan, iterative
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut result = vec![false; n];
        let mut counter = 0;
        for root in 0..n {
            if !mask[root] || index[root] != usize::MAX {
                continue;
            }
            let mut work: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut i)) = work.last_mut() {
                if *i < self.succ[v].len() {
                    let w = self.succ[v][*i];
                    *i += 1;
                    if !mask[w] {
                        continue;
                    }
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    work.pop();
                    if let Some(&(u, _)) = work.last() {
                        low[u] = low[u].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        let cyclic = comp.len() > 1 || self.succ[v].contains(&v);
                        for w in comp {
                            result[w] = cyclic;
                        }
                    }
                }
            }
        }
        result
    }

    /// Nodes from which some `target` is reachable along `mask` nodes
    /// (the start node itself must be in `mask` unless it is a target).
    fn can_reach(&self, mask: &[bool], target: &[bool]) -> Vec<bool> {
        let n = self.g.len();
        let mut pred = vec![Vec::new(); n];
        for (v, ss) in self.succ.iter().enumerate() {
            for &w in ss {
                pred[w].push(v);
            }
        }
        let mut seen: Vec<bool> = target.to_vec();
        let mut q: VecDeque<usize> = (0..n).filter(|&v| target[v]).collect();
        while let Some(w) = q.pop_front() {
            for &v in &pred[w] {
                if !seen[v] && mask[v] {
                    seen[v] = true;
                    q.push_back(v);
                }
            }
        }
        seen
    }

    /// Shortest path from any of `from` to `to`, through `mask` after the first node.
    fn path(&self, from: &[usize], to: usize, mask: &[bool]) -> Option<Vec<usize>> {
        let n = self.g.len();
        let mut prev = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut q = VecDeque::new();
        for &s in from {
            if !seen[s] {
                seen[s] = true;
                q.push_back(s);
            }
        }
        while let Some(v) = q.pop_front() {
            if v == to {
                let mut p = vec![v];
                let mut c = v;
                while prev[c] != usize::MAX {
                    c = prev[c];
                    p.push(c);
                }
                p.reverse();
                return Some(p);
            }
            for &w in &self.succ[v] {
                if !seen[w] && mask[w] {
                    seen[w] = true;
                    prev[w] = v;
                    q.push_back(w);
                }
            }
        }
        None
    }

    /// Cycle `[c, ...]` through `c` inside `mask`.
    fn cycle_through(&self, c: usize, mask: &[bool]) -> Option<Vec<usize>> {
        if self.succ[c].contains(&c) {
            return Some(vec![c]);
        }
        let starts: Vec<usize> = self.succ[c].iter().copied().filter(|&w| mask[w]).collect();
        let p = self.path(&starts, c, mask)?;
        let mut cyc = vec![c];
        cyc.extend(&p[..p.len() - 1]);
        Some(cyc)
    }

    /// Lasso visiting `via` (if any), then reaching `c` and looping inside `mask`.
    fn lasso(&self, via: Option<(usize, &[bool])>, c: usize, mask: &[bool]) -> Lasso {
        let all = self.all();
        let stem = match via {
            Some((u, m2)) => {
                let mut p = self.path(&self.g.initial, u, &all).expect("reachable");
                let rest = self.path(&[u], c, m2).expect("reachable");
                p.extend(&rest[1..]);
                p
            }
            None => self.path(&self.g.initial, c, &all).expect("reachable"),
        };
        let cyc = self.cycle_through(c, mask).expect("cycle exists");
        let last = *stem.last().unwrap();
        debug_assert_eq!(last, c);
        let mut rotated: Vec<usize> = cyc[1..].to_vec();
        rotated.push(c);
        if cyc.len() == 1 {
            rotated = vec![c];
        }
        Lasso { stem, cycle: rotated }
    }

    /// Lasso through `u` that then continues arbitrarily.
    fn lasso_through(&self, u: usize) -> Lasso {
        let all = self.all();
        let cyc_nodes = self.on_cycle(&all);
        let c = (0..self.g.len())
            .filter(|&c| cyc_nodes[c])
            .find(|&c| self.path(&[u], c, &all).is_some())
            .expect("every extended graph has a cycle below each node");
        self.lasso(Some((u, &all)), c, &all)
    }
}

fn sat_of(cache: &mut SatCache, f: &StateFormula) -> Result<Vec<bool>> {
    Ok(cache.get(f)?.clone())
}

fn not(v: &[bool]) -> Vec<bool> {
    v.iter().map(|b| !b).collect()
}

fn and(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x && *y).collect()
}

/// Cycle analysis on the normalized formula, falling back to lasso enumeration.
pub fn holds_fast(g: &StateGraph, f: &TemporalFormula, lasso_budget: usize) -> Result<Verdict> {
    if let Some(v) = require_extended(g)? {
        return Ok(v);
    }
    let nf = normalize(f);
    let a = Analysis::new(g);
    let mut cache = SatCache::new(g);
    let all = a.all();
    let n = g.len();
    let fails = |l: Lasso| Ok(Verdict::Fails(Counterexample::Lasso(l)));
    match &nf {
        T::State(p) => {
            let s = sat_of(&mut cache, p)?;
            match g.initial.iter().find(|&&i| !s[i]) {
                Some(&i) => fails(a.lasso_through(i)),
                None => Ok(Verdict::Holds),
            }
        }
        T::Always(x) => match &**x {
            T::State(p) => {
                let s = sat_of(&mut cache, p)?;
                match (0..n).find(|&v| !s[v]) {
                    Some(v) => fails(a.lasso_through(v)),
                    None => Ok(Verdict::Holds),
                }
            }
            _ => holds_bruteforce(g, f, lasso_budget),
        },
        T::AlwaysEventually(x) => match &**x {
            T::State(p) => {
                let bad = not(&sat_of(&mut cache, p)?);
                let cyc = a.on_cycle(&bad);
                match (0..n).find(|&v| cyc[v]) {
                    Some(c) => fails(a.lasso(None, c, &bad)),
                    None => Ok(Verdict::Holds),
                }
            }
            _ => holds_bruteforce(g, f, lasso_budget),
        },
        T::EventuallyAlways(x) => match &**x {
            T::State(p) => {
                let bad = not(&sat_of(&mut cache, p)?);
                let cyc = a.on_cycle(&all);
                match (0..n).find(|&v| cyc[v] && bad[v]) {
                    Some(c) => fails(a.lasso(None, c, &all)),
                    None => Ok(Verdict::Holds),
                }
            }
            T::Progress(q, y) => match &**y {
                T::State(psi) => {
                    let notpsi = not(&sat_of(&mut cache, psi)?);
                    let q = sat_of(&mut cache, q)?;
                    let cyc = a.on_cycle(&notpsi);
                    match (0..n).find(|&v| cyc[v] && q[v]) {
                        Some(c) => fails(a.lasso(None, c, &notpsi)),
                        None => Ok(Verdict::Holds),
                    }
                }
                _ => holds_bruteforce(g, f, lasso_budget),
            },
            _ => holds_bruteforce(g, f, lasso_budget),
        },
        T::Progress(p, x) => {
            let p = sat_of(&mut cache, p)?;
            // (antecedent node u, cycle node c, mask for the u→c path, cycle mask)
            let found: Option<(usize, usize, Vec<bool>, Vec<bool>)> = match &**x {
                T::State(psi) => {
                    let notpsi = not(&sat_of(&mut cache, psi)?);
                    let cyc = a.on_cycle(&notpsi);
                    let reach = a.can_reach(&notpsi, &cyc);
                    (0..n)
                        .find(|&u| p[u] && notpsi[u] && reach[u])
                        .and_then(|u| {
                            (0..n)
                                .find(|&c| cyc[c] && a.path(&[u], c, &notpsi).is_some())
                                .map(|c| (u, c, notpsi.clone(), notpsi.clone()))
                        })
                }
                T::EventuallyAlways(y) => match &**y {
                    T::State(psi) => {
                        let notpsi = not(&sat_of(&mut cache, psi)?);
                        let cyc = a.on_cycle(&all);
                        let target = and(&cyc, &notpsi);
                        let reach = a.can_reach(&all, &target);
                        (0..n).find(|&u| p[u] && reach[u]).and_then(|u| {
                            (0..n)
                                .find(|&c| target[c] && a.path(&[u], c, &all).is_some())
                                .map(|c| (u, c, all.clone(), all.clone()))
                        })
                    }
                    _ => return holds_bruteforce(g, f, lasso_budget),
                },
                T::AlwaysEventually(y) => match &**y {
                    T::State(psi) => {
                        let notpsi = not(&sat_of(&mut cache, psi)?);
                        let cyc = a.on_cycle(&notpsi);
                        let reach = a.can_reach(&all, &cyc);
                        (0..n).find(|&u| p[u] && reach[u]).and_then(|u| {
                            (0..n)
                                .find(|&c| cyc[c] && a.path(&[u], c, &all).is_some())
                                .map(|c| (u, c, all.clone(), notpsi.clone()))
                        })
                    }
                    _ => return holds_bruteforce(g, f, lasso_budget),
                },
                T::Progress(q, y) => match &**y {
                    T::State(psi) => {
                        let notpsi = not(&sat_of(&mut cache, psi)?);
                        let q = sat_of(&mut cache, q)?;
                        let cyc = a.on_cycle(&notpsi);
                        let target = and(&cyc, &q);
                        let reach = a.can_reach(&all, &target);
                        (0..n).find(|&u| p[u] && reach[u]).and_then(|u| {
                            (0..n)
                                .find(|&c| target[c] && a.path(&[u], c, &all).is_some())
                                .map(|c| (u, c, all.clone(), notpsi.clone()))
                        })
                    }
                    _ => return holds_bruteforce(g, f, lasso_budget),
                },
                T::Always(_) => return holds_bruteforce(g, f, lasso_budget),
            };
            match found {
                Some((u, c, path_mask, cyc_mask)) => fails(a.lasso(Some((u, &path_mask)), c, &cyc_mask)),
                None => Ok(Verdict::Holds),
            }
        }
    }
}

/// conv(φ) on the trivial extension: no reachable cycle lies entirely in φ.
pub fn check_conv(g: &StateGraph, phi: &StateFormula) -> Result<Verdict> {
    holds_fast(
        g,
        &T::always_eventually(T::State(StateFormula::not(phi.clone()))),
        DEFAULT_LASSO_BUDGET,
    )
}

/// div(φ) on the trivial extension: no reachable cycle contains a ¬φ node.
pub fn check_div(g: &StateGraph, phi: &StateFormula) -> Result<Verdict> {
    holds_fast(g, &T::eventually_always(T::State(phi.clone())), DEFAULT_LASSO_BUDGET)
}

fn truncated(g: &StateGraph) -> Option<Verdict> {
    (!g.complete).then(|| Verdict::Indeterminate(format!("state graph truncated at {} nodes", g.budget)))
}

/// conv(φ) over the traces of an unextended machine: a finite trace violates
/// it when its last state satisfies φ.
pub fn check_conv_finite(g: &StateGraph, phi: &StateFormula) -> Result<Verdict> {
    finite_side(g, phi, true)
}

/// div(φ) over the traces of an unextended machine: a finite trace violates
/// it when its last state violates φ.
pub fn check_div_finite(g: &StateGraph, phi: &StateFormula) -> Result<Verdict> {
    finite_side(g, phi, false)
}

fn finite_side(g: &StateGraph, phi: &StateFormula, conv: bool) -> Result<Verdict> {
    if let Some(v) = truncated(g) {
        return Ok(v);
    }
    let a = Analysis::new(g);
    let s = g.sat(phi)?;
    let bad_end = if conv { s.clone() } else { not(&s) };
    let all = a.all();
    let n = g.len();
    let cyc_mask = if conv { s.clone() } else { all.clone() };
    let cyc = a.on_cycle(&cyc_mask);
    let mut candidates: Vec<(usize, bool)> = (0..n)
        .filter(|&v| cyc[v] && (conv || !s[v]))
        .map(|v| (v, true))
        .collect();
    candidates.extend(g.deadlocked_nodes().into_iter().filter(|&d| bad_end[d]).map(|d| (d, false)));
    candidates.sort_unstable();
    match candidates.first() {
        None => Ok(Verdict::Holds),
        Some(&(c, true)) => Ok(Verdict::Fails(Counterexample::Lasso(a.lasso(None, c, &cyc_mask)))),
        Some(&(d, false)) => Ok(Verdict::Fails(Counterexample::Finite(
            a.path(&g.initial, d, &all).expect("reachable"),
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailClass {
    Both,
    ConvSide,
    DivSide,
    Neither,
}

impl fmt::Display for TailClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailClass::Both => "both",
            TailClass::ConvSide => "conv-side",
            TailClass::DivSide => "div-side",
            TailClass::Neither => "neither",
        })
    }
}

/// Classifies φ by which of conv(¬φ), div(¬φ) the extension satisfies.
pub fn tail_homogeneous(g: &StateGraph, phi: &StateFormula) -> Result<TailClass> {
    let neg = StateFormula::not(phi.clone());
    let c = check_conv(g, &neg)?;
    let d = check_div(g, &neg)?;
    for v in [&c, &d] {
        if let Verdict::Indeterminate(r) = v {
            return Err(Error::Indeterminate(r.clone()));
        }
    }
    Ok(match (c.holds(), d.holds()) {
        (true, true) => TailClass::Both,
        (true, false) => TailClass::ConvSide,
        (false, true) => TailClass::DivSide,
        (false, false) => TailClass::Neither,
    })
}
