use std::collections::BTreeSet;

use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, FRAGMENT_MSG};
use crate::error::{Error, Result};
use crate::fol::{primed, StateFormula, Term};
use crate::hfset::HfSet;
use crate::machine::{AssignKind, Assignment, EventDef, Machine};
use crate::oracle::TemporalFormula;

const KEYWORDS: &[&str] = &[
    "machine", "atoms", "constants", "variables", "predicate", "init", "event", "any", "from", "where", "then",
    "end", "in", "forall", "exists", "true", "false", "Atoms", "nil", "U",
];

const FUNCTIONS: &[&str] = &[
    "bigunion", "theunique", "pair", "tuple", "cup", "minus", "len", "head", "tail", "append", "proj",
];

fn reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || FUNCTIONS.contains(&name)
}

type PResult<T> = std::result::Result<T, Diagnostic>;

/// Name resolution context.
#[derive(Clone, Debug, Default)]
struct Ctx {
    strict: bool,
    atoms: Vec<String>,
    consts: Vec<String>,
    vars: Vec<String>,
    predicates: Vec<(String, StateFormula)>,
    /// Parameters and quantifier-bound names, innermost last.
    bound: Vec<String>,
    allow_unprimed: bool,
    allow_primed: bool,
}

impl Ctx {
    fn permissive() -> Ctx {
        Ctx { allow_unprimed: true, allow_primed: true, ..Ctx::default() }
    }

    fn for_machine(m: &Machine) -> Ctx {
        Ctx {
            strict: true,
            atoms: m.atoms.clone(),
            consts: m.constants.iter().map(|(c, _)| c.clone()).collect(),
            vars: m.variables.clone(),
            predicates: m.predicates.clone(),
            bound: vec![],
            allow_unprimed: true,
            allow_primed: false,
        }
    }

    fn declared(&self, name: &str) -> bool {
        self.atoms.iter().any(|a| a == name)
            || self.consts.iter().any(|a| a == name)
            || self.vars.iter().any(|a| a == name)
            || self.predicates.iter().any(|(a, _)| a == name)
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    ctx: Ctx,
}

fn diag_at(t: &Token, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(t.line, t.col, msg)
}

impl Parser {
    fn new(src: &str, ctx: Ctx) -> std::result::Result<Parser, Vec<Diagnostic>> {
        Ok(Parser { toks: lex(src)?, pos: 0, ctx })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn cur(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(diag_at(self.cur(), msg))
    }

    fn expected<T>(&self, what: &str) -> PResult<T> {
        self.err(format!("expected {what}, found {}", self.peek().describe()))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.expected(&t.describe())
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.expected(&format!("`{kw}`"))
        }
    }

    /// A fresh (non-reserved, unprimed) identifier.
    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !reserved(&s) && !s.ends_with('\'') => {
                self.bump();
                Ok(s)
            }
            _ => self.expected(what),
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            Tok::Amp | Tok::Bar | Tok::Arrow => {
                self.err(format!("{FRAGMENT_MSG}: boolean combination of temporal formulas"))
            }
            Tok::Ident(s) if s == "U" => self.err(format!("{FRAGMENT_MSG}: until operator")),
            _ => self.expected("end of input"),
        }
    }

    // ---- terms ----

    fn term(&mut self) -> PResult<Term> {
        let tok = self.cur().clone();
        match tok.tok.clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Term::Nat(n))
            }
            Tok::LBrace => {
                self.bump();
                let mut elems = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        elems.push(self.term()?);
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        self.expect(&Tok::Comma)?;
                    }
                }
                let lits: Option<Vec<HfSet>> = elems.iter().map(|t| t.literal_value()).collect();
                Ok(match lits {
                    Some(vs) => Term::lit(HfSet::set(vs)),
                    None => Term::SetOf(elems),
                })
            }
            Tok::Ident(s) if FUNCTIONS.contains(&s.as_str()) => {
                self.bump();
                self.function(&s)
            }
            Tok::Ident(s) if s == "Atoms" => {
                self.bump();
                Ok(Term::Atoms)
            }
            Tok::Ident(s) if s == "nil" => {
                self.bump();
                Ok(Term::Nil)
            }
            Tok::Ident(s) if !reserved(&s) => {
                self.bump();
                self.resolve(&s, &tok)
            }
            _ => self.expected("a term"),
        }
    }

    fn resolve(&self, s: &str, tok: &Token) -> PResult<Term> {
        let c = &self.ctx;
        if c.bound.iter().any(|b| b == s) {
            return Ok(Term::Var(s.to_string()));
        }
        if let Some(base) = s.strip_suffix('\'') {
            if c.vars.iter().any(|v| v == base) || !c.strict {
                if !c.allow_primed {
                    return Err(diag_at(tok, format!("primed variable `{s}` is not allowed here")));
                }
                return Ok(Term::Var(s.to_string()));
            }
            return Err(diag_at(tok, format!("undeclared variable `{base}`")));
        }
        if c.vars.iter().any(|v| v == s) {
            if !c.allow_unprimed {
                return Err(diag_at(tok, format!("variable `{s}` has no value here; use `{s}'`")));
            }
            return Ok(Term::Var(s.to_string()));
        }
        if c.consts.iter().any(|v| v == s) {
            return Ok(Term::Const(s.to_string()));
        }
        if c.atoms.iter().any(|v| v == s) {
            return Ok(Term::Atom(s.to_string()));
        }
        if c.predicates.iter().any(|(p, _)| p == s) {
            return Err(diag_at(tok, format!("predicate `{s}` used as a term")));
        }
        if c.strict {
            Err(diag_at(tok, format!("undeclared identifier `{s}`")))
        } else {
            Ok(Term::Var(s.to_string()))
        }
    }

    fn args(&mut self) -> PResult<Vec<Term>> {
        self.expect(&Tok::LParen)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            if self.eat(&Tok::RParen) {
                return Ok(out);
            }
            self.expect(&Tok::Comma)?;
        }
    }

    fn function(&mut self, f: &str) -> PResult<Term> {
        let at = self.cur().clone();
        if f == "proj" {
            self.expect(&Tok::LParen)?;
            let t = self.term()?;
            self.expect(&Tok::Comma)?;
            let i = self.numeral()?;
            self.expect(&Tok::Comma)?;
            let n = self.numeral()?;
            self.expect(&Tok::RParen)?;
            if n == 0 || i >= n {
                return Err(diag_at(&at, format!("projection {i} out of range for arity {n}")));
            }
            return Ok(Term::Proj(Box::new(t), i, n));
        }
        let mut a = self.args()?;
        let arity = match f {
            "tuple" => return Ok(Term::Tuple(a)),
            "bigunion" | "theunique" | "len" | "head" | "tail" => 1,
            _ => 2,
        };
        if a.len() != arity {
            return Err(diag_at(&at, format!("`{f}` takes {arity} argument(s), got {}", a.len())));
        }
        let b1 = |t: Term| Box::new(t);
        let x = a.remove(0);
        Ok(match f {
            "bigunion" => Term::BigUnion(b1(x)),
            "theunique" => Term::TheUnique(b1(x)),
            "len" => Term::Len(b1(x)),
            "head" => Term::Head(b1(x)),
            "tail" => Term::Tail(b1(x)),
            "pair" => Term::Pair(b1(x), b1(a.remove(0))),
            "cup" => Term::Union(b1(x), b1(a.remove(0))),
            "minus" => Term::Diff(b1(x), b1(a.remove(0))),
            _ => Term::Append(b1(x), b1(a.remove(0))),
        })
    }

    fn numeral(&mut self) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.expected("a numeral"),
        }
    }

    // ---- state formulas ----

    fn formula(&mut self) -> PResult<StateFormula> {
        let lhs = self.disj()?;
        if self.peek() == &Tok::Arrow && self.peek_at(1) != &Tok::Dia {
            self.bump();
            let rhs = self.formula()?;
            return Ok(StateFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> PResult<StateFormula> {
        let mut f = self.conj()?;
        while self.eat(&Tok::Bar) {
            f = StateFormula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> PResult<StateFormula> {
        let mut f = self.unary()?;
        while self.eat(&Tok::Amp) {
            f = StateFormula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<StateFormula> {
        if self.eat(&Tok::Bang) {
            return Ok(StateFormula::not(self.unary()?));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            let universal = self.is_kw("forall");
            self.bump();
            let x = self.name("a bound variable")?;
            self.expect_kw("in").map_err(|d| {
                Diagnostic::new(d.line, d.col, format!("{}; quantifiers must be bounded (`x in t`)", d.message))
            })?;
            let d = self.term()?;
            self.expect(&Tok::Dot)?;
            self.ctx.bound.push(x.clone());
            let body = self.formula();
            self.ctx.bound.pop();
            let body = Box::new(body?);
            return Ok(if universal {
                StateFormula::Forall(x, d, body)
            } else {
                StateFormula::Exists(x, d, body)
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<StateFormula> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(StateFormula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(StateFormula::False)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Box | Tok::Dia => {
                self.err(format!("{FRAGMENT_MSG}: temporal operator inside a state formula"))
            }
            Tok::Ident(s) if !self.ctx.bound.contains(&s) && self.ctx.predicates.iter().any(|(p, _)| *p == s) => {
                self.bump();
                Ok(self.ctx.predicates.iter().find(|(p, _)| *p == s).unwrap().1.clone())
            }
            _ => {
                let a = self.term()?;
                let op = self.bump();
                let b = match op {
                    Tok::Ident(ref s) if s == "in" => self.term()?,
                    Tok::Eq | Tok::Neq | Tok::Lt | Tok::Le => self.term()?,
                    Tok::Ident(ref s) if s == "U" => {
                        self.pos -= 1;
                        return self.err(format!("{FRAGMENT_MSG}: until operator"));
                    }
                    _ => {
                        self.pos -= 1;
                        return self.expected("`in`, `=`, `!=`, `<` or `<=`");
                    }
                };
                Ok(match op {
                    Tok::Eq => StateFormula::Eq(a, b),
                    Tok::Neq => StateFormula::not(StateFormula::Eq(a, b)),
                    Tok::Lt => StateFormula::Lt(a, b),
                    Tok::Le => StateFormula::Le(a, b),
                    _ => StateFormula::In(a, b),
                })
            }
        }
    }

    // ---- temporal formulas ----

    fn temporal(&mut self) -> PResult<TemporalFormula> {
        match self.peek() {
            Tok::Box => {
                self.bump();
                self.box_body()
            }
            Tok::Dia => {
                self.bump();
                if !self.eat(&Tok::Box) {
                    return self.err(format!(
                        "{FRAGMENT_MSG}: `<>` is only allowed as `<> []`, `[] <>` or `[] (φ -> <> ψ)`"
                    ));
                }
                Ok(TemporalFormula::EventuallyAlways(Box::new(self.operand()?)))
            }
            _ => Ok(TemporalFormula::State(self.formula()?)),
        }
    }

    /// After `[]`.
    fn box_body(&mut self) -> PResult<TemporalFormula> {
        if self.eat(&Tok::Dia) {
            return Ok(TemporalFormula::AlwaysEventually(Box::new(self.operand()?)));
        }
        let save = self.pos;
        if let Some(p) = self.try_progress() {
            return Ok(p);
        }
        self.pos = save;
        Ok(TemporalFormula::Always(Box::new(self.operand()?)))
    }

    fn try_progress(&mut self) -> Option<TemporalFormula> {
        let paren = self.eat(&Tok::LParen);
        let ante = self.disj().ok()?;
        if !(self.eat(&Tok::Arrow) && self.eat(&Tok::Dia)) {
            return None;
        }
        let target = self.operand().ok()?;
        if paren && !self.eat(&Tok::RParen) {
            return None;
        }
        Some(TemporalFormula::Progress(ante, Box::new(target)))
    }

    /// Operand of a temporal operator: a whole state formula if one parses,
    /// else a temporal formula, possibly parenthesized.
    fn operand(&mut self) -> PResult<TemporalFormula> {
        match self.peek() {
            Tok::Box | Tok::Dia => return self.temporal(),
            _ => {}
        }
        let save = self.pos;
        let first = match self.formula() {
            Ok(f) => return Ok(TemporalFormula::State(f)),
            Err(d) => d,
        };
        let after_first = self.pos;
        self.pos = save;
        if self.eat(&Tok::LParen) {
            if let Ok(t) = self.temporal() {
                if self.eat(&Tok::RParen) {
                    return Ok(t);
                }
            }
        }
        self.pos = after_first;
        Err(first)
    }
}

fn finish<T>(r: std::result::Result<T, Diagnostic>) -> Result<T> {
    r.map_err(|d| Error::Parse(vec![d]))
}

fn parser(src: &str, ctx: Ctx) -> Result<Parser> {
    Parser::new(src, ctx).map_err(Error::Parse)
}

fn ctx_for(m: Option<&Machine>) -> Ctx {
    m.map(Ctx::for_machine).unwrap_or_else(Ctx::permissive)
}

/// Parses a □LTL formula without a machine; identifiers become variables.
pub fn parse_temporal(text: &str) -> Result<TemporalFormula> {
    parse_temporal_in(text, Ctx::permissive())
}

/// Parses a □LTL formula with identifiers resolved against a machine.
pub fn parse_temporal_for(text: &str, m: &Machine) -> Result<TemporalFormula> {
    parse_temporal_in(text, Ctx::for_machine(m))
}

fn parse_temporal_in(text: &str, ctx: Ctx) -> Result<TemporalFormula> {
    let mut p = parser(text, ctx)?;
    finish(p.temporal().and_then(|t| p.expect_eof().map(|_| t)))
}

pub fn parse_state_formula(text: &str, m: Option<&Machine>) -> Result<StateFormula> {
    let mut p = parser(text, ctx_for(m))?;
    finish(p.formula().and_then(|t| p.expect_eof().map(|_| t)))
}

pub fn parse_term(text: &str, m: Option<&Machine>) -> Result<Term> {
    let mut p = parser(text, ctx_for(m))?;
    finish(p.term().and_then(|t| p.expect_eof().map(|_| t)))
}

/// Parses `name : formula` lines. Blank lines and `//` comments are skipped.
pub fn parse_ltl_file(text: &str, m: Option<&Machine>) -> Result<Vec<(String, TemporalFormula)>> {
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split("//").next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let parsed = parser(body, ctx_for(m)).and_then(|mut p| {
            finish((|| {
                let name = p.name("a formula name")?;
                p.expect(&Tok::Colon)?;
                let f = p.temporal()?;
                p.expect_eof()?;
                Ok((name, f))
            })())
        });
        match parsed {
            Ok(entry) => {
                if out.iter().any(|(n, _): &(String, TemporalFormula)| *n == entry.0) {
                    diags.push(Diagnostic::new(i + 1, 1, format!("duplicate formula name `{}`", entry.0)));
                } else {
                    out.push(entry);
                }
            }
            Err(Error::Parse(ds)) => {
                diags.extend(ds.into_iter().map(|d| Diagnostic { line: i + 1, ..d }));
            }
            Err(e) => return Err(e),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(Error::Parse(diags))
    }
}

pub fn parse_machine(text: &str) -> Result<Machine> {
    let mut p = parser(text, Ctx { strict: true, ..Ctx::default() })?;
    finish(p.machine())
}

impl Parser {
    fn machine(&mut self) -> PResult<Machine> {
        if self.peek() == &Tok::Eof {
            return self.err("no machine declared");
        }
        self.expect_kw("machine")?;
        let name = self.name("a machine name")?;
        let mut m = Machine {
            name,
            atoms: vec![],
            constants: vec![],
            variables: vec![],
            init: vec![],
            events: vec![],
            predicates: vec![],
        };
        if self.eat_kw("atoms") {
            m.atoms = self.declare_list("an atom name")?;
            self.ctx.atoms = m.atoms.clone();
        }
        if self.eat_kw("constants") {
            loop {
                let c = self.declare("a constant name")?;
                self.expect(&Tok::Eq)?;
                self.ctx.allow_unprimed = false;
                let t = self.term()?;
                self.ctx.consts.push(c.clone());
                m.constants.push((c, t));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        if self.eat_kw("variables") {
            m.variables = self.declare_list("a variable name")?;
            self.ctx.vars = m.variables.clone();
        }
        let mut seen_init = false;
        loop {
            let at = self.cur().clone();
            if self.eat_kw("predicate") {
                let name = self.declare("a predicate name")?;
                self.expect(&Tok::Colon)?;
                self.ctx.allow_unprimed = true;
                self.ctx.allow_primed = false;
                let f = self.formula()?;
                self.ctx.predicates.push((name.clone(), f.clone()));
                m.predicates.push((name, f));
            } else if self.eat_kw("init") {
                if seen_init {
                    return Err(diag_at(&at, "duplicate `init` block"));
                }
                seen_init = true;
                self.ctx.allow_unprimed = false;
                self.ctx.allow_primed = true;
                m.init = self.assignments()?;
                self.expect_kw("end")?;
                let assigned: Vec<&str> = m.init.iter().map(|a| a.var.as_str()).collect();
                if let Some(v) = m.variables.iter().find(|v| !assigned.contains(&v.as_str())) {
                    return Err(diag_at(&at, format!("`init` does not assign variable `{v}`")));
                }
            } else if self.eat_kw("event") {
                let e = self.event()?;
                if m.events.iter().any(|x| x.name == e.name) {
                    return Err(diag_at(&at, format!("duplicate event `{}`", e.name)));
                }
                m.events.push(e);
            } else if self.peek() == &Tok::Eof {
                break;
            } else {
                return self.expected("`predicate`, `init`, `event` or end of input");
            }
        }
        if !seen_init {
            return self.err("missing `init` block");
        }
        Ok(m)
    }

    fn declare(&mut self, what: &str) -> PResult<String> {
        let at = self.cur().clone();
        let n = self.name(what)?;
        if self.ctx.declared(&n) {
            return Err(diag_at(&at, format!("`{n}` is declared twice")));
        }
        Ok(n)
    }

    fn declare_list(&mut self, what: &str) -> PResult<Vec<String>> {
        let mut out: Vec<String> = Vec::new();
        loop {
            let at = self.cur().clone();
            let n = self.declare(what)?;
            if out.contains(&n) {
                return Err(diag_at(&at, format!("`{n}` is declared twice")));
            }
            out.push(n);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn event(&mut self) -> PResult<EventDef> {
        let name = self.name("an event name")?;
        self.ctx.allow_unprimed = true;
        self.ctx.allow_primed = false;
        let mut params: Vec<(String, Term)> = Vec::new();
        if self.eat_kw("any") {
            loop {
                let at = self.cur().clone();
                let x = self.name("a parameter name")?;
                if self.ctx.declared(&x) || params.iter().any(|(p, _)| *p == x) {
                    return Err(diag_at(&at, format!("parameter `{x}` clashes with another name")));
                }
                self.expect_kw("from").map_err(|d| {
                    Diagnostic::new(d.line, d.col, format!("{}; every parameter needs a finite domain", d.message))
                })?;
                let d = self.term()?;
                self.ctx.bound.push(x.clone());
                params.push((x, d));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let guard = if self.eat_kw("where") { self.formula() } else { Ok(StateFormula::True) };
        let action = guard.and_then(|g| {
            let action = if self.eat_kw("then") {
                self.ctx.allow_primed = true;
                self.assignments()?
            } else {
                vec![]
            };
            Ok((g, action))
        });
        self.ctx.bound.clear();
        let (guard, action) = action?;
        self.expect_kw("end")?;
        Ok(EventDef { name, params, guard, action })
    }

    fn assignments(&mut self) -> PResult<Vec<Assignment>> {
        let mut out: Vec<Assignment> = Vec::new();
        let mut seen = BTreeSet::new();
        while let Tok::Ident(v) = self.peek().clone() {
            if reserved(&v) {
                break;
            }
            let at = self.cur().clone();
            self.bump();
            if !self.ctx.vars.contains(&v) {
                return Err(diag_at(&at, format!("assignment to undeclared variable `{v}`")));
            }
            if !seen.insert(v.clone()) {
                return Err(diag_at(&at, format!("variable `{v}` assigned twice")));
            }
            let kind = match self.bump() {
                Tok::Assign => AssignKind::Becomes(self.term()?),
                Tok::Colon => {
                    self.expect_kw("in")?;
                    AssignKind::In(self.term()?)
                }
                Tok::SuchThat => {
                    let pred = self.formula()?;
                    self.expect_kw("from").map_err(|d| {
                        Diagnostic::new(d.line, d.col, format!("{}; `:|` needs a finite candidate domain", d.message))
                    })?;
                    let domain = self.term()?;
                    if !pred.free_vars().contains(&primed(&v)) {
                        return Err(diag_at(&at, format!("`{v} :|` predicate does not mention `{v}'`")));
                    }
                    AssignKind::Such { pred, domain }
                }
                _ => {
                    self.pos -= 1;
                    return self.expected("`:=`, `:in` or `:|`");
                }
            };
            out.push(Assignment { var: v, kind });
            self.eat(&Tok::Semi);
        }
        Ok(out)
    }
}
