//! Hereditarily finite sets over a finite set of atoms.
//!
//! Values are immutable and canonical: elements are kept sorted and
//! deduplicated, so structural equality is extensional equality. Each set
//! node caches its representation size, which backs the node budget.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default upper bound on the number of nodes in a single value.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Clone)]
pub enum HfSet {
    Atom(Arc<str>),
    Set(Arc<SetNode>),
}

#[derive(Debug)]
pub struct SetNode {
    elems: Vec<HfSet>,
    size: usize,
    digest: u64,
}

impl PartialEq for HfSet {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (HfSet::Atom(a), HfSet::Atom(b)) => a == b,
            (HfSet::Set(a), HfSet::Set(b)) => {
                Arc::ptr_eq(a, b)
                    || (a.digest == b.digest && a.size == b.size && a.elems == b.elems)
            }
            _ => false,
        }
    }
}

impl Eq for HfSet {}

impl Ord for HfSet {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (HfSet::Atom(a), HfSet::Atom(b)) => a.cmp(b),
            (HfSet::Atom(_), HfSet::Set(_)) => Ordering::Less,
            (HfSet::Set(_), HfSet::Atom(_)) => Ordering::Greater,
            (HfSet::Set(a), HfSet::Set(b)) => {
                if Arc::ptr_eq(a, b) {
                    Ordering::Equal
                } else {
                    a.elems.cmp(&b.elems)
                }
            }
        }
    }
}

impl PartialOrd for HfSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::hash::Hash for HfSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            HfSet::Atom(a) => {
                0u8.hash(state);
                a.hash(state);
            }
            HfSet::Set(s) => {
                1u8.hash(state);
                s.digest.hash(state);
            }
        }
    }
}

impl fmt::Debug for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl HfSet {
    pub fn empty() -> HfSet {
        HfSet::from_sorted(Vec::new())
    }

    pub fn atom(name: &str) -> HfSet {
        HfSet::Atom(Arc::from(name))
    }

    /// Builds a set from arbitrary elements (sorted and deduplicated here).
    pub fn set<I: IntoIterator<Item = HfSet>>(elems: I) -> HfSet {
        let mut v: Vec<HfSet> = elems.into_iter().collect();
        v.sort();
        v.dedup();
        HfSet::from_sorted(v)
    }

    /// Like [`HfSet::set`], refusing results larger than `budget` nodes.
    pub fn try_set<I: IntoIterator<Item = HfSet>>(elems: I, budget: usize) -> Result<HfSet> {
        let s = HfSet::set(elems);
        s.check_budget(budget)?;
        Ok(s)
    }

    fn from_sorted(elems: Vec<HfSet>) -> HfSet {
        use std::hash::{Hash, Hasher};
        let size = 1 + elems.iter().map(HfSet::size).sum::<usize>();
        let mut h = std::collections::hash_map::DefaultHasher::new();
        size.hash(&mut h);
        for e in &elems {
            e.hash(&mut h);
        }
        let digest = h.finish();
        HfSet::Set(Arc::new(SetNode { elems, size, digest }))
    }

    /// Number of nodes in the tree representation.
    pub fn size(&self) -> usize {
        match self {
            HfSet::Atom(_) => 1,
            HfSet::Set(s) => s.size,
        }
    }

    pub fn check_budget(&self, budget: usize) -> Result<()> {
        if self.size() > budget {
            Err(Error::Budget(format!(
                "value of {} nodes exceeds the node budget {}",
                self.size(),
                budget
            )))
        } else {
            Ok(())
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, HfSet::Atom(_))
    }

    pub fn atom_name(&self) -> Option<&str> {
        match self {
            HfSet::Atom(a) => Some(a),
            HfSet::Set(_) => None,
        }
    }

    pub fn is_empty_set(&self) -> bool {
        matches!(self, HfSet::Set(s) if s.elems.is_empty())
    }

    /// Elements in canonical order; atoms have none.
    pub fn elements(&self) -> &[HfSet] {
        match self {
            HfSet::Atom(_) => &[],
            HfSet::Set(s) => &s.elems,
        }
    }

    pub fn len(&self) -> usize {
        self.elements().len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements().is_empty()
    }

    pub fn contains(&self, x: &HfSet) -> bool {
        self.elements().binary_search(x).is_ok()
    }

    fn expect_set(&self, op: &str) -> Result<&[HfSet]> {
        match self {
            HfSet::Atom(a) => Err(Error::Domain(format!("{op} applied to atom {a}"))),
            HfSet::Set(s) => Ok(&s.elems),
        }
    }

    pub fn is_subset(&self, other: &HfSet) -> bool {
        self.elements().iter().all(|x| other.contains(x))
    }

    pub fn union(&self, other: &HfSet) -> Result<HfSet> {
        let a = self.expect_set("union")?;
        let b = other.expect_set("union")?;
        Ok(HfSet::set(a.iter().chain(b.iter()).cloned()))
    }

    pub fn difference(&self, other: &HfSet) -> Result<HfSet> {
        let a = self.expect_set("difference")?;
        other.expect_set("difference")?;
        Ok(HfSet::from_sorted(
            a.iter().filter(|x| !other.contains(x)).cloned().collect(),
        ))
    }

    pub fn insert(&self, x: HfSet) -> Result<HfSet> {
        let a = self.expect_set("insert")?;
        Ok(HfSet::set(a.iter().cloned().chain(std::iter::once(x))))
    }

    /// The set of declared atoms.
    pub fn atoms<S: AsRef<str>>(declared: &[S]) -> HfSet {
        HfSet::set(declared.iter().map(|a| HfSet::atom(a.as_ref())))
    }

    /// Union of the set-valued elements; atom elements contribute nothing.
    pub fn big_union(&self) -> Result<HfSet> {
        let a = self.expect_set("big union")?;
        Ok(HfSet::set(
            a.iter().flat_map(|x| x.elements().iter().cloned()),
        ))
    }

    /// Sole element of a singleton, the empty set otherwise.
    pub fn the_unique(&self) -> Result<HfSet> {
        let a = self.expect_set("the_unique")?;
        Ok(if a.len() == 1 { a[0].clone() } else { HfSet::empty() })
    }

    pub fn pair(x: &HfSet, y: &HfSet) -> HfSet {
        HfSet::set([x.clone(), y.clone()])
    }

    pub fn singleton(x: &HfSet) -> HfSet {
        HfSet::from_sorted(vec![x.clone()])
    }

    /// All members reachable by descending through membership.
    pub fn transitive_closure(&self) -> HfSet {
        HfSet::set(self.tc_members())
    }

    fn tc_members(&self) -> BTreeSet<HfSet> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<&HfSet> = self.elements().iter().collect();
        while let Some(x) = stack.pop() {
            if out.insert(x.clone()) {
                stack.extend(x.elements().iter());
            }
        }
        out
    }

    pub fn tc_size(&self) -> usize {
        self.tc_members().len()
    }

    /// `TC(self) ⊆ TC(other)`.
    pub fn leq(&self, other: &HfSet) -> bool {
        if self == other {
            return true;
        }
        let b = other.tc_members();
        self.tc_members().iter().all(|x| b.contains(x))
    }

    /// `TC(self) ⊊ TC(other)`.
    pub fn lt(&self, other: &HfSet) -> bool {
        let a = self.tc_members();
        let b = other.tc_members();
        a.len() < b.len() && a.iter().all(|x| b.contains(x))
    }

    pub fn von_neumann(n: usize) -> HfSet {
        let mut elems: Vec<HfSet> = Vec::with_capacity(n);
        for _ in 0..n {
            let next = HfSet::from_sorted(elems.clone());
            elems.push(next);
        }
        HfSet::from_sorted(elems)
    }

    /// Inverse of [`HfSet::von_neumann`]; `None` on sets that are not ordinals.
    pub fn as_natural(&self) -> Option<usize> {
        let elems = match self {
            HfSet::Atom(_) => return None,
            HfSet::Set(s) => &s.elems,
        };
        // Canonical order sorts 0 < 1 < ... since each ordinal is a prefix of the next.
        for (k, e) in elems.iter().enumerate() {
            let inner = e.elements();
            if e.is_atom() || inner.len() != k || inner != &elems[..k] {
                return None;
            }
        }
        Some(elems.len())
    }

    /// Kuratowski pair `{{x}, {x, y}}`.
    pub fn kpair(x: &HfSet, y: &HfSet) -> HfSet {
        HfSet::set([HfSet::singleton(x), HfSet::pair(x, y)])
    }

    pub fn decode_kpair(p: &HfSet) -> Option<(HfSet, HfSet)> {
        if p.is_atom() {
            return None;
        }
        let e = p.elements();
        match e.len() {
            1 => {
                let s = &e[0];
                if s.is_atom() || s.len() != 1 {
                    return None;
                }
                Some((s.elements()[0].clone(), s.elements()[0].clone()))
            }
            2 => {
                let (single, double) = if e[0].len() == 1 { (&e[0], &e[1]) } else { (&e[1], &e[0]) };
                if single.is_atom() || double.is_atom() || single.len() != 1 || double.len() != 2 {
                    return None;
                }
                let x = &single.elements()[0];
                if !double.contains(x) {
                    return None;
                }
                let y = double.elements().iter().find(|z| *z != x)?;
                Some((x.clone(), y.clone()))
            }
            _ => None,
        }
    }

    /// Right-nested Kuratowski tuple; `[]` is ∅ and `[x]` is `x`.
    pub fn encode_tuple(xs: &[HfSet]) -> HfSet {
        match xs {
            [] => HfSet::empty(),
            [x] => x.clone(),
            [x, rest @ ..] => HfSet::kpair(x, &HfSet::encode_tuple(rest)),
        }
    }

    pub fn decode_tuple(x: &HfSet, arity: usize) -> Option<Vec<HfSet>> {
        match arity {
            0 => x.is_empty_set().then(Vec::new),
            1 => Some(vec![x.clone()]),
            n => {
                let (a, rest) = HfSet::decode_kpair(x)?;
                let mut out = vec![a];
                out.extend(HfSet::decode_tuple(&rest, n - 1)?);
                Some(out)
            }
        }
    }

    /// Rendering with von Neumann naturals written as numerals.
    pub fn pretty(&self) -> String {
        let mut s = String::new();
        self.write_literal(&mut s, true);
        s
    }

    fn write_literal(&self, out: &mut String, numerals: bool) {
        match self {
            HfSet::Atom(a) => out.push_str(a),
            HfSet::Set(s) => {
                if numerals && !s.elems.is_empty() {
                    if let Some(n) = self.as_natural() {
                        out.push_str(&n.to_string());
                        return;
                    }
                }
                out.push('{');
                for (i, e) in s.elems.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    e.write_literal(out, numerals);
                }
                out.push('}');
            }
        }
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_literal(&mut s, false);
        f.write_str(&s)
    }
}

impl FromStr for HfSet {
    type Err = Error;

    /// Accepts atoms, `{...}` and decimal numerals (von Neumann naturals).
    fn from_str(s: &str) -> Result<HfSet> {
        let mut p = LitParser { src: s.as_bytes(), pos: 0 };
        let v = p.value()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(v)
    }
}

struct LitParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl LitParser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Literal(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn value(&mut self) -> Result<HfSet> {
        self.skip_ws();
        let Some(&c) = self.src.get(self.pos) else {
            return Err(self.err("unexpected end of literal"));
        };
        if c == b'{' {
            self.pos += 1;
            let mut elems = Vec::new();
            self.skip_ws();
            if self.src.get(self.pos) == Some(&b'}') {
                self.pos += 1;
                return Ok(HfSet::empty());
            }
            loop {
                elems.push(self.value()?);
                self.skip_ws();
                match self.src.get(self.pos) {
                    Some(b',') => self.pos += 1,
                    Some(b'}') => {
                        self.pos += 1;
                        return Ok(HfSet::set(elems));
                    }
                    _ => return Err(self.err("expected ',' or '}'")),
                }
            }
        } else if c.is_ascii_digit() {
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let n: usize = text.parse().map_err(|_| self.err("numeral too large"))?;
            Ok(HfSet::von_neumann(n))
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            Ok(HfSet::atom(std::str::from_utf8(&self.src[start..self.pos]).unwrap()))
        } else {
            Err(self.err("unexpected character"))
        }
    }
}

impl serde::Serialize for HfSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for HfSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<HfSet, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
