//! First-order formulas over ordered signatures: S-expression syntax,
//! quantifier depth, the existential fragment and model checking.
//!
//! Evaluation is generic over [`Model`]. Finite universes are enumerated; the
//! dense universe of rationals is handled by trying one point per order type
//! relative to the relevant constants, which is exact for formulas built from
//! `<`, `=` and relations with finitely many boundary points.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::structure::{active_domain, OrderedStructure, Point, Signature, Universe};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    Lit(Point),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
            Term::Lit(p) => write!(f, "{p}"),
        }
    }
}

/// `True` and `False` are additions to the usual atoms; they keep rewriting
/// and quantifier elimination total.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Less(Term, Term),
    Eq(Term, Term),
    /// `t1 + t2 = t3`
    Plus(Term, Term, Term),
    Rel(String, Vec<Term>),
    Mon(String, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(f))
    }

    pub fn less(a: Term, b: Term) -> Formula {
        Formula::Less(a, b)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    /// `a <= b`
    pub fn leq(a: Term, b: Term) -> Formula {
        Formula::Or(vec![Formula::Less(a.clone(), b.clone()), Formula::Eq(a, b)])
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![Formula::not(a), b])
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            Formula::True
                | Formula::False
                | Formula::Less(..)
                | Formula::Eq(..)
                | Formula::Plus(..)
                | Formula::Rel(..)
                | Formula::Mon(..)
        )
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Formula::Less(a, b) | Formula::Eq(a, b) => vec![a, b],
            Formula::Plus(a, b, c) => vec![a, b, c],
            Formula::Rel(_, ts) => ts.iter().collect(),
            Formula::Mon(_, t) => vec![t],
            _ => vec![],
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Less(a, b) => write!(f, "(< {a} {b})"),
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Plus(a, b, c) => write!(f, "(+ {a} {b} {c})"),
            Formula::Rel(n, ts) => {
                write!(f, "(rel {n}")?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                write!(f, ")")
            }
            Formula::Mon(n, t) => write!(f, "(mon {n} {t})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                let op = if matches!(self, Formula::And(_)) { "and" } else { "or" };
                write!(f, "({op}")?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Exists(v, g) => write!(f, "(E {v} {g})"),
            Formula::Forall(v, g) => write!(f, "(A {v} {g})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("{name} expects {expected} arguments, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("variable {0} is not bound")]
    Unbound(String),
    #[error("point {0} lies outside the universe")]
    OutsideUniverse(Point),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("universe cannot be enumerated")]
    NotEnumerable,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    Word(String),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        match c {
            '(' => {
                out.push((pos, Tok::Open));
                i += 1;
            }
            ')' => {
                out.push((pos, Tok::Close));
                i += 1;
            }
            ';' => {
                while i < bytes.len() && bytes[i].1 != '\n' {
                    i += 1;
                }
            }
            c if c.is_whitespace() => i += 1,
            _ => {
                let start = pos;
                let mut word = String::new();
                while i < bytes.len() {
                    let c = bytes[i].1;
                    if c == '(' || c == ')' || c.is_whitespace() || c == ';' {
                        break;
                    }
                    word.push(c);
                    i += 1;
                }
                out.push((start, Tok::Word(word)));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    sig: &'a Signature,
    end: usize,
}

impl Parser<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LogicError> {
        Err(LogicError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.1.clone());
        self.at += 1;
        t
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn word(&mut self) -> Result<String, LogicError> {
        match self.next() {
            Some(Tok::Word(w)) => Ok(w),
            _ => {
                self.at -= 1;
                self.err("expected a name")
            }
        }
    }

    fn close(&mut self) -> Result<(), LogicError> {
        match self.next() {
            Some(Tok::Close) => Ok(()),
            _ => {
                self.at -= 1;
                self.err("expected ')'")
            }
        }
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        let w = self.word()?;
        let first = w.chars().next().unwrap_or(' ');
        if first.is_ascii_digit() || (first == '-' && w.len() > 1) {
            return match w.parse::<Point>() {
                Ok(p) => Ok(Term::Lit(p)),
                Err(e) => {
                    self.at -= 1;
                    self.err(e)
                }
            };
        }
        if !valid_ident(&w) {
            self.at -= 1;
            return self.err(format!("bad identifier {w:?}"));
        }
        if self.sig.has_constant(&w) {
            Ok(Term::Const(w))
        } else {
            Ok(Term::Var(w))
        }
    }

    fn var(&mut self) -> Result<String, LogicError> {
        let w = self.word()?;
        if !valid_ident(&w) || self.sig.has_constant(&w) {
            self.at -= 1;
            return self.err(format!("{w:?} cannot be bound"));
        }
        Ok(w)
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        match self.next() {
            Some(Tok::Word(w)) if w == "true" => return Ok(Formula::True),
            Some(Tok::Word(w)) if w == "false" => return Ok(Formula::False),
            Some(Tok::Open) => {}
            _ => {
                self.at = self.at.saturating_sub(1);
                return self.err("expected '('");
            }
        }
        let head = self.word()?;
        let f = match head.as_str() {
            "not" => Formula::not(self.formula()?),
            "and" | "or" => {
                let mut parts = Vec::new();
                while self.peek() != Some(&Tok::Close) && self.peek().is_some() {
                    parts.push(self.formula()?);
                }
                if head == "and" {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
            "E" | "A" => {
                let v = self.var()?;
                let body = self.formula()?;
                if head == "E" {
                    Formula::exists(&v, body)
                } else {
                    Formula::forall(&v, body)
                }
            }
            "<" => Formula::Less(self.term()?, self.term()?),
            "=" => Formula::Eq(self.term()?, self.term()?),
            "+" => Formula::Plus(self.term()?, self.term()?, self.term()?),
            "rel" => {
                let name = self.word()?;
                let arity = self
                    .sig
                    .arity(&name)
                    .ok_or_else(|| LogicError::UnknownSymbol(name.clone()))?;
                let mut ts = Vec::new();
                while self.peek() != Some(&Tok::Close) && self.peek().is_some() {
                    ts.push(self.term()?);
                }
                if ts.len() != arity {
                    return Err(LogicError::Arity {
                        name,
                        expected: arity,
                        found: ts.len(),
                    });
                }
                Formula::Rel(name, ts)
            }
            "mon" => {
                let name = self.word()?;
                if !self.sig.has_monadic(&name) {
                    return Err(LogicError::UnknownSymbol(name));
                }
                Formula::Mon(name, self.term()?)
            }
            other => {
                self.at -= 1;
                return self.err(format!("unknown operator {other:?}"));
            }
        };
        self.close()?;
        Ok(f)
    }
}

fn valid_ident(w: &str) -> bool {
    let mut cs = w.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '\''))
}

/// Reads one formula; identifiers naming constants of `sig` become constant
/// terms, every other identifier is a variable.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, LogicError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        sig,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.at < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

pub fn quantifier_depth(f: &Formula) -> usize {
    match f {
        Formula::Not(g) => quantifier_depth(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().map(quantifier_depth).max().unwrap_or(0),
        Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + quantifier_depth(g),
        _ => 0,
    }
}

pub fn is_quantifier_free(f: &Formula) -> bool {
    quantifier_depth(f) == 0
}

/// Built from quantifier-free formulas with `and`, `or` and `E` only; such a
/// formula is equivalent to an existential block over a quantifier-free matrix.
pub fn is_existential(f: &Formula) -> bool {
    match f {
        Formula::And(gs) | Formula::Or(gs) => gs.iter().all(is_existential),
        Formula::Exists(_, g) => is_existential(g),
        Formula::Forall(..) => false,
        g => is_quantifier_free(g),
    }
}

/// Boolean combinations of existential formulas.
pub fn is_bc_efo(f: &Formula) -> bool {
    if is_existential(f) {
        return true;
    }
    match f {
        Formula::Not(g) => is_bc_efo(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().all(is_bc_efo),
        _ => false,
    }
}

pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match f {
            Formula::Not(g) => go(g, bound, out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, bound, out)),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                bound.push(v.clone());
                go(g, bound, out);
                bound.pop();
            }
            atom => {
                for t in atom.terms() {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Literal points occurring in `f`.
pub fn literals(f: &Formula) -> Vec<Point> {
    let mut out = BTreeSet::new();
    fn go(f: &Formula, out: &mut BTreeSet<Point>) {
        match f {
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => go(g, out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, out)),
            atom => {
                for t in atom.terms() {
                    if let Term::Lit(p) = t {
                        out.insert(p.clone());
                    }
                }
            }
        }
    }
    go(f, &mut out);
    out.into_iter().collect()
}

/// Every variable name occurring anywhere, bound or free.
pub fn all_vars(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(f: &Formula, out: &mut BTreeSet<String>) {
        match f {
            Formula::Not(g) => go(g, out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, out)),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                out.insert(v.clone());
                go(g, out);
            }
            atom => {
                for t in atom.terms() {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
        }
    }
    go(f, &mut out);
    out
}

/// Replaces free occurrences of variables by terms. Bound variables that would
/// capture a substituted variable are renamed first.
pub fn substitute(f: &Formula, map: &HashMap<String, Term>) -> Formula {
    let mut counter = 0usize;
    let mut avoid: BTreeSet<String> = all_vars(f);
    for t in map.values() {
        if let Term::Var(v) = t {
            avoid.insert(v.clone());
        }
    }
    subst_inner(f, map, &mut avoid, &mut counter)
}

fn subst_term(t: &Term, map: &HashMap<String, Term>) -> Term {
    match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        _ => t.clone(),
    }
}

fn subst_inner(
    f: &Formula,
    map: &HashMap<String, Term>,
    avoid: &mut BTreeSet<String>,
    counter: &mut usize,
) -> Formula {
    let st = |t: &Term| subst_term(t, map);
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Less(a, b) => Formula::Less(st(a), st(b)),
        Formula::Eq(a, b) => Formula::Eq(st(a), st(b)),
        Formula::Plus(a, b, c) => Formula::Plus(st(a), st(b), st(c)),
        Formula::Rel(n, ts) => Formula::Rel(n.clone(), ts.iter().map(st).collect()),
        Formula::Mon(n, t) => Formula::Mon(n.clone(), st(t)),
        Formula::Not(g) => Formula::not(subst_inner(g, map, avoid, counter)),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| subst_inner(g, map, avoid, counter)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| subst_inner(g, map, avoid, counter)).collect()),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let mut inner = map.clone();
            inner.remove(v);
            let captures = inner
                .values()
                .any(|t| matches!(t, Term::Var(w) if w == v));
            let (name, body) = if captures {
                let fresh = loop {
                    *counter += 1;
                    let cand = format!("{v}_{counter}");
                    if !avoid.contains(&cand) {
                        break cand;
                    }
                };
                avoid.insert(fresh.clone());
                inner.insert(v.clone(), Term::Var(fresh.clone()));
                (fresh, subst_inner(g, &inner, avoid, counter))
            } else {
                (v.clone(), subst_inner(g, &inner, avoid, counter))
            };
            if matches!(f, Formula::Exists(..)) {
                Formula::Exists(name, Box::new(body))
            } else {
                Formula::Forall(name, Box::new(body))
            }
        }
    }
}

/// A structure formulas can be evaluated in.
pub trait Model {
    fn constant(&self, name: &str) -> Option<Point>;
    fn relation(&self, name: &str, args: &[Point]) -> Result<bool, LogicError>;
    fn monadic(&self, name: &str, x: &Point) -> Result<bool, LogicError>;
    fn plus(&self, x: &Point, y: &Point, z: &Point) -> Result<bool, LogicError>;
    fn contains(&self, p: &Point) -> bool;
    /// The points a quantifier has to try. `anchors` are the values the
    /// quantified formula depends on besides the model's own constants.
    fn witnesses(&self, anchors: &[Point]) -> Result<Vec<Point>, LogicError>;
}

/// Order-type representatives over `cuts`: every cut, one point in each gap
/// and one beyond each end.
pub fn dense_witnesses(cuts: &BTreeSet<Point>) -> Vec<Point> {
    let cuts: Vec<&Point> = cuts.iter().collect();
    if cuts.is_empty() {
        return vec![Point::int(0)];
    }
    let one = Point::int(1);
    let mut out = Vec::with_capacity(2 * cuts.len() + 1);
    out.push(cuts[0].sub(&one));
    for (i, c) in cuts.iter().enumerate() {
        out.push((*c).clone());
        match cuts.get(i + 1) {
            Some(d) => out.push(c.midpoint(d)),
            None => out.push(c.add(&one)),
        }
    }
    out
}

/// A structure with an enumerable universe.
pub struct FiniteModel<'a> {
    pub structure: &'a OrderedStructure,
    points: Vec<Point>,
}

/// Largest universe we are willing to enumerate in evaluation.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

impl<'a> FiniteModel<'a> {
    pub fn new(structure: &'a OrderedStructure) -> Result<Self, LogicError> {
        let points = structure
            .universe
            .enumerate(ENUMERATION_LIMIT)
            .ok_or(LogicError::NotEnumerable)?;
        Ok(FiniteModel { structure, points })
    }
}

fn rel_lookup(s: &OrderedStructure, name: &str, args: &[Point]) -> Result<bool, LogicError> {
    match s.relations.get(name) {
        Some(set) => Ok(set.contains(args)),
        None if s.signature.arity(name).is_some() => Ok(false),
        None => Err(LogicError::UnknownSymbol(name.to_string())),
    }
}

fn mon_lookup(s: &OrderedStructure, name: &str, x: &Point) -> Result<bool, LogicError> {
    match s.monadic.get(name) {
        Some(set) => Ok(set.contains(x)),
        None if s.signature.has_monadic(name) => Ok(false),
        None => Err(LogicError::UnknownSymbol(name.to_string())),
    }
}

impl Model for FiniteModel<'_> {
    fn constant(&self, name: &str) -> Option<Point> {
        self.structure.constant(name).cloned()
    }

    fn relation(&self, name: &str, args: &[Point]) -> Result<bool, LogicError> {
        rel_lookup(self.structure, name, args)
    }

    fn monadic(&self, name: &str, x: &Point) -> Result<bool, LogicError> {
        mon_lookup(self.structure, name, x)
    }

    fn plus(&self, x: &Point, y: &Point, z: &Point) -> Result<bool, LogicError> {
        Ok(&x.add(y) == z)
    }

    fn contains(&self, p: &Point) -> bool {
        self.structure.universe.contains(p)
    }

    fn witnesses(&self, _anchors: &[Point]) -> Result<Vec<Point>, LogicError> {
        Ok(self.points.clone())
    }
}

/// A database over the rationals with finitely many tuples and constants.
pub struct DenseModel<'a> {
    pub structure: &'a OrderedStructure,
    cuts: BTreeSet<Point>,
}

impl<'a> DenseModel<'a> {
    pub fn new(structure: &'a OrderedStructure) -> Self {
        let mut cuts = active_domain(structure);
        for m in structure.monadic.values() {
            cuts.extend(m.iter().cloned());
        }
        DenseModel { structure, cuts }
    }
}

impl Model for DenseModel<'_> {
    fn constant(&self, name: &str) -> Option<Point> {
        self.structure.constant(name).cloned()
    }

    fn relation(&self, name: &str, args: &[Point]) -> Result<bool, LogicError> {
        rel_lookup(self.structure, name, args)
    }

    fn monadic(&self, name: &str, x: &Point) -> Result<bool, LogicError> {
        mon_lookup(self.structure, name, x)
    }

    fn plus(&self, _: &Point, _: &Point, _: &Point) -> Result<bool, LogicError> {
        Err(LogicError::Unsupported("addition over a dense universe".into()))
    }

    fn contains(&self, _p: &Point) -> bool {
        true
    }

    fn witnesses(&self, anchors: &[Point]) -> Result<Vec<Point>, LogicError> {
        let mut cuts = self.cuts.clone();
        cuts.extend(anchors.iter().cloned());
        Ok(dense_witnesses(&cuts))
    }
}

/// Variable assignment.
pub type Assignment = HashMap<String, Point>;

/// Evaluates with a cache for quantified subformulas keyed by the values of
/// their free variables. Structurally equal subformulas share cache entries,
/// so one evaluator can serve many formulas that repeat the same pieces.
pub struct Evaluator<'m, 'f, M: Model + ?Sized> {
    model: &'m M,
    ids: HashMap<&'f Formula, usize>,
    free: HashMap<*const Formula, (usize, Vec<String>, Vec<Point>)>,
    memo: HashMap<(usize, Vec<Point>), bool>,
}

impl<'m, 'f, M: Model + ?Sized> Evaluator<'m, 'f, M> {
    pub fn new(model: &'m M) -> Self {
        Evaluator {
            model,
            ids: HashMap::new(),
            free: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    fn term(&self, t: &Term, env: &[(String, Point)]) -> Result<Point, LogicError> {
        let p = match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, p)| p.clone())
                .ok_or_else(|| LogicError::Unbound(v.clone()))?,
            Term::Const(c) => self
                .model
                .constant(c)
                .ok_or_else(|| LogicError::UnknownSymbol(c.clone()))?,
            Term::Lit(p) => p.clone(),
        };
        if !self.model.contains(&p) {
            return Err(LogicError::OutsideUniverse(p));
        }
        Ok(p)
    }

    /// Truth value of `f` under `env` (later bindings shadow earlier ones).
    pub fn eval(&mut self, f: &'f Formula, env: &mut Vec<(String, Point)>) -> Result<bool, LogicError> {
        match f {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Less(a, b) => Ok(self.term(a, env)? < self.term(b, env)?),
            Formula::Eq(a, b) => Ok(self.term(a, env)? == self.term(b, env)?),
            Formula::Plus(a, b, c) => {
                let (x, y, z) = (self.term(a, env)?, self.term(b, env)?, self.term(c, env)?);
                self.model.plus(&x, &y, &z)
            }
            Formula::Rel(n, ts) => {
                let args = ts
                    .iter()
                    .map(|t| self.term(t, env))
                    .collect::<Result<Vec<_>, _>>()?;
                self.model.relation(n, &args)
            }
            Formula::Mon(n, t) => {
                let x = self.term(t, env)?;
                self.model.monadic(n, &x)
            }
            Formula::Not(g) => Ok(!self.eval(g, env)?),
            Formula::And(gs) => {
                for g in gs {
                    if !self.eval(g, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(gs) => {
                for g in gs {
                    if self.eval(g, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let (key_id, free, lits) = match self.free.get(&(f as *const Formula)) {
                    Some(e) => e.clone(),
                    None => {
                        let next = self.ids.len();
                        let id = *self.ids.entry(f).or_insert(next);
                        let e = (id, free_vars(f).into_iter().collect(), literals(f));
                        self.free.insert(f as *const Formula, e.clone());
                        e
                    }
                };
                let mut values = Vec::with_capacity(free.len());
                for name in &free {
                    values.push(self.term(&Term::Var(name.clone()), env)?);
                }
                let key = (key_id, values);
                if let Some(&b) = self.memo.get(&key) {
                    return Ok(b);
                }
                let want = matches!(f, Formula::Exists(..));
                let mut result = !want;
                let mut anchors = key.1.clone();
                anchors.extend(lits);
                for w in self.model.witnesses(&anchors)? {
                    env.push((v.clone(), w));
                    let r = self.eval(g, env);
                    env.pop();
                    if r? == want {
                        result = want;
                        break;
                    }
                }
                self.memo.insert(key, result);
                Ok(result)
            }
        }
    }
}

/// Truth value in any model.
pub fn evaluate_in<M: Model + ?Sized>(
    f: &Formula,
    model: &M,
    a: &Assignment,
) -> Result<bool, LogicError> {
    let mut env: Vec<(String, Point)> = a.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    env.sort();
    Evaluator::new(model).eval(f, &mut env)
}

/// Truth value in `s`; quantifiers range over the universe (one point per
/// order type when the universe is dense).
pub fn evaluate(f: &Formula, s: &OrderedStructure, a: &Assignment) -> Result<bool, LogicError> {
    match s.universe {
        Universe::Rationals => evaluate_in(f, &DenseModel::new(s), a),
        _ => evaluate_in(f, &FiniteModel::new(s)?, a),
    }
}

/// Convenience for building literal terms.
pub fn lit(v: i64) -> Term {
    Term::Lit(Point::int(v))
}

pub fn lit_rational(v: BigRational) -> Term {
    Term::Lit(Point(v))
}

pub fn lit_big(v: BigInt) -> Term {
    Term::Lit(Point::from_bigint(v))
}
