//! Finite linearly ordered relational structures over exact rational points.
//!
//! Everything here is immutable data plus checks: active domains, partial
//! isomorphisms, relocation of databases along order-preserving maps, and a
//! small line-oriented text format.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact rational position on the line.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub BigRational);

impl Point {
    pub fn int(v: i64) -> Self {
        Point(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Point(BigRational::from_integer(v))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Point(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_bigint(&self) -> Option<BigInt> {
        self.0.is_integer().then(|| self.0.to_integer())
    }

    pub fn floor(&self) -> Point {
        Point(self.0.floor())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(&self.0 - &other.0)
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point((&self.0 + &other.0) / BigRational::from_integer(BigInt::from(2)))
    }
}

impl From<i64> for Point {
    fn from(v: i64) -> Self {
        Point::int(v)
    }
}

impl From<BigInt> for Point {
    fn from(v: BigInt) -> Self {
        Point::from_bigint(v)
    }
}

impl From<BigRational> for Point {
    fn from(v: BigRational) -> Self {
        Point(v)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Point)
    }
}

/// Parses `n` or `p/q` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("not a rational number: {s:?}");
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Where quantifiers and players range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Universe {
    /// Explicit strictly increasing list.
    Points(Vec<Point>),
    /// Every integer in `lo..=hi`. The flag marks a window standing in for an
    /// unbounded-above universe.
    Window {
        lo: BigInt,
        hi: BigInt,
        unbounded_above: bool,
    },
    /// The dense order of all rationals.
    Rationals,
}

impl Universe {
    pub fn window(lo: i64, hi: i64) -> Self {
        Universe::Window {
            lo: lo.into(),
            hi: hi.into(),
            unbounded_above: false,
        }
    }

    pub fn range(lo: i64, hi: i64) -> Self {
        Universe::Points((lo..=hi).map(Point::int).collect())
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Universe::Points(ps) => ps.binary_search(p).is_ok(),
            Universe::Window { lo, hi, .. } => match p.to_bigint() {
                Some(v) => &v >= lo && &v <= hi,
                None => false,
            },
            Universe::Rationals => true,
        }
    }

    /// Number of points, `None` for the dense universe.
    pub fn size(&self) -> Option<BigInt> {
        match self {
            Universe::Points(ps) => Some(BigInt::from(ps.len())),
            Universe::Window { lo, hi, .. } => {
                if hi < lo {
                    Some(BigInt::zero())
                } else {
                    Some(hi - lo + 1)
                }
            }
            Universe::Rationals => None,
        }
    }

    /// All points, provided there are at most `limit` of them.
    pub fn enumerate(&self, limit: usize) -> Option<Vec<Point>> {
        match self {
            Universe::Points(ps) => (ps.len() <= limit).then(|| ps.clone()),
            Universe::Window { lo, hi, .. } => {
                let n = self.size()?;
                if n > BigInt::from(limit) {
                    return None;
                }
                let mut out = Vec::new();
                let mut v = lo.clone();
                while &v <= hi {
                    out.push(Point::from_bigint(v.clone()));
                    v += 1;
                }
                Some(out)
            }
            Universe::Rationals => None,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, Universe::Rationals)
    }
}

/// Relation symbols with arities, constant symbols, context predicates and
/// whether addition is built in. The order `<` is always present.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Signature {
    pub relations: Vec<(String, usize)>,
    pub constants: Vec<String>,
    /// Built-in unary context predicates; these never count towards the
    /// active domain.
    pub monadic: Vec<String>,
    pub plus: bool,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Self {
        self.relations.push((name.to_string(), arity));
        self
    }

    pub fn with_constant(mut self, name: &str) -> Self {
        self.constants.push(name.to_string());
        self
    }

    pub fn with_monadic(mut self, name: &str) -> Self {
        self.monadic.push(name.to_string());
        self
    }

    pub fn with_plus(mut self) -> Self {
        self.plus = true;
        self
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| *a)
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    pub fn has_monadic(&self, name: &str) -> bool {
        self.monadic.iter().any(|c| c == name)
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        let mut seen = BTreeSet::new();
        let names = self
            .relations
            .iter()
            .map(|(n, _)| n)
            .chain(&self.constants)
            .chain(&self.monadic);
        for n in names {
            if !seen.insert(n.as_str()) {
                return Err(StructureError::DuplicateSymbol(n.clone()));
            }
        }
        for (n, a) in &self.relations {
            if *a == 0 {
                return Err(StructureError::ZeroArity(n.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("structures have different signatures")]
    SignatureMismatch,
    #[error("symbol {0} declared twice")]
    DuplicateSymbol(String),
    #[error("relation {0} must have positive arity")]
    ZeroArity(String),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("tuple of {rel} has {found} components, expected {expected}")]
    Arity {
        rel: String,
        expected: usize,
        found: usize,
    },
    #[error("point {0} lies outside the universe")]
    OutsideUniverse(Point),
    #[error("constant {0} has no interpretation")]
    MissingConstant(String),
    #[error("universe points are not strictly increasing")]
    UnsortedUniverse,
    #[error("map does not cover active-domain element {0}")]
    Uncovered(Point),
    #[error("map is not order preserving")]
    NotOrderPreserving,
    #[error("universe is not enumerable within {0} points")]
    NotEnumerable(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A database over a universe: constants, relations and context predicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedStructure {
    pub signature: Signature,
    pub universe: Universe,
    pub constants: BTreeMap<String, Point>,
    pub relations: BTreeMap<String, BTreeSet<Vec<Point>>>,
    pub monadic: BTreeMap<String, BTreeSet<Point>>,
}

impl OrderedStructure {
    /// Empty interpretations for every declared relation and predicate.
    pub fn new(signature: Signature, universe: Universe) -> Self {
        let relations = signature
            .relations
            .iter()
            .map(|(n, _)| (n.clone(), BTreeSet::new()))
            .collect();
        let monadic = signature
            .monadic
            .iter()
            .map(|n| (n.clone(), BTreeSet::new()))
            .collect();
        OrderedStructure {
            signature,
            universe,
            constants: BTreeMap::new(),
            relations,
            monadic,
        }
    }

    /// The bare order on `{0, .., n-1}`.
    pub fn linear_order(n: usize) -> Self {
        Self::new(Signature::new(), Universe::range(0, n as i64 - 1))
    }

    pub fn set_constant(&mut self, name: &str, p: Point) {
        self.constants.insert(name.to_string(), p);
    }

    pub fn add_tuple(&mut self, rel: &str, tuple: Vec<Point>) {
        self.relations
            .entry(rel.to_string())
            .or_default()
            .insert(tuple);
    }

    pub fn add_member(&mut self, pred: &str, p: Point) {
        self.monadic.entry(pred.to_string()).or_default().insert(p);
    }

    pub fn constant(&self, name: &str) -> Option<&Point> {
        self.constants.get(name)
    }

    /// Universe points, failing for dense or oversized universes.
    pub fn points(&self, limit: usize) -> Result<Vec<Point>, StructureError> {
        self.universe
            .enumerate(limit)
            .ok_or(StructureError::NotEnumerable(limit))
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        self.signature.validate()?;
        if let Universe::Points(ps) = &self.universe {
            if ps.windows(2).any(|w| w[0] >= w[1]) {
                return Err(StructureError::UnsortedUniverse);
            }
        }
        let inside = |p: &Point| {
            if self.universe.contains(p) {
                Ok(())
            } else {
                Err(StructureError::OutsideUniverse(p.clone()))
            }
        };
        for c in &self.signature.constants {
            let p = self
                .constants
                .get(c)
                .ok_or_else(|| StructureError::MissingConstant(c.clone()))?;
            inside(p)?;
        }
        for name in self.constants.keys() {
            if !self.signature.has_constant(name) {
                return Err(StructureError::UnknownSymbol(name.clone()));
            }
        }
        for (name, tuples) in &self.relations {
            let arity = self
                .signature
                .arity(name)
                .ok_or_else(|| StructureError::UnknownSymbol(name.clone()))?;
            for t in tuples {
                if t.len() != arity {
                    return Err(StructureError::Arity {
                        rel: name.clone(),
                        expected: arity,
                        found: t.len(),
                    });
                }
                t.iter().try_for_each(inside)?;
            }
        }
        for (name, members) in &self.monadic {
            if !self.signature.has_monadic(name) {
                return Err(StructureError::UnknownSymbol(name.clone()));
            }
            members.iter().try_for_each(inside)?;
        }
        Ok(())
    }
}

/// A finite list of point pairs, read as a partial map.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PartialMap {
    pub pairs: Vec<(Point, Point)>,
}

impl PartialMap {
    pub fn new(pairs: Vec<(Point, Point)>) -> Self {
        PartialMap { pairs }
    }

    pub fn identity<'a>(points: impl IntoIterator<Item = &'a Point>) -> Self {
        PartialMap {
            pairs: points.into_iter().map(|p| (p.clone(), p.clone())).collect(),
        }
    }

    /// Maps the j-th smallest source point onto the j-th target point.
    pub fn by_rank(sources: &BTreeSet<Point>, targets: &[Point]) -> Option<Self> {
        if sources.len() > targets.len() {
            return None;
        }
        Some(PartialMap {
            pairs: sources.iter().cloned().zip(targets.iter().cloned()).collect(),
        })
    }

    pub fn get(&self, p: &Point) -> Option<&Point> {
        self.pairs.iter().find(|(a, _)| a == p).map(|(_, b)| b)
    }

    pub fn domain(&self) -> BTreeSet<Point> {
        self.pairs.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn range(&self) -> BTreeSet<Point> {
        self.pairs.iter().map(|(_, b)| b.clone()).collect()
    }

    pub fn inverse(&self) -> PartialMap {
        PartialMap {
            pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    /// First `self`, then `next`; pairs whose image `next` misses are dropped.
    pub fn then(&self, next: &PartialMap) -> PartialMap {
        PartialMap {
            pairs: self
                .pairs
                .iter()
                .filter_map(|(a, b)| next.get(b).map(|c| (a.clone(), c.clone())))
                .collect(),
        }
    }

    pub fn is_functional_injective(&self) -> bool {
        let mut fwd: HashMap<&Point, &Point> = HashMap::new();
        let mut bwd: HashMap<&Point, &Point> = HashMap::new();
        for (a, b) in &self.pairs {
            if *fwd.entry(a).or_insert(b) != b || *bwd.entry(b).or_insert(a) != a {
                return false;
            }
        }
        true
    }
}

/// Constants together with every component of every relation tuple.
pub fn active_domain(s: &OrderedStructure) -> BTreeSet<Point> {
    let mut out: BTreeSet<Point> = s.constants.values().cloned().collect();
    for tuples in s.relations.values() {
        for t in tuples {
            out.extend(t.iter().cloned());
        }
    }
    out
}

pub fn is_order_preserving(m: &PartialMap) -> bool {
    m.pairs.iter().all(|(a, b)| {
        m.pairs
            .iter()
            .all(|(a2, b2)| (a < a2) == (b < b2) && (a == a2) == (b == b2))
    })
}

/// Winning condition of the game: the picks plus constants form a partial
/// isomorphism for order, relations, context predicates and, if built in,
/// addition.
pub fn is_partial_isomorphism(
    a: &OrderedStructure,
    b: &OrderedStructure,
    m: &PartialMap,
) -> Result<bool, StructureError> {
    if a.signature != b.signature {
        return Err(StructureError::SignatureMismatch);
    }
    let mut pairs: Vec<(Point, Point)> = m.pairs.clone();
    for c in &a.signature.constants {
        let ca = a
            .constant(c)
            .ok_or_else(|| StructureError::MissingConstant(c.clone()))?;
        let cb = b
            .constant(c)
            .ok_or_else(|| StructureError::MissingConstant(c.clone()))?;
        pairs.push((ca.clone(), cb.clone()));
    }
    pairs.sort();
    pairs.dedup();
    let full = PartialMap::new(pairs);
    if !full.is_functional_injective() {
        return Ok(false);
    }
    let fwd: HashMap<&Point, &Point> = full.pairs.iter().map(|(x, y)| (x, y)).collect();
    let bwd: HashMap<&Point, &Point> = full.pairs.iter().map(|(x, y)| (y, x)).collect();
    if full
        .pairs
        .iter()
        .any(|(x, y)| !a.universe.contains(x) || !b.universe.contains(y))
    {
        return Ok(false);
    }
    // Pairs are sorted by source, so order preservation means strictly
    // increasing targets.
    if full.pairs.windows(2).any(|w| w[0].1 >= w[1].1) {
        return Ok(false);
    }
    for name in &a.signature.monadic {
        let empty = BTreeSet::new();
        let ma = a.monadic.get(name).unwrap_or(&empty);
        let mb = b.monadic.get(name).unwrap_or(&empty);
        if full.pairs.iter().any(|(x, y)| ma.contains(x) != mb.contains(y)) {
            return Ok(false);
        }
    }
    for (name, _) in &a.signature.relations {
        let empty = BTreeSet::new();
        let ra = a.relations.get(name).unwrap_or(&empty);
        let rb = b.relations.get(name).unwrap_or(&empty);
        let inside_a: Vec<&Vec<Point>> = ra
            .iter()
            .filter(|t| t.iter().all(|p| fwd.contains_key(p)))
            .collect();
        let inside_b = rb
            .iter()
            .filter(|t| t.iter().all(|p| bwd.contains_key(p)))
            .count();
        if inside_a.len() != inside_b {
            return Ok(false);
        }
        for t in inside_a {
            let image: Vec<Point> = t.iter().map(|p| fwd[p].clone()).collect();
            if !rb.contains(&image) {
                return Ok(false);
            }
        }
    }
    if a.signature.plus {
        for (x, x2) in &full.pairs {
            for (y, y2) in &full.pairs {
                let sa = x.add(y);
                let sb = x2.add(y2);
                let ta = fwd.get(&sa).map(|p| (*p).clone());
                let tb = bwd.contains_key(&sb);
                match ta {
                    Some(img) => {
                        if img != sb {
                            return Ok(false);
                        }
                    }
                    None => {
                        if tb {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

fn map_point(m: &HashMap<&Point, &Point>, p: &Point) -> Result<Point, StructureError> {
    m.get(p)
        .map(|q| (*q).clone())
        .ok_or_else(|| StructureError::Uncovered(p.clone()))
}

/// Relocates the database along `m` into the given universe. Context
/// predicates keep the members that `m` covers.
pub fn relocate(
    s: &OrderedStructure,
    m: &PartialMap,
    universe: Universe,
) -> Result<OrderedStructure, StructureError> {
    if !m.is_functional_injective() || !is_order_preserving(m) {
        return Err(StructureError::NotOrderPreserving);
    }
    let fwd: HashMap<&Point, &Point> = m.pairs.iter().map(|(x, y)| (x, y)).collect();
    let mut out = OrderedStructure::new(s.signature.clone(), universe);
    out.relations.clear();
    out.monadic.clear();
    for (c, p) in &s.constants {
        out.constants.insert(c.clone(), map_point(&fwd, p)?);
    }
    for (name, tuples) in &s.relations {
        let mut image = BTreeSet::new();
        for t in tuples {
            image.insert(
                t.iter()
                    .map(|p| map_point(&fwd, p))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        out.relations.insert(name.clone(), image);
    }
    for (name, members) in &s.monadic {
        let image = members
            .iter()
            .filter_map(|p| fwd.get(p).map(|q| (*q).clone()))
            .collect();
        out.monadic.insert(name.clone(), image);
    }
    Ok(out)
}

/// The structure carried by `m` onto its target points.
pub fn apply_embedding(
    s: &OrderedStructure,
    m: &PartialMap,
) -> Result<OrderedStructure, StructureError> {
    let universe = Universe::Points(m.range().into_iter().collect());
    relocate(s, m, universe)
}

/// The database part of `s` on its active domain: context predicates and
/// built-in addition are dropped.
pub fn database_part(s: &OrderedStructure) -> Result<OrderedStructure, StructureError> {
    let adom = active_domain(s);
    let sig = Signature {
        relations: s.signature.relations.clone(),
        constants: s.signature.constants.clone(),
        monadic: vec![],
        plus: false,
    };
    let mut t = s.clone();
    t.signature = sig;
    t.monadic.clear();
    let id = PartialMap::identity(adom.iter());
    relocate(&t, &id, Universe::Points(adom.into_iter().collect()))
}

/// Every structure we can represent has a finite active domain, and a finite
/// set of rationals always order-embeds into the naturals. Windows flagged as
/// unbounded above stand for increasing domains, which embed as well.
pub fn is_n_embeddable(_s: &OrderedStructure) -> bool {
    true
}

const HEADER: &str = "efgame-structure 1";

fn join(ps: &[Point]) -> String {
    ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}

/// Text form; `parse_structure(&print_structure(s)) == s`.
pub fn print_structure(s: &OrderedStructure) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for (n, a) in &s.signature.relations {
        out.push_str(&format!("relation {n} {a}\n"));
    }
    for c in &s.signature.constants {
        out.push_str(&format!("constant {c}\n"));
    }
    for m in &s.signature.monadic {
        out.push_str(&format!("monadic {m}\n"));
    }
    if s.signature.plus {
        out.push_str("plus\n");
    }
    match &s.universe {
        Universe::Points(ps) if ps.is_empty() => out.push_str("universe points\n"),
        Universe::Points(ps) => out.push_str(&format!("universe points {}\n", join(ps))),
        Universe::Window {
            lo,
            hi,
            unbounded_above,
        } => {
            out.push_str(&format!("universe window {lo} {hi}"));
            if *unbounded_above {
                out.push_str(" unbounded");
            }
            out.push('\n');
        }
        Universe::Rationals => out.push_str("universe rationals\n"),
    }
    for (c, p) in &s.constants {
        out.push_str(&format!("const {c} {p}\n"));
    }
    for (name, tuples) in &s.relations {
        out.push_str(&format!("tuples {name}\n"));
        for t in tuples {
            out.push_str(&join(t));
            out.push('\n');
        }
        out.push_str("end\n");
    }
    for (name, members) in &s.monadic {
        out.push_str(&format!("members {name}\n"));
        for p in members {
            out.push_str(&format!("{p}\n"));
        }
        out.push_str("end\n");
    }
    out
}

pub fn parse_structure(text: &str) -> Result<OrderedStructure, StructureError> {
    let err = |line: usize, msg: String| StructureError::Parse { line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        Some((n, h)) => return Err(err(n, format!("expected header {HEADER:?}, found {h:?}"))),
        None => return Err(err(0, "empty input".into())),
    }
    let mut sig = Signature::new();
    let mut universe = None;
    let mut constants = BTreeMap::new();
    let mut relations = BTreeMap::new();
    let mut monadic = BTreeMap::new();
    let point = |n: usize, w: &str| w.parse::<Point>().map_err(|e| err(n, e));
    while let Some((n, line)) = lines.next() {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["relation", name, arity] => {
                let a = arity
                    .parse()
                    .map_err(|_| err(n, format!("bad arity {arity:?}")))?;
                sig.relations.push((name.to_string(), a));
            }
            ["constant", name] => sig.constants.push(name.to_string()),
            ["monadic", name] => sig.monadic.push(name.to_string()),
            ["plus"] => sig.plus = true,
            ["universe", "points", rest @ ..] => {
                let ps = rest
                    .iter()
                    .map(|w| point(n, w))
                    .collect::<Result<Vec<_>, _>>()?;
                universe = Some(Universe::Points(ps));
            }
            ["universe", "window", lo, hi, rest @ ..] => {
                let lo: BigInt = lo.parse().map_err(|_| err(n, "bad window bound".into()))?;
                let hi: BigInt = hi.parse().map_err(|_| err(n, "bad window bound".into()))?;
                let unbounded_above = match rest {
                    [] => false,
                    ["unbounded"] => true,
                    _ => return Err(err(n, "unexpected words after window".into())),
                };
                universe = Some(Universe::Window {
                    lo,
                    hi,
                    unbounded_above,
                });
            }
            ["universe", "rationals"] => universe = Some(Universe::Rationals),
            ["const", name, p] => {
                constants.insert(name.to_string(), point(n, p)?);
            }
            ["tuples", name] => {
                let mut set = BTreeSet::new();
                loop {
                    let (m, l) = lines
                        .next()
                        .ok_or_else(|| err(n, format!("unterminated tuples block {name}")))?;
                    if l == "end" {
                        break;
                    }
                    let t = l
                        .split_whitespace()
                        .map(|w| point(m, w))
                        .collect::<Result<Vec<_>, _>>()?;
                    set.insert(t);
                }
                relations.insert(name.to_string(), set);
            }
            ["members", name] => {
                let mut set = BTreeSet::new();
                loop {
                    let (m, l) = lines
                        .next()
                        .ok_or_else(|| err(n, format!("unterminated members block {name}")))?;
                    if l == "end" {
                        break;
                    }
                    for w in l.split_whitespace() {
                        set.insert(point(m, w)?);
                    }
                }
                monadic.insert(name.to_string(), set);
            }
            _ => return Err(err(n, format!("unrecognised line {line:?}"))),
        }
    }
    let universe = universe.ok_or_else(|| err(0, "missing universe line".into()))?;
    let s = OrderedStructure {
        signature: sig,
        universe,
        constants,
        relations,
        monadic,
    };
    s.validate()?;
    Ok(s)
}

/// `x mod m` in `0..m` for a positive modulus.
pub fn modulo(x: &BigInt, m: &BigInt) -> BigInt {
    x.mod_floor(m)
}

/// True when `q` is an integer multiple of `m`.
pub fn divisible(q: &BigRational, m: &BigInt) -> bool {
    q.is_integer() && (q.to_integer() % m).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[i64]) -> Vec<Point> {
        v.iter().copied().map(Point::int).collect()
    }

    fn pm(v: &[(i64, i64)]) -> PartialMap {
        PartialMap::new(v.iter().map(|&(a, b)| (Point::int(a), Point::int(b))).collect())
    }

    #[test]
    fn adom_of_small_databases() {
        let empty = OrderedStructure::linear_order(3);
        assert!(active_domain(&empty).is_empty());

        let sig = Signature::new().with_relation("R", 2).with_constant("c");
        let mut s = OrderedStructure::new(sig, Universe::range(0, 9));
        s.add_tuple("R", pts(&[1, 3]));
        s.set_constant("c", Point::int(7));
        assert_eq!(active_domain(&s), pts(&[1, 3, 7]).into_iter().collect());

        let sig = Signature::new().with_relation("S", 1).with_relation("E", 2);
        let mut s = OrderedStructure::new(sig, Universe::range(0, 9));
        s.add_tuple("S", pts(&[2]));
        s.add_tuple("S", pts(&[4]));
        s.add_tuple("E", pts(&[2, 9]));
        assert_eq!(active_domain(&s), pts(&[2, 4, 9]).into_iter().collect());
    }

    #[test]
    fn context_predicates_stay_out_of_adom() {
        let sig = Signature::new().with_monadic("P");
        let mut s = OrderedStructure::new(sig, Universe::range(0, 9));
        s.add_member("P", Point::int(3));
        assert!(active_domain(&s).is_empty());
    }

    #[test]
    fn order_preservation() {
        assert!(is_order_preserving(&pm(&[(1, 10), (2, 20)])));
        assert!(!is_order_preserving(&pm(&[(1, 20), (2, 10)])));
        assert!(is_order_preserving(&pm(&[(0, 0), (3, 3), (5, 4)])));
    }

    #[test]
    fn plus_triple_breaks_isomorphism() {
        let sig = Signature::new().with_plus();
        let s = OrderedStructure::new(sig, Universe::window(-20, 20));
        // 0+2=2 maps to 0+3=3, and 2+2 leaves the domain on both sides.
        assert!(is_partial_isomorphism(&s, &s, &pm(&[(0, 0), (2, 3)])).unwrap());
        assert!(!is_partial_isomorphism(&s, &s, &pm(&[(0, 0), (2, 3), (4, 5)])).unwrap());
        assert!(is_partial_isomorphism(&s, &s, &pm(&[(0, 0), (2, 2), (4, 4)])).unwrap());
        // 1+1=2 on one side, 1+1 != 3 on the other.
        assert!(!is_partial_isomorphism(&s, &s, &pm(&[(1, 1), (2, 3)])).unwrap());
    }

    #[test]
    fn predicate_membership_checked() {
        let sig = Signature::new().with_monadic("P");
        let mut a = OrderedStructure::new(sig.clone(), Universe::range(0, 9));
        a.add_member("P", Point::int(1));
        let mut b = OrderedStructure::new(sig, Universe::range(0, 9));
        b.add_member("P", Point::int(8));
        assert!(!is_partial_isomorphism(&a, &a, &pm(&[(1, 8)])).unwrap());
        assert!(is_partial_isomorphism(&a, &b, &pm(&[(1, 8)])).unwrap());
    }

    #[test]
    fn identity_is_partial_isomorphism() {
        let sig = Signature::new().with_relation("E", 2).with_constant("c");
        let mut s = OrderedStructure::new(sig, Universe::range(0, 5));
        s.add_tuple("E", pts(&[1, 2]));
        s.set_constant("c", Point::int(4));
        let id = PartialMap::identity(&pts(&[0, 1, 2, 5]));
        assert!(is_partial_isomorphism(&s, &s, &id).unwrap());
    }

    #[test]
    fn constants_enter_the_map() {
        let sig = Signature::new().with_constant("c");
        let mut a = OrderedStructure::new(sig.clone(), Universe::range(0, 5));
        a.set_constant("c", Point::int(2));
        let mut b = OrderedStructure::new(sig, Universe::range(0, 5));
        b.set_constant("c", Point::int(3));
        assert!(is_partial_isomorphism(&a, &b, &pm(&[(1, 1)])).unwrap());
        assert!(!is_partial_isomorphism(&a, &b, &pm(&[(4, 2)])).unwrap());
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let a = OrderedStructure::linear_order(2);
        let b = OrderedStructure::new(Signature::new().with_plus(), Universe::range(0, 1));
        assert_eq!(
            is_partial_isomorphism(&a, &b, &PartialMap::default()),
            Err(StructureError::SignatureMismatch)
        );
    }

    #[test]
    fn embedding_rewrites_tuples() {
        let sig = Signature::new().with_relation("R", 2);
        let mut s = OrderedStructure::new(sig, Universe::range(0, 9));
        s.add_tuple("R", pts(&[1, 2]));
        let e = apply_embedding(&s, &pm(&[(1, 5), (2, 8)])).unwrap();
        assert_eq!(e.relations["R"], [pts(&[5, 8])].into_iter().collect());
        assert_eq!(e.universe, Universe::Points(pts(&[5, 8])));
    }

    #[test]
    fn rank_embedding_onto_positions() {
        let sig = Signature::new().with_relation("U", 1);
        let mut s = OrderedStructure::new(sig, Universe::range(0, 9));
        for v in [3, 7, 9] {
            s.add_tuple("U", pts(&[v]));
        }
        let m = PartialMap::by_rank(&active_domain(&s), &pts(&[10, 20, 30])).unwrap();
        let e = apply_embedding(&s, &m).unwrap();
        assert_eq!(active_domain(&e), pts(&[10, 20, 30]).into_iter().collect());
    }

    #[test]
    fn uncovered_adom_is_rejected() {
        let sig = Signature::new().with_relation("U", 1);
        let mut s = OrderedStructure::new(sig, Universe::range(0, 9));
        s.add_tuple("U", pts(&[3]));
        assert_eq!(
            apply_embedding(&s, &pm(&[(4, 4)])),
            Err(StructureError::Uncovered(Point::int(3)))
        );
    }

    #[test]
    fn every_structure_embeds_into_naturals() {
        assert!(is_n_embeddable(&OrderedStructure::linear_order(0)));
        let s = OrderedStructure::new(
            Signature::new(),
            Universe::Window {
                lo: 0.into(),
                hi: 99.into(),
                unbounded_above: true,
            },
        );
        assert!(is_n_embeddable(&s));
    }

    #[test]
    fn text_round_trip() {
        let sig = Signature::new()
            .with_relation("E", 2)
            .with_constant("c")
            .with_monadic("P")
            .with_plus();
        let mut s = OrderedStructure::new(sig, Universe::Points(vec![Point::ratio(-1, 2), Point::int(0), Point::int(3)]));
        s.add_tuple("E", vec![Point::ratio(-1, 2), Point::int(3)]);
        s.set_constant("c", Point::int(0));
        s.add_member("P", Point::int(3));
        let text = print_structure(&s);
        assert_eq!(parse_structure(&text).unwrap(), s);

        let w = OrderedStructure::new(
            Signature::new(),
            Universe::Window {
                lo: (-5).into(),
                hi: 5.into(),
                unbounded_above: true,
            },
        );
        assert_eq!(parse_structure(&print_structure(&w)).unwrap(), w);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "efgame-structure 1\nuniverse points 0 1\nbogus line\n";
        match parse_structure(text) {
            Err(StructureError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_structure("efgame-structure 1\nuniverse points 1 0\n").is_err());
    }

    #[test]
    fn point_text() {
        assert_eq!(Point::ratio(6, 4).to_string(), "3/2");
        assert_eq!("-3/6".parse::<Point>().unwrap(), Point::ratio(-1, 2));
        assert!("1/0".parse::<Point>().is_err());
        assert_eq!(Point::ratio(-5, 2).floor(), Point::int(-3));
    }
}
