//! Ramsey-style translations of order-game strategies into games with extra
//! context predicates.
//!
//! Two settings are covered. With monadic context predicates the databases
//! are moved onto positions whose consecutive intervals all share one
//! k-type; the duplicator then plays a virtual order game on those positions
//! and one interval game per touched interval. With arbitrary predicates
//! and the single-round game, positions are chosen so that every h-subset
//! realises the same set of atomic types, databases are spread out with
//! gaps, and answers are found by realising the spoiler's atomic type next
//! to the virtual answers.
//!
//! Everything is finite: contexts are integer windows, and the infinite
//! monochromatic sets become greedily extracted finite ones.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{
    k_type, single_round_answer, single_round_oracle, Duplicator, GameError, GamePosition, Oracle,
    Side, SingleRoundDuplicator, TypeId, DEFAULT_BUDGET,
};
use crate::structure::{
    active_domain, database_part, relocate, OrderedStructure, PartialMap, Point, Signature,
    StructureError, Universe,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RamseyError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("window exhausted: found {found} of {needed} positions")]
    WindowExhausted { found: usize, needed: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("more than {0} tuples to colour")]
    Budget(u64),
    #[error("bad context: {0}")]
    Context(String),
    #[error("virtual game lost: {0}")]
    VirtualGameLost(String),
    /// No answer realises the spoiler's atomic type, so the positions were
    /// not uniformly coloured after all.
    #[error("no realization of the atomic type; position extraction is broken")]
    NoRealization,
}

/// A context predicate given by its members or as an arithmetic progression
/// `offset + stride * n`, clipped to the window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredicateSpec {
    Members(Vec<i64>),
    Progression { offset: i64, stride: i64 },
}

impl PredicateSpec {
    pub fn expand(&self, lo: i64, hi: i64) -> Result<BTreeSet<Point>, RamseyError> {
        match self {
            PredicateSpec::Members(v) => v
                .iter()
                .map(|&x| {
                    if (lo..=hi).contains(&x) {
                        Ok(Point::int(x))
                    } else {
                        Err(RamseyError::Context(format!("member {x} outside {lo}..{hi}")))
                    }
                })
                .collect(),
            PredicateSpec::Progression { offset, stride } => {
                if *stride <= 0 {
                    return Err(RamseyError::Context("progression stride must be positive".into()));
                }
                Ok((lo..=hi)
                    .filter(|x| (x - offset).rem_euclid(*stride) == 0)
                    .map(Point::int)
                    .collect())
            }
        }
    }
}

/// An integer window `lo..=hi` with finitely many unary context predicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonadicContext {
    pub lo: i64,
    pub hi: i64,
    pub predicates: BTreeMap<String, BTreeSet<Point>>,
}

/// Serialized form of a context: window plus predicate descriptors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSpec {
    pub lo: i64,
    pub hi: i64,
    #[serde(default)]
    pub predicates: BTreeMap<String, PredicateSpec>,
}

impl MonadicContext {
    pub fn new(lo: i64, hi: i64) -> Self {
        MonadicContext {
            lo,
            hi,
            predicates: BTreeMap::new(),
        }
    }

    pub fn with_predicate(mut self, name: &str, spec: &PredicateSpec) -> Result<Self, RamseyError> {
        let members = spec.expand(self.lo, self.hi)?;
        self.predicates.insert(name.to_string(), members);
        Ok(self)
    }

    pub fn from_spec(spec: &ContextSpec) -> Result<Self, RamseyError> {
        if spec.lo > spec.hi {
            return Err(RamseyError::Context("empty window".into()));
        }
        let mut ctx = MonadicContext::new(spec.lo, spec.hi);
        for (name, p) in &spec.predicates {
            ctx = ctx.with_predicate(name, p)?;
        }
        Ok(ctx)
    }

    pub fn to_spec(&self) -> ContextSpec {
        ContextSpec {
            lo: self.lo,
            hi: self.hi,
            predicates: self
                .predicates
                .iter()
                .map(|(n, m)| {
                    let v = m.iter().map(|p| p.to_bigint().and_then(|x| i64::try_from(x).ok()).unwrap()).collect();
                    (n.clone(), PredicateSpec::Members(v))
                })
                .collect(),
        }
    }

    fn names(&self) -> Vec<String> {
        self.predicates.keys().cloned().collect()
    }

    /// The context restricted to `points`, as a structure with the given
    /// extra signature.
    fn structure_on(&self, sig: Signature, universe: Universe) -> OrderedStructure {
        let mut s = OrderedStructure::new(sig, universe);
        for (n, m) in &self.predicates {
            let inside = m.iter().filter(|p| s.universe.contains(p)).cloned().collect();
            s.monadic.insert(n.clone(), inside);
        }
        s
    }
}

/// A window with predicates of any arity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArbContext {
    pub lo: i64,
    pub hi: i64,
    /// Name to (arity, tuples).
    pub predicates: BTreeMap<String, (usize, BTreeSet<Vec<i64>>)>,
}

impl ArbContext {
    pub fn new(lo: i64, hi: i64) -> Self {
        ArbContext {
            lo,
            hi,
            predicates: BTreeMap::new(),
        }
    }

    pub fn with_predicate(mut self, name: &str, arity: usize, tuples: impl IntoIterator<Item = Vec<i64>>) -> Result<Self, RamseyError> {
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity || t.iter().any(|x| !(self.lo..=self.hi).contains(x)) {
                return Err(RamseyError::Context(format!("bad tuple {t:?} for {name}")));
            }
            set.insert(t);
        }
        if arity == 0 {
            return Err(RamseyError::Context(format!("{name} has arity 0")));
        }
        self.predicates.insert(name.to_string(), (arity, set));
        Ok(self)
    }

    fn contains(&self, x: i64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }

    /// The window as a structure carrying the context predicates. Unary ones
    /// become context predicates, the others relations.
    fn structure(&self, mut sig: Signature) -> OrderedStructure {
        for (n, (ar, _)) in &self.predicates {
            sig = if *ar == 1 { sig.with_monadic(n) } else { sig.with_relation(n, *ar) };
        }
        let mut s = OrderedStructure::new(sig, Universe::window(self.lo, self.hi));
        for (n, (ar, ts)) in &self.predicates {
            for t in ts {
                if *ar == 1 {
                    s.add_member(n, Point::int(t[0]));
                } else {
                    s.add_tuple(n, t.iter().map(|&x| Point::int(x)).collect());
                }
            }
        }
        s
    }
}

impl From<&MonadicContext> for ArbContext {
    fn from(m: &MonadicContext) -> Self {
        let mut out = ArbContext::new(m.lo, m.hi);
        for (n, set) in &m.predicates {
            let ts = set.iter().filter_map(|p| p.to_bigint()).filter_map(|x| i64::try_from(x).ok()).map(|x| vec![x]).collect();
            out.predicates.insert(n.clone(), (1, ts));
        }
        out
    }
}

/// The complete atomic type of a tuple over `=`, `<` and the context
/// predicates, as a canonical byte string: one comparison byte per pair
/// `i < j`, then one membership byte per predicate and index tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomicType {
    pub vars: usize,
    pub code: Vec<u8>,
}

impl AtomicType {
    /// The satisfied atoms, variables named `y1..yn`.
    pub fn atoms(&self, ctx: &ArbContext) -> Vec<String> {
        let n = self.vars;
        let mut out = Vec::new();
        for i in 0..n {
            out.push(format!("y{0}=y{0}", i + 1));
        }
        let mut pos = 0;
        for i in 0..n {
            for j in i + 1..n {
                match self.code[pos] {
                    0 => out.push(format!("y{}<y{}", i + 1, j + 1)),
                    1 => {
                        out.push(format!("y{}=y{}", i + 1, j + 1));
                        out.push(format!("y{}=y{}", j + 1, i + 1));
                    }
                    _ => out.push(format!("y{}<y{}", j + 1, i + 1)),
                }
                pos += 1;
            }
        }
        for (name, (ar, _)) in &ctx.predicates {
            for_each_index_tuple(n, *ar, |idx| {
                if self.code[pos] == 1 {
                    let args: Vec<String> = idx.iter().map(|i| format!("y{}", i + 1)).collect();
                    out.push(format!("{name}({})", args.join(",")));
                }
                pos += 1;
            });
        }
        out
    }
}

fn for_each_index_tuple(n: usize, arity: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 {
        return;
    }
    let mut idx = vec![0usize; arity];
    loop {
        f(&idx);
        let mut d = arity;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Fast index form of an [`ArbContext`].
struct Grid {
    preds: Vec<(usize, HashSet<Vec<i64>>)>,
}

impl Grid {
    fn new(ctx: &ArbContext) -> Self {
        Grid {
            preds: ctx
                .predicates
                .values()
                .map(|(ar, ts)| (*ar, ts.iter().cloned().collect()))
                .collect(),
        }
    }

    fn atomic_type(&self, vals: &[i64]) -> AtomicType {
        let n = vals.len();
        let mut code = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in i + 1..n {
                code.push(match vals[i].cmp(&vals[j]) {
                    std::cmp::Ordering::Less => 0,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Greater => 2,
                });
            }
        }
        let mut buf = Vec::new();
        for (ar, set) in &self.preds {
            for_each_index_tuple(n, *ar, |idx| {
                buf.clear();
                buf.extend(idx.iter().map(|&i| vals[i]));
                code.push(set.contains(&buf) as u8);
            });
        }
        AtomicType { vars: n, code }
    }
}

fn int_of(p: &Point) -> Result<i64, RamseyError> {
    p.to_bigint()
        .and_then(|x| i64::try_from(x).ok())
        .ok_or_else(|| RamseyError::Context(format!("{p} is not a window integer")))
}

/// The complete atomic type of `tuple` in the context.
pub fn atomic_type(tuple: &[Point], ctx: &ArbContext) -> Result<AtomicType, RamseyError> {
    let vals: Vec<i64> = tuple.iter().map(int_of).collect::<Result<_, _>>()?;
    if let Some(x) = vals.iter().find(|x| !ctx.contains(**x)) {
        return Err(RamseyError::Context(format!("{x} outside the window")));
    }
    Ok(Grid::new(ctx).atomic_type(&vals))
}

/// The colour of an h-set: every atomic type realised by `k` window points
/// followed by the set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Color(pub BTreeSet<AtomicType>);

/// Largest number of k-tuples a colouring may enumerate.
pub const COLOR_BUDGET: u64 = 2_000_000;

fn color_of(grid: &Grid, lo: i64, hi: i64, y: &[i64], k: usize) -> Color {
    let mut out = BTreeSet::new();
    let mut vals: Vec<i64> = vec![lo; k];
    vals.extend_from_slice(y);
    loop {
        out.insert(grid.atomic_type(&vals));
        let mut d = k;
        loop {
            if d == 0 {
                return Color(out);
            }
            d -= 1;
            vals[d] += 1;
            if vals[d] <= hi {
                break;
            }
            vals[d] = lo;
        }
    }
}

fn check_color_budget(ctx: &ArbContext, k: usize) -> Result<(), RamseyError> {
    let width = (ctx.hi - ctx.lo + 1).max(0) as u64;
    let total = width.checked_pow(k as u32).unwrap_or(u64::MAX);
    if total > COLOR_BUDGET {
        return Err(RamseyError::Budget(COLOR_BUDGET));
    }
    Ok(())
}

/// The colour of the sorted set `y` for `k` free elements.
pub fn color_h_subset(y: &[Point], k: usize, ctx: &ArbContext) -> Result<Color, RamseyError> {
    check_color_budget(ctx, k)?;
    let vals: Vec<i64> = y.iter().map(int_of).collect::<Result<_, _>>()?;
    if vals.windows(2).any(|w| w[0] >= w[1]) || vals.iter().any(|x| !ctx.contains(*x)) {
        return Err(RamseyError::Context("colour needs a sorted set inside the window".into()));
    }
    Ok(color_of(&Grid::new(ctx), ctx.lo, ctx.hi, &vals, k))
}

/// Special positions extracted from a context, with the data that makes
/// them special: the shared interval type (monadic case) or the colour of
/// every h-subset (single-round case, `colors[h - 1]`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialPositions {
    pub points: Vec<Point>,
    pub k: usize,
    #[serde(default)]
    pub interval_types: Vec<TypeId>,
    #[serde(default)]
    pub colors: Vec<Color>,
}

impl SpecialPositions {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("positions serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, RamseyError> {
        let p: SpecialPositions =
            serde_json::from_str(text).map_err(|e| RamseyError::Context(e.to_string()))?;
        if p.points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RamseyError::Context("positions must be strictly increasing".into()));
        }
        Ok(p)
    }
}

const START: &str = "start";

fn interval_structure(ctx: &MonadicContext, lo: &Point, hi: &Point) -> Result<OrderedStructure, RamseyError> {
    let (l, h) = (int_of(lo)?, int_of(hi)?);
    if l >= h || l < ctx.lo || h > ctx.hi + 1 {
        return Err(RamseyError::Context(format!("interval [{l}, {h}) not inside the window")));
    }
    let mut sig = Signature::new().with_constant(START);
    for n in ctx.names() {
        sig = sig.with_monadic(&n);
    }
    let mut s = ctx.structure_on(sig, Universe::Points((l..h).map(Point::int).collect()));
    s.set_constant(START, lo.clone());
    Ok(s)
}

/// The k-type of `[lo, hi)` with `lo` distinguished and the context
/// predicates restricted to the interval.
pub fn interval_k_type(ctx: &MonadicContext, lo: &Point, hi: &Point, k: usize) -> Result<TypeId, RamseyError> {
    Ok(k_type(&interval_structure(ctx, lo, hi)?, k)?)
}

/// `needed` positions whose consecutive intervals share one k-type. The
/// scan tries each start and each first gap, then extends greedily with the
/// nearest cut that repeats the type.
pub fn find_uniform_positions_monadic(
    ctx: &MonadicContext,
    k: usize,
    needed: usize,
) -> Result<SpecialPositions, RamseyError> {
    if needed == 0 {
        return Ok(SpecialPositions { points: vec![], k, interval_types: vec![], colors: vec![] });
    }
    let mut cache: HashMap<(i64, i64), TypeId> = HashMap::new();
    let mut ty = |a: i64, b: i64| -> Result<TypeId, RamseyError> {
        if let Some(t) = cache.get(&(a, b)) {
            return Ok(*t);
        }
        let t = interval_k_type(ctx, &Point::int(a), &Point::int(b), k)?;
        cache.insert((a, b), t);
        Ok(t)
    };
    if needed == 1 {
        return Ok(SpecialPositions { points: vec![Point::int(ctx.lo)], k, interval_types: vec![], colors: vec![] });
    }
    let mut best = 1;
    for start in ctx.lo..=ctx.hi {
        for second in start + 1..=ctx.hi {
            let t = ty(start, second)?;
            let mut chain = vec![start, second];
            let mut nodes = 0u64;
            let found = extend_chain(&mut chain, t, needed, ctx.hi, &mut ty, &mut nodes, &mut best)?;
            if found {
                return Ok(SpecialPositions {
                    points: chain.into_iter().map(Point::int).collect(),
                    k,
                    interval_types: vec![t; needed - 1],
                    colors: vec![],
                });
            }
        }
    }
    Err(RamseyError::WindowExhausted { found: best, needed })
}

/// Node cap for the backtracking extension from one start and first gap.
const EXTENSION_BUDGET: u64 = 20_000;

/// Extends `chain` with cuts repeating type `t`, nearest first, backtracking
/// when stuck.
fn extend_chain(
    chain: &mut Vec<i64>,
    t: TypeId,
    needed: usize,
    hi: i64,
    ty: &mut dyn FnMut(i64, i64) -> Result<TypeId, RamseyError>,
    nodes: &mut u64,
    best: &mut usize,
) -> Result<bool, RamseyError> {
    *best = (*best).max(chain.len());
    if chain.len() >= needed {
        return Ok(true);
    }
    let cur = *chain.last().unwrap();
    for next in cur + 1..=hi {
        *nodes += 1;
        if *nodes > EXTENSION_BUDGET {
            return Ok(false);
        }
        if ty(cur, next)? == t {
            chain.push(next);
            if extend_chain(chain, t, needed, hi, ty, nodes, best)? {
                return Ok(true);
            }
            chain.pop();
        }
    }
    Ok(false)
}

/// Databases moved onto special positions, the games on the context built
/// from them, and the translated duplicator.
#[derive(Clone, Debug)]
pub struct MonadicTranslation {
    pub alpha: PartialMap,
    pub beta: PartialMap,
    pub a: OrderedStructure,
    pub b: OrderedStructure,
    pub positions: SpecialPositions,
    pub duplicator: MonadicDuplicator,
}

/// Extra positions kept after the databases so the virtual order game on
/// the positions has room to answer.
fn tail_length(k: usize) -> usize {
    (1usize << k.min(16)) + 1
}

fn check_names(db: &Signature, extra: &[String]) -> Result<(), RamseyError> {
    for n in extra {
        if db.arity(n).is_some() || db.has_constant(n) || db.has_monadic(n) {
            return Err(RamseyError::Precondition(format!("database already uses the name {n}")));
        }
    }
    Ok(())
}

/// Builds the translated strategy for the k-round game with monadic context
/// predicates. Requires the databases to be (k+1)-equivalent as pure order
/// structures.
pub fn translate_strategy_monadic(
    a: &OrderedStructure,
    b: &OrderedStructure,
    k: usize,
    ctx: &MonadicContext,
) -> Result<MonadicTranslation, RamseyError> {
    let adom_needed = active_domain(a).len().max(active_domain(b).len());
    let positions = find_uniform_positions_monadic(ctx, k, adom_needed + tail_length(k) + 1)?;
    translate_monadic_with(a, b, k, ctx, positions)
}

/// As [`translate_strategy_monadic`] with positions supplied by the caller.
pub fn translate_monadic_with(
    a: &OrderedStructure,
    b: &OrderedStructure,
    k: usize,
    ctx: &MonadicContext,
    positions: SpecialPositions,
) -> Result<MonadicTranslation, RamseyError> {
    if a.signature != b.signature {
        return Err(StructureError::SignatureMismatch.into());
    }
    let da = database_part(a)?;
    let db = database_part(b)?;
    check_names(&da.signature, &ctx.names())?;
    let oracle = Oracle::default();
    if !oracle.duplicator_wins(&da, &db, k + 1)? {
        return Err(RamseyError::Precondition(format!(
            "the databases are not equivalent for {} rounds of the order game",
            k + 1
        )));
    }
    let pts = &positions.points;
    if pts.len() < 2 {
        return Err(RamseyError::Precondition("need at least two special positions".into()));
    }
    for w in pts.windows(3) {
        if interval_k_type(ctx, &w[0], &w[1], k)? != interval_k_type(ctx, &w[1], &w[2], k)? {
            return Err(RamseyError::Precondition("consecutive intervals differ in type".into()));
        }
    }
    // Each representative stands for the interval up to the next position.
    let reps: Vec<Point> = pts[..pts.len() - 1].to_vec();
    let short = || RamseyError::Precondition("fewer special positions than database points".into());
    let alpha = PartialMap::by_rank(&active_domain(&da), &reps).ok_or_else(short)?;
    let beta = PartialMap::by_rank(&active_domain(&db), &reps).ok_or_else(short)?;
    let va = relocate(&da, &alpha, Universe::Points(reps.clone()))?;
    let vb = relocate(&db, &beta, Universe::Points(reps.clone()))?;
    if !oracle.duplicator_wins(&va, &vb, k)? {
        return Err(RamseyError::Precondition(
            "the virtual order game on the special positions is lost".into(),
        ));
    }
    let top = int_of(pts.last().unwrap())? - 1;
    let mut sig = da.signature.clone();
    for n in ctx.names() {
        sig = sig.with_monadic(&n);
    }
    let build = |v: &OrderedStructure| {
        let mut s = ctx.structure_on(sig.clone(), Universe::window(ctx.lo, top));
        s.relations = v.relations.clone();
        s.constants = v.constants.clone();
        s
    };
    let (sa, sb) = (build(&va), build(&vb));
    let duplicator = MonadicDuplicator {
        ctx: ctx.clone(),
        positions: pts.clone(),
        virtual_a: va,
        virtual_b: vb,
        oracle: Oracle { budget: DEFAULT_BUDGET, strict: true },
    };
    Ok(MonadicTranslation {
        alpha,
        beta,
        a: sa,
        b: sb,
        positions,
        duplicator,
    })
}

/// The translated duplicator for monadic contexts. It keeps no state
/// between rounds: the virtual game is replayed from the position shown.
#[derive(Clone, Debug)]
pub struct MonadicDuplicator {
    pub ctx: MonadicContext,
    pub positions: Vec<Point>,
    pub virtual_a: OrderedStructure,
    pub virtual_b: OrderedStructure,
    pub oracle: Oracle,
}

impl MonadicDuplicator {
    /// Index `j` with `p_j <= x < p_{j+1}`, or `None` below `p_1`.
    fn interval_of(&self, x: &Point) -> Result<Option<usize>, String> {
        let p = &self.positions;
        if x < &p[0] {
            return Ok(None);
        }
        match p.iter().rposition(|q| q <= x) {
            Some(j) if j + 1 < p.len() => Ok(Some(j)),
            _ => Err(format!("{x} lies beyond the last special position")),
        }
    }

    fn play(&self, pos: &GamePosition, side: Side, x: &Point) -> Result<Point, String> {
        let Some(j) = self.interval_of(x)? else {
            return Ok(x.clone());
        };
        let p = &self.positions;
        // Virtual order game: every earlier round above p_1 is a virtual
        // round on the interval representatives.
        let (mut va, mut vb) = (Vec::new(), Vec::new());
        for (pa, pb) in pos.chosen_a.iter().zip(pos.chosen_b) {
            if let (Some(ia), Some(ib)) = (self.interval_of(pa)?, self.interval_of(pb)?) {
                va.push(p[ia].clone());
                vb.push(p[ib].clone());
            }
        }
        let sides = vec![Side::A; va.len()];
        let vpos = GamePosition {
            a: &self.virtual_a,
            b: &self.virtual_b,
            chosen_a: &va,
            chosen_b: &vb,
            sides: &sides,
            rounds_left: pos.rounds_left,
        };
        let rep = self
            .oracle
            .winning_answer(&vpos, side, &p[j])
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("virtual order game lost at {}", p[j]))?;
        let j2 = p.iter().position(|q| q == &rep).ok_or("virtual answer is not a position")?;
        // Interval game between [p_j, p_j+1) and [p_j2, p_j2+1), own side first.
        let own = interval_structure(&self.ctx, &p[j], &p[j + 1]).map_err(|e| e.to_string())?;
        let other = interval_structure(&self.ctx, &p[j2], &p[j2 + 1]).map_err(|e| e.to_string())?;
        let (mut ia, mut ib) = (Vec::new(), Vec::new());
        for (mine, theirs) in pos.chosen(side).iter().zip(pos.chosen(side.other())) {
            if own.universe.contains(mine) {
                ia.push(mine.clone());
                ib.push(theirs.clone());
            }
        }
        let sides = vec![Side::A; ia.len()];
        let ipos = GamePosition {
            a: &own,
            b: &other,
            chosen_a: &ia,
            chosen_b: &ib,
            sides: &sides,
            rounds_left: pos.rounds_left,
        };
        self.oracle
            .winning_answer(&ipos, Side::A, x)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("interval game lost for {x}"))
    }
}

impl Duplicator for MonadicDuplicator {
    fn answer(&mut self, pos: &GamePosition, side: Side, pick: &Point) -> Result<Point, String> {
        self.play(pos, side, pick)
    }
}

/// Positions of which every h-subset, `h <= r`, has one colour for `k`
/// free elements. Subsets of size at most two are checked exhaustively,
/// larger ones on `SAMPLED_SUBSETS` random subsets per added point.
pub fn find_uniform_positions_bcefo(
    ctx: &ArbContext,
    r: usize,
    k: usize,
    needed: usize,
) -> Result<SpecialPositions, RamseyError> {
    check_color_budget(ctx, k)?;
    let grid = Grid::new(ctx);
    let mut cache: HashMap<Vec<i64>, Color> = HashMap::new();
    let mut color = |y: &[i64]| -> Color {
        cache
            .entry(y.to_vec())
            .or_insert_with(|| color_of(&grid, ctx.lo, ctx.hi, y, k))
            .clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = 0;
    let finish = |chain: Vec<i64>, colors: Vec<Color>| SpecialPositions {
        points: chain.into_iter().map(Point::int).collect(),
        k,
        interval_types: vec![],
        colors,
    };
    for start in ctx.lo..=ctx.hi {
        if needed <= 1 {
            let colors = if needed == 1 && r >= 1 { vec![color(&[start])] } else { vec![] };
            return Ok(finish(vec![start].into_iter().take(needed).collect(), colors));
        }
        for second in start + 1..=ctx.hi {
            let mut colors: Vec<Color> = vec![color(&[start])];
            let mut chain = vec![start];
            let mut next = second;
            while next <= ctx.hi && chain.len() < needed {
                if fits(&chain, next, r, &mut colors, &mut color, &mut rng) {
                    chain.push(next);
                }
                // The first gap is fixed by `second`.
                if chain.len() == 1 {
                    break;
                }
                next += 1;
            }
            best = best.max(chain.len());
            if chain.len() == needed {
                colors.truncate(r);
                return Ok(finish(chain, colors));
            }
        }
    }
    Err(RamseyError::WindowExhausted { found: best, needed })
}

const SAMPLED_SUBSETS: usize = 12;

/// Does adding `x` keep all checked subsets on their colours? New colours
/// are recorded for sizes seen for the first time.
fn fits(
    chain: &[i64],
    x: i64,
    r: usize,
    colors: &mut Vec<Color>,
    color: &mut dyn FnMut(&[i64]) -> Color,
    rng: &mut ChaCha8Rng,
) -> bool {
    let mut fresh: Vec<Color> = Vec::new();
    for h in 1..=r.min(chain.len() + 1) {
        let mut subsets: Vec<Vec<i64>> = Vec::new();
        let others = h - 1;
        if others == 0 {
            subsets.push(vec![x]);
        } else if others == 1 {
            subsets.extend(chain.iter().map(|&c| vec![c, x]));
        } else {
            for _ in 0..SAMPLED_SUBSETS {
                let mut pick: Vec<i64> = sample(rng, chain.len(), others)
                    .into_iter()
                    .map(|i| chain[i])
                    .collect();
                pick.sort();
                pick.push(x);
                subsets.push(pick);
            }
        }
        let target = colors.get(h - 1).cloned();
        let mut seen: Option<Color> = target;
        for y in subsets {
            let c = color(&y);
            match &seen {
                Some(t) if *t != c => return false,
                Some(_) => {}
                None => seen = Some(c),
            }
        }
        if h > colors.len() {
            fresh.push(seen.expect("at least one subset"));
            // Only one new size can appear per added point.
            debug_assert_eq!(fresh.len(), 1);
        }
    }
    colors.extend(fresh);
    true
}

/// Maps the j-th smallest active-domain element of each database onto
/// `p_{2rj}`, leaving `2r - 1` positions between consecutive images.
pub fn gap_embedding(
    a: &OrderedStructure,
    b: &OrderedStructure,
    positions: &[Point],
    r: usize,
) -> Result<(PartialMap, PartialMap), RamseyError> {
    let step = 2 * r.max(1);
    let targets: Vec<Point> = positions.iter().skip(step - 1).step_by(step).cloned().collect();
    let short = || {
        RamseyError::Precondition(format!(
            "{} positions cannot hold the gap embedding with r = {r}",
            positions.len()
        ))
    };
    let alpha = PartialMap::by_rank(&active_domain(a), &targets).ok_or_else(short)?;
    let beta = PartialMap::by_rank(&active_domain(b), &targets).ok_or_else(short)?;
    Ok((alpha, beta))
}

/// Constant naming the first special position in the virtual structures.
pub const FIRST: &str = "first";
/// Successor relation on the special positions.
pub const SUCC: &str = "succ";

/// The database relocated along `m` onto the positions, with the first
/// position as a constant and the successor relation on positions.
pub fn successor_structure(
    db: &OrderedStructure,
    m: &PartialMap,
    positions: &[Point],
) -> Result<OrderedStructure, RamseyError> {
    let db = database_part(db)?;
    check_names(&db.signature, &[FIRST.to_string(), SUCC.to_string()])?;
    let mut s = relocate(&db, m, Universe::Points(positions.to_vec()))?;
    s.signature = s.signature.with_constant(FIRST).with_relation(SUCC, 2);
    let first = positions
        .first()
        .ok_or_else(|| RamseyError::Precondition("no special positions".into()))?;
    s.set_constant(FIRST, first.clone());
    for w in positions.windows(2) {
        s.add_tuple(SUCC, vec![w[0].clone(), w[1].clone()]);
    }
    Ok(s)
}

/// Databases spread over uniformly coloured positions, the single-round
/// games built on them and the translated duplicator.
#[derive(Clone, Debug)]
pub struct BcefoTranslation {
    pub alpha: PartialMap,
    pub beta: PartialMap,
    pub a: OrderedStructure,
    pub b: OrderedStructure,
    /// Moves the duplicator's virtual game uses: `2k` plus the number of
    /// constants.
    pub r: usize,
    pub positions: SpecialPositions,
    pub duplicator: BcefoDuplicator,
}

/// Builds the translated strategy for the single-round k-move game with
/// arbitrary context predicates. Requires the databases to be equivalent
/// for the single-round game with `2k + constants` moves.
pub fn translate_strategy_bcefo(
    a: &OrderedStructure,
    b: &OrderedStructure,
    k: usize,
    ctx: &ArbContext,
) -> Result<BcefoTranslation, RamseyError> {
    let r = 2 * k + a.signature.constants.len();
    let n = active_domain(a).len().max(active_domain(b).len());
    let positions = find_uniform_positions_bcefo(ctx, r, k, (2 * r.max(1) * n).max(1))?;
    translate_bcefo_with(a, b, k, ctx, positions)
}

/// As [`translate_strategy_bcefo`] with positions supplied by the caller.
pub fn translate_bcefo_with(
    a: &OrderedStructure,
    b: &OrderedStructure,
    k: usize,
    ctx: &ArbContext,
    positions: SpecialPositions,
) -> Result<BcefoTranslation, RamseyError> {
    if a.signature != b.signature {
        return Err(StructureError::SignatureMismatch.into());
    }
    let da = database_part(a)?;
    let db = database_part(b)?;
    let r = 2 * k + da.signature.constants.len();
    if !single_round_oracle(&da, &db, r)? {
        return Err(RamseyError::Precondition(format!(
            "the databases are not equivalent for the single-round game with {r} moves"
        )));
    }
    let pts = &positions.points;
    for p in pts {
        if !ctx.contains(int_of(p)?) {
            return Err(RamseyError::Context(format!("position {p} outside the window")));
        }
    }
    let (alpha, beta) = gap_embedding(&da, &db, pts, r)?;
    let va = successor_structure(&da, &alpha, pts)?;
    let vb = successor_structure(&db, &beta, pts)?;
    if !single_round_oracle(&va, &vb, r)? {
        return Err(RamseyError::Precondition(
            "the virtual single-round game on the special positions is lost".into(),
        ));
    }
    let names: Vec<String> = ctx.predicates.keys().cloned().collect();
    check_names(&da.signature, &names)?;
    let build = |v: &OrderedStructure| -> Result<OrderedStructure, RamseyError> {
        let mut s = ctx.structure(da.signature.clone());
        for (name, ts) in &v.relations {
            if name != SUCC {
                for t in ts {
                    s.add_tuple(name, t.clone());
                }
            }
        }
        for (c, p) in &v.constants {
            if c != FIRST {
                s.set_constant(c, p.clone());
            }
        }
        s.validate()?;
        Ok(s)
    };
    let (sa, sb) = (build(&va)?, build(&vb)?);
    let duplicator = BcefoDuplicator {
        ctx: ctx.clone(),
        positions: pts.clone(),
        virtual_a: va,
        virtual_b: vb,
    };
    Ok(BcefoTranslation {
        alpha,
        beta,
        a: sa,
        b: sb,
        r,
        positions,
        duplicator,
    })
}

/// The translated single-round duplicator.
#[derive(Clone, Debug)]
pub struct BcefoDuplicator {
    pub ctx: ArbContext,
    pub positions: Vec<Point>,
    pub virtual_a: OrderedStructure,
    pub virtual_b: OrderedStructure,
}

impl SingleRoundDuplicator for BcefoDuplicator {
    fn answer(
        &mut self,
        _: &OrderedStructure,
        _: &OrderedStructure,
        side: Side,
        picks: &[Point],
    ) -> Result<Vec<Point>, String> {
        let (own, other) = match side {
            Side::A => (&self.virtual_a, &self.virtual_b),
            Side::B => (&self.virtual_b, &self.virtual_a),
        };
        duplicator_single_round_bcefo(&self.ctx, &self.positions, own, other, picks)
            .map_err(|e| e.to_string())
    }
}

/// Answers the spoiler's picks, made in the structure whose virtual form is
/// `own`, with points in the structure whose virtual form is `other`.
/// The virtual spoiler plays the positions closest to each pick together
/// with the database constants; the answer realises the picks' atomic type
/// next to the virtual answers, choosing the lexicographically smallest
/// realization.
pub fn duplicator_single_round_bcefo(
    ctx: &ArbContext,
    positions: &[Point],
    own: &OrderedStructure,
    other: &OrderedStructure,
    picks: &[Point],
) -> Result<Vec<Point>, RamseyError> {
    if picks.is_empty() {
        return Ok(vec![]);
    }
    let vals: Vec<i64> = picks.iter().map(int_of).collect::<Result<_, _>>()?;
    let pos: Vec<i64> = positions.iter().map(int_of).collect::<Result<_, _>>()?;
    let mut anchors: BTreeSet<i64> = BTreeSet::new();
    for &x in &vals {
        if !ctx.contains(x) {
            return Err(RamseyError::Context(format!("pick {x} outside the window")));
        }
        match pos.iter().rposition(|&p| p <= x) {
            None => {
                anchors.insert(pos[0]);
            }
            Some(j) => {
                anchors.insert(pos[j]);
                if let Some(&n) = pos.get(j + 1) {
                    anchors.insert(n);
                }
            }
        }
    }
    for (c, p) in &own.constants {
        if c != FIRST {
            anchors.insert(int_of(p)?);
        }
    }
    let anchor_pts: Vec<Point> = anchors.iter().map(|&x| Point::int(x)).collect();
    let virt = single_round_answer(own, other, Side::A, &anchor_pts, DEFAULT_BUDGET)?
        .ok_or_else(|| RamseyError::VirtualGameLost(format!("no answer to {anchor_pts:?}")))?;
    let virt: Vec<i64> = virt.iter().map(int_of).collect::<Result<_, _>>()?;
    let anchors: Vec<i64> = anchors.into_iter().collect();

    let grid = Grid::new(ctx);
    let mut full = vals.clone();
    full.extend_from_slice(&anchors);
    let target = grid.atomic_type(&full);
    let k = vals.len();
    let mut cand: Vec<i64> = vec![ctx.lo; k];
    cand.extend_from_slice(&virt);
    loop {
        if grid.atomic_type(&cand) == target {
            return Ok(cand[..k].iter().map(|&x| Point::int(x)).collect());
        }
        let mut d = k;
        loop {
            if d == 0 {
                return Err(RamseyError::NoRealization);
            }
            d -= 1;
            cand[d] += 1;
            if cand[d] <= ctx.hi {
                break;
            }
            cand[d] = ctx.lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{play_ef_game, play_single_round_game, sweep, all_moves, ExhaustiveSingleRoundSpoiler, CopyDuplicator, RandomSpoiler};

    fn p3(lo: i64, hi: i64) -> MonadicContext {
        MonadicContext::new(lo, hi)
            .with_predicate("P3", &PredicateSpec::Progression { offset: 0, stride: 3 })
            .unwrap()
    }

    fn pt(x: i64) -> Point {
        Point::int(x)
    }

    #[test]
    fn shifted_intervals_share_types() {
        let ctx = p3(0, 30);
        let a = interval_k_type(&ctx, &pt(0), &pt(3), 1).unwrap();
        assert_eq!(a, interval_k_type(&ctx, &pt(6), &pt(9), 1).unwrap());
        assert_ne!(a, interval_k_type(&ctx, &pt(1), &pt(4), 1).unwrap());
        assert_eq!(a, interval_k_type(&ctx, &pt(0), &pt(3), 1).unwrap());
    }

    #[test]
    fn uniform_positions_in_progression_context() {
        let ctx = p3(0, 29);
        // One round cannot tell [9, 11) from [0, 3); two rounds can.
        let sp = find_uniform_positions_monadic(&ctx, 1, 5).unwrap();
        let t0 = interval_k_type(&ctx, &sp.points[0], &sp.points[1], 1).unwrap();
        for w in sp.points.windows(2) {
            assert_eq!(interval_k_type(&ctx, &w[0], &w[1], 1).unwrap(), t0);
        }
        let sp = find_uniform_positions_monadic(&ctx, 2, 5).unwrap();
        assert_eq!(sp.points, [0, 3, 6, 9, 12].map(pt).to_vec());
        let empty = MonadicContext::new(0, 9);
        let sp = find_uniform_positions_monadic(&empty, 2, 4).unwrap();
        assert_eq!(sp.points, [0, 1, 2, 3].map(pt).to_vec());
        match find_uniform_positions_monadic(&ctx, 1, 40) {
            Err(RamseyError::WindowExhausted { needed: 40, found }) => assert!(found < 40),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn progression_descriptor_expands_over_window() {
        let spec = ContextSpec {
            lo: 2,
            hi: 10,
            predicates: [("E".to_string(), PredicateSpec::Progression { offset: 0, stride: 4 })].into(),
        };
        let ctx = MonadicContext::from_spec(&spec).unwrap();
        assert_eq!(ctx.predicates["E"], [4, 8].map(pt).into());
        let back = MonadicContext::from_spec(&ctx.to_spec()).unwrap();
        assert_eq!(back, ctx);
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ContextSpec>(&json).unwrap(), spec);
    }

    fn unary_db(points: &[i64]) -> OrderedStructure {
        let sig = Signature::new().with_relation("R", 1);
        let mut s = OrderedStructure::new(sig, Universe::window(0, 100));
        for &x in points {
            s.add_tuple("R", vec![pt(x)]);
        }
        s
    }

    #[test]
    fn monadic_translation_mirrors_equal_databases() {
        let ctx = p3(0, 39);
        let a = unary_db(&[4, 50]);
        let t = translate_strategy_monadic(&a, &a, 1, &ctx).unwrap();
        assert_eq!(t.alpha, t.beta);
        let mut du = t.duplicator.clone();
        let rep = sweep(&t.a, &t.b, 1, &mut du, &mut all_moves(Oracle::default()), 1 << 20).unwrap();
        assert!(rep.loss.is_none());
    }

    #[test]
    fn monadic_translation_survives_exhaustive_spoiler() {
        let ctx = p3(0, 39);
        // Orders of sizes 3 and 4 agree for two rounds.
        let a = unary_db(&[1, 2, 3]);
        let b = unary_db(&[10, 20, 30, 40]);
        let t = translate_strategy_monadic(&a, &b, 1, &ctx).unwrap();
        let mut du = t.duplicator.clone();
        let rep = sweep(&t.a, &t.b, 1, &mut du, &mut all_moves(Oracle::default()), 1 << 20).unwrap();
        assert!(rep.loss.is_none(), "{:?}", rep.loss);
        assert!(rep.plays > 0);
        let mut sp = RandomSpoiler::new(3);
        let mut du = t.duplicator.clone();
        assert!(play_ef_game(&t.a, &t.b, 1, &mut sp, &mut du).unwrap().duplicator_won);
    }

    #[test]
    fn distinguishable_databases_are_rejected() {
        let ctx = p3(0, 39);
        let a = unary_db(&[1]);
        let b = unary_db(&[1, 2]);
        assert!(matches!(
            translate_strategy_monadic(&a, &b, 1, &ctx),
            Err(RamseyError::Precondition(_))
        ));
    }

    #[test]
    fn atomic_types_list_satisfied_atoms() {
        let ctx = ArbContext::new(0, 9).with_predicate("P", 1, [vec![5]]).unwrap();
        let t = atomic_type(&[pt(5)], &ctx).unwrap();
        assert_eq!(t.atoms(&ctx), vec!["y1=y1", "P(y1)"]);
        let t = atomic_type(&[pt(1), pt(1)], &ctx).unwrap();
        assert!(t.atoms(&ctx).contains(&"y1=y2".to_string()));
        let t = atomic_type(&[pt(2), pt(5)], &ctx).unwrap();
        assert_eq!(t.atoms(&ctx), vec!["y1=y1", "y2=y2", "y1<y2", "P(y2)"]);
    }

    #[test]
    fn colours_follow_order_patterns() {
        let ctx = ArbContext::new(0, 20);
        let y = [pt(3), pt(7)];
        let c0 = color_h_subset(&y, 0, &ctx).unwrap();
        assert_eq!(c0.0, [atomic_type(&y, &ctx).unwrap()].into());
        // One free element: below, equal to either, between, above.
        let c1 = color_h_subset(&y, 1, &ctx).unwrap();
        assert_eq!(c1.0.len(), 5);
        assert_eq!(c1, color_h_subset(&[pt(9), pt(13)], 1, &ctx).unwrap());
        assert_ne!(c1, color_h_subset(&[pt(9), pt(10)], 1, &ctx).unwrap());
    }

    #[test]
    fn uniform_positions_for_single_round_game() {
        let ctx = ArbContext::new(0, 30);
        let sp = find_uniform_positions_bcefo(&ctx, 2, 1, 6).unwrap();
        assert_eq!(sp.points, [1, 3, 5, 7, 9, 11].map(pt).to_vec());
        assert_eq!(sp.colors.len(), 2);
        let ctx3 = ArbContext::from(&p3(0, 30));
        let sp = find_uniform_positions_bcefo(&ctx3, 2, 1, 5).unwrap();
        let pts: Vec<i64> = sp.points.iter().map(|p| int_of(p).unwrap()).collect();
        let stride = pts[1] - pts[0];
        assert!(pts.windows(2).all(|w| w[1] - w[0] == stride));
        assert_eq!(stride % 3, 0);
        assert!(matches!(
            find_uniform_positions_bcefo(&ctx, 2, 1, 40),
            Err(RamseyError::WindowExhausted { .. })
        ));
    }

    #[test]
    fn gap_embedding_spreads_images() {
        let ps: Vec<Point> = (1..=8).map(|j| pt(10 * j)).collect();
        let a = unary_db(&[5]);
        let (al, _) = gap_embedding(&a, &a, &ps[..4], 2).unwrap();
        assert_eq!(al.get(&pt(5)), Some(&pt(40)));
        let b = unary_db(&[5, 9]);
        let (al, _) = gap_embedding(&b, &b, &ps, 1).unwrap();
        assert_eq!(al.get(&pt(5)), Some(&pt(20)));
        assert_eq!(al.get(&pt(9)), Some(&pt(40)));
        assert!(gap_embedding(&b, &b, &ps[..3], 1).is_err());
    }

    #[test]
    fn single_round_translation_wins() {
        let ctx = ArbContext::from(&p3(0, 30));
        let a = unary_db(&[7]);
        let b = unary_db(&[70]);
        let t = translate_strategy_bcefo(&a, &b, 1, &ctx).unwrap();
        let mut du = t.duplicator.clone();
        let tr = play_single_round_game(&t.a, &t.b, 1, &mut ExhaustiveSingleRoundSpoiler, &mut du).unwrap();
        assert!(tr.duplicator_won, "{tr:?}");
        assert!(single_round_oracle(&t.a, &t.b, 1).unwrap());
        let empty = duplicator_single_round_bcefo(&ctx, &t.duplicator.positions, &t.duplicator.virtual_a, &t.duplicator.virtual_b, &[]).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn single_round_answers_keep_database_points() {
        let ctx = ArbContext::new(0, 30);
        let a = unary_db(&[2, 3]);
        let b = unary_db(&[8, 9]);
        let t = translate_strategy_bcefo(&a, &b, 1, &ctx).unwrap();
        let img: Vec<Point> = t.alpha.pairs.iter().map(|(_, y)| y.clone()).collect();
        let d = &t.duplicator;
        let ans = duplicator_single_round_bcefo(&ctx, &d.positions, &d.virtual_a, &d.virtual_b, &img).unwrap();
        let img_b: Vec<Point> = t.beta.pairs.iter().map(|(_, y)| y.clone()).collect();
        assert_eq!(ans, img_b);
        let below = duplicator_single_round_bcefo(&ctx, &d.positions, &d.virtual_a, &d.virtual_b, &[pt(0)]).unwrap();
        assert!(below[0] < d.positions[0]);
    }

    #[test]
    fn copy_agent_is_fine_on_identical_translations() {
        let ctx = ArbContext::new(0, 20);
        let a = unary_db(&[1]);
        let t = translate_strategy_bcefo(&a, &a, 1, &ctx).unwrap();
        let tr = play_single_round_game(&t.a, &t.b, 1, &mut ExhaustiveSingleRoundSpoiler, &mut CopyDuplicator).unwrap();
        assert!(tr.duplicator_won);
    }
}
