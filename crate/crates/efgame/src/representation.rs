//! Databases over the rationals whose relations are unions of grid cells.
//!
//! A finite sorted cut list `S = (s_1 < .. < s_n)` splits the line into the
//! points `s_i` and the open gaps between them. A tuple sits in a cell `ī`
//! (coordinate `j` satisfies `S(i_j) <= x_j < S(i_j + 1)` with `S(0) = -inf`)
//! and has a [`CellType`]: which coordinates hit their left cut and how the
//! coordinates compare with each other. Every relation definable from `<`
//! and the cut points is a union of (cell, type) classes, which is what
//! [`RegionRelation`] stores.
//!
//! The module covers quantifier elimination into that normal form, the
//! smallest cut set a relation needs, the encoding of a structure as finite
//! relations over its cut set and the two first-order interpretations that
//! go back and forth between the two views.
//!
//! The smallest cut set is computed by looking at the cells around each cut:
//! a cut `s` is kept when some tuple with a coordinate at `s` changes
//! membership as that coordinate moves to just below `s`, onto `s` or just
//! above it. Membership inside a (cell, type) class is constant, so trying
//! one tuple per class with a coordinate at `s` covers every case.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::logic::{
    dense_witnesses, literals, substitute, Evaluator, Formula, LogicError, Model, Term,
};
use crate::structure::{
    parse_structure, print_structure, OrderedStructure, Point, Signature, StructureError,
    Universe,
};

/// Relations of higher arity have too many cell types to enumerate.
pub const MAX_ARITY: usize = 3;

/// The unary symbol holding the cut set in an encoded structure.
pub const CUT_SYMBOL: &str = "S";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepresentationError {
    #[error("arity {0} is outside 1..=3")]
    Arity(usize),
    #[error("literal {0} is not a cut point")]
    LiteralOutsideCuts(Point),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("cut set is not sufficient: cell {cell:?} of type {ty} is split")]
    Insufficient { cell: Vec<usize>, ty: String },
    #[error("relation {0} is non-empty but the cut set is empty")]
    EmptyCutSet(String),
    #[error("constant {name} is defined by {count} points")]
    ConstantDenotation { name: String, count: String },
    #[error("family {0} is missing")]
    MissingFamily(String),
    #[error("symbol {0} clashes with the cut symbol")]
    SymbolClash(String),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

type Result<T> = std::result::Result<T, RepresentationError>;

/// Position of a tuple inside its cell: `at_cut[j]` says `x_j` equals its
/// left cut, `ranks` is the dense ranking of the coordinates (equal values
/// share a rank).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellType {
    pub ranks: Vec<u8>,
    pub at_cut: Vec<bool>,
}

impl CellType {
    pub fn arity(&self) -> usize {
        self.ranks.len()
    }

    /// Position in [`enumerate_types`].
    pub fn id(&self) -> usize {
        type_table(self.arity())
            .binary_search(self)
            .expect("cell type is canonical")
    }

    /// Atoms of the complete conjunction, `y_j` standing for the left cut of
    /// coordinate `j`.
    pub fn atoms(&self) -> Vec<String> {
        let m = self.arity();
        let mut out = Vec::new();
        for j in 0..m {
            let rel = if self.at_cut[j] { "=" } else { "<" };
            out.push(format!("y{}{rel}x{}", j + 1, j + 1));
        }
        for j in 0..m {
            for k in j + 1..m {
                let rel = match self.ranks[j].cmp(&self.ranks[k]) {
                    std::cmp::Ordering::Less => "<",
                    std::cmp::Ordering::Equal => "=",
                    std::cmp::Ordering::Greater => ">",
                };
                out.push(format!("x{}{rel}x{}", j + 1, k + 1));
            }
        }
        out
    }
}

impl fmt::Display for CellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atoms().join(" "))
    }
}

fn weak_orders(m: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let total = (m as u32).pow(m as u32).max(1);
    for code in 0..total {
        let mut c = code;
        let mut r = Vec::with_capacity(m);
        for _ in 0..m {
            r.push((c % m as u32) as u8);
            c /= m as u32;
        }
        r.reverse();
        let used: BTreeSet<u8> = r.iter().copied().collect();
        if used.iter().enumerate().all(|(i, &v)| i == v as usize) {
            out.push(r);
        }
    }
    out
}

fn build_types(m: usize) -> Vec<CellType> {
    let mut out = Vec::new();
    for ranks in weak_orders(m) {
        for bits in 0..1usize << m {
            let at_cut = (0..m).map(|j| bits >> (m - 1 - j) & 1 == 1).collect();
            out.push(CellType {
                ranks: ranks.clone(),
                at_cut,
            });
        }
    }
    out.sort();
    out
}

fn type_table(m: usize) -> &'static [CellType] {
    static TABLES: OnceLock<Vec<Vec<CellType>>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=MAX_ARITY).map(build_types).collect())[m]
}

/// Every cell type of arity `m`, sorted; ids are positions in this list.
pub fn enumerate_types(m: usize) -> Result<Vec<CellType>> {
    if m == 0 || m > MAX_ARITY {
        return Err(RepresentationError::Arity(m));
    }
    Ok(type_table(m).to_vec())
}

/// Where a tuple sits relative to a cut list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub cell: Vec<usize>,
    pub ty: CellType,
    /// `false` for coordinates below every cut.
    pub chars: Vec<bool>,
    /// The cut representing each coordinate's gap; `None` when there are
    /// no cuts at all.
    pub representative: Option<Vec<Point>>,
}

fn cell_index(x: &Point, cuts: &[Point]) -> usize {
    cuts.partition_point(|c| c <= x)
}

fn ranks_of(xs: &[Point]) -> Vec<u8> {
    let distinct: BTreeSet<&Point> = xs.iter().collect();
    let order: Vec<&Point> = distinct.into_iter().collect();
    xs.iter()
        .map(|x| order.binary_search(&x).unwrap() as u8)
        .collect()
}

fn cell_and_type(xs: &[Point], cuts: &[Point]) -> (Vec<usize>, CellType) {
    let cell: Vec<usize> = xs.iter().map(|x| cell_index(x, cuts)).collect();
    let at_cut = xs
        .iter()
        .zip(&cell)
        .map(|(x, &i)| i > 0 && &cuts[i - 1] == x)
        .collect();
    (
        cell,
        CellType {
            ranks: ranks_of(xs),
            at_cut,
        },
    )
}

/// Cell, type, characteristic tuple and representative of `xs`; `cuts` must
/// be sorted.
pub fn locate(xs: &[Point], cuts: &[Point]) -> Location {
    let (cell, ty) = cell_and_type(xs, cuts);
    let chars = cell.iter().map(|&i| i > 0).collect();
    let representative = if cuts.is_empty() {
        None
    } else {
        Some(cell.iter().map(|&i| cuts[i.max(1) - 1].clone()).collect())
    };
    Location {
        cell,
        ty,
        chars,
        representative,
    }
}

/// One tuple of the given cell and type, or `None` when the combination is
/// empty. Lone points in a gap sit at its midpoint, or one below the first
/// cut; several points spread out evenly.
pub fn witness(cuts: &[Point], cell: &[usize], ty: &CellType) -> Option<Vec<Point>> {
    let m = cell.len();
    let n = cuts.len();
    if ty.arity() != m || cell.iter().any(|&i| i > n) {
        return None;
    }
    let mut gap_ranks: BTreeMap<usize, BTreeSet<u8>> = BTreeMap::new();
    for j in 0..m {
        if !ty.at_cut[j] {
            gap_ranks.entry(cell[j]).or_default().insert(ty.ranks[j]);
        }
    }
    let mut xs = Vec::with_capacity(m);
    for j in 0..m {
        let i = cell[j];
        if ty.at_cut[j] {
            if i == 0 {
                return None;
            }
            xs.push(cuts[i - 1].clone());
            continue;
        }
        let ranks = &gap_ranks[&i];
        let k = ranks.len() as i64;
        let r = ranks.iter().position(|&v| v == ty.ranks[j]).unwrap() as i64;
        let p = if n == 0 {
            Point::int(r)
        } else if i == 0 {
            cuts[0].sub(&Point::int(k - r))
        } else if i == n {
            cuts[n - 1].add(&Point::int(r + 1))
        } else {
            let (lo, hi) = (&cuts[i - 1], &cuts[i]);
            let step = Point(hi.sub(lo).0 * Point::ratio(r + 1, k + 1).0);
            lo.add(&step)
        };
        xs.push(p);
    }
    let (c, t) = cell_and_type(&xs, cuts);
    (c == cell && &t == ty).then_some(xs)
}

/// All non-empty (cell, type) classes of arity `m`, each with its witness.
pub fn classes(cuts: &[Point], m: usize) -> Result<Vec<(Vec<usize>, usize, Vec<Point>)>> {
    let types = enumerate_types(m)?;
    let n = cuts.len();
    let mut out = Vec::new();
    let mut cell = vec![0usize; m];
    loop {
        for (id, t) in types.iter().enumerate() {
            if let Some(w) = witness(cuts, &cell, t) {
                out.push((cell.clone(), id, w));
            }
        }
        let mut j = m;
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            if cell[j] < n {
                cell[j] += 1;
                break;
            }
            cell[j] = 0;
        }
    }
}

fn sorted_cuts(cuts: impl IntoIterator<Item = Point>) -> Vec<Point> {
    cuts.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}

/// A relation over the rationals given as a union of (cell, type) classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionRelation {
    pub arity: usize,
    pub cuts: Vec<Point>,
    pub cells: BTreeSet<(Vec<usize>, usize)>,
}

impl RegionRelation {
    pub fn empty(arity: usize, cuts: Vec<Point>) -> Self {
        RegionRelation {
            arity,
            cuts: sorted_cuts(cuts),
            cells: BTreeSet::new(),
        }
    }

    /// Membership of every class decided by `pred` on its witness.
    pub fn from_predicate(
        arity: usize,
        cuts: Vec<Point>,
        mut pred: impl FnMut(&[Point]) -> Result<bool>,
    ) -> Result<Self> {
        let cuts = sorted_cuts(cuts);
        let mut cells = BTreeSet::new();
        for (cell, id, w) in classes(&cuts, arity)? {
            if pred(&w)? {
                cells.insert((cell, id));
            }
        }
        Ok(RegionRelation { arity, cuts, cells })
    }

    /// A finite set of tuples; its coordinates become the cuts.
    pub fn from_tuples(arity: usize, tuples: &BTreeSet<Vec<Point>>) -> Result<Self> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(RepresentationError::Arity(arity));
        }
        let cuts = sorted_cuts(tuples.iter().flatten().cloned());
        let cells = tuples
            .iter()
            .map(|t| {
                let (c, ty) = cell_and_type(t, &cuts);
                (c, ty.id())
            })
            .collect();
        Ok(RegionRelation { arity, cuts, cells })
    }

    pub fn contains(&self, xs: &[Point]) -> bool {
        if xs.len() != self.arity {
            return false;
        }
        let (c, ty) = cell_and_type(xs, &self.cuts);
        self.cells.contains(&(c, ty.id()))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The same set described over `cuts` together with the current cuts.
    pub fn refine(&self, cuts: &[Point]) -> RegionRelation {
        let all = sorted_cuts(self.cuts.iter().chain(cuts).cloned());
        RegionRelation::from_predicate(self.arity, all, |w| Ok(self.contains(w)))
            .expect("arity already checked")
    }

    /// Set equality, regardless of the cut lists used.
    pub fn same_set(&self, other: &RegionRelation) -> bool {
        self.arity == other.arity && self.refine(&other.cuts).cells == other.refine(&self.cuts).cells
    }

    /// The tuples, when every class is a single point.
    pub fn finite_tuples(&self) -> Option<BTreeSet<Vec<Point>>> {
        let types = type_table(self.arity);
        self.cells
            .iter()
            .map(|(c, id)| {
                let t = &types[*id];
                if t.at_cut.iter().all(|&b| b) {
                    witness(&self.cuts, c, t)
                } else {
                    None
                }
            })
            .collect()
    }
}

const REGION_HEADER: &str = "efgame-region 1";

fn join_points(ps: &[Point]) -> String {
    ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}

fn cell_lines(r: &RegionRelation, out: &mut String) {
    out.push_str(&format!("cuts {}\n", join_points(&r.cuts)).replace("cuts \n", "cuts\n"));
    for (c, id) in &r.cells {
        let idx: Vec<String> = c.iter().map(|i| i.to_string()).collect();
        out.push_str(&format!("cell {} : {id}\n", idx.join(" ")));
    }
}

/// Text form: arity, cut list, a table of type ids and the included cells
/// as `cell i_1 .. i_m : type-id`.
pub fn print_region(r: &RegionRelation) -> String {
    let mut out = format!("{REGION_HEADER}\narity {}\n", r.arity);
    for (id, t) in type_table(r.arity).iter().enumerate() {
        out.push_str(&format!("type {id} {t}\n"));
    }
    cell_lines(r, &mut out);
    out
}

fn perr(line: usize, msg: impl Into<String>) -> RepresentationError {
    RepresentationError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_points(line: usize, words: &[&str]) -> Result<Vec<Point>> {
    words
        .iter()
        .map(|w| w.parse::<Point>().map_err(|e| perr(line, e)))
        .collect()
}

/// Reads the body lines of a region (`cuts`, `cell`, optional `type`).
fn parse_region_body<'a>(
    arity: usize,
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    stop_at_end: bool,
) -> Result<RegionRelation> {
    if arity == 0 || arity > MAX_ARITY {
        return Err(RepresentationError::Arity(arity));
    }
    let types = type_table(arity);
    let mut cuts = None;
    let mut cells = BTreeSet::new();
    for (n, line) in lines.by_ref() {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["end"] if stop_at_end => break,
            ["cuts", rest @ ..] => {
                let ps = parse_points(n, rest)?;
                if ps.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(perr(n, "cuts must be strictly increasing"));
                }
                cuts = Some(ps);
            }
            ["type", id, rest @ ..] => {
                let id: usize = id.parse().map_err(|_| perr(n, "bad type id"))?;
                let want = types.get(id).ok_or_else(|| perr(n, "type id out of range"))?;
                if rest.join(" ") != want.to_string() {
                    return Err(perr(n, format!("type {id} should read {want}")));
                }
            }
            ["cell", rest @ ..] => {
                let cuts = cuts.as_ref().ok_or_else(|| perr(n, "cell before cuts"))?;
                let (idx, id) = match rest {
                    [idx @ .., ":", id] => (idx, id),
                    _ => return Err(perr(n, "expected `cell i.. : id`")),
                };
                let idx: Vec<usize> = idx
                    .iter()
                    .map(|w| w.parse().map_err(|_| perr(n, "bad cell index")))
                    .collect::<Result<_>>()?;
                let id: usize = id.parse().map_err(|_| perr(n, "bad type id"))?;
                let t = types.get(id).ok_or_else(|| perr(n, "type id out of range"))?;
                if idx.len() != arity || witness(cuts, &idx, t).is_none() {
                    return Err(perr(n, format!("cell {idx:?} with type {id} is empty")));
                }
                cells.insert((idx, id));
            }
            _ => return Err(perr(n, format!("unrecognised line {line:?}"))),
        }
    }
    let cuts = cuts.ok_or_else(|| perr(0, "missing cuts line"))?;
    Ok(RegionRelation { arity, cuts, cells })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_region(text: &str) -> Result<RegionRelation> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, h)) if h == REGION_HEADER => {}
        _ => return Err(perr(1, format!("expected header {REGION_HEADER:?}"))),
    }
    let arity = match lines.next() {
        Some((n, l)) => l
            .strip_prefix("arity ")
            .and_then(|a| a.trim().parse().ok())
            .ok_or_else(|| perr(n, "expected `arity m`"))?,
        None => return Err(perr(0, "missing arity")),
    };
    parse_region_body(arity, &mut lines, false)
}

// ---------------------------------------------------------------------------
// Quantifier elimination

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Atom {
    Less(Term, Term),
    Eq(Term, Term),
}

fn eq_atom(a: Term, b: Term) -> Atom {
    if a <= b {
        Atom::Eq(a, b)
    } else {
        Atom::Eq(b, a)
    }
}

type Dnf = Vec<BTreeSet<Atom>>;

/// Folds atoms between literals; `None` for a false atom, `Some(None)` for
/// a true one.
fn fold_atom(a: Atom) -> Option<Option<Atom>> {
    match &a {
        Atom::Less(x, y) if x == y => None,
        Atom::Eq(x, y) if x == y => Some(None),
        Atom::Less(Term::Lit(x), Term::Lit(y)) => (x < y).then_some(None),
        Atom::Eq(Term::Lit(x), Term::Lit(y)) => (x == y).then_some(None),
        _ => Some(Some(a)),
    }
}

fn conj(atoms: impl IntoIterator<Item = Atom>) -> Option<BTreeSet<Atom>> {
    let mut out = BTreeSet::new();
    for a in atoms {
        if let Some(a) = fold_atom(a)? {
            out.insert(a);
        }
    }
    Some(out)
}

/// Whether a conjunction has a solution in the rationals: after merging
/// equal terms, no class may hold two literals and the `<` edges (literals
/// ordered by value) must be acyclic. Density fits any acyclic chain in.
fn consistent(c: &BTreeSet<Atom>) -> bool {
    let mut ids: BTreeMap<&Term, usize> = BTreeMap::new();
    let (mut less, mut eqs) = (Vec::new(), Vec::new());
    for a in c {
        let (Atom::Less(x, y) | Atom::Eq(x, y)) = a;
        let mut id = |t| {
            let next = ids.len();
            *ids.entry(t).or_insert(next)
        };
        let pair = (id(x), id(y));
        if matches!(a, Atom::Less(..)) {
            less.push(pair);
        } else {
            eqs.push(pair);
        }
    }
    let n = ids.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (x, y) in eqs {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        parent[rx] = ry;
    }
    let mut lit_of: HashMap<usize, &Point> = HashMap::new();
    for (t, &i) in &ids {
        if let Term::Lit(p) = t {
            let r = find(&mut parent, i);
            if lit_of.insert(r, p).is_some_and(|q| q != p) {
                return false;
            }
        }
    }
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, y) in less {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        edges[rx].push(ry);
    }
    let lits: Vec<(usize, &Point)> = lit_of.into_iter().collect();
    for (r, p) in &lits {
        for (s, q) in &lits {
            if p < q {
                edges[*r].push(*s);
            }
        }
    }
    // depth-first cycle search: 0 unseen, 1 on the stack, 2 done
    let mut state = vec![0u8; n];
    fn cyclic(v: usize, edges: &[Vec<usize>], state: &mut [u8]) -> bool {
        state[v] = 1;
        for &w in &edges[v] {
            if state[w] == 1 || (state[w] == 0 && cyclic(w, edges, state)) {
                return true;
            }
        }
        state[v] = 2;
        false
    }
    (0..n).all(|v| state[v] != 0 || !cyclic(v, &edges, &mut state))
}

/// Drops unsatisfiable conjunctions and those implied by a smaller one.
fn prune(mut d: Dnf) -> Dnf {
    d.retain(consistent);
    d.sort_by_key(|c| c.len());
    d.dedup();
    let mut out: Dnf = Vec::new();
    for c in d {
        if !out.iter().any(|k| k.is_subset(&c)) {
            out.push(c);
        }
    }
    out.sort();
    out
}

fn dnf_or(mut a: Dnf, b: Dnf) -> Dnf {
    a.extend(b);
    prune(a)
}

fn dnf_and(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            out.push(x.iter().chain(y).cloned().collect());
        }
    }
    prune(out)
}

fn check_term(t: &Term, cuts: &BTreeSet<Point>) -> Result<()> {
    match t {
        Term::Lit(p) if !cuts.contains(p) => Err(RepresentationError::LiteralOutsideCuts(p.clone())),
        Term::Const(c) => Err(RepresentationError::UnknownSymbol(c.clone())),
        _ => Ok(()),
    }
}

/// Disjunctive normal form of a quantifier-free formula, negated when `neg`.
fn to_dnf(f: &Formula, neg: bool) -> Result<Dnf> {
    let single = |atoms: Vec<Atom>| conj(atoms).into_iter().collect::<Dnf>();
    Ok(match f {
        Formula::True | Formula::False => {
            if matches!(f, Formula::True) != neg {
                vec![BTreeSet::new()]
            } else {
                vec![]
            }
        }
        Formula::Less(a, b) => {
            if neg {
                dnf_or(single(vec![Atom::Less(b.clone(), a.clone())]), single(vec![eq_atom(a.clone(), b.clone())]))
            } else {
                single(vec![Atom::Less(a.clone(), b.clone())])
            }
        }
        Formula::Eq(a, b) => {
            if neg {
                dnf_or(single(vec![Atom::Less(a.clone(), b.clone())]), single(vec![Atom::Less(b.clone(), a.clone())]))
            } else {
                single(vec![eq_atom(a.clone(), b.clone())])
            }
        }
        Formula::Not(g) => to_dnf(g, !neg)?,
        Formula::And(gs) | Formula::Or(gs) => {
            let is_and = matches!(f, Formula::And(_)) != neg;
            let mut acc: Dnf = if is_and { vec![BTreeSet::new()] } else { vec![] };
            for g in gs {
                let d = to_dnf(g, neg)?;
                acc = if is_and { dnf_and(&acc, &d) } else { dnf_or(acc, d) };
            }
            acc
        }
        other => {
            return Err(RepresentationError::Unsupported(format!(
                "{other} in an order formula"
            )))
        }
    })
}

fn subst_atom(a: &Atom, v: &str, t: &Term) -> Atom {
    let s = |x: &Term| match x {
        Term::Var(w) if w == v => t.clone(),
        _ => x.clone(),
    };
    match a {
        Atom::Less(x, y) => Atom::Less(s(x), s(y)),
        Atom::Eq(x, y) => eq_atom(s(x), s(y)),
    }
}

fn mentions(a: &Atom, v: &str) -> bool {
    let is = |t: &Term| matches!(t, Term::Var(w) if w == v);
    match a {
        Atom::Less(x, y) | Atom::Eq(x, y) => is(x) || is(y),
    }
}

/// `exists v` applied to one conjunction of atoms.
fn eliminate_from(c: &BTreeSet<Atom>, v: &str) -> Option<BTreeSet<Atom>> {
    let var = Term::Var(v.to_string());
    // an equation v = t lets us substitute t for v everywhere
    for a in c {
        if let Atom::Eq(x, y) = a {
            let t = if *x == var { y } else if *y == var { x } else { continue };
            return conj(c.iter().map(|b| subst_atom(b, v, t)));
        }
    }
    let (mut lower, mut upper, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for a in c {
        match a {
            Atom::Less(x, y) if *y == var => lower.push(x.clone()),
            Atom::Less(x, y) if *x == var => upper.push(y.clone()),
            _ if mentions(a, v) => unreachable!("equations were handled above"),
            _ => rest.push(a.clone()),
        }
    }
    // between any lower and upper bound there is room by density; a missing
    // side is fine because the order has no endpoints
    for l in &lower {
        for u in &upper {
            rest.push(Atom::Less(l.clone(), u.clone()));
        }
    }
    conj(rest)
}

fn dnf_formula(d: &Dnf) -> Formula {
    let atom = |a: &Atom| match a {
        Atom::Less(x, y) => Formula::Less(x.clone(), y.clone()),
        Atom::Eq(x, y) => Formula::Eq(x.clone(), y.clone()),
    };
    match d.len() {
        0 => Formula::False,
        _ if d.iter().any(|c| c.is_empty()) => Formula::True,
        1 => Formula::And(d[0].iter().map(atom).collect()),
        _ => Formula::Or(
            d.iter()
                .map(|c| Formula::And(c.iter().map(atom).collect()))
                .collect(),
        ),
    }
}

fn qe_dnf(f: &Formula, cuts: &BTreeSet<Point>) -> Result<Dnf> {
    match f {
        Formula::Exists(v, g) => {
            let d = qe_dnf(g, cuts)?;
            Ok(prune(d.iter().filter_map(|c| eliminate_from(c, v)).collect()))
        }
        Formula::Forall(v, g) => {
            let inner = Formula::exists(v, Formula::not((**g).clone()));
            let d = qe_dnf(&inner, cuts)?;
            to_dnf(&dnf_formula(&d), true)
        }
        Formula::Not(g) => {
            let d = qe_dnf(g, cuts)?;
            to_dnf(&dnf_formula(&d), true)
        }
        Formula::And(gs) | Formula::Or(gs) => {
            let is_and = matches!(f, Formula::And(_));
            let mut acc: Dnf = if is_and { vec![BTreeSet::new()] } else { vec![] };
            for g in gs {
                let d = qe_dnf(g, cuts)?;
                acc = if is_and { dnf_and(&acc, &d) } else { dnf_or(acc, d) };
            }
            Ok(acc)
        }
        Formula::Less(a, b) | Formula::Eq(a, b) => {
            check_term(a, cuts)?;
            check_term(b, cuts)?;
            to_dnf(f, false)
        }
        _ => to_dnf(f, false),
    }
}

/// A quantifier-free formula equivalent over the rationals to `f`, which may
/// only use `<`, `=` and literals from `cuts`.
pub fn eliminate_quantifiers(f: &Formula, cuts: &[Point]) -> Result<Formula> {
    let cuts: BTreeSet<Point> = cuts.iter().cloned().collect();
    Ok(dnf_formula(&qe_dnf(f, &cuts)?))
}

fn eval_qf(f: &Formula, env: &HashMap<&str, &Point>) -> Result<bool> {
    let term = |t: &Term| -> Result<Point> {
        match t {
            Term::Var(v) => env
                .get(v.as_str())
                .map(|p| (*p).clone())
                .ok_or_else(|| LogicError::Unbound(v.clone()).into()),
            Term::Lit(p) => Ok(p.clone()),
            Term::Const(c) => Err(RepresentationError::UnknownSymbol(c.clone())),
        }
    };
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Less(a, b) => term(a)? < term(b)?,
        Formula::Eq(a, b) => term(a)? == term(b)?,
        Formula::Not(g) => !eval_qf(g, env)?,
        Formula::And(gs) => {
            for g in gs {
                if !eval_qf(g, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_qf(g, env)? {
                    return Ok(true);
                }
            }
            false
        }
        other => return Err(RepresentationError::Unsupported(format!("{other}"))),
    })
}

/// The normal form of `f` with free variables `vars` (in coordinate order):
/// the classes of the `cuts` grid on which it holds.
pub fn qe_normalize(f: &Formula, vars: &[String], cuts: &[Point]) -> Result<RegionRelation> {
    let qf = eliminate_quantifiers(f, cuts)?;
    RegionRelation::from_predicate(vars.len(), cuts.to_vec(), |w| {
        let env: HashMap<&str, &Point> = vars.iter().map(|v| v.as_str()).zip(w).collect();
        eval_qf(&qf, &env)
    })
}

// ---------------------------------------------------------------------------
// Canonical cut sets and encodings

/// Membership of the tuple as the coordinates at `s` move below, onto and
/// above `s`.
fn profile(r: &RegionRelation, w: &[Point], s: &Point, delta: &Point) -> [bool; 3] {
    let moved = |to: Point| -> Vec<Point> {
        w.iter()
            .map(|x| if x == s { to.clone() } else { x.clone() })
            .collect()
    };
    [
        r.contains(&moved(s.sub(delta))),
        r.contains(w),
        r.contains(&moved(s.add(delta))),
    ]
}

/// The cuts of `r` every sufficient cut set must contain.
pub fn canonical_s(r: &RegionRelation) -> Vec<Point> {
    let cuts = &r.cuts;
    let classes = classes(cuts, r.arity).expect("arity already checked");
    let mut keep = Vec::new();
    for (i, s) in cuts.iter().enumerate() {
        let kept = classes.iter().any(|(_, _, w)| {
            if !w.contains(s) {
                return false;
            }
            // closer to s than any other coordinate or cut
            let mut gap: Option<Point> = None;
            for p in w.iter().chain(cuts.iter()) {
                if p != s {
                    let d = if p > s { p.sub(s) } else { s.sub(p) };
                    if gap.as_ref().map_or(true, |g| d < *g) {
                        gap = Some(d);
                    }
                }
            }
            let delta = match gap {
                Some(g) => Point(g.0 / num_rational::BigRational::from_integer(4.into())),
                None => Point::int(1),
            };
            let [below, on, above] = profile(r, w, s, &delta);
            !(below == on && on == above)
        });
        if kept {
            keep.push(cuts[i].clone());
        }
    }
    keep
}

/// Key of one family `R_{t;u}`: type id and characteristic tuple.
pub type FamilyKey = (usize, Vec<bool>);

/// The finite relations encoding one relation over a cut set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationRep {
    pub arity: usize,
    pub cuts: Vec<Point>,
    /// Only non-empty families are stored.
    pub families: BTreeMap<FamilyKey, BTreeSet<Vec<Point>>>,
}

/// Checks that `r` is constant on every class of the `cuts` grid and collects
/// the representatives of the classes inside `r`.
pub fn rep_of_relation(r: &RegionRelation, cuts: &[Point]) -> Result<RelationRep> {
    let cuts = sorted_cuts(cuts.iter().cloned());
    let fine = sorted_cuts(cuts.iter().chain(&r.cuts).cloned());
    let mut verdict: HashMap<(Vec<usize>, CellType), bool> = HashMap::new();
    for (_, _, w) in classes(&fine, r.arity)? {
        let key = cell_and_type(&w, &cuts);
        let inside = r.contains(&w);
        match verdict.get(&key) {
            Some(&b) if b != inside => {
                return Err(RepresentationError::Insufficient {
                    cell: key.0,
                    ty: key.1.to_string(),
                })
            }
            _ => {
                verdict.insert(key, inside);
            }
        }
    }
    let mut families: BTreeMap<FamilyKey, BTreeSet<Vec<Point>>> = BTreeMap::new();
    for ((cell, ty), inside) in verdict {
        if !inside {
            continue;
        }
        if cuts.is_empty() {
            return Err(RepresentationError::EmptyCutSet(String::new()));
        }
        let chars: Vec<bool> = cell.iter().map(|&i| i > 0).collect();
        let rep: Vec<Point> = cell.iter().map(|&i| cuts[i.max(1) - 1].clone()).collect();
        families.entry((ty.id(), chars)).or_default().insert(rep);
    }
    Ok(RelationRep {
        arity: r.arity,
        cuts,
        families,
    })
}

/// The symbol of family `(t, u)` of relation `name`, e.g. `R.t3.u01`.
pub fn family_symbol(name: &str, type_id: usize, chars: &[bool]) -> String {
    let bits: String = chars.iter().map(|&b| if b { '1' } else { '0' }).collect();
    format!("{name}.t{type_id}.u{bits}")
}

fn split_family_symbol(sym: &str) -> Option<(&str, usize, Vec<bool>)> {
    let (rest, bits) = sym.rsplit_once(".u")?;
    let (name, id) = rest.rsplit_once(".t")?;
    let id = id.parse().ok()?;
    let chars = bits
        .chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect::<Option<Vec<bool>>>()?;
    Some((name, id, chars))
}

fn all_chars(m: usize) -> Vec<Vec<bool>> {
    (0..1usize << m)
        .map(|bits| (0..m).map(|j| bits >> (m - 1 - j) & 1 == 1).collect())
        .collect()
}

/// The type extension: same constants, the unary cut symbol and one symbol
/// per relation, type and characteristic tuple.
pub fn type_extension(sig: &Signature) -> Result<Signature> {
    let mut out = Signature::new().with_relation(CUT_SYMBOL, 1);
    for c in &sig.constants {
        out = out.with_constant(c);
    }
    for (name, m) in &sig.relations {
        if name == CUT_SYMBOL {
            return Err(RepresentationError::SymbolClash(name.clone()));
        }
        for id in 0..enumerate_types(*m)?.len() {
            for u in all_chars(*m) {
                out = out.with_relation(&family_symbol(name, id, &u), *m);
            }
        }
    }
    Ok(out)
}

/// A database over the rationals: constants and region relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseStructure {
    pub signature: Signature,
    pub constants: BTreeMap<String, Point>,
    pub relations: BTreeMap<String, RegionRelation>,
}

impl DenseStructure {
    pub fn new(signature: Signature) -> Self {
        DenseStructure {
            signature,
            constants: BTreeMap::new(),
            relations: BTreeMap::new(),
        }
    }

    pub fn relation(&self, name: &str) -> Option<RegionRelation> {
        let m = self.signature.arity(name)?;
        Some(
            self.relations
                .get(name)
                .cloned()
                .unwrap_or_else(|| RegionRelation::empty(m, vec![])),
        )
    }

    /// Every cut of every relation plus the constants.
    pub fn cuts(&self) -> Vec<Point> {
        sorted_cuts(
            self.relations
                .values()
                .flat_map(|r| r.cuts.iter().cloned())
                .chain(self.constants.values().cloned()),
        )
    }

    /// Same signature, constants and relation contents.
    pub fn same_as(&self, other: &DenseStructure) -> bool {
        let names = |s: &Signature| {
            let mut r = s.relations.clone();
            r.sort();
            let mut c = s.constants.clone();
            c.sort();
            (r, c)
        };
        names(&self.signature) == names(&other.signature)
            && self.constants == other.constants
            && self.signature.relations.iter().all(|(n, _)| {
                self.relation(n).unwrap().same_set(&other.relation(n).unwrap())
            })
    }

    /// Finite relations as regions; monadic predicates and addition are not
    /// allowed.
    pub fn from_finite(s: &OrderedStructure) -> Result<Self> {
        if !s.signature.monadic.is_empty() || s.signature.plus {
            return Err(RepresentationError::Unsupported(
                "context predicates in a dense database".into(),
            ));
        }
        let mut out = DenseStructure::new(s.signature.clone());
        out.constants = s.constants.clone();
        for (name, m) in &s.signature.relations {
            let empty = BTreeSet::new();
            let tuples = s.relations.get(name).unwrap_or(&empty);
            out.relations
                .insert(name.clone(), RegionRelation::from_tuples(*m, tuples)?);
        }
        Ok(out)
    }

    /// Back to finite relations, when every relation is finite.
    pub fn to_finite(&self) -> Option<OrderedStructure> {
        let mut s = OrderedStructure::new(self.signature.clone(), Universe::Rationals);
        s.constants = self.constants.clone();
        for (name, _) in &self.signature.relations {
            s.relations
                .insert(name.clone(), self.relation(name)?.finite_tuples()?);
        }
        Some(s)
    }
}

const DENSE_HEADER: &str = "efgame-dense 1";

/// Text form with relations written as region blocks.
pub fn print_dense(s: &DenseStructure) -> String {
    let mut out = format!("{DENSE_HEADER}\n");
    for (n, m) in &s.signature.relations {
        out.push_str(&format!("relation {n} {m}\n"));
    }
    for c in &s.signature.constants {
        match s.constants.get(c) {
            Some(p) => out.push_str(&format!("constant {c} {p}\n")),
            None => out.push_str(&format!("constant {c}\n")),
        }
    }
    for (n, _) in &s.signature.relations {
        if let Some(r) = s.relations.get(n) {
            out.push_str(&format!("region {n}\n"));
            cell_lines(r, &mut out);
            out.push_str("end\n");
        }
    }
    out
}

/// Reads a dense database. Relations are declared with `relation R m` and
/// given either as `region R` blocks or as `define R x1 .. xm : formula`,
/// where the formula uses `<`, `=` and numeric literals.
pub fn parse_dense(text: &str) -> Result<DenseStructure> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, h)) if h == DENSE_HEADER => {}
        _ => return Err(perr(1, format!("expected header {DENSE_HEADER:?}"))),
    }
    let mut s = DenseStructure::new(Signature::new());
    while let Some((n, line)) = lines.next() {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["relation", name, m] => {
                let m: usize = m.parse().map_err(|_| perr(n, "bad arity"))?;
                if m == 0 || m > MAX_ARITY {
                    return Err(RepresentationError::Arity(m));
                }
                s.signature = s.signature.clone().with_relation(name, m);
            }
            ["constant", name, rest @ ..] => {
                s.signature = s.signature.clone().with_constant(name);
                if let [p] = rest {
                    s.constants
                        .insert(name.to_string(), p.parse().map_err(|e| perr(n, e))?);
                }
            }
            ["region", name] => {
                let m = s
                    .signature
                    .arity(name)
                    .ok_or_else(|| perr(n, format!("undeclared relation {name}")))?;
                let r = parse_region_body(m, &mut lines, true)?;
                s.relations.insert(name.to_string(), r);
            }
            ["define", name, ..] => {
                let m = s
                    .signature
                    .arity(name)
                    .ok_or_else(|| perr(n, format!("undeclared relation {name}")))?;
                let (head, body) = line
                    .split_once(':')
                    .ok_or_else(|| perr(n, "expected `define R vars : formula`"))?;
                let vars: Vec<String> = head.split_whitespace().skip(2).map(String::from).collect();
                if vars.len() != m {
                    return Err(perr(n, format!("{name} needs {m} variables")));
                }
                let f = crate::logic::parse_formula(body.trim(), &Signature::new())
                    .map_err(|e| perr(n, e.to_string()))?;
                let r = qe_normalize(&f, &vars, &literals(&f))?;
                s.relations.insert(name.to_string(), r);
            }
            _ => return Err(perr(n, format!("unrecognised line {line:?}"))),
        }
    }
    s.signature.validate()?;
    for c in &s.signature.constants {
        if !s.constants.contains_key(c) {
            return Err(StructureError::MissingConstant(c.clone()).into());
        }
    }
    Ok(s)
}

/// A structure encoded over its cut set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepStructure {
    /// The signature of the encoded structure.
    pub source: Signature,
    /// Finite relations over the type extension, universe the rationals.
    pub structure: OrderedStructure,
}

impl RepStructure {
    pub fn cuts(&self) -> Vec<Point> {
        self.structure
            .relations
            .get(CUT_SYMBOL)
            .map(|t| t.iter().map(|x| x[0].clone()).collect())
            .unwrap_or_default()
    }

    /// Recovers the encoded signature from the family symbols; every family
    /// of every relation has to be declared.
    pub fn from_structure(structure: OrderedStructure) -> Result<Self> {
        let sig = &structure.signature;
        if sig.arity(CUT_SYMBOL) != Some(1) {
            return Err(RepresentationError::MissingFamily(CUT_SYMBOL.into()));
        }
        let mut source = Signature::new();
        for c in &sig.constants {
            source = source.with_constant(c);
        }
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (name, m) in &sig.relations {
            if name == CUT_SYMBOL {
                continue;
            }
            let (base, _, chars) = split_family_symbol(name)
                .ok_or_else(|| RepresentationError::UnknownSymbol(name.clone()))?;
            if chars.len() != *m {
                return Err(RepresentationError::UnknownSymbol(name.clone()));
            }
            if seen.insert(base.to_string(), *m).is_none() {
                source = source.with_relation(base, *m);
            }
        }
        let want = type_extension(&source)?;
        for (name, m) in &want.relations {
            if sig.arity(name) != Some(*m) {
                return Err(RepresentationError::MissingFamily(name.clone()));
            }
        }
        Ok(RepStructure { source, structure })
    }

    pub fn to_dense(&self) -> Result<DenseStructure> {
        DenseStructure::from_finite(&self.structure)
    }
}

pub fn print_rep(r: &RepStructure) -> String {
    print_structure(&r.structure)
}

pub fn parse_rep(text: &str) -> Result<RepStructure> {
    RepStructure::from_structure(parse_structure(text)?)
}

/// The encoding over a given cut set, which must contain the constants and
/// be sufficient for every relation.
pub fn rep_with_cuts(a: &DenseStructure, cuts: &[Point]) -> Result<RepStructure> {
    let cuts = sorted_cuts(cuts.iter().cloned());
    let sig = type_extension(&a.signature)?;
    let mut s = OrderedStructure::new(sig, Universe::Rationals);
    for (c, p) in &a.constants {
        if cuts.binary_search(p).is_err() {
            return Err(RepresentationError::Insufficient {
                cell: vec![],
                ty: format!("constant {c} = {p} is not a cut"),
            });
        }
        s.set_constant(c, p.clone());
    }
    for p in &cuts {
        s.add_tuple(CUT_SYMBOL, vec![p.clone()]);
    }
    for (name, _) in &a.signature.relations {
        let r = a.relation(name).unwrap();
        let rep = rep_of_relation(&r, &cuts).map_err(|e| match e {
            RepresentationError::EmptyCutSet(_) => RepresentationError::EmptyCutSet(name.clone()),
            e => e,
        })?;
        for ((id, u), tuples) in rep.families {
            for t in tuples {
                s.add_tuple(&family_symbol(name, id, &u), t);
            }
        }
    }
    Ok(RepStructure {
        source: a.signature.clone(),
        structure: s,
    })
}

/// Constants together with the canonical cuts of every relation.
pub fn canonical_cuts(a: &DenseStructure) -> Vec<Point> {
    sorted_cuts(
        a.constants.values().cloned().chain(
            a.signature
                .relations
                .iter()
                .flat_map(|(n, _)| canonical_s(&a.relation(n).unwrap())),
        ),
    )
}

/// The canonical encoding: over the constants and the canonical cuts.
pub fn rep_structure(a: &DenseStructure) -> Result<RepStructure> {
    rep_with_cuts(a, &canonical_cuts(a))
}

// ---------------------------------------------------------------------------
// Interpretations

/// A formula with its free variables in argument order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub vars: Vec<String>,
    pub body: Formula,
}

impl Definition {
    fn instantiate(&self, args: &[Term]) -> Formula {
        let map: HashMap<String, Term> = self.vars.iter().cloned().zip(args.iter().cloned()).collect();
        substitute(&self.body, &map)
    }
}

/// Defining formulas for every symbol of `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub target: Signature,
    pub constants: BTreeMap<String, Definition>,
    pub relations: BTreeMap<String, Definition>,
}

fn v(name: &str) -> Term {
    Term::var(name)
}

fn and(fs: Vec<Formula>) -> Formula {
    Formula::And(fs)
}

fn leq(a: &Term, b: &Term) -> Formula {
    Formula::leq(a.clone(), b.clone())
}

fn lt(a: &Term, b: &Term) -> Formula {
    Formula::less(a.clone(), b.clone())
}

fn eq(a: &Term, b: &Term) -> Formula {
    Formula::eq(a.clone(), b.clone())
}

fn exists_all(vars: &[String], body: Formula) -> Formula {
    vars.iter()
        .rev()
        .fold(body, |acc, x| Formula::exists(x, acc))
}

fn arg_vars(prefix: &str, m: usize) -> Vec<String> {
    (1..=m).map(|j| format!("{prefix}{j}")).collect()
}

/// Order atoms among `xs` fixed by the type.
fn pattern(ty: &CellType, xs: &[Term]) -> Vec<Formula> {
    let mut out = Vec::new();
    for j in 0..xs.len() {
        for k in j + 1..xs.len() {
            out.push(match ty.ranks[j].cmp(&ty.ranks[k]) {
                std::cmp::Ordering::Less => lt(&xs[j], &xs[k]),
                std::cmp::Ordering::Equal => eq(&xs[j], &xs[k]),
                std::cmp::Ordering::Greater => lt(&xs[k], &xs[j]),
            });
        }
    }
    out
}

fn constant_defs(sig: &Signature) -> BTreeMap<String, Definition> {
    sig.constants
        .iter()
        .map(|c| {
            (
                c.clone(),
                Definition {
                    vars: vec!["x".into()],
                    body: eq(&v("x"), &Term::Const(c.clone())),
                },
            )
        })
        .collect()
}

/// Decoding: defines the relations of `sig` from their families, the cut
/// symbol and the order.
pub fn interpretation_phi(sig: &Signature) -> Result<Interpretation> {
    let s_of = |t: &Term| Formula::Rel(CUT_SYMBOL.into(), vec![t.clone()]);
    let z = v("_z");
    let mut relations = BTreeMap::new();
    for (name, m) in &sig.relations {
        let xs: Vec<Term> = arg_vars("x", *m).iter().map(|x| v(x)).collect();
        let ys_names = arg_vars("_y", *m);
        let ys: Vec<Term> = ys_names.iter().map(|y| v(y)).collect();
        let mut disjuncts = Vec::new();
        for (id, ty) in enumerate_types(*m)?.iter().enumerate() {
            for u in all_chars(*m) {
                let mut outside = pattern(ty, &xs);
                let mut inside = Vec::new();
                for j in 0..*m {
                    let (x, y) = (&xs[j], &ys[j]);
                    inside.push(s_of(y));
                    if u[j] {
                        // y is the last cut at or below x
                        inside.push(leq(y, x));
                        inside.push(Formula::not(Formula::exists(
                            "_z",
                            and(vec![lt(y, &z), leq(&z, x), s_of(&z)]),
                        )));
                    } else {
                        // x lies below every cut and y is the first cut
                        outside.push(Formula::not(Formula::exists(
                            "_z",
                            and(vec![leq(&z, x), s_of(&z)]),
                        )));
                        inside.push(Formula::not(Formula::exists(
                            "_z",
                            and(vec![lt(&z, y), s_of(&z)]),
                        )));
                    }
                    if u[j] {
                        inside.push(if ty.at_cut[j] { eq(y, x) } else { lt(y, x) });
                    } else if ty.at_cut[j] {
                        // the left end of the first gap is minus infinity
                        inside.push(Formula::False);
                    }
                }
                inside.push(Formula::Rel(family_symbol(name, id, &u), ys.clone()));
                outside.push(exists_all(&ys_names, and(inside)));
                disjuncts.push(and(outside));
            }
        }
        relations.insert(
            name.clone(),
            Definition {
                vars: arg_vars("x", *m),
                body: Formula::Or(disjuncts),
            },
        );
    }
    Ok(Interpretation {
        target: sig.clone(),
        constants: constant_defs(sig),
        relations,
    })
}

/// `x` is a point where membership in `name` changes, in the sense of the
/// four one-sided patterns.
pub fn boundary_formula(name: &str, m: usize, x: &Term) -> Formula {
    let (sl, sr, s) = (v("_sl"), v("_sr"), v("_s"));
    let mut cases = Vec::new();
    for bits in 1..1usize << m {
        let moved: Vec<usize> = (0..m).filter(|j| bits >> j & 1 == 1).collect();
        let others: Vec<String> = (0..m)
            .filter(|j| !moved.contains(j))
            .map(|j| format!("_a{}", j + 1))
            .collect();
        let tuple = |at: &Term| -> Vec<Term> {
            (0..m)
                .map(|j| {
                    if moved.contains(&j) {
                        at.clone()
                    } else {
                        v(&format!("_a{}", j + 1))
                    }
                })
                .collect()
        };
        let r_at = |at: &Term| Formula::Rel(name.into(), tuple(at));
        let side = |lo: &Term, hi: &Term, want: bool| {
            let hit = if want { r_at(&s) } else { Formula::not(r_at(&s)) };
            Formula::forall("_s", Formula::implies(and(vec![lt(lo, &s), lt(&s, hi)]), hit))
        };
        let all_left = side(&sl, x, true);
        let none_left = side(&sl, x, false);
        let all_right = side(x, &sr, true);
        let none_right = side(x, &sr, false);
        let here = r_at(x);
        let change = Formula::Or(vec![
            and(vec![all_left.clone(), none_right.clone()]),
            and(vec![none_left.clone(), all_right.clone()]),
            and(vec![Formula::not(here.clone()), all_left, all_right]),
            and(vec![here, none_left, none_right]),
        ]);
        let window = exists_all(
            &["_sl".to_string(), "_sr".to_string()],
            and(vec![lt(&sl, x), lt(x, &sr), change]),
        );
        let distinct: Vec<Formula> = others
            .iter()
            .map(|a| Formula::not(eq(&v(a), x)))
            .collect();
        cases.push(exists_all(
            &others,
            and(distinct.into_iter().chain([window]).collect()),
        ));
    }
    Formula::Or(cases)
}

/// `x` belongs to the canonical cut set of a structure over `sig`.
pub fn cut_formula(sig: &Signature, x: &Term) -> Formula {
    let mut parts: Vec<Formula> = sig
        .constants
        .iter()
        .map(|c| eq(x, &Term::Const(c.clone())))
        .collect();
    for (name, m) in &sig.relations {
        parts.push(boundary_formula(name, *m, x));
    }
    Formula::Or(parts)
}

/// Encoding: defines the type extension of `sig` from a structure over `sig`
/// and the order.
pub fn interpretation_phi_prime(sig: &Signature) -> Result<Interpretation> {
    let target = type_extension(sig)?;
    let z = v("_z");
    let in_s = |t: &Term| cut_formula(sig, t);
    let mut relations = BTreeMap::new();
    relations.insert(
        CUT_SYMBOL.to_string(),
        Definition {
            vars: vec!["x".into()],
            body: in_s(&v("x")),
        },
    );
    for (name, m) in &sig.relations {
        let ys: Vec<Term> = arg_vars("y", *m).iter().map(|y| v(y)).collect();
        let xs_names = arg_vars("_x", *m);
        let xs: Vec<Term> = xs_names.iter().map(|x| v(x)).collect();
        for (id, ty) in enumerate_types(*m)?.iter().enumerate() {
            for u in all_chars(*m) {
                let mut inner = pattern(ty, &xs);
                inner.push(Formula::Rel(name.clone(), xs.clone()));
                let mut outer: Vec<Formula> = Vec::new();
                for j in 0..*m {
                    let (x, y) = (&xs[j], &ys[j]);
                    if u[j] {
                        inner.push(if ty.at_cut[j] { eq(y, x) } else { lt(y, x) });
                        inner.push(Formula::not(Formula::exists(
                            "_z",
                            and(vec![lt(y, &z), leq(&z, x), in_s(&z)]),
                        )));
                    } else {
                        if ty.at_cut[j] {
                            inner.push(Formula::False);
                        }
                        inner.push(Formula::not(Formula::exists(
                            "_z",
                            and(vec![leq(&z, x), in_s(&z)]),
                        )));
                        outer.push(Formula::not(Formula::exists(
                            "_z",
                            and(vec![lt(&z, y), in_s(&z)]),
                        )));
                    }
                }
                let mut body: Vec<Formula> = ys.iter().map(in_s).collect();
                body.extend(outer);
                body.push(exists_all(&xs_names, and(inner)));
                relations.insert(
                    family_symbol(name, id, &u),
                    Definition {
                        vars: arg_vars("y", *m),
                        body: and(body),
                    },
                );
            }
        }
    }
    Ok(Interpretation {
        constants: constant_defs(&target),
        target,
        relations,
    })
}

/// Quantifiers range over the rationals, one point per order type relative
/// to the structure's cuts and the current values.
pub struct RegionModel<'a> {
    pub structure: &'a DenseStructure,
    cuts: BTreeSet<Point>,
}

impl<'a> RegionModel<'a> {
    pub fn new(structure: &'a DenseStructure) -> Self {
        RegionModel {
            cuts: structure.cuts().into_iter().collect(),
            structure,
        }
    }
}

impl Model for RegionModel<'_> {
    fn constant(&self, name: &str) -> Option<Point> {
        self.structure.constants.get(name).cloned()
    }

    fn relation(&self, name: &str, args: &[Point]) -> std::result::Result<bool, LogicError> {
        match self.structure.relations.get(name) {
            Some(r) => Ok(r.contains(args)),
            None if self.structure.signature.arity(name).is_some() => Ok(false),
            None => Err(LogicError::UnknownSymbol(name.to_string())),
        }
    }

    fn monadic(&self, name: &str, _x: &Point) -> std::result::Result<bool, LogicError> {
        Err(LogicError::UnknownSymbol(name.to_string()))
    }

    fn plus(&self, _: &Point, _: &Point, _: &Point) -> std::result::Result<bool, LogicError> {
        Err(LogicError::Unsupported("addition over a dense universe".into()))
    }

    fn contains(&self, _p: &Point) -> bool {
        true
    }

    fn witnesses(&self, anchors: &[Point]) -> std::result::Result<Vec<Point>, LogicError> {
        let mut cuts = self.cuts.clone();
        cuts.extend(anchors.iter().cloned());
        Ok(dense_witnesses(&cuts))
    }
}

/// Truth of a formula in a dense database under an assignment.
pub fn evaluate_dense(
    f: &Formula,
    s: &DenseStructure,
    assignment: &[(String, Point)],
) -> Result<bool> {
    let model = RegionModel::new(s);
    let mut env = assignment.to_vec();
    Ok(Evaluator::new(&model).eval(f, &mut env)?)
}

/// The structure the interpretation defines inside `s`. Every defined set is
/// constant on the classes of `s`'s cut grid, so one witness per class
/// decides it.
pub fn apply_interpretation(psi: &Interpretation, s: &DenseStructure) -> Result<DenseStructure> {
    let model = RegionModel::new(s);
    let mut ev = Evaluator::new(&model);
    let cuts = s.cuts();
    let mut out = DenseStructure::new(psi.target.clone());
    for c in &psi.target.constants {
        let def = psi
            .constants
            .get(c)
            .ok_or_else(|| RepresentationError::UnknownSymbol(c.clone()))?;
        let mut hits = Vec::new();
        for w in dense_witnesses(&cuts.iter().cloned().collect()) {
            let mut env = vec![(def.vars[0].clone(), w.clone())];
            if ev.eval(&def.body, &mut env)? {
                hits.push(w);
            }
        }
        let single = hits.len() == 1 && cuts.binary_search(&hits[0]).is_ok();
        if !single {
            let count = if hits.iter().any(|h| cuts.binary_search(h).is_err()) {
                "infinitely many".to_string()
            } else {
                hits.len().to_string()
            };
            return Err(RepresentationError::ConstantDenotation {
                name: c.clone(),
                count,
            });
        }
        out.constants.insert(c.clone(), hits.pop().unwrap());
    }
    for (name, m) in &psi.target.relations {
        let def = psi
            .relations
            .get(name)
            .ok_or_else(|| RepresentationError::UnknownSymbol(name.clone()))?;
        let r = RegionRelation::from_predicate(*m, cuts.clone(), |w| {
            let mut env: Vec<(String, Point)> =
                def.vars.iter().cloned().zip(w.iter().cloned()).collect();
            Ok(ev.eval(&def.body, &mut env)?)
        })?;
        out.relations.insert(name.clone(), r);
    }
    Ok(out)
}

fn fresh_name(taken: &mut BTreeSet<String>) -> String {
    let mut i = 0;
    loop {
        let cand = format!("_c{i}");
        if taken.insert(cand.clone()) {
            return cand;
        }
        i += 1;
    }
}

/// A sentence about the interpreted structure turned into one about the
/// source: relation atoms are replaced by their definitions and constants
/// by their defining formulas.
pub fn rewrite_sentence(psi: &Interpretation, chi: &Formula) -> Result<Formula> {
    let mut taken = crate::logic::all_vars(chi);
    rewrite(psi, chi, &mut taken)
}

fn rewrite(psi: &Interpretation, f: &Formula, taken: &mut BTreeSet<String>) -> Result<Formula> {
    let r = |g: &Formula, taken: &mut BTreeSet<String>| rewrite(psi, g, taken);
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Not(g) => Formula::not(r(g, taken)?),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| r(g, taken)).collect::<Result<_>>()?),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| r(g, taken)).collect::<Result<_>>()?),
        Formula::Exists(x, g) => Formula::exists(x, r(g, taken)?),
        Formula::Forall(x, g) => Formula::forall(x, r(g, taken)?),
        Formula::Mon(..) | Formula::Plus(..) => {
            return Err(RepresentationError::Unsupported(format!("{f}")))
        }
        atom => {
            // x = c goes straight to the constant's definition
            if let Formula::Eq(a, b) = atom {
                let pair = match (a, b) {
                    (Term::Const(c), t @ Term::Var(_)) | (t @ Term::Var(_), Term::Const(c)) => {
                        Some((c, t))
                    }
                    _ => None,
                };
                if let Some((c, t)) = pair {
                    let def = psi
                        .constants
                        .get(c)
                        .ok_or_else(|| RepresentationError::UnknownSymbol(c.clone()))?;
                    return Ok(def.instantiate(std::slice::from_ref(t)));
                }
            }
            // any other constant is named by a fresh variable first
            let consts: BTreeSet<String> = atom
                .terms()
                .into_iter()
                .filter_map(|t| match t {
                    Term::Const(c) => Some(c.clone()),
                    _ => None,
                })
                .collect();
            if let Some(c) = consts.into_iter().next() {
                let fresh = fresh_name(taken);
                let replaced = replace_const(atom, &c, &fresh);
                let inner = r(&replaced, taken)?;
                let def = psi
                    .constants
                    .get(&c)
                    .ok_or_else(|| RepresentationError::UnknownSymbol(c.clone()))?;
                return Ok(Formula::exists(
                    &fresh,
                    and(vec![def.instantiate(&[Term::var(&fresh)]), inner]),
                ));
            }
            match atom {
                Formula::Rel(name, ts) => {
                    let def = psi
                        .relations
                        .get(name)
                        .ok_or_else(|| RepresentationError::UnknownSymbol(name.clone()))?;
                    def.instantiate(ts)
                }
                other => other.clone(),
            }
        }
    })
}

fn replace_const(f: &Formula, c: &str, var: &str) -> Formula {
    let t = |x: &Term| match x {
        Term::Const(d) if d == c => Term::var(var),
        _ => x.clone(),
    };
    match f {
        Formula::Less(a, b) => Formula::Less(t(a), t(b)),
        Formula::Eq(a, b) => Formula::Eq(t(a), t(b)),
        Formula::Rel(n, ts) => Formula::Rel(n.clone(), ts.iter().map(t).collect()),
        other => other.clone(),
    }
}

/// Distinct tuples of a finite relation, sorted; handy for printing.
pub fn family_sizes(r: &RepStructure) -> Vec<(String, usize)> {
    r.structure
        .relations
        .iter()
        .filter(|(_, t)| !t.is_empty())
        .map(|(n, t)| (n.clone(), t.len()))
        .collect()
}
