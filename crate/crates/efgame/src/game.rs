//! Ehrenfeucht-Fraisse games: the r-round game, the single-round r-move
//! game, exhaustive oracles for both, Hintikka-style k-types and a few
//! reusable agents.
//!
//! Agents are expected to decide from the position they are shown. The
//! sweep helpers rely on this: they explore many plays with one agent and
//! never rewind it.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::{Mutex, OnceLock};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{
    active_domain, is_partial_isomorphism, OrderedStructure, PartialMap, Point, StructureError,
    Universe,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("universe of structure {0:?} cannot be enumerated")]
    NotEnumerable(Side),
    #[error("move {point} lies outside the universe of {side:?}")]
    OutsideUniverse { side: Side, point: Point },
    /// A move generator or strategy built on top of the engine failed.
    #[error("{0}")]
    Strategy(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Spoiler,
    Duplicator,
}

/// What an agent sees: both structures, the picks so far and the number of
/// rounds still to play, counting the current one.
#[derive(Clone, Copy, Debug)]
pub struct GamePosition<'s> {
    pub a: &'s OrderedStructure,
    pub b: &'s OrderedStructure,
    pub chosen_a: &'s [Point],
    pub chosen_b: &'s [Point],
    /// The side the spoiler played on in each earlier round.
    pub sides: &'s [Side],
    pub rounds_left: usize,
}

impl<'s> GamePosition<'s> {
    pub fn structure(&self, side: Side) -> &'s OrderedStructure {
        match side {
            Side::A => self.a,
            Side::B => self.b,
        }
    }

    pub fn chosen(&self, side: Side) -> &'s [Point] {
        match side {
            Side::A => self.chosen_a,
            Side::B => self.chosen_b,
        }
    }
}

pub trait Spoiler {
    fn pick(&mut self, pos: &GamePosition) -> Result<(Side, Point), String>;
}

pub trait Duplicator {
    /// Answer in the structure opposite to `side`.
    fn answer(&mut self, pos: &GamePosition, side: Side, pick: &Point) -> Result<Point, String>;
}

pub trait SingleRoundSpoiler {
    fn picks(
        &mut self,
        a: &OrderedStructure,
        b: &OrderedStructure,
        r: usize,
    ) -> Result<(Side, Vec<Point>), String>;
}

pub trait SingleRoundDuplicator {
    fn answer(
        &mut self,
        a: &OrderedStructure,
        b: &OrderedStructure,
        side: Side,
        picks: &[Point],
    ) -> Result<Vec<Point>, String>;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub side: Side,
    pub spoiler: Point,
    pub duplicator: Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forfeit {
    pub round: usize,
    pub player: Role,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub rounds: Vec<RoundRecord>,
    pub duplicator_won: bool,
    /// Chosen pairs, A-point first. Constants are implicit.
    pub final_map: PartialMap,
    pub forfeit: Option<Forfeit>,
}

impl GameTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcripts serialize")
    }

    fn finish(
        a: &OrderedStructure,
        b: &OrderedStructure,
        rounds: Vec<RoundRecord>,
        forfeit: Option<Forfeit>,
    ) -> Result<Self, GameError> {
        let final_map = PartialMap::new(
            rounds
                .iter()
                .map(|r| match r.side {
                    Side::A => (r.spoiler.clone(), r.duplicator.clone()),
                    Side::B => (r.duplicator.clone(), r.spoiler.clone()),
                })
                .collect(),
        );
        let iso = is_partial_isomorphism(a, b, &final_map)?;
        let dup_forfeit = matches!(&forfeit, Some(f) if f.player == Role::Duplicator);
        Ok(GameTranscript {
            rounds,
            duplicator_won: iso && !dup_forfeit,
            final_map,
            forfeit,
        })
    }
}

fn check_inside(s: &OrderedStructure, side: Side, p: &Point) -> Result<(), GameError> {
    if s.universe.contains(p) {
        Ok(())
    } else {
        Err(GameError::OutsideUniverse {
            side,
            point: p.clone(),
        })
    }
}

/// Plays `r` rounds. An agent error ends the game as a forfeit of that agent.
pub fn play_ef_game(
    a: &OrderedStructure,
    b: &OrderedStructure,
    r: usize,
    sp: &mut dyn Spoiler,
    du: &mut dyn Duplicator,
) -> Result<GameTranscript, GameError> {
    if a.signature != b.signature {
        return Err(StructureError::SignatureMismatch.into());
    }
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    let mut sides = Vec::new();
    let mut rounds = Vec::new();
    for round in 1..=r {
        let pos = GamePosition {
            a,
            b,
            chosen_a: &ca,
            chosen_b: &cb,
            sides: &sides,
            rounds_left: r - round + 1,
        };
        let (side, x) = match sp.pick(&pos) {
            Ok(m) => m,
            Err(reason) => {
                let f = Forfeit {
                    round,
                    player: Role::Spoiler,
                    reason,
                };
                return GameTranscript::finish(a, b, rounds, Some(f));
            }
        };
        check_inside(pos.structure(side), side, &x)?;
        let y = match du.answer(&pos, side, &x) {
            Ok(y) => y,
            Err(reason) => {
                let f = Forfeit {
                    round,
                    player: Role::Duplicator,
                    reason,
                };
                return GameTranscript::finish(a, b, rounds, Some(f));
            }
        };
        check_inside(pos.structure(side.other()), side.other(), &y)?;
        match side {
            Side::A => {
                ca.push(x.clone());
                cb.push(y.clone());
            }
            Side::B => {
                cb.push(x.clone());
                ca.push(y.clone());
            }
        }
        sides.push(side);
        rounds.push(RoundRecord {
            round,
            side,
            spoiler: x,
            duplicator: y,
        });
    }
    GameTranscript::finish(a, b, rounds, None)
}

/// Plays the single-round game: `r` picks at once on one side, `r` answers.
pub fn play_single_round_game(
    a: &OrderedStructure,
    b: &OrderedStructure,
    r: usize,
    sp: &mut dyn SingleRoundSpoiler,
    du: &mut dyn SingleRoundDuplicator,
) -> Result<GameTranscript, GameError> {
    if a.signature != b.signature {
        return Err(StructureError::SignatureMismatch.into());
    }
    let (side, picks) = match sp.picks(a, b, r) {
        Ok(m) => m,
        Err(reason) => {
            let f = Forfeit {
                round: 1,
                player: Role::Spoiler,
                reason,
            };
            return GameTranscript::finish(a, b, vec![], Some(f));
        }
    };
    let (own, other) = match side {
        Side::A => (a, b),
        Side::B => (b, a),
    };
    for p in &picks {
        check_inside(own, side, p)?;
    }
    let answers = match du.answer(a, b, side, &picks) {
        Ok(ans) if ans.len() == picks.len() => ans,
        Ok(ans) => {
            let f = Forfeit {
                round: 1,
                player: Role::Duplicator,
                reason: format!("{} answers to {} picks", ans.len(), picks.len()),
            };
            return GameTranscript::finish(a, b, vec![], Some(f));
        }
        Err(reason) => {
            let f = Forfeit {
                round: 1,
                player: Role::Duplicator,
                reason,
            };
            return GameTranscript::finish(a, b, vec![], Some(f));
        }
    };
    for p in &answers {
        check_inside(other, side.other(), p)?;
    }
    let rounds = picks
        .into_iter()
        .zip(answers)
        .enumerate()
        .map(|(i, (x, y))| RoundRecord {
            round: i + 1,
            side,
            spoiler: x,
            duplicator: y,
        })
        .collect();
    GameTranscript::finish(a, b, rounds, None)
}

/// Default node cap for the exhaustive searches.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Universes up to this size are always searched in full.
pub const FULL_SEARCH_LIMIT: usize = 64;

/// Points a player may usefully pick in `s` within `rounds` rounds. Small
/// universes are returned whole. Larger windows are cut down to constants,
/// database points, predicate members, the window ends, everything within
/// `2^rounds` of those and one midpoint per remaining gap. The cut is a
/// heuristic; `strict` turns it off.
pub fn candidate_points(
    s: &OrderedStructure,
    rounds: usize,
    strict: bool,
) -> Option<Vec<Point>> {
    if let Some(all) = s.universe.enumerate(FULL_SEARCH_LIMIT) {
        return Some(all);
    }
    if strict {
        return s.universe.enumerate(usize::MAX);
    }
    let (lo, hi) = match &s.universe {
        Universe::Window { lo, hi, .. } => (lo.clone(), hi.clone()),
        _ => return None,
    };
    let mut core: BTreeSet<Point> = active_domain(s);
    for m in s.monadic.values() {
        core.extend(m.iter().cloned());
    }
    core.insert(Point::from_bigint(lo.clone()));
    core.insert(Point::from_bigint(hi.clone()));
    let reach = 1i64 << rounds.min(20);
    let mut out: BTreeSet<Point> = BTreeSet::new();
    for p in &core {
        for d in -reach..=reach {
            let q = p.add(&Point::int(d));
            if s.universe.contains(&q) {
                out.insert(q);
            }
        }
    }
    let sorted: Vec<Point> = out.iter().cloned().collect();
    for w in sorted.windows(2) {
        let mid = w[0].midpoint(&w[1]).floor();
        if s.universe.contains(&mid) {
            out.insert(mid);
        }
    }
    Some(out.into_iter().collect())
}

/// Index form of one structure for fast extension checks.
pub(crate) struct GameSide {
    pub pts: Vec<Point>,
    index: HashMap<Point, u32>,
    consts: Vec<u32>,
    monadic: Vec<Vec<bool>>,
    /// `by_point[x]` lists (relation, tuple) with `x` among the components.
    by_point: Vec<Vec<(usize, Vec<u32>)>>,
    relations: Vec<HashSet<Vec<u32>>>,
    arities: Vec<usize>,
    plus: bool,
}

impl GameSide {
    pub fn new(
        s: &OrderedStructure,
        side: Side,
        rounds: usize,
        strict: bool,
        extra: &[Point],
    ) -> Result<Self, GameError> {
        let mut pts: BTreeSet<Point> = candidate_points(s, rounds, strict)
            .ok_or(GameError::NotEnumerable(side))?
            .into_iter()
            .collect();
        for c in s.constants.values() {
            pts.insert(c.clone());
        }
        for p in extra {
            check_inside(s, side, p)?;
            pts.insert(p.clone());
        }
        let pts: Vec<Point> = pts.into_iter().collect();
        Ok(Self::from_points(s, pts))
    }

    pub fn from_points(s: &OrderedStructure, pts: Vec<Point>) -> Self {
        let index: HashMap<Point, u32> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let consts = s
            .signature
            .constants
            .iter()
            .map(|c| index[s.constant(c).expect("constants are interpreted")])
            .collect();
        let monadic = s
            .signature
            .monadic
            .iter()
            .map(|m| {
                let set = s.monadic.get(m);
                pts.iter()
                    .map(|p| set.is_some_and(|set| set.contains(p)))
                    .collect()
            })
            .collect();
        let mut by_point = vec![Vec::new(); pts.len()];
        let mut relations = Vec::new();
        for (ri, (name, _)) in s.signature.relations.iter().enumerate() {
            let mut set = HashSet::new();
            if let Some(tuples) = s.relations.get(name) {
                for t in tuples {
                    let idx: Option<Vec<u32>> = t.iter().map(|p| index.get(p).copied()).collect();
                    if let Some(idx) = idx {
                        let mut seen: Vec<u32> = idx.clone();
                        seen.sort();
                        seen.dedup();
                        for x in seen {
                            by_point[x as usize].push((ri, idx.clone()));
                        }
                        set.insert(idx);
                    }
                }
            }
            relations.push(set);
        }
        GameSide {
            pts,
            index,
            consts,
            monadic,
            by_point,
            relations,
            arities: s.signature.relations.iter().map(|r| r.1).collect(),
            plus: s.signature.plus,
        }
    }

    pub fn idx(&self, p: &Point) -> Option<u32> {
        self.index.get(p).copied()
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }
}

/// Can `(x, y)` be added to the partial isomorphism `picks`?
pub(crate) fn extends(sa: &GameSide, sb: &GameSide, picks: &[(u32, u32)], x: u32, y: u32) -> bool {
    for &(u, v) in picks {
        if (u == x) != (v == y) {
            return false;
        }
        if u == x {
            return true;
        }
        if (u < x) != (v < y) {
            return false;
        }
    }
    if sa
        .monadic
        .iter()
        .zip(&sb.monadic)
        .any(|(ma, mb)| ma[x as usize] != mb[y as usize])
    {
        return false;
    }
    if !sa.relations.is_empty() {
        let dom: HashMap<u32, u32> = picks.iter().copied().chain([(x, y)]).collect();
        let rng: HashSet<u32> = picks.iter().map(|p| p.1).chain([y]).collect();
        let mut count_a = vec![0usize; sa.relations.len()];
        for (ri, t) in &sa.by_point[x as usize] {
            let img: Option<Vec<u32>> = t.iter().map(|p| dom.get(p).copied()).collect();
            if let Some(img) = img {
                if !sb.relations[*ri].contains(&img) {
                    return false;
                }
                count_a[*ri] += 1;
            }
        }
        let mut count_b = vec![0usize; sb.relations.len()];
        for (ri, t) in &sb.by_point[y as usize] {
            if t.iter().all(|p| rng.contains(p)) {
                count_b[*ri] += 1;
            }
        }
        if count_a != count_b {
            return false;
        }
    }
    if sa.plus {
        let all: Vec<(u32, u32)> = picks.iter().copied().chain([(x, y)]).collect();
        let xa = &sa.pts[x as usize];
        let yb = &sb.pts[y as usize];
        let a_vals: HashMap<&Point, u32> = all.iter().map(|(u, _)| (&sa.pts[*u as usize], *u)).collect();
        let b_vals: HashMap<&Point, u32> = all.iter().map(|(_, v)| (&sb.pts[*v as usize], *v)).collect();
        let image: HashMap<u32, u32> = all.iter().copied().collect();
        for &(u, v) in &all {
            let s = xa.add(&sa.pts[u as usize]);
            let t = yb.add(&sb.pts[v as usize]);
            match (a_vals.get(&s), b_vals.get(&t)) {
                (Some(p), Some(q)) if image[p] == *q => {}
                (None, None) => {}
                _ => return false,
            }
        }
        for (i, &(u, v)) in picks.iter().enumerate() {
            for &(w, z) in &picks[i..] {
                let hit_a = &sa.pts[u as usize].add(&sa.pts[w as usize]) == xa;
                let hit_b = &sb.pts[v as usize].add(&sb.pts[z as usize]) == yb;
                if hit_a != hit_b {
                    return false;
                }
            }
        }
    }
    true
}

/// Exhaustive search for the r-round game.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    pub budget: u64,
    /// Search whole universes even when they are large.
    pub strict: bool,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            budget: DEFAULT_BUDGET,
            strict: false,
        }
    }
}

struct Search<'o> {
    sa: GameSide,
    sb: GameSide,
    memo: HashMap<(Vec<(u32, u32)>, usize), bool>,
    nodes: u64,
    oracle: &'o Oracle,
}

impl Search<'_> {
    fn side(&self, s: Side) -> &GameSide {
        match s {
            Side::A => &self.sa,
            Side::B => &self.sb,
        }
    }

    fn ext(&self, picks: &[(u32, u32)], side: Side, x: u32, y: u32) -> bool {
        match side {
            Side::A => extends(&self.sa, &self.sb, picks, x, y),
            Side::B => extends(&self.sa, &self.sb, picks, y, x),
        }
    }

    fn push(picks: &[(u32, u32)], side: Side, x: u32, y: u32) -> Vec<(u32, u32)> {
        let mut next = picks.to_vec();
        let pair = match side {
            Side::A => (x, y),
            Side::B => (y, x),
        };
        if !next.contains(&pair) {
            next.push(pair);
            next.sort();
        }
        next
    }

    fn wins(&mut self, picks: &[(u32, u32)], rounds: usize) -> Result<bool, GameError> {
        if rounds == 0 {
            return Ok(true);
        }
        let key = (picks.to_vec(), rounds);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        self.nodes += 1;
        if self.nodes > self.oracle.budget {
            return Err(GameError::BudgetExceeded(self.oracle.budget));
        }
        let mut result = true;
        'outer: for side in [Side::A, Side::B] {
            for x in 0..self.side(side).len() as u32 {
                if self.answer(picks, side, x, rounds)?.is_none() {
                    result = false;
                    break 'outer;
                }
            }
        }
        self.memo.insert(key, result);
        Ok(result)
    }

    /// Smallest winning answer to `x` on `side` with `rounds` rounds left,
    /// counting this one.
    fn answer(
        &mut self,
        picks: &[(u32, u32)],
        side: Side,
        x: u32,
        rounds: usize,
    ) -> Result<Option<u32>, GameError> {
        for y in 0..self.side(side.other()).len() as u32 {
            if self.ext(picks, side, x, y) {
                let next = Self::push(picks, side, x, y);
                if self.wins(&next, rounds - 1)? {
                    return Ok(Some(y));
                }
            }
        }
        Ok(None)
    }
}

impl Oracle {
    fn search(
        &self,
        a: &OrderedStructure,
        b: &OrderedStructure,
        chosen_a: &[Point],
        chosen_b: &[Point],
        rounds: usize,
    ) -> Result<(Search<'_>, Option<Vec<(u32, u32)>>), GameError> {
        if a.signature != b.signature {
            return Err(StructureError::SignatureMismatch.into());
        }
        let sa = GameSide::new(a, Side::A, rounds, self.strict, chosen_a)?;
        let sb = GameSide::new(b, Side::B, rounds, self.strict, chosen_b)?;
        let search = Search {
            sa,
            sb,
            memo: HashMap::new(),
            nodes: 0,
            oracle: self,
        };
        let mut picks: Vec<(u32, u32)> = Vec::new();
        let pairs = search
            .sa
            .consts
            .iter()
            .copied()
            .zip(search.sb.consts.iter().copied())
            .chain(chosen_a.iter().zip(chosen_b).map(|(x, y)| {
                (search.sa.idx(x).unwrap(), search.sb.idx(y).unwrap())
            }))
            .collect::<Vec<_>>();
        for (x, y) in pairs {
            if !extends(&search.sa, &search.sb, &picks, x, y) {
                return Ok((search, None));
            }
            if !picks.contains(&(x, y)) {
                picks.push((x, y));
            }
        }
        picks.sort();
        Ok((search, Some(picks)))
    }

    pub fn duplicator_wins(
        &self,
        a: &OrderedStructure,
        b: &OrderedStructure,
        r: usize,
    ) -> Result<bool, GameError> {
        self.duplicator_wins_from(a, b, &[], &[], r)
    }

    /// Does the duplicator win the remaining `r` rounds from the given picks?
    pub fn duplicator_wins_from(
        &self,
        a: &OrderedStructure,
        b: &OrderedStructure,
        chosen_a: &[Point],
        chosen_b: &[Point],
        r: usize,
    ) -> Result<bool, GameError> {
        let (mut s, picks) = self.search(a, b, chosen_a, chosen_b, r)?;
        match picks {
            Some(p) => s.wins(&p, r),
            None => Ok(false),
        }
    }

    /// Smallest answer that keeps the duplicator winning, if any.
    pub fn winning_answer(&self, pos: &GamePosition, side: Side, pick: &Point) -> Result<Option<Point>, GameError> {
        let (chosen_a, chosen_b) = (pos.chosen_a, pos.chosen_b);
        let extra_a: Vec<Point> = chosen_a.iter().cloned().chain((side == Side::A).then(|| pick.clone())).collect();
        let extra_b: Vec<Point> = chosen_b.iter().cloned().chain((side == Side::B).then(|| pick.clone())).collect();
        let (ea, eb) = (&extra_a[..], &extra_b[..]);
        let (mut s, picks) = {
            let sa = GameSide::new(pos.a, Side::A, pos.rounds_left, self.strict, ea)?;
            let sb = GameSide::new(pos.b, Side::B, pos.rounds_left, self.strict, eb)?;
            let search = Search {
                sa,
                sb,
                memo: HashMap::new(),
                nodes: 0,
                oracle: self,
            };
            let mut picks = Vec::new();
            let pairs: Vec<(u32, u32)> = search
                .sa
                .consts
                .iter()
                .copied()
                .zip(search.sb.consts.iter().copied())
                .chain(chosen_a.iter().zip(chosen_b).map(|(x, y)| {
                    (search.sa.idx(x).unwrap(), search.sb.idx(y).unwrap())
                }))
                .collect();
            let mut ok = true;
            for (x, y) in pairs {
                if !extends(&search.sa, &search.sb, &picks, x, y) {
                    ok = false;
                    break;
                }
                if !picks.contains(&(x, y)) {
                    picks.push((x, y));
                }
            }
            picks.sort();
            (search, ok.then_some(picks))
        };
        let Some(picks) = picks else { return Ok(None) };
        let x = s.side(side).idx(pick).expect("pick was added");
        let y = s.answer(&picks, side, x, pos.rounds_left.max(1))?;
        Ok(y.map(|y| s.side(side.other()).pts[y as usize].clone()))
    }

    /// A spoiler move after which the duplicator has no winning answer.
    pub fn winning_spoiler_move(&self, pos: &GamePosition) -> Result<Option<(Side, Point)>, GameError> {
        let (mut s, picks) = self.search(pos.a, pos.b, pos.chosen_a, pos.chosen_b, pos.rounds_left)?;
        let Some(picks) = picks else {
            return Ok(None);
        };
        for side in [Side::A, Side::B] {
            for x in 0..s.side(side).len() as u32 {
                if s.answer(&picks, side, x, pos.rounds_left.max(1))?.is_none() {
                    return Ok(Some((side, s.side(side).pts[x as usize].clone())));
                }
            }
        }
        Ok(None)
    }

    /// Every point of the side's search space (the full universe or the
    /// relevant cut).
    pub fn moves(&self, s: &OrderedStructure, rounds: usize) -> Option<Vec<Point>> {
        candidate_points(s, rounds, self.strict)
    }
}

/// Exhaustive decision of the r-round game with the default budget.
pub fn duplicator_wins_oracle(
    a: &OrderedStructure,
    b: &OrderedStructure,
    r: usize,
) -> Result<bool, GameError> {
    Oracle::default().duplicator_wins(a, b, r)
}

/// Opaque k-type identifier. Identifiers come from one process-wide table,
/// so they can be compared across structures of the same signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeId(pub u32);

#[derive(Default)]
struct Interner {
    ids: HashMap<(Vec<u8>, Vec<u32>), u32>,
}

fn interner() -> &'static Mutex<Interner> {
    static TABLE: OnceLock<Mutex<Interner>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(Interner::default()))
}

fn intern(diagram: Vec<u8>, children: Vec<u32>) -> u32 {
    let mut t = interner().lock().expect("type table poisoned");
    let next = t.ids.len() as u32;
    *t.ids.entry((diagram, children)).or_insert(next)
}

/// Atomic diagram of the constants followed by `tuple`, as bytes.
fn diagram(side: &GameSide, tuple: &[u32], sig_tag: &[u8]) -> Vec<u8> {
    let elems: Vec<u32> = side.consts.iter().copied().chain(tuple.iter().copied()).collect();
    let n = elems.len();
    let mut out = sig_tag.to_vec();
    for i in 0..n {
        for j in i + 1..n {
            out.push(match elems[i].cmp(&elems[j]) {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Greater => 2,
            });
        }
    }
    for m in &side.monadic {
        for &e in &elems {
            out.push(m[e as usize] as u8);
        }
    }
    for (rel, &q) in side.relations.iter().zip(&side.arities) {
        if n > 0 {
            let mut idx = vec![0usize; q];
            'tuples: loop {
                let t: Vec<u32> = idx.iter().map(|&i| elems[i]).collect();
                out.push(rel.contains(&t) as u8);
                for d in (0..q).rev() {
                    idx[d] += 1;
                    if idx[d] < n {
                        continue 'tuples;
                    }
                    idx[d] = 0;
                }
                break;
            }
        }
    }
    if side.plus {
        for i in 0..n {
            for j in i..n {
                let s = side.pts[elems[i] as usize].add(&side.pts[elems[j] as usize]);
                for &l in &elems {
                    out.push((side.pts[l as usize] == s) as u8);
                }
            }
        }
    }
    out
}

struct TypeWalk<'s> {
    side: &'s GameSide,
    tag: Vec<u8>,
    nodes: u64,
    budget: u64,
}

impl TypeWalk<'_> {
    fn ty(&mut self, tuple: &mut Vec<u32>, depth: usize) -> Result<u32, GameError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(GameError::BudgetExceeded(self.budget));
        }
        let d = diagram(self.side, tuple, &self.tag);
        let mut children = Vec::new();
        if depth > 0 {
            let mut set = BTreeSet::new();
            for b in 0..self.side.len() as u32 {
                tuple.push(b);
                let t = self.ty(tuple, depth - 1);
                tuple.pop();
                set.insert(t?);
            }
            children = set.into_iter().collect();
        }
        Ok(intern(d, children))
    }
}

fn signature_tag(s: &OrderedStructure) -> Vec<u8> {
    format!("{:?}|", s.signature).into_bytes()
}

/// The k-type of `s` with its constants distinguished. Two structures of
/// the same signature get the same identifier iff the duplicator wins the
/// k-round game on them. The universe must be enumerable.
pub fn k_type(s: &OrderedStructure, k: usize) -> Result<TypeId, GameError> {
    k_type_of_tuple(s, &[], k, DEFAULT_BUDGET)
}

/// The k-type of `(s, tuple)`.
pub fn k_type_of_tuple(
    s: &OrderedStructure,
    tuple: &[Point],
    k: usize,
    budget: u64,
) -> Result<TypeId, GameError> {
    let pts = s
        .universe
        .enumerate(1 << 16)
        .ok_or(GameError::NotEnumerable(Side::A))?;
    let side = GameSide::from_points(s, pts);
    let mut t: Vec<u32> = Vec::new();
    for p in tuple {
        t.push(side.idx(p).ok_or_else(|| GameError::OutsideUniverse {
            side: Side::A,
            point: p.clone(),
        })?);
    }
    let mut walk = TypeWalk {
        side: &side,
        tag: signature_tag(s),
        nodes: 0,
        budget,
    };
    walk.ty(&mut t, k).map(TypeId)
}

/// Exhaustive decision of the single-round game.
pub fn single_round_oracle(
    a: &OrderedStructure,
    b: &OrderedStructure,
    r: usize,
) -> Result<bool, GameError> {
    Ok(single_round_spoiler_win(a, b, r, DEFAULT_BUDGET)?.is_none())
}

/// A spoiler pick set that the duplicator cannot answer, if one exists.
pub fn single_round_spoiler_win(
    a: &OrderedStructure,
    b: &OrderedStructure,
    r: usize,
    budget: u64,
) -> Result<Option<(Side, Vec<Point>)>, GameError> {
    if a.signature != b.signature {
        return Err(StructureError::SignatureMismatch.into());
    }
    let pa = a.universe.enumerate(1 << 16).ok_or(GameError::NotEnumerable(Side::A))?;
    let pb = b.universe.enumerate(1 << 16).ok_or(GameError::NotEnumerable(Side::B))?;
    let sa = GameSide::from_points(a, pa);
    let sb = GameSide::from_points(b, pb);
    let mut nodes = 0u64;
    for side in [Side::A, Side::B] {
        let (own, other) = match side {
            Side::A => (&sa, &sb),
            Side::B => (&sb, &sa),
        };
        let size = r.min(own.len());
        let mut found = None;
        for_each_subset(own.len(), size, &mut |subset: &[u32]| {
            if found.is_some() {
                return Ok(());
            }
            let ok = match side {
                Side::A => answer_subset(&sa, &sb, subset, &mut nodes, budget)?,
                Side::B => answer_subset_rev(&sa, &sb, subset, &mut nodes, budget)?,
            };
            if ok.is_none() {
                found = Some(subset.iter().map(|&i| own.pts[i as usize].clone()).collect());
            }
            Ok(())
        })?;
        let _ = other;
        if let Some(f) = found {
            return Ok(Some((side, f)));
        }
    }
    Ok(None)
}

fn for_each_subset(
    n: usize,
    size: usize,
    f: &mut dyn FnMut(&[u32]) -> Result<(), GameError>,
) -> Result<(), GameError> {
    fn go(
        start: usize,
        n: usize,
        size: usize,
        cur: &mut Vec<u32>,
        f: &mut dyn FnMut(&[u32]) -> Result<(), GameError>,
    ) -> Result<(), GameError> {
        if cur.len() == size {
            return f(cur);
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i as u32);
            go(i + 1, n, size, cur, f)?;
            cur.pop();
        }
        Ok(())
    }
    go(0, n, size, &mut Vec::new(), f)
}

fn initial_pairs(sa: &GameSide, sb: &GameSide) -> Option<Vec<(u32, u32)>> {
    let mut picks = Vec::new();
    for (&x, &y) in sa.consts.iter().zip(&sb.consts) {
        if !extends(sa, sb, &picks, x, y) {
            return None;
        }
        if !picks.contains(&(x, y)) {
            picks.push((x, y));
        }
    }
    Some(picks)
}

/// Lexicographically smallest answer (as B-indices) to A-picks `xs`.
fn answer_subset(
    sa: &GameSide,
    sb: &GameSide,
    xs: &[u32],
    nodes: &mut u64,
    budget: u64,
) -> Result<Option<Vec<u32>>, GameError> {
    let Some(base) = initial_pairs(sa, sb) else {
        return Ok(None);
    };
    fn go(
        sa: &GameSide,
        sb: &GameSide,
        xs: &[u32],
        picks: &mut Vec<(u32, u32)>,
        out: &mut Vec<u32>,
        nodes: &mut u64,
        budget: u64,
    ) -> Result<bool, GameError> {
        let Some(&x) = xs.get(out.len()) else {
            return Ok(true);
        };
        for y in 0..sb.len() as u32 {
            *nodes += 1;
            if *nodes > budget {
                return Err(GameError::BudgetExceeded(budget));
            }
            if extends(sa, sb, picks, x, y) {
                let added = !picks.contains(&(x, y));
                if added {
                    picks.push((x, y));
                }
                out.push(y);
                if go(sa, sb, xs, picks, out, nodes, budget)? {
                    return Ok(true);
                }
                out.pop();
                if added {
                    picks.pop();
                }
            }
        }
        Ok(false)
    }
    let mut picks = base;
    let mut out = Vec::new();
    Ok(go(sa, sb, xs, &mut picks, &mut out, nodes, budget)?.then_some(out))
}

fn answer_subset_rev(
    sa: &GameSide,
    sb: &GameSide,
    ys: &[u32],
    nodes: &mut u64,
    budget: u64,
) -> Result<Option<Vec<u32>>, GameError> {
    answer_subset(sb, sa, ys, nodes, budget)
}

/// Smallest answer to a single-round pick set, by exhaustive search.
pub fn single_round_answer(
    a: &OrderedStructure,
    b: &OrderedStructure,
    side: Side,
    picks: &[Point],
    budget: u64,
) -> Result<Option<Vec<Point>>, GameError> {
    let (own, other) = match side {
        Side::A => (a, b),
        Side::B => (b, a),
    };
    let po = own.universe.enumerate(1 << 16).ok_or(GameError::NotEnumerable(side))?;
    let pt = other
        .universe
        .enumerate(1 << 16)
        .ok_or(GameError::NotEnumerable(side.other()))?;
    let so = GameSide::from_points(own, po);
    let st = GameSide::from_points(other, pt);
    let xs: Vec<u32> = picks
        .iter()
        .map(|p| {
            so.idx(p).ok_or_else(|| GameError::OutsideUniverse {
                side,
                point: p.clone(),
            })
        })
        .collect::<Result<_, _>>()?;
    let mut nodes = 0;
    Ok(answer_subset(&so, &st, &xs, &mut nodes, budget)?
        .map(|ys| ys.into_iter().map(|y| st.pts[y as usize].clone()).collect()))
}

/// Answers with the same point; wins whenever both structures coincide.
pub struct CopyDuplicator;

impl Duplicator for CopyDuplicator {
    fn answer(&mut self, _: &GamePosition, _: Side, pick: &Point) -> Result<Point, String> {
        Ok(pick.clone())
    }
}

impl SingleRoundDuplicator for CopyDuplicator {
    fn answer(
        &mut self,
        _: &OrderedStructure,
        _: &OrderedStructure,
        _: Side,
        picks: &[Point],
    ) -> Result<Vec<Point>, String> {
        Ok(picks.to_vec())
    }
}

/// Plays the smallest winning answer found by the oracle; when none exists
/// it plays the smallest point that keeps the map a partial isomorphism, or
/// the smallest point outright.
#[derive(Default)]
pub struct MinimaxDuplicator {
    pub oracle: Oracle,
}

impl Duplicator for MinimaxDuplicator {
    fn answer(&mut self, pos: &GamePosition, side: Side, pick: &Point) -> Result<Point, String> {
        if let Some(y) = self
            .oracle
            .winning_answer(pos, side, pick)
            .map_err(|e| e.to_string())?
        {
            return Ok(y);
        }
        let other = pos.structure(side.other());
        let pts = self
            .oracle
            .moves(other, pos.rounds_left)
            .ok_or("universe not enumerable")?;
        let (ca, cb) = (pos.chosen_a.to_vec(), pos.chosen_b.to_vec());
        for y in &pts {
            let mut pairs: Vec<(Point, Point)> = ca.iter().cloned().zip(cb.iter().cloned()).collect();
            pairs.push(match side {
                Side::A => (pick.clone(), y.clone()),
                Side::B => (y.clone(), pick.clone()),
            });
            if is_partial_isomorphism(pos.a, pos.b, &PartialMap::new(pairs)).unwrap_or(false) {
                return Ok(y.clone());
            }
        }
        pts.first().cloned().ok_or_else(|| "empty universe".to_string())
    }
}

/// Plays a winning spoiler move when one exists, else the smallest A-point.
#[derive(Default)]
pub struct MinimaxSpoiler {
    pub oracle: Oracle,
}

impl Spoiler for MinimaxSpoiler {
    fn pick(&mut self, pos: &GamePosition) -> Result<(Side, Point), String> {
        if let Some(m) = self.oracle.winning_spoiler_move(pos).map_err(|e| e.to_string())? {
            return Ok(m);
        }
        let pts = self
            .oracle
            .moves(pos.a, pos.rounds_left)
            .ok_or("universe not enumerable")?;
        pts.first()
            .map(|p| (Side::A, p.clone()))
            .ok_or_else(|| "empty universe".to_string())
    }
}

/// Answers so that the extended tuples have equal types for the remaining
/// rounds. Equivalent to [`MinimaxDuplicator`] but computed through the
/// type table, which pays off when many games share the structures.
pub struct TypeDuplicator {
    pub budget: u64,
}

impl Default for TypeDuplicator {
    fn default() -> Self {
        TypeDuplicator {
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Duplicator for TypeDuplicator {
    fn answer(&mut self, pos: &GamePosition, side: Side, pick: &Point) -> Result<Point, String> {
        let depth = pos.rounds_left.saturating_sub(1);
        let own = pos.structure(side);
        let other = pos.structure(side.other());
        let mut mine = pos.chosen(side).to_vec();
        mine.push(pick.clone());
        let target = k_type_of_tuple(own, &mine, depth, self.budget).map_err(|e| e.to_string())?;
        let pts = other
            .universe
            .enumerate(1 << 16)
            .ok_or("universe not enumerable")?;
        let mut theirs = pos.chosen(side.other()).to_vec();
        for y in &pts {
            theirs.push(y.clone());
            let t = k_type_of_tuple(other, &theirs, depth, self.budget).map_err(|e| e.to_string())?;
            theirs.pop();
            if t == target {
                return Ok(y.clone());
            }
        }
        pts.first()
            .cloned()
            .ok_or_else(|| "empty universe".to_string())
    }
}

/// Uniform random spoiler over both universes, seeded.
pub struct RandomSpoiler {
    rng: ChaCha8Rng,
    pub oracle: Oracle,
}

impl RandomSpoiler {
    pub fn new(seed: u64) -> Self {
        RandomSpoiler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            oracle: Oracle::default(),
        }
    }
}

impl Spoiler for RandomSpoiler {
    fn pick(&mut self, pos: &GamePosition) -> Result<(Side, Point), String> {
        let side = if rand::Rng::gen_bool(&mut self.rng, 0.5) {
            Side::A
        } else {
            Side::B
        };
        let pts = self
            .oracle
            .moves(pos.structure(side), pos.rounds_left)
            .ok_or("universe not enumerable")?;
        pts.choose(&mut self.rng)
            .map(|p| (side, p.clone()))
            .ok_or_else(|| "empty universe".to_string())
    }
}

impl SingleRoundSpoiler for RandomSpoiler {
    fn picks(
        &mut self,
        a: &OrderedStructure,
        b: &OrderedStructure,
        r: usize,
    ) -> Result<(Side, Vec<Point>), String> {
        let side = if rand::Rng::gen_bool(&mut self.rng, 0.5) {
            Side::A
        } else {
            Side::B
        };
        let s = if side == Side::A { a } else { b };
        let pts = self.oracle.moves(s, 1).ok_or("universe not enumerable")?;
        let mut picks: Vec<Point> = pts.choose_multiple(&mut self.rng, r.min(pts.len())).cloned().collect();
        picks.sort();
        Ok((side, picks))
    }
}

/// Picks the spoiler's winning set from the single-round oracle, or the
/// smallest points of A.
pub struct ExhaustiveSingleRoundSpoiler;

impl SingleRoundSpoiler for ExhaustiveSingleRoundSpoiler {
    fn picks(
        &mut self,
        a: &OrderedStructure,
        b: &OrderedStructure,
        r: usize,
    ) -> Result<(Side, Vec<Point>), String> {
        if let Some(m) = single_round_spoiler_win(a, b, r, DEFAULT_BUDGET).map_err(|e| e.to_string())? {
            return Ok(m);
        }
        let pts = a.universe.enumerate(1 << 16).ok_or("universe not enumerable")?;
        Ok((Side::A, pts.into_iter().take(r).collect()))
    }
}

/// Answers single-round picks by exhaustive search.
pub struct ExhaustiveSingleRoundDuplicator;

impl SingleRoundDuplicator for ExhaustiveSingleRoundDuplicator {
    fn answer(
        &mut self,
        a: &OrderedStructure,
        b: &OrderedStructure,
        side: Side,
        picks: &[Point],
    ) -> Result<Vec<Point>, String> {
        single_round_answer(a, b, side, picks, DEFAULT_BUDGET)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| "no answer keeps a partial isomorphism".to_string())
    }
}

/// Outcome of running one duplicator against every spoiler line.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub plays: u64,
    /// The first lost play, if any.
    pub loss: Option<GameTranscript>,
}

/// Plays `du` against every sequence of spoiler moves drawn from `moves`
/// and stops at the first loss. `budget` caps the number of positions.
pub fn sweep(
    a: &OrderedStructure,
    b: &OrderedStructure,
    r: usize,
    du: &mut dyn Duplicator,
    moves: &mut dyn FnMut(&GamePosition) -> Result<Vec<(Side, Point)>, GameError>,
    budget: u64,
) -> Result<SweepReport, GameError> {
    if a.signature != b.signature {
        return Err(StructureError::SignatureMismatch.into());
    }
    struct St<'x> {
        a: &'x OrderedStructure,
        b: &'x OrderedStructure,
        r: usize,
        ca: Vec<Point>,
        cb: Vec<Point>,
        sides: Vec<Side>,
        rounds: Vec<RoundRecord>,
        plays: u64,
        nodes: u64,
        budget: u64,
    }
    fn go(
        st: &mut St,
        du: &mut dyn Duplicator,
        moves: &mut dyn FnMut(&GamePosition) -> Result<Vec<(Side, Point)>, GameError>,
    ) -> Result<Option<GameTranscript>, GameError> {
        let round = st.rounds.len() + 1;
        if round > st.r {
            st.plays += 1;
            return Ok(None);
        }
        let ca = st.ca.clone();
        let cb = st.cb.clone();
        let sides = st.sides.clone();
        let pos = GamePosition {
            a: st.a,
            b: st.b,
            chosen_a: &ca,
            chosen_b: &cb,
            sides: &sides,
            rounds_left: st.r - round + 1,
        };
        for (side, x) in moves(&pos)? {
            st.nodes += 1;
            if st.nodes > st.budget {
                return Err(GameError::BudgetExceeded(st.budget));
            }
            let y = match du.answer(&pos, side, &x) {
                Ok(y) => y,
                Err(reason) => {
                    st.plays += 1;
                    let f = Forfeit {
                        round,
                        player: Role::Duplicator,
                        reason,
                    };
                    return Ok(Some(GameTranscript::finish(st.a, st.b, st.rounds.clone(), Some(f))?));
                }
            };
            check_inside(pos.structure(side.other()), side.other(), &y)?;
            let (xa, yb) = match side {
                Side::A => (x.clone(), y.clone()),
                Side::B => (y.clone(), x.clone()),
            };
            st.ca.push(xa);
            st.cb.push(yb);
            st.sides.push(side);
            st.rounds.push(RoundRecord {
                round,
                side,
                spoiler: x,
                duplicator: y,
            });
            let pairs: Vec<(Point, Point)> = st.ca.iter().cloned().zip(st.cb.iter().cloned()).collect();
            let result = if is_partial_isomorphism(st.a, st.b, &PartialMap::new(pairs))? {
                go(st, du, moves)?
            } else {
                st.plays += 1;
                Some(GameTranscript::finish(st.a, st.b, st.rounds.clone(), None)?)
            };
            st.ca.pop();
            st.cb.pop();
            st.sides.pop();
            st.rounds.pop();
            if result.is_some() {
                return Ok(result);
            }
        }
        Ok(None)
    }
    let mut st = St {
        a,
        b,
        r,
        ca: vec![],
        cb: vec![],
        sides: vec![],
        rounds: vec![],
        plays: 0,
        nodes: 0,
        budget,
    };
    let loss = go(&mut st, du, moves)?;
    Ok(SweepReport {
        plays: st.plays,
        loss,
    })
}

/// Move generator for [`sweep`]: every candidate point of both sides.
pub fn all_moves(oracle: Oracle) -> impl FnMut(&GamePosition) -> Result<Vec<(Side, Point)>, GameError> {
    move |pos: &GamePosition| {
        let mut out = Vec::new();
        for side in [Side::A, Side::B] {
            let pts = oracle
                .moves(pos.structure(side), pos.rounds_left)
                .ok_or(GameError::NotEnumerable(side))?;
            out.extend(pts.into_iter().map(|p| (side, p)));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;

    fn lin(n: usize) -> OrderedStructure {
        OrderedStructure::linear_order(n)
    }

    #[test]
    fn oracle_on_linear_orders() {
        // Independent fact: <n and <m agree up to depth r iff n = m or both
        // are at least 2^r - 1.
        for n in 1..=8usize {
            for m in 1..=8usize {
                for r in 1..=3usize {
                    let big = (1usize << r) - 1;
                    let expect = n == m || (n >= big && m >= big);
                    assert_eq!(
                        duplicator_wins_oracle(&lin(n), &lin(m), r).unwrap(),
                        expect,
                        "n={n} m={m} r={r}"
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_examples() {
        assert!(duplicator_wins_oracle(&lin(3), &lin(4), 2).unwrap());
        assert!(!duplicator_wins_oracle(&lin(2), &lin(3), 2).unwrap());
        assert!(duplicator_wins_oracle(&lin(5), &lin(5), 4).unwrap());
    }

    #[test]
    fn budget_is_reported() {
        let o = Oracle {
            budget: 3,
            strict: false,
        };
        assert_eq!(
            o.duplicator_wins(&lin(6), &lin(7), 3),
            Err(GameError::BudgetExceeded(3))
        );
    }

    #[test]
    fn copy_agent_wins_on_equal_structures() {
        let s = lin(4);
        let mut sp = RandomSpoiler::new(1);
        let t = play_ef_game(&s, &s, 3, &mut sp, &mut CopyDuplicator).unwrap();
        assert!(t.duplicator_won);
        assert_eq!(t.rounds.len(), 3);
    }

    #[test]
    fn exhaustive_spoiler_beats_small_structure() {
        let t = play_ef_game(
            &lin(1),
            &lin(2),
            2,
            &mut MinimaxSpoiler::default(),
            &mut MinimaxDuplicator::default(),
        )
        .unwrap();
        assert!(!t.duplicator_won);
        let t = play_ef_game(
            &lin(4),
            &lin(7),
            2,
            &mut MinimaxSpoiler::default(),
            &mut MinimaxDuplicator::default(),
        )
        .unwrap();
        assert!(t.duplicator_won);
    }

    #[test]
    fn sweep_finds_no_loss_for_minimax() {
        let mut du = MinimaxDuplicator::default();
        let rep = sweep(&lin(3), &lin(4), 2, &mut du, &mut all_moves(Oracle::default()), 1 << 20).unwrap();
        assert!(rep.loss.is_none());
        assert_eq!(rep.plays, 7 * 7);
        let rep = sweep(&lin(2), &lin(3), 2, &mut du, &mut all_moves(Oracle::default()), 1 << 20).unwrap();
        assert!(rep.loss.is_some());
    }

    #[test]
    fn k_types_follow_the_oracle() {
        let mk = |lo: i64, hi: i64| {
            let sig = Signature::new().with_constant("lo").with_monadic("P");
            let mut s = OrderedStructure::new(sig, Universe::range(lo, hi - 1));
            s.set_constant("lo", Point::int(lo));
            s
        };
        assert_eq!(k_type(&mk(0, 3), 2).unwrap(), k_type(&mk(10, 13), 2).unwrap());
        assert_ne!(k_type(&mk(0, 3), 2).unwrap(), k_type(&mk(0, 4), 2).unwrap());
        assert!(!duplicator_wins_oracle(&mk(0, 3), &mk(0, 4), 2).unwrap());
    }

    #[test]
    fn single_round_examples() {
        assert!(!single_round_oracle(&lin(2), &lin(3), 3).unwrap());
        assert!(!single_round_oracle(&lin(1), &lin(2), 2).unwrap());
        assert!(single_round_oracle(&lin(4), &lin(4), 3).unwrap());
        let t = play_single_round_game(
            &lin(2),
            &lin(3),
            3,
            &mut ExhaustiveSingleRoundSpoiler,
            &mut ExhaustiveSingleRoundDuplicator,
        )
        .unwrap();
        assert!(!t.duplicator_won);
    }

    #[test]
    fn predicates_at_opposite_ends() {
        let sig = Signature::new().with_monadic("P");
        let mut a = OrderedStructure::new(sig.clone(), Universe::range(0, 4));
        a.add_member("P", Point::int(0));
        let mut b = OrderedStructure::new(sig, Universe::range(0, 4));
        b.add_member("P", Point::int(4));
        // {0,1} in A: P holds at the smaller point; in B nothing lies above 4.
        let ans = single_round_answer(&a, &b, Side::A, &[Point::int(0), Point::int(1)], DEFAULT_BUDGET).unwrap();
        assert_eq!(ans, None);
        assert!(!single_round_oracle(&a, &b, 2).unwrap());
        assert!(single_round_oracle(&a, &b, 1).unwrap());
    }

    #[test]
    fn transcript_json_is_stable() {
        let s = lin(2);
        let t = play_ef_game(&s, &s, 1, &mut MinimaxSpoiler::default(), &mut CopyDuplicator).unwrap();
        let j = t.to_json();
        assert!(j.find("\"rounds\"").unwrap() < j.find("\"duplicator_won\"").unwrap());
        let back: GameTranscript = serde_json::from_str(&j).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn duplicator_errors_are_forfeits() {
        struct Quit;
        impl Duplicator for Quit {
            fn answer(&mut self, _: &GamePosition, _: Side, _: &Point) -> Result<Point, String> {
                Err("gave up".into())
            }
        }
        let s = lin(2);
        let t = play_ef_game(&s, &s, 2, &mut RandomSpoiler::new(0), &mut Quit).unwrap();
        assert!(!t.duplicator_won);
        assert_eq!(t.forfeit.unwrap().player, Role::Duplicator);
    }

    #[test]
    fn moves_outside_universe_are_errors() {
        struct Far;
        impl Spoiler for Far {
            fn pick(&mut self, _: &GamePosition) -> Result<(Side, Point), String> {
                Ok((Side::A, Point::int(99)))
            }
        }
        let s = lin(2);
        assert!(matches!(
            play_ef_game(&s, &s, 1, &mut Far, &mut CopyDuplicator),
            Err(GameError::OutsideUniverse { .. })
        ));
    }
}
