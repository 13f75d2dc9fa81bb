//! Duplicator strategies for games on the integers with addition.
//!
//! In round `i` of a `k`-round game the duplicator looks at combinations of
//! the anchors, the sparse set and the earlier picks with the bounds of level
//! `k - i + 1`. A pick within `g(k-i+1)` of such a combination is answered
//! by the corresponding combination on the other side, shifted by the same
//! amount. Any other pick is answered by an integer strictly between the
//! images of the closest combinations below and above it, congruent to the
//! pick modulo `m(k-i)`. With a sparse set the sparse terms of those
//! combinations are first played, as spoiler moves, in a virtual game on the
//! sparse set alone, and the virtual answers provide their images.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::combination::{
    advance, bracket_search, ceil_int, coefficient_set, combination_values, floor_int,
    next_congruent_above, next_congruent_below, subsets,
};
use super::conditions::{check_conditions, Bounds, CheckMode, TermPool};
use super::{generate_p_sparse, generate_q_exact, modulus_exact, params, rounds_needed, PresburgerError};
use crate::game::{Duplicator, GameError, GamePosition, Oracle, Side};
use crate::structure::{
    active_domain, database_part, is_partial_isomorphism, relocate, OrderedStructure, PartialMap, Point,
    Signature, Universe,
};

/// Work limit for a single combination search.
pub const SEARCH_BUDGET: u64 = 20_000_000;

/// The game on the sparse set alone, carrying the relocated databases.
#[derive(Clone, Debug)]
pub struct VirtualGame {
    pub a: OrderedStructure,
    pub b: OrderedStructure,
    pub oracle: Oracle,
}

impl VirtualGame {
    fn identical(&self) -> bool {
        self.a == self.b
    }
}

/// How the last answer was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnswerCase {
    /// The pick was an anchor, an earlier pick or a sparse element.
    Known,
    /// The pick sat within the gap bound of a combination.
    Near,
    /// The pick fell strictly between two combinations.
    Between,
}

/// Everything the duplicator keeps between rounds.
#[derive(Clone, Debug)]
pub struct StrategyContext {
    pub k: usize,
    /// Finite prefix of the sparse set; empty in plain games.
    pub p: Vec<BigInt>,
    pub anchors: Vec<(BigInt, BigInt)>,
    /// `(spoiler side, a_i, b_i)`.
    pub picks: Vec<(Side, BigInt, BigInt)>,
    /// Moves of the virtual game, `(virtual spoiler side, a', b')`.
    pub virtual_picks: Vec<(Side, BigInt, BigInt)>,
    pub virtual_game: Option<Arc<VirtualGame>>,
    pub last_case: Option<AnswerCase>,
    pub budget: u64,
}

fn q(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

fn oriented(side: Side, pair: (&BigInt, &BigInt)) -> (BigInt, BigInt) {
    match side {
        Side::A => (pair.0.clone(), pair.1.clone()),
        Side::B => (pair.1.clone(), pair.0.clone()),
    }
}

/// A term as seen from one side: its value there and, when known, its
/// image on the other side.
#[derive(Clone, Debug)]
struct SideTerm {
    own: BigInt,
    other: Option<BigInt>,
}

impl StrategyContext {
    /// A game without a sparse set; anchors `a_i` face `b_i`.
    pub fn plain(k: usize, a: &[BigInt], b: &[BigInt]) -> Result<Self, PresburgerError> {
        if a.len() != b.len() {
            return Err(PresburgerError::Precondition("anchor tuples differ in length".into()));
        }
        params(k)?;
        Ok(StrategyContext {
            k,
            p: vec![],
            anchors: a.iter().cloned().zip(b.iter().cloned()).collect(),
            picks: vec![],
            virtual_picks: vec![],
            virtual_game: None,
            last_case: None,
            budget: SEARCH_BUDGET,
        })
    }

    /// A game over a sparse prefix shared by both sides.
    pub fn sparse(k: usize, p: Vec<BigInt>, anchors: &[BigInt], game: VirtualGame) -> Result<Self, PresburgerError> {
        params(k)?;
        if p.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PresburgerError::Precondition("sparse prefix must increase".into()));
        }
        Ok(StrategyContext {
            k,
            p,
            anchors: anchors.iter().map(|a| (a.clone(), a.clone())).collect(),
            picks: vec![],
            virtual_picks: vec![],
            virtual_game: Some(Arc::new(game)),
            last_case: None,
            budget: SEARCH_BUDGET,
        })
    }

    /// The round about to be played, from 1.
    pub fn round(&self) -> usize {
        self.picks.len() + 1
    }

    fn in_p(&self, v: &BigInt) -> bool {
        self.p.binary_search(v).is_ok()
    }

    fn virtual_image(&self, side: Side, v: &BigInt) -> Option<BigInt> {
        self.virtual_picks.iter().find_map(|(_, a, b)| {
            let (own, other) = oriented(side, (a, b));
            (own == *v).then_some(other)
        })
    }

    /// Anchors, earlier picks and the sparse prefix from `side`'s view,
    /// deduplicated by value.
    fn side_terms(&self, side: Side) -> Vec<SideTerm> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let fixed = self
            .anchors
            .iter()
            .map(|(a, b)| oriented(side, (a, b)))
            .chain(self.picks.iter().map(|(_, a, b)| oriented(side, (a, b))));
        for (own, other) in fixed {
            if seen.insert(own.clone()) {
                out.push(SideTerm {
                    own,
                    other: Some(other),
                });
            }
        }
        for v in &self.p {
            if seen.insert(v.clone()) {
                out.push(SideTerm {
                    own: v.clone(),
                    other: self.virtual_image(side, v),
                });
            }
        }
        out
    }

    /// Plays a sparse element as a spoiler move of the virtual game.
    fn virtual_move(&mut self, side: Side, v: &BigInt, rounds_left: usize) -> Result<BigInt, PresburgerError> {
        if let Some(w) = self.virtual_image(side, v) {
            return Ok(w);
        }
        let game = self
            .virtual_game
            .clone()
            .ok_or_else(|| PresburgerError::Precondition("sparse term without a virtual game".into()))?;
        let copy = game.identical() && self.virtual_picks.iter().all(|(_, a, b)| a == b);
        let w = if copy {
            v.clone()
        } else {
            let ca: Vec<Point> = self.virtual_picks.iter().map(|(_, a, _)| Point::from_bigint(a.clone())).collect();
            let cb: Vec<Point> = self.virtual_picks.iter().map(|(_, _, b)| Point::from_bigint(b.clone())).collect();
            let sides: Vec<Side> = self.virtual_picks.iter().map(|(s, _, _)| *s).collect();
            let pos = GamePosition {
                a: &game.a,
                b: &game.b,
                chosen_a: &ca,
                chosen_b: &cb,
                sides: &sides,
                rounds_left: rounds_left.max(1),
            };
            let ans = game
                .oracle
                .winning_answer(&pos, side, &Point::from_bigint(v.clone()))?
                .ok_or_else(|| PresburgerError::NoAnswer(format!("virtual game lost at {v}")))?;
            ans.to_bigint().expect("sparse elements are integers")
        };
        let (a, b) = oriented(side, (v, &w));
        self.virtual_picks.push((side, a, b));
        Ok(w)
    }

    /// Answers `x`, picked on `side`, and records the round.
    pub fn answer(&mut self, side: Side, x: &BigInt) -> Result<BigInt, PresburgerError> {
        let i = self.round();
        if i > self.k {
            return Err(PresburgerError::NoAnswer(format!("all {} rounds are played", self.k)));
        }
        let level = self.k - i + 1;
        let pr = params(level)?;
        let big_g = pr.g.clone();
        let m_next = modulus_exact(self.k - i)?;
        let g_inner = &big_g - q(&m_next) / q(&BigInt::from(2));
        let mut rounds_left = rounds_needed(level);
        let terms = self.side_terms(side);

        if let Some(t) = terms.iter().find(|t| &t.own == x) {
            let y = match &t.other {
                Some(y) => y.clone(),
                None => self.virtual_move(side, x, rounds_left)?,
            };
            return self.record(side, x, y, AnswerCase::Known);
        }

        let values: Vec<BigRational> = terms.iter().map(|t| q(&t.own)).collect();
        let coeffs: Vec<BigRational> = coefficient_set(&pr.c)?.into_iter().filter(|d| !d.is_zero()).collect();
        let xr = q(x);
        let br = bracket_search(&values, pr.l, &coeffs, &xr, self.budget)?;
        let dist = |f: &Option<super::Found>| f.as_ref().map(|f| (&xr - &f.value).abs());
        let near = match (dist(&br.below), dist(&br.above)) {
            (Some(db), Some(da)) if db <= big_g || da <= big_g => {
                if db <= da {
                    br.below.clone()
                } else {
                    br.above.clone()
                }
            }
            (Some(db), None) if db <= big_g => br.below.clone(),
            (None, Some(da)) if da <= big_g => br.above.clone(),
            _ => None,
        };

        // Images of the sparse terms, played in ascending order per combination.
        let image_of = |ctx: &mut Self, combo: &super::LinCombination, rounds_left: &mut usize| -> Result<BigRational, PresburgerError> {
            let mut sparse: Vec<usize> = combo
                .terms
                .iter()
                .map(|(_, t)| *t)
                .filter(|&t| terms[t].other.is_none())
                .collect();
            sparse.sort_by(|&u, &v| terms[u].own.cmp(&terms[v].own));
            for t in sparse {
                if ctx.virtual_image(side, &terms[t].own).is_none() {
                    ctx.virtual_move(side, &terms[t].own, *rounds_left)?;
                    *rounds_left = rounds_left.saturating_sub(1);
                }
            }
            let mut w = BigRational::zero();
            for (d, t) in &combo.terms {
                let img = match &terms[*t].other {
                    Some(o) => o.clone(),
                    None => ctx.virtual_image(side, &terms[*t].own).expect("just played"),
                };
                w += d * q(&img);
            }
            Ok(w)
        };

        if let Some(found) = near {
            let w = image_of(self, &found.combination, &mut rounds_left)?;
            let y = w + (&xr - &found.value);
            if !y.is_integer() {
                return Err(PresburgerError::Precondition(format!("image {y} of {x} is not an integer")));
            }
            let y = y.to_integer();
            if !(&y - x).is_multiple_of(&m_next) {
                return Err(PresburgerError::Precondition(format!("answer {y} to {x} breaks congruence mod {m_next}")));
            }
            return self.record(side, x, y, AnswerCase::Near);
        }

        let lower = match &br.below {
            Some(f) => Some(image_of(self, &f.combination, &mut rounds_left)? + &g_inner),
            None => None,
        };
        let upper = match &br.above {
            Some(f) => Some(image_of(self, &f.combination, &mut rounds_left)? - &g_inner),
            None => None,
        };
        let r = x.mod_floor(&m_next);
        let y = match (&lower, &upper) {
            (Some(lo), hi) => {
                let y = next_congruent_above(lo, &r, &m_next);
                if hi.as_ref().is_some_and(|hi| q(&y) >= *hi) {
                    return Err(PresburgerError::NoAnswer(format!(
                        "no integer congruent to {x} mod {m_next} strictly inside ({lo}, {})",
                        hi.as_ref().unwrap()
                    )));
                }
                y
            }
            (None, Some(hi)) => next_congruent_below(hi, &r, &m_next),
            (None, None) => unreachable!("the empty sum always brackets"),
        };
        if self.in_p(&y) {
            return Err(PresburgerError::Precondition(format!("answer {y} to {x} is a sparse element")));
        }
        self.record(side, x, y, AnswerCase::Between)
    }

    fn record(&mut self, side: Side, x: &BigInt, y: BigInt, case: AnswerCase) -> Result<BigInt, PresburgerError> {
        let (a, b) = oriented(side, (x, &y));
        self.picks.push((side, a, b));
        self.last_case = Some(case);
        Ok(y)
    }

    /// Every fixed pair: anchors, picks and virtual moves.
    pub fn fixed_pairs(&self) -> Vec<(BigRational, BigRational)> {
        self.anchors
            .iter()
            .map(|(a, b)| (q(a), q(b)))
            .chain(self.picks.iter().map(|(_, a, b)| (q(a), q(b))))
            .chain(self.virtual_picks.iter().map(|(_, a, b)| (q(a), q(b))))
            .collect()
    }

    /// Points worth trying for the spoiler on `side`: every combination value
    /// of the current round rounded and shifted by up to the gap bound plus
    /// one, a point between neighbouring values, the sparse prefix and the
    /// anchors, all within `[-window, window]`.
    pub fn relevant_points(&self, side: Side, window: &BigInt) -> Result<Vec<BigInt>, PresburgerError> {
        let i = self.round();
        if i > self.k {
            return Ok(vec![]);
        }
        let pr = params(self.k - i + 1)?;
        let values: Vec<BigRational> = self.side_terms(side).iter().map(|t| q(&t.own)).collect();
        let coeffs: Vec<BigRational> = coefficient_set(&pr.c)?.into_iter().filter(|d| !d.is_zero()).collect();
        let all = combination_values(&values, pr.l, &coeffs, self.budget)?;
        let reach: BigInt = ceil_int(&pr.g) + 1;
        let mut out = BTreeSet::new();
        for v in &all {
            let f = floor_int(v);
            let mut d = -reach.clone();
            while d <= reach {
                out.insert(&f + &d);
                d += 1;
            }
        }
        for w in all.windows(2) {
            out.insert(floor_int(&((&w[0] + &w[1]) / q(&BigInt::from(2)))));
        }
        for t in self.side_terms(side) {
            out.insert(t.own);
        }
        let lo = -window.clone();
        Ok(out.into_iter().filter(|v| v >= &lo && v <= window).collect())
    }
}

/// Per-condition outcome after a round; `None` where a condition does not
/// apply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantReport {
    pub round: usize,
    pub conditions: [Option<bool>; 5],
    pub detail: Option<String>,
}

impl InvariantReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| *c != Some(false))
    }
}

/// Checks, after `i = picks.len()` rounds:
/// 1. the virtual game is still won for `r(k-i)` rounds;
/// 2. each pick `a_j` is congruent to `b_j` mod `m(k-j)`;
/// 3. the fixed pairs form a correspondence that respects the databases;
/// 4. the last pick compares with every combination of the round's bounds
///    over earlier terms the same way its answer does, for every extension;
/// 5. with rounds left, the conditions of level `k-i` hold for all pairs.
pub fn verify_strategy_invariants(ctx: &StrategyContext, mode: CheckMode) -> Result<InvariantReport, PresburgerError> {
    let i = ctx.picks.len();
    let k = ctx.k;
    let mut report = InvariantReport {
        round: i,
        conditions: [None; 5],
        detail: None,
    };
    let fail = |report: &mut InvariantReport, n: usize, why: String| {
        report.conditions[n] = Some(false);
        if report.detail.is_none() {
            report.detail = Some(format!("condition {}: {why}", n + 1));
        }
    };

    if let Some(game) = &ctx.virtual_game {
        let identical = game.identical() && ctx.virtual_picks.iter().all(|(_, a, b)| a == b);
        let ok = identical || {
            let ca: Vec<Point> = ctx.virtual_picks.iter().map(|(_, a, _)| Point::from_bigint(a.clone())).collect();
            let cb: Vec<Point> = ctx.virtual_picks.iter().map(|(_, _, b)| Point::from_bigint(b.clone())).collect();
            game.oracle.duplicator_wins_from(&game.a, &game.b, &ca, &cb, rounds_needed(k - i))?
        };
        report.conditions[0] = Some(ok);
        if !ok {
            fail(&mut report, 0, "virtual game no longer won".into());
        }
    }

    let mut congruent = true;
    for (j, (_, a, b)) in ctx.picks.iter().enumerate() {
        let m = modulus_exact(k - (j + 1))?;
        if !(a - b).is_multiple_of(&m) {
            congruent = false;
            fail(&mut report, 1, format!("pick {a} and answer {b} differ mod {m}"));
        }
    }
    report.conditions[1] = Some(congruent);

    let fixed = ctx.fixed_pairs();
    let pool = TermPool::new(&ctx.p, &fixed);
    let mut corr = pool.is_ok() && PartialMap::new(fixed.iter().map(|(a, b)| (Point(a.clone()), Point(b.clone()))).collect::<BTreeSet<_>>().into_iter().collect()).is_functional_injective();
    if corr {
        if let Some(game) = &ctx.virtual_game {
            let pairs = ctx
                .virtual_picks
                .iter()
                .map(|(_, a, b)| (Point::from_bigint(a.clone()), Point::from_bigint(b.clone())))
                .collect();
            corr = is_partial_isomorphism(&game.a, &game.b, &PartialMap::new(pairs))?;
        }
    }
    report.conditions[2] = Some(corr);
    if !corr {
        fail(&mut report, 2, "fixed pairs are not a database-respecting correspondence".into());
    }

    if i >= 1 {
        let ok = last_pick_agrees(ctx, i, mode)?;
        report.conditions[3] = Some(ok.is_none());
        if let Some(why) = ok {
            fail(&mut report, 3, why);
        }
    }

    if i < k && corr {
        let bounds = Bounds {
            m: modulus_exact(k - i)?,
            l: super::l_of(k - i),
            c: super::c_of(k - i),
            g: params(k - i)?.g.clone(),
        };
        let r = check_conditions(&ctx.p, &fixed, &bounds, mode)?;
        report.conditions[4] = Some(r.holds);
        if !r.holds {
            fail(&mut report, 4, format!("{:?}", r.witness));
        }
    }
    Ok(report)
}

/// `None` when the last pick compares like its answer with every
/// combination over the earlier terms; otherwise a description.
fn last_pick_agrees(ctx: &StrategyContext, i: usize, mode: CheckMode) -> Result<Option<String>, PresburgerError> {
    let level = ctx.k - i + 1;
    let pr = params(level)?;
    let half_m = q(&modulus_exact(ctx.k - i)?) / q(&BigInt::from(2));
    let g = &pr.g - half_m;
    let (_, ai, bi) = &ctx.picks[i - 1];
    let (ai, bi) = (q(ai), q(bi));
    let fixed: Vec<(BigRational, BigRational)> = ctx
        .anchors
        .iter()
        .map(|(a, b)| (q(a), q(b)))
        .chain(ctx.picks[..i - 1].iter().map(|(_, a, b)| (q(a), q(b))))
        .chain(ctx.virtual_picks.iter().map(|(_, a, b)| (q(a), q(b))))
        .collect();
    let pool = TermPool::new(&ctx.p, &fixed).map_err(|w| PresburgerError::Precondition(format!("{w:?}")))?;
    let coeffs: Vec<BigRational> = coefficient_set(&pr.c)?.into_iter().filter(|d| !d.is_zero()).collect();
    let budget = match mode {
        CheckMode::Exhaustive { budget } => budget,
        CheckMode::Sampled { pairs, .. } => pairs,
    };
    let agrees = |da: &BigRational, db: &BigRational| da == db || (da >= &g && db >= &g) || (da < &-g.clone() && db < &-g.clone());
    if !agrees(&ai, &bi) {
        return Ok(Some(format!("pick {ai} against the empty sum")));
    }
    let mut work = 0u64;
    for chosen in subsets(pool.terms.len(), pr.l) {
        let images = pool.images(&chosen, usize::MAX);
        let mut idx = vec![0usize; chosen.len()];
        loop {
            for img in &images {
                work += 1;
                if work > budget {
                    return Err(PresburgerError::Budget(budget));
                }
                let mut va = BigRational::zero();
                let mut vb = BigRational::zero();
                for ((&d, &t), b) in idx.iter().zip(&chosen).zip(img) {
                    va += &coeffs[d] * &pool.terms[t].a;
                    vb += &coeffs[d] * b;
                }
                let (da, db) = (&ai - &va, &bi - &vb);
                if !agrees(&da, &db) {
                    return Ok(Some(format!("pick {ai} vs {va}, answer {bi} vs {vb}")));
                }
            }
            if !advance(&mut idx, coeffs.len()) {
                break;
            }
        }
    }
    Ok(None)
}

/// The strategy as a game agent. It is stateless: each call replays the
/// earlier rounds from the position and checks they match its own answers.
#[derive(Clone, Debug)]
pub struct AdditionDuplicator {
    pub start: StrategyContext,
}

impl AdditionDuplicator {
    /// Context after replaying the earlier rounds of `pos`.
    pub fn replay(&self, pos: &GamePosition) -> Result<StrategyContext, String> {
        let mut ctx = self.start.clone();
        for (j, side) in pos.sides.iter().enumerate() {
            let x = integer(&pos.chosen(*side)[j])?;
            let expected = integer(&pos.chosen(side.other())[j])?;
            let y = ctx.answer(*side, &x).map_err(|e| e.to_string())?;
            if y != expected {
                return Err(format!("round {} was not played by this strategy", j + 1));
            }
        }
        Ok(ctx)
    }
}

fn integer(p: &Point) -> Result<BigInt, String> {
    p.to_bigint().ok_or_else(|| format!("{p} is not an integer"))
}

impl Duplicator for AdditionDuplicator {
    fn answer(&mut self, pos: &GamePosition, side: Side, pick: &Point) -> Result<Point, String> {
        let mut ctx = self.replay(pos)?;
        let y = ctx.answer(side, &integer(pick)?).map_err(|e| e.to_string())?;
        Ok(Point::from_bigint(y))
    }
}

/// Move generator for [`crate::game::sweep`]: the relevant points of both
/// sides inside the spoiler window.
pub fn relevant_moves(
    agent: AdditionDuplicator,
    window: BigInt,
) -> impl FnMut(&GamePosition) -> Result<Vec<(Side, Point)>, GameError> {
    move |pos: &GamePosition| {
        let ctx = agent.replay(pos).map_err(GameError::Strategy)?;
        let mut out = Vec::new();
        for side in [Side::A, Side::B] {
            for v in ctx.relevant_points(side, &window).map_err(|e| GameError::Strategy(e.to_string()))? {
                out.push((side, Point::from_bigint(v)));
            }
        }
        Ok(out)
    }
}

/// A sparse set with its anchors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSetup {
    pub p: Vec<BigInt>,
    pub anchors: Vec<BigInt>,
}

impl SparseSetup {
    /// Anchors `q_0, ..., q_{k-1}` and the next `len` anchor values as the
    /// sparse prefix.
    pub fn anchor_sequence(k: usize, len: usize) -> Result<Self, PresburgerError> {
        let q = generate_q_exact(k + len)?;
        Ok(SparseSetup {
            anchors: q[..k].to_vec(),
            p: q[k..].to_vec(),
        })
    }

    /// Anchor `p0` and the least sparse sequence above it for level `k`.
    pub fn least_above(k: usize, p0: BigInt, len: usize) -> Result<Self, PresburgerError> {
        let pr = params(k)?;
        let p = generate_p_sparse(&p0, len, pr.m.require_exact()?, pr.l, &pr.c, &pr.g)?;
        Ok(SparseSetup { p, anchors: vec![p0] })
    }

    /// Lower bound on the element after the prefix, from the growth every
    /// supported sparse set satisfies at level `k`.
    pub fn next_bound(&self, k: usize) -> Result<BigInt, PresburgerError> {
        let pr = params(k)?;
        let last = self.p.last().ok_or_else(|| PresburgerError::Precondition("empty sparse prefix".into()))?;
        let c = q(&pr.c);
        let b = q(&BigInt::from(2 * pr.l - 1)) * q(&2.into()) * c.pow(3) * q(last) + q(&2.into()) * &pr.g * c.pow(2);
        Ok(ceil_int(&b))
    }
}

/// Spoiler window and universe half-width for a game whose terms reach
/// `reach`: the spoiler stays where combinations live, the universe leaves
/// room for every answer.
pub fn game_windows(k: usize, reach: &BigInt) -> Result<(BigInt, BigInt), PresburgerError> {
    let pr = params(k)?;
    let spoiler = BigInt::from(pr.l) * &pr.c * reach + 2 * ceil_int(&pr.g) + 2;
    let universe = 2 * &spoiler;
    Ok((spoiler, universe))
}

/// A ready-to-play plain game: structures with the anchors as constants and
/// addition, the duplicator, and the spoiler window.
#[derive(Clone, Debug)]
pub struct PlainGame {
    pub a: OrderedStructure,
    pub b: OrderedStructure,
    pub duplicator: AdditionDuplicator,
    pub spoiler_window: BigInt,
}

pub fn plain_game(k: usize, a: &[BigInt], b: &[BigInt]) -> Result<PlainGame, PresburgerError> {
    let ctx = StrategyContext::plain(k, a, b)?;
    let reach = a.iter().chain(b).map(|v| v.abs()).max().unwrap_or_default();
    let (spoiler, universe) = game_windows(k, &reach)?;
    let mut sig = Signature::new().with_plus();
    for j in 0..a.len() {
        sig = sig.with_constant(&format!("c{j}"));
    }
    let build = |vals: &[BigInt]| {
        let mut s = OrderedStructure::new(
            sig.clone(),
            Universe::Window {
                lo: -universe.clone(),
                hi: universe.clone(),
                unbounded_above: false,
            },
        );
        for (j, v) in vals.iter().enumerate() {
            s.set_constant(&format!("c{j}"), Point::from_bigint(v.clone()));
        }
        s
    };
    Ok(PlainGame {
        a: build(a),
        b: build(b),
        duplicator: AdditionDuplicator { start: ctx },
        spoiler_window: spoiler,
    })
}

/// Databases moved onto the sparse set and the addition games built on them.
#[derive(Clone, Debug)]
pub struct AdditionTranslation {
    pub alpha: PartialMap,
    pub beta: PartialMap,
    pub a: OrderedStructure,
    pub b: OrderedStructure,
    pub duplicator: AdditionDuplicator,
    pub spoiler_window: BigInt,
    /// Name of the context predicate marking the sparse set.
    pub sparse_predicate: String,
}


/// Moves both databases onto the sparse set by rank and wraps them into
/// games on the integers with addition, the sparse set as a context
/// predicate and the anchors as constants. Fails unless the databases are
/// `r(k)`-equivalent as pure order structures.
pub fn translate_strategy_plus(
    a: &OrderedStructure,
    b: &OrderedStructure,
    k: usize,
    setup: &SparseSetup,
) -> Result<AdditionTranslation, PresburgerError> {
    if a.signature != b.signature {
        return Err(crate::structure::StructureError::SignatureMismatch.into());
    }
    let da = database_part(a)?;
    let db = database_part(b)?;
    let rk = rounds_needed(k);
    let oracle = Oracle::default();
    if !oracle.duplicator_wins(&da, &db, rk)? {
        return Err(PresburgerError::Precondition(format!(
            "the databases are not equivalent for {rk} rounds of the order game"
        )));
    }
    let pts: Vec<Point> = setup.p.iter().map(|v| Point::from_bigint(v.clone())).collect();
    let adom_a = active_domain(&da);
    let adom_b = active_domain(&db);
    let alpha = PartialMap::by_rank(&adom_a, &pts)
        .ok_or_else(|| PresburgerError::Precondition("sparse prefix shorter than the active domain".into()))?;
    let beta = PartialMap::by_rank(&adom_b, &pts)
        .ok_or_else(|| PresburgerError::Precondition("sparse prefix shorter than the active domain".into()))?;
    let va = relocate(&da, &alpha, Universe::Points(pts.clone()))?;
    let vb = relocate(&db, &beta, Universe::Points(pts.clone()))?;

    let reach = setup.p.iter().chain(&setup.anchors).map(|v| v.abs()).max().unwrap_or_default();
    let (spoiler, universe) = game_windows(k, &reach)?;
    if universe >= setup.next_bound(k)? {
        return Err(PresburgerError::Precondition("sparse prefix too short for the game window".into()));
    }
    let predicate = "sparse".to_string();
    let mut sig = da.signature.clone().with_plus().with_monadic(&predicate);
    let anchor_names: Vec<String> = (0..setup.anchors.len()).map(|j| format!("anchor{j}")).collect();
    for n in &anchor_names {
        if sig.constants.contains(n) || sig.arity(n).is_some() {
            return Err(PresburgerError::Precondition(format!("database already uses the name {n}")));
        }
        sig = sig.with_constant(n);
    }
    if sig.arity(&predicate).is_some() || da.signature.constants.contains(&predicate) {
        return Err(PresburgerError::Precondition(format!("database already uses the name {predicate}")));
    }
    let build = |v: &OrderedStructure| {
        let mut s = OrderedStructure::new(
            sig.clone(),
            Universe::Window {
                lo: -universe.clone(),
                hi: universe.clone(),
                unbounded_above: false,
            },
        );
        s.relations = v.relations.clone();
        for (c, p) in &v.constants {
            s.set_constant(c, p.clone());
        }
        for (n, x) in anchor_names.iter().zip(&setup.anchors) {
            s.set_constant(n, Point::from_bigint(x.clone()));
        }
        for p in &pts {
            s.add_member(&predicate, p.clone());
        }
        s
    };
    let (sa, sb) = (build(&va), build(&vb));
    let game = VirtualGame { a: va, b: vb, oracle };
    let ctx = StrategyContext::sparse(k, setup.p.clone(), &setup.anchors, game)?;
    Ok(AdditionTranslation {
        alpha,
        beta,
        a: sa,
        b: sb,
        duplicator: AdditionDuplicator { start: ctx },
        spoiler_window: spoiler,
        sparse_predicate: predicate,
    })
}

/// Plays an integer strategy on the rationals: a pick is split into its
/// floor and fractional part, the floor is answered on the integer
/// structures, and the fraction is added back.
pub struct RationalLift<D> {
    pub inner: D,
    pub int_a: OrderedStructure,
    pub int_b: OrderedStructure,
}

pub fn lift_to_rationals<D: Duplicator>(inner: D, int_a: OrderedStructure, int_b: OrderedStructure) -> RationalLift<D> {
    RationalLift { inner, int_a, int_b }
}

impl<D: Duplicator> Duplicator for RationalLift<D> {
    fn answer(&mut self, pos: &GamePosition, side: Side, pick: &Point) -> Result<Point, String> {
        let ca: Vec<Point> = pos.chosen_a.iter().map(Point::floor).collect();
        let cb: Vec<Point> = pos.chosen_b.iter().map(Point::floor).collect();
        let inner = GamePosition {
            a: &self.int_a,
            b: &self.int_b,
            chosen_a: &ca,
            chosen_b: &cb,
            sides: pos.sides,
            rounds_left: pos.rounds_left,
        };
        let base = pick.floor();
        let frac = pick.sub(&base);
        Ok(self.inner.answer(&inner, side, &base)?.add(&frac))
    }
}
