//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use efgame::logic::{Formula, Term};
use efgame::representation::{classes, DenseStructure, RegionRelation};
use efgame::structure::{OrderedStructure, Point, Signature, Universe};
use num_bigint::BigInt;
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// lcm(1..=n) by repeated gcd, independent of the library's version.
pub fn lcm_range(n: u64) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, i| acc.lcm(&BigInt::from(i)))
}

fn var(name: &str) -> Term {
    Term::var(name)
}

/// A random formula over `<`, `=` and optionally `+` with `depth` nested
/// quantifiers at most. `free` lists variables already in scope; `pool`
/// lists literal values atoms may mention.
pub fn random_formula(
    rng: &mut ChaCha8Rng,
    depth: usize,
    scope: &mut Vec<String>,
    pool: &[i64],
    plus: bool,
) -> Formula {
    let atom_only = scope.is_empty() && depth == 0;
    if atom_only {
        return if rng.gen_bool(0.5) { Formula::True } else { Formula::False };
    }
    let roll = rng.gen_range(0..10);
    if depth > 0 && (scope.is_empty() || roll < 4) {
        let name = format!("v{}", scope.len());
        scope.push(name.clone());
        let body = random_formula(rng, depth - 1, scope, pool, plus);
        scope.pop();
        return if rng.gen_bool(0.5) {
            Formula::exists(&name, body)
        } else {
            Formula::forall(&name, body)
        };
    }
    match roll {
        4 | 5 if scope.len() + pool.len() > 0 => {
            let l = random_formula(rng, depth, scope, pool, plus);
            let r = random_formula(rng, depth, scope, pool, plus);
            if roll == 4 {
                Formula::And(vec![l, r])
            } else {
                Formula::Or(vec![l, r])
            }
        }
        6 => Formula::not(random_formula(rng, depth, scope, pool, plus)),
        _ => random_atom(rng, scope, pool, plus),
    }
}

fn random_term(rng: &mut ChaCha8Rng, scope: &[String], pool: &[i64]) -> Term {
    if pool.is_empty() || (!scope.is_empty() && rng.gen_bool(0.7)) {
        var(scope.choose(rng).expect("scope or pool"))
    } else {
        efgame::logic::lit(*pool.choose(rng).expect("pool"))
    }
}

fn random_atom(rng: &mut ChaCha8Rng, scope: &[String], pool: &[i64], plus: bool) -> Formula {
    let t = |rng: &mut ChaCha8Rng| random_term(rng, scope, pool);
    match rng.gen_range(0..if plus { 3 } else { 2 }) {
        0 => Formula::Less(t(rng), t(rng)),
        1 => Formula::Eq(t(rng), t(rng)),
        _ => Formula::Plus(t(rng), t(rng), t(rng)),
    }
}

/// A sentence with quantifier depth exactly `depth`, retrying until the
/// generated depth matches.
pub fn random_sentence(rng: &mut ChaCha8Rng, depth: usize, plus: bool) -> Formula {
    loop {
        let name = "v0".to_string();
        let mut scope = vec![name.clone()];
        let body = random_formula(rng, depth - 1, &mut scope, &[], plus);
        let f = if rng.gen_bool(0.5) {
            Formula::exists(&name, body)
        } else {
            Formula::forall(&name, body)
        };
        if efgame::logic::quantifier_depth(&f) == depth {
            return f;
        }
    }
}

fn int_term(t: &Term, env: &[(String, i64)]) -> i64 {
    match t {
        Term::Var(v) => env.iter().rev().find(|(n, _)| n == v).expect("bound").1,
        Term::Lit(p) => p.to_bigint().and_then(|b| i64::try_from(b).ok()).expect("integer literal"),
        Term::Const(c) => panic!("no constant {c} in this oracle"),
    }
}

/// Truth on `{0, ..., n}` with `<`, `=` and `+`, by plain recursion.
pub fn naive_range(f: &Formula, n: i64, env: &mut Vec<(String, i64)>) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Less(a, b) => int_term(a, env) < int_term(b, env),
        Formula::Eq(a, b) => int_term(a, env) == int_term(b, env),
        Formula::Plus(a, b, c) => int_term(a, env) + int_term(b, env) == int_term(c, env),
        Formula::Not(g) => !naive_range(g, n, env),
        Formula::And(gs) => gs.iter().all(|g| naive_range(g, n, env)),
        Formula::Or(gs) => gs.iter().any(|g| naive_range(g, n, env)),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let want = matches!(f, Formula::Exists(..));
            for x in 0..=n {
                env.push((v.clone(), x));
                let t = naive_range(g, n, env);
                env.pop();
                if t == want {
                    return want;
                }
            }
            !want
        }
        Formula::Rel(..) | Formula::Mon(..) => panic!("no relations in this oracle"),
    }
}

/// A region relation choosing every (cell, type) class with probability
/// one half.
pub fn random_region(rng: &mut ChaCha8Rng, arity: usize, cuts: &[i64]) -> RegionRelation {
    let cuts: Vec<Point> = cuts.iter().map(|&c| Point::int(c)).collect();
    let mut r = RegionRelation::empty(arity, cuts.clone());
    for (cell, id, _) in classes(&r.cuts, arity).expect("small arity") {
        if rng.gen_bool(0.5) {
            r.cells.insert((cell, id));
        }
    }
    r
}

/// Signature of the random dense databases: a constant, a unary and a
/// binary relation.
pub fn dense_signature() -> Signature {
    Signature::new()
        .with_constant("c")
        .with_relation("R", 1)
        .with_relation("E", 2)
}

/// A random dense database over at most `max_cuts` integer cuts per
/// relation, drawn from `0..8`.
pub fn random_dense(rng: &mut ChaCha8Rng, max_cuts: usize) -> DenseStructure {
    let mut s = DenseStructure::new(dense_signature());
    s.constants.insert("c".into(), Point::int(rng.gen_range(0..8)));
    for (name, arity) in [("R", 1), ("E", 2)] {
        let n = rng.gen_range(0..=max_cuts);
        let mut cuts: Vec<i64> = (0..8).collect();
        cuts.shuffle(rng);
        cuts.truncate(n);
        s.relations.insert(name.into(), random_region(rng, arity, &cuts));
    }
    s
}

/// A finite database with unary `R`, `S` and binary `E`, active domain
/// inside `0..range` of at most `n` points, in a window universe.
pub fn random_database(rng: &mut ChaCha8Rng, n: usize, range: i64) -> OrderedStructure {
    let sig = Signature::new().with_relation("R", 1).with_relation("E", 2);
    let mut s = OrderedStructure::new(sig, Universe::window(0, range));
    let mut pts: Vec<i64> = (0..n).map(|_| rng.gen_range(0..range)).collect();
    pts.sort();
    pts.dedup();
    for &x in &pts {
        if rng.gen_bool(0.5) {
            s.add_tuple("R", vec![Point::int(x)]);
        } else {
            s.add_tuple("E", vec![Point::int(x), Point::int(pts[0])]);
        }
    }
    s
}

/// A word over three letters as a finite structure: position `i` carries
/// letter `w[i]` through the unary relations `R` (bit 0) and `S` (bit 1).
pub fn word_structure(w: &[u8], positions: &[i64]) -> OrderedStructure {
    let sig = Signature::new().with_relation("R", 1).with_relation("S", 1);
    let pts: Vec<Point> = positions.iter().map(|&p| Point::int(p)).collect();
    let mut s = OrderedStructure::new(sig, Universe::Points(pts.clone()));
    for (letter, p) in w.iter().zip(&pts) {
        if letter & 1 != 0 {
            s.add_tuple("R", vec![p.clone()]);
        }
        if letter & 2 != 0 {
            s.add_tuple("S", vec![p.clone()]);
        }
    }
    s
}

/// A random nonempty word over the letters 1, 2, 3.
pub fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<u8> {
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| rng.gen_range(1..=3)).collect()
}

/// `w` with one letter repeated in place or one letter dropped: a cheap way
/// to produce look-alike words.
pub fn mutate_word(rng: &mut ChaCha8Rng, w: &[u8]) -> Vec<u8> {
    let mut v = w.to_vec();
    let i = rng.gen_range(0..v.len());
    if v.len() > 1 && rng.gen_bool(0.3) {
        v.remove(i);
    } else {
        v.insert(i, v[i]);
    }
    v
}

/// Ascending integer positions `0, step, 2 step, ...`.
pub fn spaced(n: usize, step: i64) -> Vec<i64> {
    (0..n as i64).map(|i| i * step).collect()
}

/// Every point of a region relation's classes, as a check that two
/// relations agree on a shared grid.
pub fn region_points(r: &RegionRelation, cuts: &BTreeSet<Point>) -> BTreeMap<Vec<Point>, bool> {
    let cuts: Vec<Point> = cuts.iter().cloned().collect();
    classes(&cuts, r.arity)
        .expect("small arity")
        .into_iter()
        .map(|(_, _, w)| {
            let inside = r.contains(&w);
            (w, inside)
        })
        .collect()
}
