//! The invariant behind the addition strategies: two sides agree on every
//! comparison between bounded combinations, up to correspondences that fix
//! the anchors and move the sparse set order-preservingly.
//!
//! A comparison `s1 < s2` depends only on the difference `s2 - s1`, so the
//! checker enumerates difference vectors instead of pairs. Gaps are handled
//! by a threshold: with `D = s2 - s1` gapless on each side, the comparison
//! agrees for every gap choice exactly when the two values of `D` are equal,
//! both at most `-2g`, or both above `2g`.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::combination::{advance, coefficient_set, difference_set, subsets, LinCombination};
use super::{params, PresburgerError};
use crate::structure::divisible;

/// Bounds of one condition instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub m: BigInt,
    pub l: usize,
    pub c: BigInt,
    pub g: BigRational,
}

impl Bounds {
    /// The bounds of level `k`; needs an exact modulus.
    pub fn level(k: usize) -> Result<Bounds, PresburgerError> {
        let p = params(k)?;
        Ok(Bounds {
            m: p.m.require_exact()?.clone(),
            l: p.l,
            c: p.c.clone(),
            g: p.g.clone(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive { budget: u64 },
    Sampled { pairs: u64, seed: u64 },
}

impl Default for CheckMode {
    fn default() -> Self {
        CheckMode::Exhaustive { budget: 50_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Two elements that should be congruent are not.
    Congruence { a: BigRational, b: BigRational },
    /// The fixed pairs are not a correspondence: they break the order on the
    /// sparse set or disagree on membership.
    NotCorrespondence { a: BigRational, b: BigRational },
    /// A comparison that flips. `s1` and `s2` index into `terms_a`, whose
    /// images are `terms_b`.
    Order {
        s1: LinCombination,
        s2: LinCombination,
        terms_a: Vec<BigRational>,
        terms_b: Vec<BigRational>,
        delta_a: BigRational,
        delta_b: BigRational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub holds: bool,
    pub exhaustive: bool,
    /// Comparisons examined (difference vector times correspondence).
    pub checked: u64,
    pub witness: Option<Witness>,
}

/// One usable term: its A-value, and its image if the correspondence
/// already fixes it. Free terms are elements of the sparse prefix.
#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub a: BigRational,
    pub image: Option<BigRational>,
}

/// Terms available to combinations over `p` and the fixed pairs, plus the
/// fixed pairs that live on the sparse set.
pub(crate) struct TermPool {
    pub terms: Vec<Term>,
    pub p: Vec<BigRational>,
    /// Fixed pairs on the sparse set, sorted by A-value.
    pub p_pairs: Vec<(BigRational, BigRational)>,
}

impl TermPool {
    pub fn new(p: &[BigInt], fixed: &[(BigRational, BigRational)]) -> Result<TermPool, Witness> {
        let p: Vec<BigRational> = p.iter().map(|v| BigRational::from_integer(v.clone())).collect();
        let in_p = |x: &BigRational| p.binary_search(x).is_ok();
        let mut seen: BTreeSet<BigRational> = BTreeSet::new();
        let mut terms = Vec::new();
        let mut p_pairs = Vec::new();
        for (a, b) in fixed {
            if in_p(a) != in_p(b) {
                return Err(Witness::NotCorrespondence { a: a.clone(), b: b.clone() });
            }
            if !seen.insert(a.clone()) {
                if terms.iter().any(|t: &Term| &t.a == a && t.image.as_ref() != Some(b)) {
                    return Err(Witness::NotCorrespondence { a: a.clone(), b: b.clone() });
                }
                continue;
            }
            if in_p(a) {
                p_pairs.push((a.clone(), b.clone()));
            }
            if a.is_zero() && b.is_zero() {
                continue;
            }
            terms.push(Term {
                a: a.clone(),
                image: Some(b.clone()),
            });
        }
        p_pairs.sort();
        if p_pairs.windows(2).any(|w| w[0].1 >= w[1].1) {
            let (a, b) = p_pairs[0].clone();
            return Err(Witness::NotCorrespondence { a, b });
        }
        for v in &p {
            if !seen.contains(v) {
                terms.push(Term {
                    a: v.clone(),
                    image: None,
                });
            }
        }
        Ok(TermPool { terms, p, p_pairs })
    }

    /// Images of the chosen terms under every extension of the fixed pairs
    /// that is strictly increasing on the sparse set, up to `cap` of them.
    pub fn images(&self, chosen: &[usize], cap: usize) -> Vec<Vec<BigRational>> {
        let mut free: Vec<usize> = chosen
            .iter()
            .copied()
            .filter(|&i| self.terms[i].image.is_none())
            .collect();
        free.sort_by(|&x, &y| self.terms[x].a.cmp(&self.terms[y].a));
        let mut out = Vec::new();
        let mut assign: Vec<BigRational> = Vec::new();
        self.extend(&free, 0, &mut assign, &mut out, cap);
        out.into_iter()
            .map(|imgs| {
                chosen
                    .iter()
                    .map(|&i| match &self.terms[i].image {
                        Some(b) => b.clone(),
                        None => imgs[free.iter().position(|&f| f == i).unwrap()].clone(),
                    })
                    .collect()
            })
            .collect()
    }

    fn extend(
        &self,
        free: &[usize],
        at: usize,
        assign: &mut Vec<BigRational>,
        out: &mut Vec<Vec<BigRational>>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        if at == free.len() {
            out.push(assign.clone());
            return;
        }
        let a = &self.terms[free[at]].a;
        // Images of the fixed sparse pairs just below and above `a`.
        let lo = self.p_pairs.iter().filter(|(x, _)| x < a).map(|(_, y)| y).max();
        let hi = self.p_pairs.iter().filter(|(x, _)| x > a).map(|(_, y)| y).min();
        let prev = assign.last().cloned();
        for v in &self.p {
            if lo.is_some_and(|lo| v <= lo) || prev.as_ref().is_some_and(|pv| v <= pv) {
                continue;
            }
            if hi.is_some_and(|hi| v >= hi) {
                break;
            }
            if self.p_pairs.iter().any(|(_, y)| y == v) {
                continue;
            }
            assign.push(v.clone());
            self.extend(free, at + 1, assign, out, cap);
            assign.pop();
            if out.len() >= cap {
                return;
            }
        }
    }
}

/// Does every gap choice within `g` give the same comparison?
pub fn comparison_agrees(delta_a: &BigRational, delta_b: &BigRational, two_g: &BigRational) -> bool {
    delta_a == delta_b
        || (delta_a > two_g && delta_b > two_g)
        || (delta_a <= &-two_g && delta_b <= &-two_g)
}

struct Coefficients {
    diffs: Vec<BigRational>,
    single: BTreeSet<BigRational>,
    /// lcm of the denominators in `diffs`.
    lcm: BigInt,
}

impl Coefficients {
    /// Shared per bound: at `c = 32` the difference set has about 1.5
    /// million entries and takes seconds to build.
    fn new(c: &BigInt) -> Result<Arc<Self>, PresburgerError> {
        static CACHE: OnceLock<Mutex<HashMap<BigInt, Arc<Coefficients>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(hit) = cache.lock().expect("coefficient cache").get(c) {
            return Ok(hit.clone());
        }
        let diffs = difference_set(c)?;
        let lcm = diffs.iter().fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
        let built = Arc::new(Coefficients {
            diffs,
            single: coefficient_set(c)?.into_iter().collect(),
            lcm,
        });
        cache.lock().expect("coefficient cache").insert(c.clone(), built.clone());
        Ok(built)
    }

    /// A difference vector is realisable when the terms that need both
    /// sides fit alongside those that need one.
    fn realisable(&self, es: &[&BigRational], l: usize) -> bool {
        let both = es.iter().filter(|e| !self.single.contains(**e)).count();
        let one = es.len() - both;
        one + 2 * both <= 2 * l
    }

    fn split(&self, es: &[BigRational], l: usize, gap: &BigRational) -> (LinCombination, LinCombination) {
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        let mut singles = Vec::new();
        for (i, e) in es.iter().enumerate() {
            if self.single.contains(e) {
                singles.push(i);
            } else {
                let d = self
                    .single
                    .iter()
                    .find(|d| !d.is_zero() && self.single.contains(&(*d + e)) && !(*d + e).is_zero())
                    .expect("difference of two coefficients")
                    .clone();
                s1.push((d.clone(), i));
                s2.push((d + e, i));
            }
        }
        for i in singles {
            if s2.len() < l {
                s2.push((es[i].clone(), i));
            } else {
                s1.push((-es[i].clone(), i));
            }
        }
        s1.sort_by_key(|t| t.1);
        s2.sort_by_key(|t| t.1);
        let half = gap / BigRational::from_integer(2.into());
        (
            LinCombination {
                terms: s1,
                gap: half.clone(),
            },
            LinCombination { terms: s2, gap: -half },
        )
    }
}

/// Checks the congruence and comparison conditions for the sparse prefix
/// `p` and the fixed pairs (anchors, picks, already matched sparse
/// elements). Fixed pairs `(0, 0)` are dropped as terms.
pub fn check_conditions(
    p: &[BigInt],
    fixed: &[(BigRational, BigRational)],
    bounds: &Bounds,
    mode: CheckMode,
) -> Result<CheckReport, PresburgerError> {
    let fail = |w: Witness, checked: u64| CheckReport {
        holds: false,
        exhaustive: matches!(mode, CheckMode::Exhaustive { .. }),
        checked,
        witness: Some(w),
    };
    if let Some(first) = p.first() {
        for v in p {
            if !(v - first).is_multiple_of_big(&bounds.m) {
                return Ok(fail(
                    Witness::Congruence {
                        a: BigRational::from_integer(first.clone()),
                        b: BigRational::from_integer(v.clone()),
                    },
                    0,
                ));
            }
        }
    }
    for (a, b) in fixed {
        if !congruent(a, b, &bounds.m) {
            return Ok(fail(Witness::Congruence { a: a.clone(), b: b.clone() }, 0));
        }
    }
    let pool = match TermPool::new(p, fixed) {
        Ok(pool) => pool,
        Err(w) => return Ok(fail(w, 0)),
    };
    let coeffs = Coefficients::new(&bounds.c)?;
    let n = pool.terms.len();
    let max_terms = 2 * bounds.l;
    let mut checked = 0u64;
    // Everything is scaled to integers up front: rational arithmetic would
    // normalise through a gcd on every step, which is hopeless once the
    // sparse elements have millions of bits.
    let scale = Scale::new(fixed, &coeffs.lcm, &bounds.g);
    let scaled: HashMap<&BigRational, BigInt> = fixed
        .iter()
        .flat_map(|(a, b)| [a, b])
        .chain(pool.p.iter())
        .map(|v| (v, scale.value(v)))
        .collect();
    let verdict = |chosen: &[usize], img: &[BigRational], es: &[BigRational], checked: u64| -> Option<CheckReport> {
        let mut da = BigInt::zero();
        let mut db = BigInt::zero();
        for ((&i, b), e) in chosen.iter().zip(img).zip(es) {
            let e = scale.coefficient(e);
            da += &e * &scaled[&pool.terms[i].a];
            db += e * &scaled[b];
        }
        if scale.agrees(&da, &db) {
            return None;
        }
        let (da, db) = (scale.unscale(&da), scale.unscale(&db));
        let two_g = BigRational::from_integer(2.into()) * &bounds.g;
        let lo = (&da).min(&db).clone().max(-two_g);
        let (s1, s2) = coeffs.split(es, bounds.l, &lo);
        Some(fail(
            Witness::Order {
                s1,
                s2,
                terms_a: chosen.iter().map(|&i| pool.terms[i].a.clone()).collect(),
                terms_b: img.to_vec(),
                delta_a: da,
                delta_b: db,
            },
            checked,
        ))
    };
    match mode {
        CheckMode::Exhaustive { budget } => {
            let nd = coeffs.diffs.len();
            for chosen in subsets(n, max_terms) {
                let images = pool.images(&chosen, usize::MAX);
                let mut idx = vec![0usize; chosen.len()];
                loop {
                    let es: Vec<&BigRational> = idx.iter().map(|&i| &coeffs.diffs[i]).collect();
                    if coeffs.realisable(&es, bounds.l) {
                        let es: Vec<BigRational> = es.into_iter().cloned().collect();
                        for img in &images {
                            checked += 1;
                            if checked > budget {
                                return Err(PresburgerError::Budget(budget));
                            }
                            if let Some(r) = verdict(&chosen, img, &es, checked) {
                                return Ok(r);
                            }
                        }
                    }
                    if !advance(&mut idx, nd) {
                        break;
                    }
                }
            }
            Ok(CheckReport {
                holds: true,
                exhaustive: true,
                checked,
                witness: None,
            })
        }
        CheckMode::Sampled { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let all: Vec<usize> = (0..n).collect();
            if n == 0 {
                return Ok(CheckReport {
                    holds: true,
                    exhaustive: false,
                    checked: 0,
                    witness: None,
                });
            }
            while checked < pairs {
                let size = rng.gen_range(1..=max_terms.min(n));
                let mut chosen: Vec<usize> = all.choose_multiple(&mut rng, size).copied().collect();
                chosen.sort();
                let images = pool.images(&chosen, 4096);
                let Some(img) = images.choose(&mut rng) else {
                    continue;
                };
                let es: Vec<BigRational> = loop {
                    let es: Vec<BigRational> = (0..size)
                        .map(|_| coeffs.diffs.choose(&mut rng).unwrap().clone())
                        .collect();
                    if coeffs.realisable(&es.iter().collect::<Vec<_>>(), bounds.l) {
                        break es;
                    }
                };
                checked += 1;
                if let Some(r) = verdict(&chosen, img, &es, checked) {
                    return Ok(r);
                }
            }
            Ok(CheckReport {
                holds: true,
                exhaustive: false,
                checked,
                witness: None,
            })
        }
    }
}

fn congruent(a: &BigRational, b: &BigRational, m: &BigInt) -> bool {
    if a.is_integer() && b.is_integer() {
        ((a.numer() - b.numer()) % m).is_zero()
    } else {
        divisible(&(a - b), m)
    }
}

/// Integer stand-ins for the values of one check: a value `v` becomes
/// `v * den`, a coefficient `e` becomes `e * lcm`, and the gap bound is
/// carried along so that comparisons stay exact.
struct Scale {
    den: BigInt,
    lcm: BigInt,
    g_den: BigInt,
    /// `2g` on the scaled axis.
    threshold: BigInt,
}

impl Scale {
    fn new(fixed: &[(BigRational, BigRational)], lcm: &BigInt, g: &BigRational) -> Scale {
        let den = fixed
            .iter()
            .flat_map(|(a, b)| [a.denom(), b.denom()])
            .fold(BigInt::one(), |acc, d| acc.lcm(d));
        let lcm = lcm.clone();
        let g_den = g.denom().clone();
        let threshold = BigInt::from(2) * g.numer() * &lcm * &den;
        Scale {
            den,
            lcm,
            g_den,
            threshold,
        }
    }

    fn value(&self, v: &BigRational) -> BigInt {
        v.numer() * (&self.den / v.denom())
    }

    fn coefficient(&self, e: &BigRational) -> BigInt {
        e.numer() * (&self.lcm / e.denom())
    }

    /// The comparison test on `sum e z` scaled by `lcm * den`; the gap
    /// denominator is applied here.
    fn agrees(&self, da: &BigInt, db: &BigInt) -> bool {
        if da == db {
            return true;
        }
        let (da, db) = (da * &self.g_den, db * &self.g_den);
        let t = &self.threshold;
        (&da > t && &db > t) || (da <= -t && db <= -t)
    }

    fn unscale(&self, d: &BigInt) -> BigRational {
        let s = &self.lcm * &self.den;
        if d.bits() < 4096 {
            BigRational::new(d.clone(), s)
        } else {
            BigRational::new_raw(d.clone(), s)
        }
    }
}

trait MultipleOf {
    fn is_multiple_of_big(&self, m: &BigInt) -> bool;
}

impl MultipleOf for BigInt {
    fn is_multiple_of_big(&self, m: &BigInt) -> bool {
        (self % m).is_zero()
    }
}

fn anchor_pairs(anchors: &[BigInt]) -> Vec<(BigRational, BigRational)> {
    anchors
        .iter()
        .map(|a| {
            let a = BigRational::from_integer(a.clone());
            (a.clone(), a)
        })
        .collect()
}

/// The conditions for a plain context: anchors `a_i` on one side, `b_i` on
/// the other, no sparse set.
pub fn check_conditions_plain(
    a: &[BigInt],
    b: &[BigInt],
    bounds: &Bounds,
    mode: CheckMode,
) -> Result<CheckReport, PresburgerError> {
    if a.len() != b.len() {
        return Err(PresburgerError::Precondition("anchor tuples differ in length".into()));
    }
    let fixed: Vec<(BigRational, BigRational)> = a
        .iter()
        .zip(b)
        .map(|(x, y)| (BigRational::from_integer(x.clone()), BigRational::from_integer(y.clone())))
        .collect();
    check_conditions(&[], &fixed, bounds, mode)
}

/// The conditions for a sparse prefix over shared anchors.
pub fn check_conditions_sparse(
    p: &[BigInt],
    anchors: &[BigInt],
    bounds: &Bounds,
    mode: CheckMode,
) -> Result<CheckReport, PresburgerError> {
    check_conditions(p, &anchor_pairs(anchors), bounds, mode)
}

/// The level-`k` instance of [`check_conditions_sparse`].
pub fn check_level(p: &[BigInt], anchors: &[BigInt], k: usize, mode: CheckMode) -> Result<CheckReport, PresburgerError> {
    check_conditions_sparse(p, anchors, &Bounds::level(k)?, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn b1() -> Bounds {
        Bounds {
            m: 2.into(),
            l: 2,
            c: 2.into(),
            g: q(1, 2),
        }
    }

    #[test]
    fn threshold() {
        let two_g = q(1, 1);
        assert!(comparison_agrees(&q(3, 1), &q(3, 1), &two_g));
        assert!(comparison_agrees(&q(2, 1), &q(7, 1), &two_g));
        assert!(comparison_agrees(&q(-1, 1), &q(-9, 1), &two_g));
        assert!(!comparison_agrees(&q(1, 1), &q(2, 1), &two_g));
        assert!(!comparison_agrees(&q(-1, 2), &q(-3, 1), &two_g));
    }

    #[test]
    fn small_sparse_set_fails_with_witness() {
        let r = check_conditions_sparse(&[2.into(), 4.into()], &[], &b1(), CheckMode::default()).unwrap();
        assert!(!r.holds);
        match r.witness.unwrap() {
            Witness::Order {
                s1,
                s2,
                terms_a,
                terms_b,
                delta_a,
                delta_b,
            } => {
                let v = |s: &LinCombination, t: &[BigRational]| {
                    s.terms.iter().map(|(d, i)| d * &t[*i]).sum::<BigRational>() + &s.gap
                };
                assert_eq!(delta_a, v(&s2, &terms_a) - v(&s1, &terms_a) - &s2.gap + &s1.gap);
                assert_eq!(delta_b, v(&s2, &terms_b) - v(&s1, &terms_b) - &s2.gap + &s1.gap);
                assert_ne!(v(&s1, &terms_a) < v(&s2, &terms_a), v(&s1, &terms_b) < v(&s2, &terms_b));
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn sparse_sequence_passes() {
        let p = super::super::generate_p_sparse(&0.into(), 3, &2.into(), 2, &2.into(), &q(1, 2)).unwrap();
        let r = check_conditions_sparse(&p, &[0.into()], &b1(), CheckMode::default()).unwrap();
        assert!(r.holds, "{:?}", r.witness);
        assert!(r.checked > 0);
    }

    #[test]
    fn congruence_failure() {
        let r = check_conditions_plain(&[0.into(), 10.into()], &[0.into(), 11.into()], &b1(), CheckMode::default()).unwrap();
        assert!(matches!(r.witness, Some(Witness::Congruence { .. })));
    }

    #[test]
    fn membership_mismatch_is_not_a_correspondence() {
        let fixed = vec![(q(4, 1), q(6, 1))];
        let r = check_conditions(&[4.into(), 196.into()], &fixed, &b1(), CheckMode::default()).unwrap();
        assert!(matches!(r.witness, Some(Witness::NotCorrespondence { .. })));
    }

    #[test]
    fn images_respect_fixed_pairs() {
        let p: Vec<BigInt> = [1, 2, 3, 4, 5].iter().map(|&v| BigInt::from(v)).collect();
        let fixed = vec![(q(3, 1), q(2, 1))];
        let pool = TermPool::new(&p, &fixed).unwrap();
        // Terms: fixed 3 first, then free 1, 2, 4, 5.
        let imgs = pool.images(&[1, 2], usize::MAX);
        assert!(imgs.is_empty(), "two points below 3 cannot fit below 2");
        let imgs = pool.images(&[1, 3], usize::MAX);
        // 1 -> {1}, 4 -> {3, 4, 5}
        assert_eq!(imgs.len(), 3);
        assert!(imgs.iter().all(|v| v[0] == q(1, 1) && v[1] > q(2, 1)));
    }
}
