//! Rational linear combinations with bounded coefficients, and the searches
//! the strategies run over them.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::PresburgerError;

/// Largest coefficient bound we are willing to enumerate.
pub const MAX_COEFFICIENT_BOUND: u64 = 4096;

/// `Q[c]`: every `u/v` with `|u|, |v| <= c`, `v > 0`, sorted, zero included.
pub fn coefficient_set(c: &BigInt) -> Result<Vec<BigRational>, PresburgerError> {
    let cu = c
        .to_u64()
        .filter(|&v| v <= MAX_COEFFICIENT_BOUND)
        .ok_or_else(|| PresburgerError::Unsupported(format!("coefficient bound {c} is too large to enumerate")))?;
    let mut set = BTreeSet::new();
    set.insert(BigRational::zero());
    for v in 1..=cu {
        for u in 1..=cu {
            if u.gcd(&v) == 1 {
                let q = BigRational::new(BigInt::from(u), BigInt::from(v));
                set.insert(-q.clone());
                set.insert(q);
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Nonzero differences `d' - d` of two coefficients, sorted.
pub fn difference_set(c: &BigInt) -> Result<Vec<BigRational>, PresburgerError> {
    let q = coefficient_set(c)?;
    let mut set = BTreeSet::new();
    for a in &q {
        for b in &q {
            let d = a - b;
            if !d.is_zero() {
                set.insert(d);
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// `sum d_j * term_j + gap`. Term indices point into whatever term list the
/// caller keeps; they are distinct and ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinCombination {
    pub terms: Vec<(BigRational, usize)>,
    pub gap: BigRational,
}

/// Prints as `2*t0 + -1/2*t3 + 1/2`, with `t_j` the j-th term.
impl std::fmt::Display for LinCombination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (d, j) in &self.terms {
            write!(f, "{d}*t{j} + ")?;
        }
        write!(f, "{}", self.gap)
    }
}

impl LinCombination {
    pub fn gapless(terms: Vec<(BigRational, usize)>) -> Self {
        LinCombination {
            terms,
            gap: BigRational::zero(),
        }
    }

    /// Does it fit an `(l, c, g)` bound?
    pub fn fits(&self, l: usize, c: &BigInt, g: &BigRational) -> bool {
        let cr = BigRational::from_integer(c.clone());
        self.terms.len() <= l
            && self.gap.abs() <= *g
            && self.terms.iter().all(|(d, _)| {
                !d.is_zero() && d.numer().abs() <= *c && d.denom() <= c && d.abs() <= cr
            })
            && self.terms.windows(2).all(|w| w[0].1 < w[1].1)
    }
}

/// Every gapless combination of at most `l` of the `n` terms with
/// coefficients in `Q[c]`, in canonical form: zero coefficients dropped,
/// term indices ascending. The empty sum comes first.
pub fn enumerate_combinations(
    n: usize,
    l: usize,
    c: &BigInt,
    budget: u64,
) -> Result<Vec<LinCombination>, PresburgerError> {
    let coeffs: Vec<BigRational> = coefficient_set(c)?.into_iter().filter(|d| !d.is_zero()).collect();
    let mut out = vec![LinCombination::gapless(vec![])];
    for subset in subsets(n, l) {
        let mut idx = vec![0usize; subset.len()];
        loop {
            if out.len() as u64 >= budget {
                return Err(PresburgerError::Budget(budget));
            }
            out.push(LinCombination::gapless(
                idx.iter().zip(&subset).map(|(&i, &t)| (coeffs[i].clone(), t)).collect(),
            ));
            if !advance(&mut idx, coeffs.len()) {
                break;
            }
        }
    }
    Ok(out)
}

/// `sum d_j * v(term_j) + gap`.
pub fn evaluate_combination(
    s: &LinCombination,
    valuation: impl Fn(usize) -> Option<BigRational>,
) -> Result<BigRational, PresburgerError> {
    let mut acc = s.gap.clone();
    for (d, t) in &s.terms {
        acc += d * valuation(*t).ok_or(PresburgerError::MissingValuation(*t))?;
    }
    Ok(acc)
}

/// Nonempty subsets of `0..n` with at most `l` elements, smaller sizes
/// first, lexicographic within a size.
pub(crate) fn subsets(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=l.min(n) {
        let mut cur: Vec<usize> = (0..size).collect();
        loop {
            out.push(cur.clone());
            let mut i = size;
            let mut moved = false;
            while i > 0 {
                i -= 1;
                if cur[i] < n - size + i {
                    cur[i] += 1;
                    for j in i + 1..size {
                        cur[j] = cur[j - 1] + 1;
                    }
                    moved = true;
                    break;
                }
            }
            if !moved {
                break;
            }
        }
    }
    out
}

/// Odometer over `base^len` with the last digit fastest.
pub(crate) fn advance(idx: &mut [usize], base: usize) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < base {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// A combination found by [`bracket_search`], with its value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Found {
    pub value: BigRational,
    pub combination: LinCombination,
}

/// The largest gapless combination value `<= x` and the smallest `>= x`.
#[derive(Clone, Debug, Default)]
pub struct Bracket {
    pub below: Option<Found>,
    pub above: Option<Found>,
}

/// Searches combinations of at most `l` of `values` with nonzero
/// coefficients from `coeffs` (sorted). All but the last term are brute
/// forced; the last coefficient is found by binary search. Zero-valued terms
/// are skipped since they never move the value. Among equal values the first
/// one in enumeration order wins.
pub fn bracket_search(
    values: &[BigRational],
    l: usize,
    coeffs: &[BigRational],
    x: &BigRational,
    budget: u64,
) -> Result<Bracket, PresburgerError> {
    let live: Vec<usize> = (0..values.len()).filter(|&i| !values[i].is_zero()).collect();
    let mut br = Bracket::default();
    let zero = BigRational::zero();
    offer(&mut br, &zero, &[], x);
    let mut work = 0u64;
    for subset in subsets(live.len(), l) {
        let terms: Vec<usize> = subset.iter().map(|&i| live[i]).collect();
        let (head, last) = terms.split_at(terms.len() - 1);
        let last = last[0];
        let t = &values[last];
        let mut idx = vec![0usize; head.len()];
        loop {
            work += 1;
            if work > budget {
                return Err(PresburgerError::Budget(budget));
            }
            let mut partial = BigRational::zero();
            for (&i, &term) in idx.iter().zip(head) {
                partial += &coeffs[i] * &values[term];
            }
            let q = (x - &partial) / t;
            // Coefficient indices bracketing q.
            let pos = coeffs.partition_point(|d| d < &q);
            let le = if pos < coeffs.len() && coeffs[pos] == q { Some(pos) } else { pos.checked_sub(1) };
            let ge = (pos < coeffs.len()).then_some(pos);
            for j in [le, ge].into_iter().flatten() {
                let mut combo: Vec<(BigRational, usize)> =
                    idx.iter().zip(head).map(|(&i, &term)| (coeffs[i].clone(), term)).collect();
                combo.push((coeffs[j].clone(), last));
                let v = &partial + &coeffs[j] * t;
                offer(&mut br, &v, &combo, x);
            }
            if !advance(&mut idx, coeffs.len()) {
                break;
            }
        }
    }
    Ok(br)
}

fn offer(br: &mut Bracket, v: &BigRational, combo: &[(BigRational, usize)], x: &BigRational) {
    let found = || Found {
        value: v.clone(),
        combination: LinCombination::gapless(combo.to_vec()),
    };
    if v <= x && br.below.as_ref().map_or(true, |b| v > &b.value) {
        br.below = Some(found());
    }
    if v >= x && br.above.as_ref().map_or(true, |b| v < &b.value) {
        br.above = Some(found());
    }
}

/// Every distinct gapless combination value, sorted.
pub fn combination_values(
    values: &[BigRational],
    l: usize,
    coeffs: &[BigRational],
    budget: u64,
) -> Result<Vec<BigRational>, PresburgerError> {
    let live: Vec<usize> = (0..values.len()).filter(|&i| !values[i].is_zero()).collect();
    let mut set = BTreeSet::new();
    set.insert(BigRational::zero());
    for subset in subsets(live.len(), l) {
        let mut idx = vec![0usize; subset.len()];
        loop {
            if set.len() as u64 > budget {
                return Err(PresburgerError::Budget(budget));
            }
            let mut v = BigRational::zero();
            for (&i, &s) in idx.iter().zip(&subset) {
                v += &coeffs[i] * &values[live[s]];
            }
            set.insert(v);
            if !advance(&mut idx, coeffs.len()) {
                break;
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// `ceil(q)` and `floor(q)` as integers.
pub(crate) fn ceil_int(q: &BigRational) -> BigInt {
    q.ceil().to_integer()
}

pub(crate) fn floor_int(q: &BigRational) -> BigInt {
    q.floor().to_integer()
}

/// Smallest integer strictly above `lo` congruent to `r` mod `m`.
pub(crate) fn next_congruent_above(lo: &BigRational, r: &BigInt, m: &BigInt) -> BigInt {
    let mut y = floor_int(lo) + BigInt::one();
    y += (r - &y).mod_floor(m);
    y
}

/// Largest integer strictly below `hi` congruent to `r` mod `m`.
pub(crate) fn next_congruent_below(hi: &BigRational, r: &BigInt, m: &BigInt) -> BigInt {
    let mut y = ceil_int(hi) - BigInt::one();
    y -= (&y - r).mod_floor(m);
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn coefficient_sets() {
        let q1 = coefficient_set(&1.into()).unwrap();
        assert_eq!(q1, vec![q(-1, 1), q(0, 1), q(1, 1)]);
        let q2 = coefficient_set(&2.into()).unwrap();
        assert_eq!(q2.len(), 7);
        let d2 = difference_set(&2.into()).unwrap();
        assert_eq!(d2.len(), 14);
        assert!(d2.contains(&q(5, 2)) && d2.contains(&q(-4, 1)) && !d2.contains(&q(7, 2)));
        // 1 + 2 * sum of phi over pairs: 1 + 2 * (2 * sum_{v<=32} phi(v) - 1)
        let phi_sum: u64 = (1..=32u64).map(|v| (1..=v).filter(|u| u.gcd(&v) == 1).count() as u64).sum();
        assert_eq!(coefficient_set(&32.into()).unwrap().len() as u64, 1 + 2 * (2 * phi_sum - 1));
        assert!(coefficient_set(&BigInt::from(1u64 << 40)).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let one = enumerate_combinations(1, 1, &1.into(), 1000).unwrap();
        assert_eq!(one.len(), 3);
        assert!(one[0].terms.is_empty());
        // Ordered pairs of coefficients over two terms: 7 * 7 canonical forms.
        let two = enumerate_combinations(2, 2, &2.into(), 1000).unwrap();
        assert_eq!(two.len(), 49);
        assert!(matches!(enumerate_combinations(3, 3, &2.into(), 50), Err(PresburgerError::Budget(50))));
    }

    #[test]
    fn evaluation() {
        let s = LinCombination {
            terms: vec![(q(1, 2), 0)],
            gap: q(1, 2),
        };
        assert_eq!(evaluate_combination(&s, |_| Some(q(10, 1))).unwrap(), q(11, 2));
        let s = LinCombination::gapless(vec![(q(2, 1), 0), (q(-1, 2), 1)]);
        let vals = [q(3, 1), q(4, 1)];
        assert_eq!(evaluate_combination(&s, |i| vals.get(i).cloned()).unwrap(), q(4, 1));
        assert_eq!(evaluate_combination(&s, |i| (i == 0).then(|| q(1, 1))), Err(PresburgerError::MissingValuation(1)));
        assert!(s.fits(2, &2.into(), &q(0, 1)));
        assert!(!s.fits(1, &2.into(), &q(0, 1)));
    }

    #[test]
    fn bracket_matches_full_enumeration() {
        let values = vec![q(8, 1), q(0, 1), q(-3, 1), q(51, 1)];
        let coeffs: Vec<BigRational> = coefficient_set(&2.into()).unwrap().into_iter().filter(|d| !d.is_zero()).collect();
        let all = combination_values(&values, 2, &coeffs, 1 << 20).unwrap();
        for x in -120..=120 {
            let x = q(x, 2);
            let br = bracket_search(&values, 2, &coeffs, &x, 1 << 20).unwrap();
            let below = all.iter().filter(|v| *v <= &x).max().cloned();
            let above = all.iter().filter(|v| *v >= &x).min().cloned();
            assert_eq!(br.below.as_ref().map(|f| f.value.clone()), below);
            assert_eq!(br.above.as_ref().map(|f| f.value.clone()), above);
            for f in br.below.iter().chain(br.above.iter()) {
                assert_eq!(evaluate_combination(&f.combination, |i| values.get(i).cloned()).unwrap(), f.value);
            }
        }
    }

    #[test]
    fn congruent_neighbours() {
        let m = BigInt::from(4);
        assert_eq!(next_congruent_above(&q(5, 2), &1.into(), &m), 5.into());
        assert_eq!(next_congruent_above(&q(5, 1), &1.into(), &m), 9.into());
        assert_eq!(next_congruent_below(&q(9, 1), &1.into(), &m), 5.into());
        assert_eq!(next_congruent_below(&q(19, 2), &1.into(), &m), 9.into());
    }
}
