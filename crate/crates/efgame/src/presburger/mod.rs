//! Embedding-based winning strategies for games on the integers with
//! addition: the parameter tower `m, l, c, g`, the anchor sequences built
//! from it, the combination machinery, the conditions the strategies keep
//! invariant, the strategies themselves and spectrum periodicity.

mod combination;
mod conditions;
mod spectrum;
mod strategy;

pub use combination::*;
pub use conditions::*;
pub use spectrum::*;
pub use strategy::*;

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::game::GameError;
use crate::logic::LogicError;
use crate::structure::StructureError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresburgerError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("budget of {0} exceeded")]
    Budget(u64),
    #[error("no valuation for term {0}")]
    MissingValuation(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no legal answer: {0}")]
    NoAnswer(String),
    #[error("N_max = {nmax} is too small to observe a period (need more than {needed})")]
    InsufficientNmax { nmax: usize, needed: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// A positive modulus. Beyond `m(3)` the exact value is out of reach, so it
/// is kept as `base * lcm(1..=upto)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Modulus {
    Exact(BigInt),
    Lcm { base: BigInt, upto: BigInt },
}

impl Modulus {
    pub fn exact(&self) -> Option<&BigInt> {
        match self {
            Modulus::Exact(m) => Some(m),
            Modulus::Lcm { .. } => None,
        }
    }

    pub fn require_exact(&self) -> Result<&BigInt, PresburgerError> {
        self.exact()
            .ok_or_else(|| PresburgerError::Unsupported(format!("modulus {self} is only known symbolically")))
    }

    /// Whether `d` divides the modulus. `None` when the symbolic form leaves
    /// a cofactor too large to factor.
    pub fn is_multiple_of(&self, d: &BigInt) -> Option<bool> {
        let d = d.abs();
        if d.is_zero() {
            return Some(false);
        }
        match self {
            Modulus::Exact(m) => Some((m % &d).is_zero()),
            Modulus::Lcm { base, upto } => {
                // Reduce the huge base first; a gcd on it directly is slow.
                let rest = &d / d.gcd(&(base % &d));
                if &rest <= upto {
                    return Some(true);
                }
                let mut n = rest.to_u64()?;
                let mut p = 2u64;
                while p * p <= n {
                    if n % p == 0 {
                        let mut pk = 1u64;
                        while n % p == 0 {
                            n /= p;
                            pk *= p;
                        }
                        if &BigInt::from(pk) > upto {
                            return Some(false);
                        }
                    }
                    p += 1;
                }
                Some(&BigInt::from(n) <= upto)
            }
        }
    }
}

fn short(n: &BigInt) -> String {
    let bits = n.bits();
    if bits <= 256 {
        n.to_string()
    } else {
        format!("<{bits}-bit integer>")
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Exact(m) => write!(f, "{}", short(m)),
            Modulus::Lcm { base, upto } => write!(f, "{} * lcm(1..={})", short(base), upto),
        }
    }
}

/// One level of the parameter tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameParameters {
    pub k: usize,
    pub m: Modulus,
    pub l: usize,
    pub c: BigInt,
    pub g: BigRational,
}

impl GameParameters {
    /// `2 g(k)`, which is always an integer.
    pub fn two_g(&self) -> Result<BigInt, PresburgerError> {
        // Integer arithmetic only: a rational product would run a gcd on
        // the numerator.
        if self.g.denom().is_one() {
            Ok(self.g.numer() * 2)
        } else if self.g.denom() == &BigInt::from(2) {
            Ok(self.g.numer().clone())
        } else {
            Err(PresburgerError::Precondition(format!("2 g({}) is not an integer", self.k)))
        }
    }

    /// `2 g(k) c(k)^2`.
    pub fn threshold(&self) -> Result<BigInt, PresburgerError> {
        Ok(self.two_g()? * self.c.pow(2u32))
    }
}

/// Largest supported level; `m(5)` would need `lcm(1..=2^341)` even
/// symbolically nested, which we do not attempt.
pub const MAX_K: usize = 4;

/// `lcm(1, 2, ..., n)` as a product of maximal prime powers, multiplied as a
/// balanced tree so that the large case stays quick.
pub fn lcm_upto(n: u64) -> BigInt {
    if n < 2 {
        return BigInt::one();
    }
    let n_us = n as usize;
    let mut sieve = vec![true; n_us + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n_us {
        if sieve[i] {
            let mut j = i * i;
            while j <= n_us {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    let mut factors: Vec<BigInt> = Vec::new();
    for (p, &is_p) in sieve.iter().enumerate() {
        if is_p {
            let p = p as u64;
            let mut pk = p;
            while pk <= n / p {
                pk *= p;
            }
            factors.push(BigInt::from(pk));
        }
    }
    product_tree(factors)
}

fn product_tree(mut xs: Vec<BigInt>) -> BigInt {
    if xs.is_empty() {
        return BigInt::one();
    }
    while xs.len() > 1 {
        let mut next = Vec::with_capacity(xs.len().div_ceil(2));
        let mut it = xs.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a * b),
                None => next.push(a),
            }
        }
        xs = next;
    }
    xs.pop().unwrap()
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn build(k: usize) -> Result<GameParameters, PresburgerError> {
    if k == 1 {
        return Ok(GameParameters {
            k,
            m: Modulus::Exact(BigInt::from(2)),
            l: 2,
            c: BigInt::from(2),
            g: BigRational::new(BigInt::one(), BigInt::from(2)),
        });
    }
    let prev = params(k - 1)?;
    let c4 = prev.c.pow(4u32);
    let bound: BigInt = 2 * &c4;
    let m = match &prev.m {
        Modulus::Exact(pm) => match bound.to_u64() {
            Some(b) if b <= 1 << 26 => Modulus::Exact(pm * lcm_upto(b)),
            _ => Modulus::Lcm {
                base: pm.clone(),
                upto: bound.clone(),
            },
        },
        Modulus::Lcm { .. } => {
            return Err(PresburgerError::Unsupported(format!("parameters beyond k = {MAX_K}")))
        }
    };
    // Every modulus is even and 2g is an integer, so g(k) is an integer
    // from level 2 on. Staying in integers avoids normalising huge
    // fractions.
    let half_m = match &prev.m {
        Modulus::Exact(pm) => pm / BigInt::from(2),
        Modulus::Lcm { .. } => unreachable!("checked above"),
    };
    let g = prev.two_g()? * prev.c.pow(2u32) + half_m;
    Ok(GameParameters {
        k,
        m,
        l: 2 * prev.l - 1,
        c: bound,
        g: BigRational::from_integer(g),
    })
}

/// The parameters `(m(k), l(k), c(k), g(k))` for `1 <= k <= 4`. Values are
/// computed once per process; level 3 holds a multi-million-bit modulus.
pub fn params(k: usize) -> Result<&'static GameParameters, PresburgerError> {
    static CACHE: [OnceLock<Result<GameParameters, PresburgerError>>; MAX_K] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    if k == 0 {
        return Err(PresburgerError::ZeroK);
    }
    if k > MAX_K {
        return Err(PresburgerError::Unsupported(format!("parameters beyond k = {MAX_K}")));
    }
    CACHE[k - 1].get_or_init(|| build(k)).as_ref().map_err(Clone::clone)
}

/// `m(k)` with `m(0) = 1`.
pub fn modulus(k: usize) -> Result<Modulus, PresburgerError> {
    if k == 0 {
        Ok(Modulus::Exact(BigInt::one()))
    } else {
        Ok(params(k)?.m.clone())
    }
}

/// Exact `m(k)`, failing for the symbolic level.
pub fn modulus_exact(k: usize) -> Result<BigInt, PresburgerError> {
    Ok(modulus(k)?.require_exact()?.clone())
}

/// `l(k) = 2^(k-1) + 1`, without touching the moduli.
pub fn l_of(k: usize) -> usize {
    if k == 0 {
        1
    } else {
        (1usize << (k - 1)) + 1
    }
}

/// `c(k)` without touching the moduli.
pub fn c_of(k: usize) -> BigInt {
    let mut c = BigInt::from(2);
    for _ in 1..k {
        c = 2 * c.pow(4u32);
    }
    c
}

/// Rounds of the `<`-game that back a `k`-round game with addition:
/// `r(0) = 1`, `r(k) = r(k-1) + 2 l(k)`.
pub fn rounds_needed(k: usize) -> usize {
    (1..=k).fold(1, |r, i| r + 2 * l_of(i))
}

/// An element of the anchor sequence: exact, or `modulus * factor` with the
/// modulus only known symbolically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QValue {
    Exact(BigInt),
    Symbolic { modulus: Modulus, factor: BigRational },
}

impl QValue {
    pub fn exact(&self) -> Option<&BigInt> {
        match self {
            QValue::Exact(v) => Some(v),
            QValue::Symbolic { .. } => None,
        }
    }
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QValue::Exact(v) => write!(f, "{v}"),
            QValue::Symbolic { modulus, factor } => {
                write!(f, "({modulus}) * <{}-bit factor>", factor.numer().bits())
            }
        }
    }
}

/// `q_0 = 0`, `q_i = m(i) ((2l(i)-1) 2c(i)^3 q_{i-1} + 2g(i)c(i)^2)`.
/// Integrality rests on `2g(i)` being an integer, which is checked; `q_4`
/// stays symbolic.
pub fn generate_q(count: usize) -> Result<Vec<QValue>, PresburgerError> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(QValue::Exact(BigInt::zero()));
    let mut prev = BigInt::zero();
    for i in 1..count {
        let p = params(i)?;
        let lead = BigInt::from(2 * (2 * p.l - 1)) * p.c.pow(3u32);
        let factor = lead * &prev + p.threshold()?;
        match &p.m {
            Modulus::Exact(m) => {
                prev = factor * m;
                out.push(QValue::Exact(prev.clone()));
            }
            sym @ Modulus::Lcm { .. } => {
                out.push(QValue::Symbolic {
                    modulus: sym.clone(),
                    factor: BigRational::from_integer(factor),
                });
                if i + 1 < count {
                    return Err(PresburgerError::Unsupported(format!("q_{} needs an exact q_{i}", i + 1)));
                }
            }
        }
    }
    Ok(out)
}

/// Exact anchor values `q_0..q_{count-1}`; fails once a value is symbolic.
pub fn generate_q_exact(count: usize) -> Result<Vec<BigInt>, PresburgerError> {
    generate_q(count)?
        .into_iter()
        .map(|q| {
            q.exact()
                .cloned()
                .ok_or_else(|| PresburgerError::Unsupported("symbolic anchor value".into()))
        })
        .collect()
}

/// Sparse sequence `p_1 < p_2 < ...` above `p0` with
/// `p_i >= (2l-1) 2c^3 p_{i-1} + 2gc^2` and all `p_i` congruent mod `m`.
/// Each element is the least integer meeting both demands.
pub fn generate_p_sparse(
    p0: &BigInt,
    count: usize,
    m: &BigInt,
    l: usize,
    c: &BigInt,
    g: &BigRational,
) -> Result<Vec<BigInt>, PresburgerError> {
    if !m.is_positive() || l == 0 || !c.is_positive() || g.is_negative() {
        return Err(PresburgerError::Precondition("parameters must be positive".into()));
    }
    let cr = BigRational::from_integer(c.clone());
    let lead = BigRational::from_integer(BigInt::from(2 * l - 1)) * int(2) * cr.pow(3);
    let tail = int(2) * g * cr.pow(2);
    let mut out: Vec<BigInt> = Vec::with_capacity(count);
    let mut prev = p0.clone();
    for _ in 0..count {
        let bound = (&lead * BigRational::from_integer(prev.clone()) + &tail).ceil().to_integer();
        let mut v = bound.max(&prev + 1);
        if let Some(first) = out.first() {
            let r = (first - &v).mod_floor(m);
            v += r;
        }
        out.push(v.clone());
        prev = v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent lcm by repeated gcd.
    fn lcm_slow(n: u64) -> BigInt {
        (1..=n).fold(BigInt::one(), |acc, i| acc.lcm(&BigInt::from(i)))
    }

    #[test]
    fn lcm_matches_gcd_fold() {
        for n in [0u64, 1, 2, 10, 32, 100, 257] {
            assert_eq!(lcm_upto(n), lcm_slow(n), "n = {n}");
        }
        assert_eq!(lcm_upto(32).to_string(), "144403552893600");
    }

    #[test]
    fn low_levels() {
        let p1 = params(1).unwrap();
        assert_eq!(p1.m, Modulus::Exact(2.into()));
        assert_eq!((p1.l, p1.c.clone(), p1.g.clone()), (2, 2.into(), BigRational::new(1.into(), 2.into())));
        let p2 = params(2).unwrap();
        assert_eq!(p2.m, Modulus::Exact(BigInt::from(2) * lcm_slow(32)));
        assert_eq!(p2.m.exact().unwrap().to_string(), "288807105787200");
        assert_eq!((p2.l, p2.c.clone(), p2.g.clone()), (3, 32.into(), int(5)));
        assert!(matches!(params(0), Err(PresburgerError::ZeroK)));
        assert!(matches!(params(5), Err(PresburgerError::Unsupported(_))));
    }

    #[test]
    fn closed_forms_agree_with_recursion() {
        for k in 1..=2 {
            let p = params(k).unwrap();
            assert_eq!(p.l, l_of(k));
            assert_eq!(p.c, c_of(k));
        }
        assert_eq!(c_of(3), BigInt::from(2_097_152));
        assert_eq!((1..=4).map(rounds_needed).collect::<Vec<_>>(), vec![5, 11, 21, 39]);
        assert_eq!(rounds_needed(0), 1);
    }

    #[test]
    fn symbolic_divisibility() {
        let m = Modulus::Lcm {
            base: 6.into(),
            upto: 10.into(),
        };
        assert_eq!(m.is_multiple_of(&BigInt::from(9 * 7)), Some(true));
        assert_eq!(m.is_multiple_of(&BigInt::from(11 * 2)), Some(false));
        assert_eq!(m.is_multiple_of(&BigInt::from(16 * 3)), Some(true));
        assert_eq!(m.is_multiple_of(&BigInt::from(32)), Some(false));
    }

    #[test]
    fn first_anchor_values() {
        let q = generate_q_exact(3).unwrap();
        assert_eq!(q[0], BigInt::zero());
        assert_eq!(q[1], BigInt::from(8));
        assert_eq!(q[2], BigInt::from(2_631_680u64) * BigInt::from(288_807_105_787_200u64));
    }

    #[test]
    fn sparse_sequence() {
        let p = generate_p_sparse(&0.into(), 4, &2.into(), 2, &2.into(), &BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(p, vec![4.into(), 196.into(), 9412.into(), 451780.into()]);
        let p = generate_p_sparse(&0.into(), 3, &3.into(), 2, &2.into(), &BigRational::new(1.into(), 2.into())).unwrap();
        for w in p.windows(2) {
            assert!((&w[1] - &w[0]).is_multiple_of(&3.into()));
            assert!(w[1] >= BigInt::from(48) * &w[0] + 4);
        }
    }
}
