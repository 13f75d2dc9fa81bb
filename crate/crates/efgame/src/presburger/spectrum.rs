//! Spectra of sentences over `<` and `+`: the set of `N` for which the
//! sentence holds in `{0, ..., N}`. A sentence of quantifier depth `q`
//! has a spectrum that is periodic with period dividing `m(k)` beyond
//! `2 g(k) c(k)^2`, where `k = max(q, 1)`.

use std::collections::HashMap;

use num_bigint::BigInt;

use super::{params, Modulus, PresburgerError};
use crate::logic::{evaluate, free_vars, quantifier_depth, Formula};
use crate::structure::{OrderedStructure, Signature, Universe};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumCertificate {
    /// `spectrum[n - 1]` tells whether the sentence holds for `N = n`.
    pub spectrum: Vec<bool>,
    pub nmax: usize,
    pub k: usize,
    /// Bound on the preperiod.
    pub threshold: BigInt,
    /// Multiple of every period.
    pub period: Modulus,
    /// Smallest observed period with the least preperiod for it, when the
    /// range is long enough to see the period repeat twice.
    pub empirical: Option<(usize, usize)>,
}

impl SpectrumCertificate {
    pub fn holds_at(&self, n: usize) -> Option<bool> {
        n.checked_sub(1).and_then(|i| self.spectrum.get(i)).copied()
    }
}

/// Least preperiod `n0` for period `p`: the spectrum agrees with its shift
/// by `p` for every `n0 < N <= nmax - p`.
fn preperiod(spec: &[bool], p: usize) -> usize {
    let nmax = spec.len();
    (1..=nmax.saturating_sub(p))
        .rev()
        .find(|&n| spec[n - 1] != spec[n + p - 1])
        .unwrap_or(0)
}

/// `(preperiod, period)` with the smallest period that repeats at least
/// twice inside the range.
pub fn empirical_period(spec: &[bool]) -> Option<(usize, usize)> {
    let nmax = spec.len();
    (1..=nmax).find_map(|p| {
        let n0 = preperiod(spec, p);
        (nmax > n0 + 2 * p).then_some((n0, p))
    })
}

/// Evaluates `phi` on `{0, ..., N}` for `N = 1..=nmax`.
pub fn compute_spectrum(phi: &Formula, nmax: usize) -> Result<SpectrumCertificate, PresburgerError> {
    if let Some(v) = free_vars(phi).into_iter().next() {
        return Err(PresburgerError::Precondition(format!("not a sentence: {v} is free")));
    }
    let k = quantifier_depth(phi).max(1);
    let pr = params(k)?;
    let threshold = pr.threshold()?;
    let sig = Signature::new().with_plus();
    let mut spectrum = Vec::with_capacity(nmax);
    for n in 1..=nmax {
        let s = OrderedStructure::new(sig.clone(), Universe::range(0, n as i64));
        spectrum.push(evaluate(phi, &s, &HashMap::new())?);
    }
    let empirical = empirical_period(&spectrum);
    Ok(SpectrumCertificate {
        spectrum,
        nmax,
        k,
        threshold,
        period: pr.m.clone(),
        empirical,
    })
}

/// Does the observed behaviour fit the bounds? Fails when the range is too
/// short to observe any period.
pub fn check_semilinear(cert: &SpectrumCertificate) -> Result<bool, PresburgerError> {
    let Some((n0, p)) = cert.empirical else {
        let needed = (1..=cert.nmax)
            .map(|p| preperiod(&cert.spectrum, p) + 2 * p)
            .min()
            .unwrap_or(2);
        return Err(PresburgerError::InsufficientNmax {
            nmax: cert.nmax,
            needed,
        });
    };
    let divides = cert
        .period
        .is_multiple_of(&BigInt::from(p))
        .ok_or_else(|| PresburgerError::Unsupported(format!("cannot decide whether {p} divides {}", cert.period)))?;
    Ok(divides && BigInt::from(n0) <= cert.threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn sentence(text: &str) -> Formula {
        parse_formula(text, &Signature::new().with_plus()).unwrap()
    }

    #[test]
    fn periods_of_bit_strings() {
        let alt: Vec<bool> = (1..=20).map(|n| n % 2 == 0).collect();
        assert_eq!(empirical_period(&alt), Some((0, 2)));
        let late: Vec<bool> = (1..=20).map(|n| n >= 7).collect();
        assert_eq!(empirical_period(&late), Some((6, 1)));
        let short = vec![false, false, false, true];
        assert_eq!(empirical_period(&short), None);
    }

    #[test]
    fn even_maximum() {
        // The maximum is even: some x with x + x = max.
        let phi = sentence("(E m (and (A y (or (< y m) (= y m))) (E x (+ x x m))))");
        let cert = compute_spectrum(&phi, 30).unwrap();
        assert_eq!(cert.k, 2);
        for n in 1..=30 {
            assert_eq!(cert.holds_at(n), Some(n % 2 == 0));
        }
        assert_eq!(cert.empirical, Some((0, 2)));
        assert!(check_semilinear(&cert).unwrap());
    }

    #[test]
    fn short_range_is_reported() {
        let phi = sentence("(E m (and (A y (or (< y m) (= y m))) (E x (and (+ x x m) (E z (+ z z x))))))");
        let cert = compute_spectrum(&phi, 8).unwrap();
        assert_eq!(cert.empirical, None);
        assert!(matches!(check_semilinear(&cert), Err(PresburgerError::InsufficientNmax { nmax: 8, .. })));
    }

    #[test]
    fn open_formula_rejected() {
        let phi = sentence("(< x y)");
        assert!(compute_spectrum(&phi, 4).is_err());
    }
}
