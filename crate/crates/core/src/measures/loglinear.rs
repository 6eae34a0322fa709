//! Exact real numbers of the form `Σ c_i · ln(n_i)` with rational `c_i` and
//! integers `n_i >= 2`.
//!
//! Shannon entropies of measures with rational weights live in this set.
//! Equality is decided exactly: the integers are refined into a pairwise
//! coprime base, and logarithms of pairwise coprime integers greater than
//! one are linearly independent over the rationals. Order is decided by a
//! floating-point evaluation with a rigorous error bound, falling back to the
//! exact equality test when the bound does not separate the value from zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Default, PartialEq, Eq)]
pub struct LogLinear {
    terms: BTreeMap<BigUint, BigRational>,
}

/// Relative error allowance per evaluated term; each term is a product of a
/// converted rational and a logarithm, each accurate to a few ulps.
const TERM_REL_ERR: f64 = 1e-14;

impl LogLinear {
    pub fn zero() -> Self {
        LogLinear { terms: BTreeMap::new() }
    }

    /// `c · ln(n)`.
    pub fn term(n: &BigUint, c: &BigRational) -> Self {
        let mut out = LogLinear::zero();
        out.add_term(n, c);
        out
    }

    /// `c · ln(n)` for a machine integer.
    pub fn ln_of(n: u64, c: BigRational) -> Self {
        LogLinear::term(&BigUint::from(n), &c)
    }

    /// Adds `c · ln(n)` in place. `n = 0` is rejected, `n = 1` is a no-op.
    pub fn add_term(&mut self, n: &BigUint, c: &BigRational) {
        assert!(!n.is_zero(), "logarithm of zero");
        if n.is_one() || c.is_zero() {
            return;
        }
        match self.terms.get_mut(n) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(n);
                }
            }
            None => {
                self.terms.insert(n.clone(), c.clone());
            }
        }
    }

    /// `-p ln p` for a probability `0 < p <= 1`.
    pub fn entropy_term(p: &BigRational) -> Self {
        assert!(p.is_positive(), "entropy term of a non-positive weight");
        let num = p.numer().magnitude();
        let den = p.denom().magnitude();
        let mut out = LogLinear::zero();
        out.add_term(den, p);
        out.add_term(num, &-p);
        out
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &BigRational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &LogLinear) -> LogLinear {
        let mut out = self.clone();
        for (n, c) in &other.terms {
            out.add_term(n, c);
        }
        out
    }

    pub fn sub(&self, other: &LogLinear) -> LogLinear {
        let mut out = self.clone();
        for (n, c) in &other.terms {
            out.add_term(n, &-c);
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> LogLinear {
        if k.is_zero() {
            return LogLinear::zero();
        }
        LogLinear { terms: self.terms.iter().map(|(n, c)| (n.clone(), c * k)).collect() }
    }

    /// Floating-point value and a bound on its absolute error.
    pub fn approx(&self) -> (f64, f64) {
        let mut value = 0.0;
        let mut mass = 0.0;
        for (n, c) in &self.terms {
            let t = ratio_to_f64(c) * ln_biguint(n);
            value += t;
            mass += t.abs();
        }
        let err = mass * TERM_REL_ERR + self.terms.len() as f64 * f64::MIN_POSITIVE;
        (value, err)
    }

    pub fn to_f64(&self) -> f64 {
        self.approx().0
    }

    /// Exact test for the value zero.
    pub fn is_zero(&self) -> bool {
        self.canonical_coefficients().values().all(Zero::is_zero)
    }

    /// Coefficients over a pairwise coprime base (small primes plus refined
    /// cofactors). Two values are equal iff these maps agree.
    pub fn canonical_coefficients(&self) -> BTreeMap<BigUint, BigRational> {
        let mut coeffs: BTreeMap<BigUint, BigRational> = BTreeMap::new();
        let mut cofactors: Vec<(BigUint, &BigRational)> = Vec::new();
        for (n, c) in &self.terms {
            let (small, rest) = split_small_primes(n);
            for (p, e) in small {
                *coeffs.entry(BigUint::from(p)).or_insert_with(BigRational::zero) += c * BigInt::from(e);
            }
            if !rest.is_one() {
                cofactors.push((rest, c));
            }
        }
        let base = coprime_base(cofactors.iter().map(|(r, _)| r.clone()));
        for (rest, c) in cofactors {
            for (b, e) in factor_over(&base, &rest) {
                *coeffs.entry(b).or_insert_with(BigRational::zero) += c * BigInt::from(e);
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        coeffs
    }

    /// Certified comparison with `other`.
    pub fn certified_cmp(&self, other: &LogLinear) -> Result<Ordering> {
        let diff = self.sub(other);
        let (v, err) = diff.approx();
        if v > err {
            Ok(Ordering::Greater)
        } else if v < -err {
            Ok(Ordering::Less)
        } else if diff.is_zero() {
            Ok(Ordering::Equal)
        } else {
            Err(Error::Undecided(format!("difference {v:e} within error bound {err:e} but not exactly zero")))
        }
    }
}

impl fmt::Debug for LogLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogLinear(≈{:.15}", self.to_f64())?;
        for (n, c) in self.terms.iter().take(6) {
            write!(f, " {c}·ln{n}")?;
        }
        if self.terms.len() > 6 {
            write!(f, " …{} terms", self.terms.len())?;
        }
        write!(f, ")")
    }
}

const SMALL_PRIMES_LIMIT: u32 = 1000;

fn small_primes() -> &'static [u32] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut sieve = vec![true; SMALL_PRIMES_LIMIT as usize];
        let mut out = Vec::new();
        for i in 2..SMALL_PRIMES_LIMIT as usize {
            if sieve[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j < sieve.len() {
                    sieve[j] = false;
                    j += i;
                }
            }
        }
        out
    })
}

/// Strips every prime below 1000; returns `(prime, exponent)` pairs and the
/// remaining cofactor.
fn split_small_primes(n: &BigUint) -> (Vec<(u32, u32)>, BigUint) {
    let mut out = Vec::new();
    if let Some(mut x) = n.to_u128() {
        for &p in small_primes() {
            let p128 = p as u128;
            if p128 * p128 > x {
                break;
            }
            let mut e = 0;
            while x % p128 == 0 {
                x /= p128;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
        }
        if x > 1 && x < SMALL_PRIMES_LIMIT as u128 {
            out.push((x as u32, 1));
            x = 1;
        }
        return (out, BigUint::from(x));
    }
    let mut x = n.clone();
    for &p in small_primes() {
        let mut e = 0;
        loop {
            let (q, r) = x.div_rem(&BigUint::from(p));
            if !r.is_zero() {
                break;
            }
            x = q;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    (out, x)
}

/// Pairwise coprime set such that every input is a product of its members.
pub fn coprime_base<I: IntoIterator<Item = BigUint>>(items: I) -> Vec<BigUint> {
    let mut base: Vec<BigUint> = Vec::new();
    for item in items {
        let mut pending = vec![item];
        'next: while let Some(x) = pending.pop() {
            if x.is_one() {
                continue;
            }
            for i in 0..base.len() {
                let g = x.gcd(&base[i]);
                if g.is_one() {
                    continue;
                }
                if g == x && g == base[i] {
                    continue 'next;
                }
                let b = base.swap_remove(i);
                pending.push(&b / &g);
                pending.push(&x / &g);
                pending.push(g);
                continue 'next;
            }
            base.push(x);
        }
    }
    base.sort();
    base
}

/// Exponents of `n` over a coprime base that generates it.
fn factor_over(base: &[BigUint], n: &BigUint) -> Vec<(BigUint, u64)> {
    let mut x = n.clone();
    let mut out = Vec::new();
    for b in base {
        let mut e = 0u64;
        loop {
            let (q, r) = x.div_rem(b);
            if !r.is_zero() {
                break;
            }
            x = q;
            e += 1;
        }
        if e > 0 {
            out.push((b.clone(), e));
        }
        if x.is_one() {
            break;
        }
    }
    debug_assert!(x.is_one(), "base does not generate {n}");
    out
}

/// Natural logarithm of a positive big integer, accurate to a few ulps.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().expect("fits") as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Correctly scaled conversion of a big rational to `f64` (relative error of
/// a few ulps; values below the subnormal range become zero).
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let (nt, ne) = top_bits(num);
    let (dt, de) = top_bits(den);
    let mant = nt / dt;
    let exp = ne - de;
    sign * scale_pow2(mant, exp)
}

fn top_bits(n: &BigUint) -> (f64, i64) {
    let bits = n.bits();
    if bits <= 64 {
        (n.to_u64().expect("fits") as f64, 0)
    } else {
        let shift = bits - 64;
        ((n >> shift).to_u64().expect("64 bits") as f64, shift as i64)
    }
}

fn scale_pow2(mut x: f64, mut exp: i64) -> f64 {
    while exp > 0 {
        let step = exp.min(1000);
        x *= 2f64.powi(step as i32);
        exp -= step;
        if x.is_infinite() {
            return x;
        }
    }
    while exp < 0 {
        let step = (-exp).min(1000);
        x /= 2f64.powi(step as i32);
        exp += step;
        if x == 0.0 {
            return 0.0;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ln4_equals_two_ln2() {
        let a = LogLinear::ln_of(4, q(1, 1));
        let b = LogLinear::ln_of(2, q(2, 1));
        assert!(a.sub(&b).is_zero());
        assert_eq!(a.certified_cmp(&b).unwrap(), Ordering::Equal);
    }

    #[test]
    fn ln2_and_ln3_are_independent() {
        let a = LogLinear::ln_of(2, q(1, 1));
        let b = LogLinear::ln_of(3, q(1, 1));
        assert!(!a.sub(&b).is_zero());
        assert_eq!(a.certified_cmp(&b).unwrap(), Ordering::Less);
    }

    #[test]
    fn large_cofactors_are_refined() {
        // p, q > 1000 primes; ln(pq) - ln p - ln q = 0
        let p = BigUint::from(1_000_003u64);
        let r = BigUint::from(998_244_353u64);
        let pq = &p * &r;
        let big = &pq * &pq * BigUint::from(1u128 << 100);
        let mut v = LogLinear::term(&big, &q(1, 1));
        v.add_term(&p, &q(-2, 1));
        v.add_term(&r, &q(-2, 1));
        v.add_term(&BigUint::from(2u32), &q(-100, 1));
        assert!(v.is_zero());
        v.add_term(&r, &q(1, 7));
        assert!(!v.is_zero());
    }

    #[test]
    fn entropy_of_uniform_pair() {
        let h = LogLinear::entropy_term(&q(1, 2)).add(&LogLinear::entropy_term(&q(1, 2)));
        assert!(h.sub(&LogLinear::ln_of(2, q(1, 1))).is_zero());
        assert!((h.to_f64() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn coprime_base_properties() {
        let items: Vec<BigUint> = [12u32, 18, 35, 1_000_003 * 7].iter().map(|&x| BigUint::from(x)).collect();
        let base = coprime_base(items.clone());
        for i in 0..base.len() {
            for j in (i + 1)..base.len() {
                assert!(base[i].gcd(&base[j]).is_one());
            }
        }
        for it in items {
            let f = factor_over(&base, &it);
            let prod = f.iter().fold(BigUint::one(), |acc, (b, e)| acc * b.pow(*e as u32));
            assert_eq!(prod, it);
        }
    }

    #[test]
    fn ratio_conversion() {
        assert_eq!(ratio_to_f64(&q(3, 4)), 0.75);
        assert_eq!(ratio_to_f64(&q(-1, 8)), -0.125);
        let tiny = BigRational::new(BigInt::one(), BigInt::from(3u32).pow(400u32));
        let expected = (-400.0 * 3f64.ln()).exp();
        assert!((ratio_to_f64(&tiny) / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ln_of_big_values() {
        let n = BigUint::from(3u32).pow(200u32);
        assert!((ln_biguint(&n) - 200.0 * 3f64.ln()).abs() < 1e-12);
    }
}
