//! Exact rational arithmetic, prime factorization, and per-place absolute
//! values. Everything downstream (walk matrices, subalgebra certificates,
//! prefix-swap identities) is checked with zero tolerance on top of this
//! module, so all construction here reduces fractions eagerly and keeps
//! p-adic absolute values as exact rational powers of p.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Reduced arbitrary-precision rational. `num_rational` normalizes on every
/// construction: denominator positive, gcd(|num|, den) = 1, zero is 0/1.
pub type Rat = num_rational::BigRational;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("`{0}` is not a valid rational (expected `a` or `a/b` with b > 0)")]
    ParseRational(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"a/b"` or `"a"` into an exact rational. Bit-exact: no float
/// round-trip is involved, as required by the IFS file format.
pub fn parse_rat(s: &str) -> Result<Rat, ArithError> {
    let s = s.trim();
    let mk_err = || ArithError::ParseRational(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| mk_err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| mk_err())?;
            if d.is_zero() {
                return Err(mk_err());
            }
            Ok(Rat::new(n, d))
        }
        None => {
            let n = BigInt::from_str(s).map_err(|_| mk_err())?;
            Ok(Rat::from_integer(n))
        }
    }
}

pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A place of Q: the archimedean place or a finite prime place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Place {
    Infinity,
    Finite(u64),
}

impl Place {
    /// Constructs a finite place, verifying primality.
    pub fn finite(p: u64) -> Result<Place, ArithError> {
        if is_prime(p) {
            Ok(Place::Finite(p))
        } else {
            Err(ArithError::NotPrime(p))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Place::Finite(_))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// An absolute value |x|_sigma, kept exact. For finite sigma the value is an
/// integer power of p; for the archimedean place it is |x| as a rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceValue {
    pub place: Place,
    pub value: Rat,
}

impl PlaceValue {
    pub fn as_f64(&self) -> f64 {
        rat_to_f64(&self.value)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // deterministic Miller-Rabin bases for u64
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if a % n == 0 {
            continue;
        }
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Trial division with a 2-3-5 wheel. Denominators arising from carpet IFS
/// inputs are tiny, so no general-purpose factoring is needed. Returns the
/// prime multiset in nondecreasing order; `factorize(1)` is empty.
pub fn factorize(n: &BigUint) -> Vec<u64> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let one = BigUint::one();
    for p in [2u64, 3, 5] {
        let pb = BigUint::from(p);
        while (&n % &pb).is_zero() {
            out.push(p);
            n /= &pb;
        }
    }
    // wheel increments mod 30 starting at 7
    let incs = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u64;
    let mut i = 0;
    while n > one {
        let pb = BigUint::from(p);
        if &pb * &pb > n {
            break;
        }
        while (&n % &pb).is_zero() {
            out.push(p);
            n /= &pb;
        }
        p += incs[i];
        i = (i + 1) % incs.len();
    }
    if n > one {
        out.push(n.to_u64().expect("prime factor exceeds u64"));
    }
    out
}

/// Additive p-adic valuation of a nonzero rational; `None` for zero.
pub fn padic_valuation(x: &Rat, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    Some(int_valuation(x.numer(), &pb) - int_valuation(x.denom(), &pb))
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0i64;
    while !n.is_zero() && (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

/// |x|_sigma as an exact rational: p^(-v_p(x)) at finite places, |x| at the
/// archimedean place. |0|_sigma = 0.
pub fn abs_at_place(x: &Rat, place: Place) -> PlaceValue {
    let value = match place {
        Place::Infinity => x.abs(),
        Place::Finite(p) => match padic_valuation(x, p) {
            None => Rat::zero(),
            Some(v) => pow_rat(p, -v),
        },
    };
    PlaceValue { place, value }
}

/// p^e as an exact rational, for any integer exponent.
pub fn pow_rat(p: u64, e: i64) -> Rat {
    let pw = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rat::from_integer(pw)
    } else {
        Rat::new(BigInt::one(), pw)
    }
}

/// Ultrametric max-norm of a rational vector at a finite place, exact.
pub fn padic_vec_norm(v: &[Rat], p: u64) -> Rat {
    v.iter()
        .map(|x| abs_at_place(x, Place::Finite(p)).value)
        .max()
        .unwrap_or_else(Rat::zero)
}

/// sigma-adic norm of a vector: ultrametric max-norm at finite places,
/// Euclidean norm in double precision at the archimedean place.
pub fn svec_norm(v: &[Rat], place: Place) -> f64 {
    match place {
        Place::Finite(p) => rat_to_f64(&padic_vec_norm(v, p)),
        Place::Infinity => v
            .iter()
            .map(|x| {
                let t = rat_to_f64(x);
                t * t
            })
            .sum::<f64>()
            .sqrt(),
    }
}
