//! Big-integer reference implementations.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;

pub fn product(primes: &[u64]) -> BigUint {
    primes.iter().map(|&p| BigUint::from(p)).product()
}

/// Schoolbook `a·b mod (x^N + 1, q)`, coefficients in `[0, q)`.
pub fn negacyclic_mul(a: &[BigInt], b: &[BigInt], q: &BigUint) -> Vec<BigInt> {
    let n = a.len();
    let q = BigInt::from(q.clone());
    let mut out = vec![BigInt::from(0); n];
    for i in 0..n {
        for j in 0..n {
            let t = &a[i] * &b[j];
            if i + j < n {
                out[i + j] += t;
            } else {
                out[i + j - n] -= t;
            }
        }
    }
    out.iter().map(|c| c.mod_floor(&q)).collect()
}

/// `[x]_m` in `(-m/2, m/2]`.
pub fn centered(x: &BigInt, m: &BigUint) -> BigInt {
    let m = BigInt::from(m.clone());
    let r = x.mod_floor(&m);
    if &r * 2 > m {
        r - m
    } else {
        r
    }
}

/// `g_i = (q/Q_i)·[(q/Q_i)^{-1}]_{Q_i}` for the digit moduli `Q_i`.
pub fn digit_gadget(digits: &[BigUint]) -> Vec<BigUint> {
    let q: BigUint = digits.iter().product();
    digits
        .iter()
        .map(|qi| {
            let cof = &q / qi;
            let c = BigInt::from(&cof % qi);
            let inv = c.extended_gcd(&BigInt::from(qi.clone())).x.mod_floor(&BigInt::from(qi.clone()));
            cof * inv.to_biguint().unwrap()
        })
        .collect()
}

/// `[[a]_{Q}]_p` with a centered inner residue.
pub fn foreign_digit(a: &BigUint, digit: &BigUint, p: u64) -> u64 {
    let c = centered(&BigInt::from(a.clone()), digit);
    let r = c.mod_floor(&BigInt::from(p));
    u64::try_from(r).unwrap()
}

/// `⌊x/d⌉`, ties away from zero, via rationals.
pub fn round_half_away(x: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = x.div_mod_floor(d);
    let twice = &r * 2;
    let up = if d > &BigInt::from(0) { twice > *d || (twice == *d && x >= &BigInt::from(0)) } else { unreachable!() };
    if up {
        q + 1
    } else {
        q
    }
}
