//! Word-sized modular arithmetic for a single NTT-friendly prime.

use crate::error::{Error, Result};

/// A prime modulus below 2^62 with precomputed helpers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modulus {
    value: u64,
    // Products of two residues fit in a u64 when the modulus is below 2^32.
    small: bool,
}

impl Modulus {
    pub fn new(value: u64) -> Result<Self> {
        if !(2..1 << 62).contains(&value) {
            return Err(Error::InvalidModulus(value));
        }
        Ok(Self {
            value,
            small: value < 1 << 32,
        })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.value {
            s - self.value
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.value - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.value - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.small {
            (a * b) % self.value
        } else {
            ((a as u128 * b as u128) % self.value as u128) as u64
        }
    }

    /// Shoup precomputation `floor(w * 2^64 / q)` for a fixed multiplicand `w`.
    #[inline]
    pub fn shoup(&self, w: u64) -> u64 {
        (((w as u128) << 64) / self.value as u128) as u64
    }

    /// `w * x mod q` given `w_shoup = self.shoup(w)`.
    #[inline]
    pub fn mul_shoup(&self, x: u64, w: u64, w_shoup: u64) -> u64 {
        let hi = ((w_shoup as u128 * x as u128) >> 64) as u64;
        let r = w.wrapping_mul(x).wrapping_sub(hi.wrapping_mul(self.value));
        if r >= self.value {
            r - self.value
        } else {
            r
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.value;
        base %= self.value;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse of `a` modulo a prime, `None` when `a ≡ 0`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.value;
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.value - 2))
        }
    }

    /// Reduces a signed integer into `[0, q)`.
    #[inline]
    pub fn reduce_i64(&self, a: i64) -> u64 {
        let r = a.rem_euclid(self.value as i64);
        r as u64
    }

    /// Centered representative in `(-q/2, q/2]`.
    #[inline]
    pub fn center(&self, a: u64) -> i64 {
        if a > self.value / 2 {
            a as i64 - self.value as i64
        } else {
            a as i64
        }
    }
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest primes `≡ 1 (mod 2n)` strictly below `2^bits`, in decreasing order.
pub fn ntt_primes(bits: u32, n: usize, count: usize) -> Vec<u64> {
    let step = 2 * n as u64;
    let mut candidate = ((1u64 << bits) - 1) / step * step + 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count && candidate > step {
        if candidate < 1 << bits && is_prime(candidate) {
            out.push(candidate);
        }
        candidate -= step;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shoup_matches_plain() {
        let m = Modulus::new(1_152_921_504_606_584_833).unwrap();
        let w = 987_654_321_012_345_678 % m.value();
        let ws = m.shoup(w);
        for x in [0u64, 1, 2, m.value() - 1, 123_456_789_123] {
            assert_eq!(m.mul_shoup(x, w, ws), m.mul(x, w));
        }
    }

    #[test]
    fn primality() {
        assert!(is_prime(17));
        assert!(is_prime(7681));
        assert!(!is_prime(385));
        assert!(!is_prime(1));
        let ps = ntt_primes(17, 16, 3);
        assert_eq!(ps.len(), 3);
        for p in ps {
            assert!(is_prime(p) && p % 32 == 1 && p < 1 << 17);
        }
    }

    #[test]
    fn inverse_and_center() {
        let m = Modulus::new(17).unwrap();
        assert_eq!(m.mul(m.inv(5).unwrap(), 5), 1);
        assert_eq!(m.inv(0), None);
        assert_eq!(m.center(16), -1);
        assert_eq!(m.center(8), 8);
        assert_eq!(m.reduce_i64(-1), 16);
    }
}
