//! Negacyclic number-theoretic transform over one prime.

use super::modulus::Modulus;
use crate::error::{Error, Result};

/// Twiddle tables for the negacyclic NTT of length `n` modulo `q ≡ 1 (mod 2n)`.
#[derive(Debug, Clone)]
pub struct NttTable {
    modulus: Modulus,
    n: usize,
    psi_rev: Vec<u64>,
    psi_rev_shoup: Vec<u64>,
    psi_inv_rev: Vec<u64>,
    psi_inv_rev_shoup: Vec<u64>,
    n_inv: u64,
    n_inv_shoup: u64,
}

fn bit_reverse(mut x: usize, bits: u32) -> usize {
    let mut r = 0;
    for _ in 0..bits {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    r
}

/// Smallest-generator primitive `2n`-th root of unity modulo `q`.
fn primitive_root(m: &Modulus, n: usize) -> Option<u64> {
    let q = m.value();
    let order = 2 * n as u64;
    if (q - 1) % order != 0 {
        return None;
    }
    let cofactor = (q - 1) / order;
    (2..q.min(1 << 20)).find_map(|g| {
        let psi = m.pow(g, cofactor);
        (m.pow(psi, n as u64) == q - 1).then_some(psi)
    })
}

impl NttTable {
    pub fn new(modulus: Modulus, n: usize) -> Result<Self> {
        let q = modulus.value();
        let psi = primitive_root(&modulus, n).ok_or(Error::NotNttFriendly { prime: q, degree: n })?;
        let psi_inv = modulus.inv(psi).expect("root is a unit");
        let bits = n.trailing_zeros();
        let mut psi_rev = vec![0; n];
        let mut psi_inv_rev = vec![0; n];
        let (mut pw, mut pw_inv) = (1u64, 1u64);
        for i in 0..n {
            let r = bit_reverse(i, bits);
            psi_rev[r] = pw;
            psi_inv_rev[r] = pw_inv;
            pw = modulus.mul(pw, psi);
            pw_inv = modulus.mul(pw_inv, psi_inv);
        }
        let psi_rev_shoup = psi_rev.iter().map(|&w| modulus.shoup(w)).collect();
        let psi_inv_rev_shoup = psi_inv_rev.iter().map(|&w| modulus.shoup(w)).collect();
        let n_inv = modulus.inv(n as u64).expect("n is a unit");
        let n_inv_shoup = modulus.shoup(n_inv);
        Ok(Self {
            modulus,
            n,
            psi_rev,
            psi_rev_shoup,
            psi_inv_rev,
            psi_inv_rev_shoup,
            n_inv,
            n_inv_shoup,
        })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// In-place forward transform; output is in bit-reversed evaluation order.
    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let m = &self.modulus;
        let mut t = self.n;
        let mut groups = 1;
        while groups < self.n {
            t >>= 1;
            for i in 0..groups {
                let w = self.psi_rev[groups + i];
                let ws = self.psi_rev_shoup[groups + i];
                let start = 2 * i * t;
                for j in start..start + t {
                    let u = a[j];
                    let v = m.mul_shoup(a[j + t], w, ws);
                    a[j] = m.add(u, v);
                    a[j + t] = m.sub(u, v);
                }
            }
            groups <<= 1;
        }
    }

    /// In-place inverse of [`NttTable::forward`].
    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let m = &self.modulus;
        let mut t = 1;
        let mut groups = self.n;
        while groups > 1 {
            let half = groups >> 1;
            let mut start = 0;
            for i in 0..half {
                let w = self.psi_inv_rev[half + i];
                let ws = self.psi_inv_rev_shoup[half + i];
                for j in start..start + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = m.add(u, v);
                    a[j + t] = m.mul_shoup(m.sub(u, v), w, ws);
                }
                start += 2 * t;
            }
            t <<= 1;
            groups = half;
        }
        for x in a.iter_mut() {
            *x = m.mul_shoup(*x, self.n_inv, self.n_inv_shoup);
        }
    }
}
