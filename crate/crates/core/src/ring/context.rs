use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};

use super::modulus::{is_prime, Modulus};
use super::ntt::NttTable;
use crate::error::{Error, Result};

/// The ring `Z_q[x]/(x^N + 1)` in residue form, `q = q_0 · … · q_{l-1}`.
///
/// The primes are grouped into `k` consecutive digits by `partition`
/// (`0 = j_0 < j_1 < … < j_k = l`); digit `i` has modulus `Q_i`, the product
/// of the primes in `[j_i, j_{i+1})`.
#[derive(Debug)]
pub struct RnsContext {
    degree: usize,
    moduli: Vec<Modulus>,
    ntt: Option<Vec<NttTable>>,
    partition: Vec<usize>,
    digit_moduli: Vec<BigUint>,
    modulus: BigUint,
    half_modulus: BigUint,
    /// `q / q_j` for each limb.
    crt_cofactors: Vec<BigUint>,
    /// `[(q / q_j)^{-1}]_{q_j}` for each limb.
    crt_inverses: Vec<u64>,
}

impl RnsContext {
    /// Builds a context over NTT-friendly primes (`q_j ≡ 1 mod 2N`).
    pub fn new(degree: usize, primes: &[u64], partition: &[usize]) -> Result<Arc<Self>> {
        Self::build(degree, primes, partition, true)
    }

    /// Single digit holding every prime.
    pub fn single_digit(degree: usize, primes: &[u64]) -> Result<Arc<Self>> {
        Self::new(degree, primes, &[0, primes.len()])
    }

    /// Builds a context over arbitrary distinct primes. Multiplication falls
    /// back to schoolbook negacyclic convolution when a prime is not
    /// NTT-friendly; meant for small hand-checkable examples.
    pub fn with_schoolbook(degree: usize, primes: &[u64], partition: &[usize]) -> Result<Arc<Self>> {
        Self::build(degree, primes, partition, false)
    }

    fn build(degree: usize, primes: &[u64], partition: &[usize], require_ntt: bool) -> Result<Arc<Self>> {
        if degree == 0 || !degree.is_power_of_two() {
            return Err(Error::InvalidDegree(degree));
        }
        if primes.is_empty() {
            return Err(Error::EmptyModulusChain);
        }
        for (i, &p) in primes.iter().enumerate() {
            if !is_prime(p) {
                return Err(Error::InvalidModulus(p));
            }
            if primes[..i].contains(&p) {
                return Err(Error::NotCoprime(p, p));
            }
        }
        validate_partition(partition, primes.len())?;

        let moduli = primes
            .iter()
            .map(|&p| Modulus::new(p))
            .collect::<Result<Vec<_>>>()?;

        let ntt = if require_ntt {
            Some(
                moduli
                    .iter()
                    .map(|m| NttTable::new(m.clone(), degree))
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            moduli
                .iter()
                .map(|m| NttTable::new(m.clone(), degree))
                .collect::<Result<Vec<_>>>()
                .ok()
        };

        let modulus: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
        let digit_moduli = partition
            .windows(2)
            .map(|w| primes[w[0]..w[1]].iter().map(|&p| BigUint::from(p)).product())
            .collect();
        let crt_cofactors: Vec<BigUint> = primes.iter().map(|&p| &modulus / p).collect();
        let crt_inverses = crt_cofactors
            .iter()
            .zip(&moduli)
            .map(|(c, m)| {
                let r = (c % m.value()).to_u64().unwrap();
                m.inv(r).ok_or(Error::NotCoprime(m.value(), m.value()))
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Arc::new(Self {
            degree,
            moduli,
            ntt,
            partition: partition.to_vec(),
            digit_moduli,
            half_modulus: &modulus >> 1u32,
            modulus,
            crt_cofactors,
            crt_inverses,
        }))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn moduli(&self) -> &[Modulus] {
        &self.moduli
    }

    pub fn primes(&self) -> Vec<u64> {
        self.moduli.iter().map(Modulus::value).collect()
    }

    pub fn num_limbs(&self) -> usize {
        self.moduli.len()
    }

    pub fn ntt_tables(&self) -> Option<&[NttTable]> {
        self.ntt.as_deref()
    }

    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    /// Number of gadget digits `k`.
    pub fn num_digits(&self) -> usize {
        self.digit_moduli.len()
    }

    /// Limb index range covered by digit `i`.
    pub fn digit_range(&self, i: usize) -> std::ops::Range<usize> {
        self.partition[i]..self.partition[i + 1]
    }

    pub fn digit_moduli(&self) -> &[BigUint] {
        &self.digit_moduli
    }

    /// The full modulus `q`.
    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub(crate) fn crt_cofactors(&self) -> &[BigUint] {
        &self.crt_cofactors
    }

    pub(crate) fn crt_inverses(&self) -> &[u64] {
        &self.crt_inverses
    }

    /// Centered representative of `x ∈ [0, q)` in `(-q/2, q/2]`.
    pub fn center(&self, x: BigUint) -> BigInt {
        if x > self.half_modulus {
            BigInt::from(x) - BigInt::from(self.modulus.clone())
        } else {
            BigInt::from(x)
        }
    }

    /// Whether `other`'s primes are a prefix of this context's primes.
    pub fn extends(&self, other: &RnsContext) -> bool {
        self.degree == other.degree
            && other.moduli.len() <= self.moduli.len()
            && self.moduli[..other.moduli.len()] == other.moduli[..]
    }

    /// Same degree and same prime chain.
    pub fn same_ring(&self, other: &RnsContext) -> bool {
        std::ptr::eq(self, other) || (self.degree == other.degree && self.moduli == other.moduli)
    }

    pub fn is_one_modulus(&self) -> bool {
        self.modulus.is_one()
    }
}

fn validate_partition(partition: &[usize], limbs: usize) -> Result<()> {
    let ok = partition.len() >= 2
        && partition[0] == 0
        && *partition.last().unwrap() == limbs
        && partition.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::MalformedPartition(partition.to_vec()))
    }
}
