//! Gadget vectors and homomorphic digit decomposition over RNS.
//!
//! For a chain `q = Q_0 · … · Q_{k-1}` the digit gadget is
//! `g_i = [(∏_{i'≠i} Q_{i'})^{-1}]_{Q_i} · ∏_{i'≠i} Q_{i'}`, so that `g_i ≡ 1`
//! modulo the primes of digit `i` and `≡ 0` modulo every other prime. The
//! decomposition `h(a) = ([a]_{Q_0}, …, [a]_{Q_{k-1}})` (centered digits) then
//! satisfies `⟨h(a), g⟩ ≡ a`, and sums and component-wise products of
//! decompositions are again decompositions of the sum and product.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ring::{centered_mod, DigitConverter, Domain, Modulus, RingElement, RnsContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Powers of two, `g = (1, 2, …, 2^{bits-1})`.
    Binary { bits: usize },
    /// One digit per partition block of the context.
    Digit,
    /// One digit per prime.
    Prime,
}

#[derive(Debug, Clone)]
pub struct GadgetVector {
    ctx: Option<Arc<RnsContext>>,
    modulus: BigUint,
    flavor: Flavor,
    components: Vec<BigUint>,
    /// Limb ranges of each digit (empty for binary gadgets).
    digits: Vec<std::ops::Range<usize>>,
    digit_moduli: Vec<BigUint>,
}

/// `h(a)`: small polynomials stored modulo the working modulus of some context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecomposedElement {
    pub parts: Vec<RingElement>,
    source_modulus: BigUint,
}

impl DecomposedElement {
    pub fn new(parts: Vec<RingElement>, source_modulus: BigUint) -> Self {
        Self {
            parts,
            source_modulus,
        }
    }

    pub fn source_modulus(&self) -> &BigUint {
        &self.source_modulus
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `h(a) + h(b)`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.try_add(b))
    }

    /// `h(a) ⊙ h(b)`.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.try_mul(b))
    }

    /// Component-wise product with a vector of ring elements, e.g. a key.
    pub fn hadamard_with(&self, other: &[RingElement]) -> Result<Vec<RingElement>> {
        if self.parts.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.parts.len(),
                got: other.len(),
            });
        }
        self.parts.iter().zip(other).map(|(a, b)| a.try_mul(b)).collect()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&RingElement, &RingElement) -> Result<RingElement>) -> Result<Self> {
        if self.parts.len() != other.parts.len() {
            return Err(Error::LengthMismatch {
                expected: self.parts.len(),
                got: other.parts.len(),
            });
        }
        let parts = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        Ok(Self {
            parts,
            source_modulus: self.source_modulus.clone(),
        })
    }
}

impl GadgetVector {
    pub fn new(ctx: &Arc<RnsContext>, flavor: Flavor) -> Result<Self> {
        let digits: Vec<std::ops::Range<usize>> = match flavor {
            Flavor::Binary { bits } => {
                if BigUint::one() << bits < *ctx.modulus() {
                    return Err(Error::InvalidParams(format!(
                        "{bits} bits cannot represent residues mod q"
                    )));
                }
                return Ok(Self::binary_with(Some(ctx.clone()), ctx.modulus().clone(), bits));
            }
            Flavor::Digit => (0..ctx.num_digits()).map(|i| ctx.digit_range(i)).collect(),
            Flavor::Prime => (0..ctx.num_limbs()).map(|j| j..j + 1).collect(),
        };
        let primes = ctx.primes();
        let digit_moduli: Vec<BigUint> = digits
            .iter()
            .map(|r| primes[r.clone()].iter().map(|&p| BigUint::from(p)).product())
            .collect();
        let q = ctx.modulus();
        let components = digit_moduli
            .iter()
            .map(|qi| {
                let cofactor = q / qi;
                let inv = mod_inverse(&(&cofactor % qi), qi).ok_or_else(|| {
                    Error::InvalidParams("digit cofactor is not invertible".into())
                })?;
                Ok(inv * cofactor)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ctx: Some(ctx.clone()),
            modulus: q.clone(),
            flavor,
            components,
            digits,
            digit_moduli,
        })
    }

    /// Binary gadget over the integers mod `2^bits`, for scalar decomposition.
    pub fn binary_pow2(bits: usize) -> Self {
        Self::binary_with(None, BigUint::one() << bits, bits)
    }

    fn binary_with(ctx: Option<Arc<RnsContext>>, modulus: BigUint, bits: usize) -> Self {
        Self {
            ctx,
            modulus,
            flavor: Flavor::Binary { bits },
            components: (0..bits).map(|i| BigUint::one() << i).collect(),
            digits: Vec::new(),
            digit_moduli: Vec::new(),
        }
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[BigUint] {
        &self.components
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn digit_moduli(&self) -> &[BigUint] {
        &self.digit_moduli
    }

    pub fn context(&self) -> Option<&Arc<RnsContext>> {
        self.ctx.as_ref()
    }

    /// Components as constant ring elements of `ctx` (reduced mod its primes).
    pub fn as_ring_elements(&self, ctx: &Arc<RnsContext>) -> Vec<RingElement> {
        self.components
            .iter()
            .map(|g| RingElement::constant(ctx, &BigInt::from(g.clone())))
            .collect()
    }

    fn source_ctx(&self, a: &RingElement) -> Result<&Arc<RnsContext>> {
        match &self.ctx {
            Some(ctx) if ctx.same_ring(a.context()) => Ok(ctx),
            _ => Err(Error::ContextMismatch),
        }
    }

    /// `h(a)` with parts stored modulo the gadget's own context.
    pub fn decompose(&self, a: &RingElement) -> Result<DecomposedElement> {
        let ctx = self.source_ctx(a)?.clone();
        self.decompose_into(a, &ctx)
    }

    /// `h(a)` with each (integer) part reduced into `target`, which only needs
    /// the same ring degree.
    pub fn decompose_into(&self, a: &RingElement, target: &Arc<RnsContext>) -> Result<DecomposedElement> {
        let ctx = self.source_ctx(a)?;
        if target.degree() != ctx.degree() {
            return Err(Error::ContextMismatch);
        }
        if let Flavor::Binary { bits } = self.flavor {
            return self.decompose_binary(a, target, bits);
        }
        let src = a.to_coefficient();
        let n = ctx.degree();
        let target_primes = target.primes();
        let mut parts = Vec::with_capacity(self.digits.len());
        for range in &self.digits {
            let source: Vec<Modulus> = ctx.moduli()[range.clone()].to_vec();
            let conv = DigitConverter::new(&source, &target_primes)?;
            let mut limbs = vec![vec![0u64; n]; target_primes.len()];
            let mut residues = vec![0u64; range.len()];
            let mut out = vec![0u64; target_primes.len()];
            for c in 0..n {
                for (r, j) in residues.iter_mut().zip(range.clone()) {
                    *r = src.limbs()[j][c];
                }
                conv.convert(&residues, &mut out);
                for (limb, v) in limbs.iter_mut().zip(&out) {
                    limb[c] = *v;
                }
            }
            parts.push(RingElement::from_limbs(target, limbs, Domain::Coefficient)?);
        }
        Ok(DecomposedElement::new(parts, self.modulus.clone()))
    }

    fn decompose_binary(&self, a: &RingElement, target: &Arc<RnsContext>, bits: usize) -> Result<DecomposedElement> {
        let q = BigInt::from(self.modulus.clone());
        let coeffs: Vec<BigUint> = a
            .to_bigint()
            .iter()
            .map(|c| c.mod_floor(&q).to_biguint().unwrap())
            .collect();
        let parts = (0..bits)
            .map(|i| {
                let bit: Vec<i64> = coeffs.iter().map(|c| c.bit(i as u64) as i64).collect();
                RingElement::from_i64(target, &bit)
            })
            .collect::<Result<_>>()?;
        Ok(DecomposedElement::new(parts, self.modulus.clone()))
    }

    /// Scalar decomposition of an integer residue (centered digits, or bits).
    pub fn decompose_integer(&self, a: &BigUint) -> Vec<BigInt> {
        match self.flavor {
            Flavor::Binary { bits } => {
                let a = a % &self.modulus;
                (0..bits).map(|i| BigInt::from(a.bit(i as u64) as u8)).collect()
            }
            _ => self
                .digit_moduli
                .iter()
                .map(|qi| centered_mod(&BigInt::from(a.clone()), qi))
                .collect(),
        }
    }

    /// `⟨u, g⟩ mod q` for integer parts.
    pub fn reconstruct_integer(&self, u: &[BigInt]) -> Result<BigUint> {
        if u.len() != self.components.len() {
            return Err(Error::LengthMismatch {
                expected: self.components.len(),
                got: u.len(),
            });
        }
        let q = BigInt::from(self.modulus.clone());
        let s: BigInt = u
            .iter()
            .zip(&self.components)
            .map(|(x, g)| x * BigInt::from(g.clone()))
            .sum();
        Ok(s.mod_floor(&q).to_biguint().unwrap())
    }

    /// `⟨u, g⟩ mod q`.
    pub fn reconstruct(&self, u: &DecomposedElement) -> Result<RingElement> {
        if u.parts.len() != self.components.len() {
            return Err(Error::LengthMismatch {
                expected: self.components.len(),
                got: u.parts.len(),
            });
        }
        let ctx = self.ctx.as_ref().ok_or(Error::ContextMismatch)?;
        let mut acc = RingElement::zero(ctx);
        for (part, g) in u.parts.iter().zip(&self.components) {
            let part = if part.context().same_ring(ctx) {
                part.to_coefficient()
            } else {
                RingElement::from_bigint(ctx, &part.to_bigint())?
            };
            acc += &part.scalar_mul(&BigInt::from(g.clone()));
        }
        Ok(acc)
    }

    /// `[[a]_{Q_i}]_p` for every digit `i`, evaluated with the residue formula
    /// directly modulo `p`. Returns `[digit][coefficient]`.
    pub fn decompose_foreign(&self, a: &RingElement, p: u64) -> Result<Vec<Vec<u64>>> {
        let ctx = self.source_ctx(a)?;
        if matches!(self.flavor, Flavor::Binary { .. }) {
            return Err(Error::InvalidParams("foreign decomposition needs an RNS gadget".into()));
        }
        if p < 2 {
            return Err(Error::InvalidModulus(p));
        }
        let src = a.to_coefficient();
        self.digits
            .iter()
            .map(|range| {
                let source: Vec<Modulus> = ctx.moduli()[range.clone()].to_vec();
                let conv = DigitConverter::new(&source, &[p])?;
                let mut residues = vec![0u64; range.len()];
                let mut out = [0u64];
                Ok((0..ctx.degree())
                    .map(|c| {
                        for (r, j) in residues.iter_mut().zip(range.clone()) {
                            *r = src.limbs()[j][c];
                        }
                        conv.convert(&residues, &mut out);
                        out[0]
                    })
                    .collect())
            })
            .collect()
    }
}

/// Inverse of `a` modulo `m` via the extended Euclidean algorithm.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let (a, m) = (BigInt::from(a.clone()), BigInt::from(m.clone()));
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    e.x.mod_floor(&m).to_biguint()
}

/// Residue of a big unsigned integer modulo a word.
pub fn residue(a: &BigUint, m: u64) -> u64 {
    (a % m).to_u64().unwrap_or_default()
}

/// Whether every digit value is zero.
pub fn is_zero_decomposition(u: &[BigInt]) -> bool {
    u.iter().all(Zero::is_zero)
}
