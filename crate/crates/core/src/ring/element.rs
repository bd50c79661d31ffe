use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{CryptoRng, RngCore};

use super::context::RnsContext;
use crate::error::{Error, Result};

/// Representation of the limbs of a [`RingElement`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Coefficient,
    Ntt,
}

/// An element of `R_q` stored limb-major: `limbs[j][c]` is coefficient `c` mod `q_j`.
#[derive(Clone)]
pub struct RingElement {
    ctx: Arc<RnsContext>,
    limbs: Vec<Vec<u64>>,
    domain: Domain,
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RingElement")
            .field("degree", &self.ctx.degree())
            .field("limbs", &self.limbs.len())
            .field("domain", &self.domain)
            .finish()
    }
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        if !self.ctx.same_ring(&other.ctx) {
            return false;
        }
        if self.domain == other.domain {
            return self.limbs == other.limbs;
        }
        self.to_coefficient().limbs == other.to_coefficient().limbs
    }
}

impl Eq for RingElement {}

impl RingElement {
    pub fn zero(ctx: &Arc<RnsContext>) -> Self {
        Self {
            ctx: ctx.clone(),
            limbs: vec![vec![0; ctx.degree()]; ctx.num_limbs()],
            domain: Domain::Coefficient,
        }
    }

    pub fn one(ctx: &Arc<RnsContext>) -> Self {
        Self::constant_u64(ctx, 1)
    }

    /// The constant polynomial `c`.
    pub fn constant_u64(ctx: &Arc<RnsContext>, c: u64) -> Self {
        let mut out = Self::zero(ctx);
        for (limb, m) in out.limbs.iter_mut().zip(ctx.moduli()) {
            limb[0] = c % m.value();
        }
        out
    }

    /// The constant polynomial `c` for an arbitrary integer.
    pub fn constant(ctx: &Arc<RnsContext>, c: &BigInt) -> Self {
        let mut out = Self::zero(ctx);
        for (limb, m) in out.limbs.iter_mut().zip(ctx.moduli()) {
            limb[0] = reduce_bigint(c, m.value());
        }
        out
    }

    /// Builds an element from small signed coefficients.
    pub fn from_i64(ctx: &Arc<RnsContext>, coeffs: &[i64]) -> Result<Self> {
        if coeffs.len() != ctx.degree() {
            return Err(Error::LengthMismatch {
                expected: ctx.degree(),
                got: coeffs.len(),
            });
        }
        let limbs = ctx
            .moduli()
            .iter()
            .map(|m| coeffs.iter().map(|&c| m.reduce_i64(c)).collect())
            .collect();
        Ok(Self {
            ctx: ctx.clone(),
            limbs,
            domain: Domain::Coefficient,
        })
    }

    /// Builds an element from raw residues; each must already be canonical.
    pub fn from_limbs(ctx: &Arc<RnsContext>, limbs: Vec<Vec<u64>>, domain: Domain) -> Result<Self> {
        if limbs.len() != ctx.num_limbs() {
            return Err(Error::LengthMismatch {
                expected: ctx.num_limbs(),
                got: limbs.len(),
            });
        }
        for (limb, m) in limbs.iter().zip(ctx.moduli()) {
            if limb.len() != ctx.degree() {
                return Err(Error::LengthMismatch {
                    expected: ctx.degree(),
                    got: limb.len(),
                });
            }
            if limb.iter().any(|&x| x >= m.value()) {
                return Err(Error::Decode(format!("residue not reduced mod {}", m.value())));
            }
        }
        Ok(Self {
            ctx: ctx.clone(),
            limbs,
            domain,
        })
    }

    /// Uniform element of `R_q`.
    pub fn random<R: RngCore + CryptoRng>(ctx: &Arc<RnsContext>, rng: &mut R) -> Self {
        let limbs = ctx
            .moduli()
            .iter()
            .map(|m| {
                let q = m.value();
                // Rejection keeps residues unbiased.
                let bound = u64::MAX - (u64::MAX % q);
                (0..ctx.degree())
                    .map(|_| loop {
                        let x = rng.next_u64();
                        if x < bound {
                            break x % q;
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            ctx: ctx.clone(),
            limbs,
            domain: Domain::Coefficient,
        }
    }

    pub fn context(&self) -> &Arc<RnsContext> {
        &self.ctx
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn limbs(&self) -> &[Vec<u64>] {
        &self.limbs
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|l| l.iter().all(|&x| x == 0))
    }

    pub fn to_ntt(&self) -> Self {
        let mut out = self.clone();
        out.make_ntt();
        out
    }

    pub fn to_coefficient(&self) -> Self {
        let mut out = self.clone();
        out.make_coefficient();
        out
    }

    pub fn make_ntt(&mut self) {
        if self.domain == Domain::Ntt {
            return;
        }
        let tables = self
            .ctx
            .ntt_tables()
            .expect("NTT domain requires an NTT-friendly context");
        for (limb, t) in self.limbs.iter_mut().zip(tables) {
            t.forward(limb);
        }
        self.domain = Domain::Ntt;
    }

    pub fn make_coefficient(&mut self) {
        if self.domain == Domain::Coefficient {
            return;
        }
        let tables = self.ctx.ntt_tables().expect("NTT domain implies tables");
        for (limb, t) in self.limbs.iter_mut().zip(tables) {
            t.inverse(limb);
        }
        self.domain = Domain::Coefficient;
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.ctx.same_ring(&other.ctx) {
            return Err(Error::ContextMismatch);
        }
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.add_in_place(other);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.sub_in_place(other);
        Ok(out)
    }

    /// Negacyclic product. The result is in NTT form only when both inputs are.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if !self.ctx.same_ring(&other.ctx) {
            return Err(Error::ContextMismatch);
        }
        if self.ctx.ntt_tables().is_none() {
            return Ok(self.to_coefficient().schoolbook_mul(&other.to_coefficient()));
        }
        let both_ntt = self.domain == Domain::Ntt && other.domain == Domain::Ntt;
        let a = self.to_ntt();
        let b = if other.domain == Domain::Ntt {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.to_ntt())
        };
        let mut out = a;
        for ((x, y), m) in out.limbs.iter_mut().zip(&b.limbs).zip(self.ctx.moduli()) {
            for (xi, &yi) in x.iter_mut().zip(y) {
                *xi = m.mul(*xi, yi);
            }
        }
        if !both_ntt {
            out.make_coefficient();
        }
        Ok(out)
    }

    fn schoolbook_mul(&self, other: &Self) -> Self {
        let n = self.ctx.degree();
        let mut out = Self::zero(&self.ctx);
        for ((a, b), (o, m)) in self
            .limbs
            .iter()
            .zip(&other.limbs)
            .zip(out.limbs.iter_mut().zip(self.ctx.moduli()))
        {
            for i in 0..n {
                for j in 0..n {
                    let p = m.mul(a[i], b[j]);
                    if i + j < n {
                        o[i + j] = m.add(o[i + j], p);
                    } else {
                        o[i + j - n] = m.sub(o[i + j - n], p);
                    }
                }
            }
        }
        out
    }

    fn add_in_place(&mut self, other: &Self) {
        for ((x, y), m) in self.limbs.iter_mut().zip(&other.limbs).zip(self.ctx.moduli()) {
            for (xi, &yi) in x.iter_mut().zip(y) {
                *xi = m.add(*xi, yi);
            }
        }
    }

    fn sub_in_place(&mut self, other: &Self) {
        for ((x, y), m) in self.limbs.iter_mut().zip(&other.limbs).zip(self.ctx.moduli()) {
            for (xi, &yi) in x.iter_mut().zip(y) {
                *xi = m.sub(*xi, yi);
            }
        }
    }

    /// Multiplies by an integer constant.
    pub fn scalar_mul(&self, c: &BigInt) -> Self {
        let mut out = self.clone();
        for (limb, m) in out.limbs.iter_mut().zip(self.ctx.moduli()) {
            let r = reduce_bigint(c, m.value());
            for x in limb.iter_mut() {
                *x = m.mul(*x, r);
            }
        }
        out
    }

    pub fn scalar_mul_u64(&self, c: u64) -> Self {
        self.scalar_mul(&BigInt::from(c))
    }

    /// Multiplies by the monomial `x^k` (negacyclic rotation).
    pub fn mul_monomial(&self, k: usize) -> Self {
        let src = self.to_coefficient();
        let n = self.ctx.degree();
        let k = k % (2 * n);
        let mut out = Self::zero(&self.ctx);
        for ((o, s), m) in out.limbs.iter_mut().zip(&src.limbs).zip(self.ctx.moduli()) {
            for (i, &v) in s.iter().enumerate() {
                let t = (i + k) % (2 * n);
                if t < n {
                    o[t] = v;
                } else {
                    o[t - n] = m.neg(v);
                }
            }
        }
        out
    }

    /// Centered integer coefficients via CRT, each in `(-q/2, q/2]`.
    pub fn to_bigint(&self) -> Vec<BigInt> {
        let src = self.to_coefficient();
        let q = self.ctx.modulus();
        (0..self.ctx.degree())
            .map(|c| {
                let mut acc = BigUint::zero();
                for (j, limb) in src.limbs.iter().enumerate() {
                    let m = &self.ctx.moduli()[j];
                    let t = m.mul(limb[c], self.ctx.crt_inverses()[j]);
                    acc += &self.ctx.crt_cofactors()[j] * t;
                }
                self.ctx.center(acc % q)
            })
            .collect()
    }

    /// Reduces integer coefficients into the residue form of `ctx`.
    pub fn from_bigint(ctx: &Arc<RnsContext>, coeffs: &[BigInt]) -> Result<Self> {
        if coeffs.len() != ctx.degree() {
            return Err(Error::LengthMismatch {
                expected: ctx.degree(),
                got: coeffs.len(),
            });
        }
        let limbs = ctx
            .moduli()
            .iter()
            .map(|m| coeffs.iter().map(|c| reduce_bigint(c, m.value())).collect())
            .collect();
        Ok(Self {
            ctx: ctx.clone(),
            limbs,
            domain: Domain::Coefficient,
        })
    }

    /// Drops trailing limbs, reinterpreting the element modulo a prefix of the chain.
    pub fn restrict(&self, target: &Arc<RnsContext>) -> Result<Self> {
        if !self.ctx.extends(target) {
            return Err(Error::ContextMismatch);
        }
        let src = self.to_coefficient();
        Ok(Self {
            ctx: target.clone(),
            limbs: src.limbs[..target.num_limbs()].to_vec(),
            domain: Domain::Coefficient,
        })
    }

    /// Largest absolute centered coefficient.
    pub fn infinity_norm(&self) -> BigUint {
        self.to_bigint()
            .into_iter()
            .map(|c| c.magnitude().clone())
            .max()
            .unwrap_or_default()
    }

    /// Centered coefficients as `i64` when they fit (used for small polynomials).
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.to_bigint().iter().map(|c| c.to_i64()).collect()
    }
}

/// `c mod m` in `[0, m)` for a signed big integer.
pub(crate) fn reduce_bigint(c: &BigInt, m: u64) -> u64 {
    let r = c.mod_floor(&BigInt::from(m));
    match r.sign() {
        Sign::Minus => unreachable!("mod_floor with positive modulus is non-negative"),
        _ => r.to_u64().unwrap(),
    }
}

fn expect_same(a: &RingElement, b: &RingElement) {
    if let Err(e) = a.check_compatible(b) {
        panic!("incompatible ring elements: {e}");
    }
}

impl Add<&RingElement> for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        expect_same(self, rhs);
        let mut out = self.clone();
        out.add_in_place(rhs);
        out
    }
}

impl Sub<&RingElement> for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        expect_same(self, rhs);
        let mut out = self.clone();
        out.sub_in_place(rhs);
        out
    }
}

impl Mul<&RingElement> for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        self.try_mul(rhs).expect("incompatible ring elements")
    }
}

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        let mut out = self.clone();
        for (limb, m) in out.limbs.iter_mut().zip(self.ctx.moduli()) {
            for x in limb.iter_mut() {
                *x = m.neg(*x);
            }
        }
        out
    }
}

impl AddAssign<&RingElement> for RingElement {
    fn add_assign(&mut self, rhs: &RingElement) {
        expect_same(self, rhs);
        self.add_in_place(rhs);
    }
}

impl SubAssign<&RingElement> for RingElement {
    fn sub_assign(&mut self, rhs: &RingElement) {
        expect_same(self, rhs);
        self.sub_in_place(rhs);
    }
}

/// Inner product `Σ a_i · b_i` of two equal-length vectors.
pub fn inner_product(a: &[RingElement], b: &[RingElement]) -> Result<RingElement> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let first = a.first().ok_or(Error::LengthMismatch { expected: 1, got: 0 })?;
    let ctx = first.context().clone();
    let mut acc = RingElement::zero(&ctx).to_ntt_if_possible();
    for (x, y) in a.iter().zip(b) {
        let mut prod = x.to_ntt_if_possible().try_mul(&y.to_ntt_if_possible())?;
        prod.domain_align(acc.domain);
        acc.check_compatible(&prod)?;
        acc.add_in_place(&prod);
    }
    acc.make_coefficient_if_ntt();
    Ok(acc)
}

impl RingElement {
    fn to_ntt_if_possible(&self) -> Self {
        if self.ctx.ntt_tables().is_some() {
            self.to_ntt()
        } else {
            self.clone()
        }
    }

    fn domain_align(&mut self, d: Domain) {
        match d {
            Domain::Ntt => self.make_ntt(),
            Domain::Coefficient => self.make_coefficient(),
        }
    }

    fn make_coefficient_if_ntt(&mut self) {
        if self.domain == Domain::Ntt {
            self.make_coefficient();
        }
    }
}
