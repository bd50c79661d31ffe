use num_bigint::BigInt;
use sha2::{Digest, Sha256};

use super::keys::{EncryptionKey, GroupId};
use super::params::PublicParams;
use crate::error::{Error, Result};
use crate::ring::{element_to_bytes, RingElement, SampleKind, Sampler};

/// `(c_0, c_1, …, c_n)` over `R_q`; component `i ≥ 1` belongs to `roster[i-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultigroupCiphertext {
    components: Vec<RingElement>,
    roster: Vec<GroupId>,
}

impl MultigroupCiphertext {
    pub fn new(components: Vec<RingElement>, roster: Vec<GroupId>) -> Result<Self> {
        if components.len() != roster.len() + 1 {
            return Err(Error::LengthMismatch {
                expected: roster.len() + 1,
                got: components.len(),
            });
        }
        let mut seen = roster.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != roster.len() {
            return Err(Error::RosterMismatch);
        }
        let ctx = components[0].context().clone();
        if components.iter().any(|c| !c.context().same_ring(&ctx)) {
            return Err(Error::ContextMismatch);
        }
        let components = components.into_iter().map(|c| c.to_coefficient()).collect();
        Ok(Self { components, roster })
    }

    /// The all-zero ciphertext for `roster`.
    pub fn zero(pp: &PublicParams, roster: Vec<GroupId>) -> Result<Self> {
        let components = vec![RingElement::zero(pp.ctx_q()); roster.len() + 1];
        Self::new(components, roster)
    }

    pub fn components(&self) -> &[RingElement] {
        &self.components
    }

    pub fn roster(&self) -> &[GroupId] {
        &self.roster
    }

    /// `c_0`.
    pub fn constant_term(&self) -> &RingElement {
        &self.components[0]
    }

    /// The component belonging to `group`.
    pub fn component_of(&self, group: GroupId) -> Option<&RingElement> {
        self.position(group).map(|i| &self.components[i])
    }

    /// 1-based component index of `group`.
    pub fn position(&self, group: GroupId) -> Option<usize> {
        self.roster.iter().position(|&g| g == group).map(|i| i + 1)
    }

    /// Binds the ciphertext's roster, modulus and every residue.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"vmghe/ct");
        h.update(self.components[0].context().modulus().to_bytes_le());
        for g in &self.roster {
            h.update(g.to_le_bytes());
        }
        for c in &self.components {
            h.update(element_to_bytes(c));
        }
        h.finalize().into()
    }
}

/// Lifts a plaintext of `R_p` to `Δ·M` in `R_q`.
pub(crate) fn scale_plaintext(pp: &PublicParams, m: &RingElement) -> Result<RingElement> {
    if !m.context().same_ring(pp.ctx_p()) {
        return Err(Error::PlaintextOutOfRing);
    }
    let coeffs: Vec<BigInt> = m.to_coefficient().limbs()[0]
        .iter()
        .map(|&c| BigInt::from(c) * pp.delta())
        .collect();
    RingElement::from_bigint(pp.ctx_q(), &coeffs)
}

/// `t·(b_0, a_0) + (Δ·M + e_0, e_1)` with `t ← χ`: a single-group ciphertext.
pub fn encrypt(
    pp: &PublicParams,
    jek: &EncryptionKey,
    group: GroupId,
    m: &RingElement,
    sampler: &mut Sampler,
) -> Result<MultigroupCiphertext> {
    let scaled = scale_plaintext(pp, m)?;
    let t = sampler.sample(pp.ctx_q(), SampleKind::Secret);
    let e0 = sampler.sample(pp.ctx_q(), SampleKind::Error);
    let e1 = sampler.sample(pp.ctx_q(), SampleKind::Error);
    let c0 = &(&(&t * &jek.b0) + &scaled) + &e0;
    let c1 = &(&t * &jek.a0) + &e1;
    MultigroupCiphertext::new(vec![c0, c1], vec![group])
}

/// Places a single-group ciphertext at 1-based `position` of `roster`.
pub fn expand(ct: &MultigroupCiphertext, position: usize, roster: &[GroupId]) -> Result<MultigroupCiphertext> {
    if ct.roster.len() != 1 {
        return Err(Error::RosterMismatch);
    }
    if position == 0 || position > roster.len() {
        return Err(Error::PositionOutOfRange {
            position,
            groups: roster.len(),
        });
    }
    if roster[position - 1] != ct.roster[0] {
        return Err(Error::RosterMismatch);
    }
    let zero = RingElement::zero(ct.components[0].context());
    let mut components = vec![zero; roster.len() + 1];
    components[0] = ct.components[0].clone();
    components[position] = ct.components[1].clone();
    MultigroupCiphertext::new(components, roster.to_vec())
}

/// Re-indexes `ct` over `roster`, which must contain every group of `ct`.
pub fn realign(ct: &MultigroupCiphertext, roster: &[GroupId]) -> Result<MultigroupCiphertext> {
    if ct.roster == roster {
        return Ok(ct.clone());
    }
    let zero = RingElement::zero(ct.components[0].context());
    let mut components = vec![zero; roster.len() + 1];
    components[0] = ct.components[0].clone();
    for (i, g) in ct.roster.iter().enumerate() {
        let pos = roster.iter().position(|r| r == g).ok_or(Error::RosterMismatch)?;
        components[pos + 1] = ct.components[i + 1].clone();
    }
    MultigroupCiphertext::new(components, roster.to_vec())
}

/// The union roster: `a`'s groups in order, then `b`'s new groups in order.
pub fn union_roster(a: &[GroupId], b: &[GroupId]) -> Vec<GroupId> {
    let mut out = a.to_vec();
    out.extend(b.iter().filter(|g| !a.contains(g)));
    out
}

/// Expands both ciphertexts to their union roster.
pub fn align(
    a: &MultigroupCiphertext,
    b: &MultigroupCiphertext,
) -> Result<(MultigroupCiphertext, MultigroupCiphertext)> {
    if !a.components[0].context().same_ring(b.components[0].context()) {
        return Err(Error::ContextMismatch);
    }
    let roster = union_roster(&a.roster, &b.roster);
    Ok((realign(a, &roster)?, realign(b, &roster)?))
}

/// Component-wise sum after alignment.
pub fn eval_add(a: &MultigroupCiphertext, b: &MultigroupCiphertext) -> Result<MultigroupCiphertext> {
    let (a, b) = align(a, b)?;
    let components = a
        .components
        .iter()
        .zip(&b.components)
        .map(|(x, y)| x.try_add(y))
        .collect::<Result<_>>()?;
    MultigroupCiphertext::new(components, a.roster)
}

/// `ct + Δ·M` for a public plaintext `M ∈ R_p`.
pub fn add_plain(pp: &PublicParams, ct: &MultigroupCiphertext, m: &RingElement) -> Result<MultigroupCiphertext> {
    let mut out = ct.clone();
    out.components[0] = out.components[0].try_add(&scale_plaintext(pp, m)?)?;
    Ok(out)
}

/// `c · ct` for a public scalar `c ∈ Z_p`, using its centered representative.
pub fn mul_scalar(pp: &PublicParams, ct: &MultigroupCiphertext, c: u64) -> MultigroupCiphertext {
    let p = pp.plaintext_modulus();
    let c = c % p;
    let centered = if c > p / 2 { c as i64 - p as i64 } else { c as i64 };
    let k = BigInt::from(centered);
    MultigroupCiphertext {
        components: ct.components.iter().map(|x| x.scalar_mul(&k)).collect(),
        roster: ct.roster.clone(),
    }
}
