use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;

use super::ciphertext::{scale_plaintext, MultigroupCiphertext};
use super::keys::{GroupId, IdealSecretKey, PartyId, SecretKey};
use super::params::PublicParams;
use crate::error::{Error, Result};
use crate::ring::{round_div, RingElement, SampleKind, Sampler};

/// `μ_{j,i} = c_j·s_i + e'` from party `party` of group `group`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecryptionShare {
    pub group: GroupId,
    pub party: PartyId,
    /// Digest of the ciphertext the share was computed for.
    pub ciphertext: [u8; 32],
    pub mu: RingElement,
}

/// `μ_j = Σ_i μ_{j,i}` for one group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDecryptionShare {
    pub group: GroupId,
    pub ciphertext: [u8; 32],
    pub mu: RingElement,
}

/// `⌊(p/q)·μ⌉ mod p` coefficient-wise.
pub fn scale_to_plaintext(pp: &PublicParams, mu: &RingElement) -> Result<RingElement> {
    let p = BigInt::from(pp.plaintext_modulus());
    let coeffs = mu
        .to_bigint()
        .iter()
        .map(|c| Ok(round_div(&(c * &p), pp.q())?.mod_floor(&p)))
        .collect::<Result<Vec<_>>>()?;
    RingElement::from_bigint(pp.ctx_p(), &coeffs)
}

/// `⟨ct, (1, jsk_1, …, jsk_n)⟩ mod q`.
pub fn ideal_phase(ct: &MultigroupCiphertext, keys: &[IdealSecretKey]) -> Result<RingElement> {
    let mut mu = ct.constant_term().clone();
    for (i, g) in ct.roster().iter().enumerate() {
        let key = keys.iter().find(|k| k.group == *g).ok_or(Error::MissingKey(*g))?;
        mu = mu.try_add(&ct.components()[i + 1].try_mul(&key.jsk)?.to_coefficient())?;
    }
    Ok(mu)
}

/// Decryption with the ideal group keys. Test oracle only.
pub fn ideal_decrypt(pp: &PublicParams, ct: &MultigroupCiphertext, keys: &[IdealSecretKey]) -> Result<RingElement> {
    scale_to_plaintext(pp, &ideal_phase(ct, keys)?)
}

/// Largest coefficient of `[⟨ct, sk⟩ − Δ·M]_q`, to be compared with `Δ/2`.
pub fn noise_norm(
    pp: &PublicParams,
    ct: &MultigroupCiphertext,
    keys: &[IdealSecretKey],
    expected: &RingElement,
) -> Result<BigUint> {
    let e = ideal_phase(ct, keys)?.try_sub(&scale_plaintext(pp, expected)?)?;
    Ok(e.infinity_norm())
}

/// `log2(Δ/2) − log2(noise)`: remaining bits before decryption fails.
pub fn noise_budget_bits(pp: &PublicParams, noise: &BigUint) -> f64 {
    let half_delta = (pp.delta() / 2u32).magnitude().bits() as f64;
    let n = noise.bits().max(1) as f64;
    half_delta - n
}

/// Party `party`'s share for the component of `group`.
pub fn partial_decrypt(
    pp: &PublicParams,
    ct: &MultigroupCiphertext,
    sk: &SecretKey,
    group: GroupId,
    party: PartyId,
    sampler: &mut Sampler,
) -> Result<DecryptionShare> {
    let c = ct.component_of(group).ok_or(Error::MissingKey(group))?;
    let smudge = sampler.sample(pp.ctx_q(), SampleKind::Smudge);
    let mu = c.try_mul(sk.element())?.to_coefficient().try_add(&smudge)?;
    Ok(DecryptionShare {
        group,
        party,
        ciphertext: ct.digest(),
        mu,
    })
}

/// Sums one group's party shares; `roster` must be covered exactly once.
pub fn aggregate_shares(
    ct: &MultigroupCiphertext,
    group: GroupId,
    roster: &[PartyId],
    shares: &[&DecryptionShare],
) -> Result<GroupDecryptionShare> {
    let digest = ct.digest();
    let mut by_party: BTreeMap<PartyId, &DecryptionShare> = BTreeMap::new();
    for s in shares {
        if s.ciphertext != digest {
            return Err(Error::ForeignShare);
        }
        if s.group != group || !roster.contains(&s.party) {
            return Err(Error::ForeignShare);
        }
        if by_party.insert(s.party, s).is_some() {
            return Err(Error::DuplicateShare { group, party: s.party });
        }
    }
    let missing = roster.iter().find(|p| !by_party.contains_key(p));
    if let Some(&party) = missing {
        return Err(Error::MissingShare { group, party });
    }
    let mut mu = RingElement::zero(ct.constant_term().context());
    for s in by_party.values() {
        mu = mu.try_add(&s.mu)?;
    }
    Ok(GroupDecryptionShare {
        group,
        ciphertext: digest,
        mu,
    })
}

/// `M = ⌊(p/q)·(c_0 + Σ_j μ_j)⌉ mod p` from one share per roster group.
pub fn combine_group_shares(
    pp: &PublicParams,
    ct: &MultigroupCiphertext,
    shares: &[GroupDecryptionShare],
) -> Result<RingElement> {
    let digest = ct.digest();
    let mut mu = ct.constant_term().clone();
    for &g in ct.roster() {
        let mut matching = shares.iter().filter(|s| s.group == g);
        let share = matching.next().ok_or(Error::MissingShare { group: g, party: 0 })?;
        if matching.next().is_some() {
            return Err(Error::DuplicateShare { group: g, party: 0 });
        }
        if share.ciphertext != digest {
            return Err(Error::ForeignShare);
        }
        mu = mu.try_add(&share.mu)?;
    }
    if shares.iter().any(|s| !ct.roster().contains(&s.group)) {
        return Err(Error::ForeignShare);
    }
    scale_to_plaintext(pp, &mu)
}

/// Combines party shares for every roster group. `rosters` maps each group of
/// the ciphertext to its parties.
pub fn combine_shares(
    pp: &PublicParams,
    ct: &MultigroupCiphertext,
    rosters: &BTreeMap<GroupId, Vec<PartyId>>,
    shares: &[DecryptionShare],
) -> Result<RingElement> {
    let group_shares = ct
        .roster()
        .iter()
        .map(|&g| {
            let roster = rosters.get(&g).ok_or(Error::MissingKey(g))?;
            let mine: Vec<&DecryptionShare> = shares.iter().filter(|s| s.group == g).collect();
            aggregate_shares(ct, g, roster, &mine)
        })
        .collect::<Result<Vec<_>>>()?;
    if shares.iter().any(|s| !ct.roster().contains(&s.group)) {
        return Err(Error::ForeignShare);
    }
    combine_group_shares(pp, ct, &group_shares)
}

/// Largest coefficient of `μ_{j,i} − c_j·s_i`.
pub fn share_noise(ct: &MultigroupCiphertext, sk: &SecretKey, share: &DecryptionShare) -> Result<BigUint> {
    let c = ct.component_of(share.group).ok_or(Error::MissingKey(share.group))?;
    let e = share.mu.try_sub(&c.try_mul(sk.element())?.to_coefficient())?;
    Ok(e.infinity_norm())
}
