//! Party and group key material.
//!
//! Each party holds `s_i ← χ` and, while keys are being generated, a second
//! ternary secret `r_i`. Published shares are almost linear in `(s_i, r_i)`,
//! so summing them over a group yields keys for `jsk = Σ s_i` and `r = Σ r_i`:
//!
//! ```text
//! β   ≈ −jsk · a
//! ν_1 ≈ −jsk · ν_0 − r · g
//! ν_2 ≈ −r · a + jsk · ⌊(p/q')·g*⌉
//! ```
//!
//! For `ν_1` to stay linear every member of a group must use the same `ν_0`.
//! It is derived from public coins: the CRS seed and the group id in CRS mode,
//! or the group's aggregated `α` and the target group in CRS-free mode.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::params::{expand_uniform, KeyMode, PublicParams};
use crate::error::{Error, Result};
use crate::ring::{element_to_bytes, RingElement, SampleKind, Sampler};

pub type GroupId = u32;
pub type PartyId = u32;

/// Marker embedded in every serialized secret key so leaks are easy to spot.
pub const SECRET_KEY_CANARY: &[u8; 16] = b"\xa5\x5aSK-CANARY-v1\x5a\xa5";

/// A party's secret `s_i`.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    s: RingElement,
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

impl SecretKey {
    pub fn element(&self) -> &RingElement {
        &self.s
    }

    /// Canary followed by the centered ternary coefficients.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = SECRET_KEY_CANARY.to_vec();
        out.extend(self.s.to_i64().unwrap().iter().map(|&c| c as i8 as u8));
        out
    }

    pub fn from_bytes(pp: &PublicParams, bytes: &[u8]) -> Result<Self> {
        let body = bytes
            .strip_prefix(SECRET_KEY_CANARY.as_slice())
            .ok_or_else(|| Error::Decode("missing secret-key marker".into()))?;
        let coeffs: Vec<i64> = body.iter().map(|&b| b as i8 as i64).collect();
        if coeffs.iter().any(|c| !(-1..=1).contains(c)) {
            return Err(Error::Decode("secret key is not ternary".into()));
        }
        Ok(Self {
            s: RingElement::from_i64(pp.ctx_q(), &coeffs)?,
        })
    }
}

/// `(b[0], a[0])`: a single-key BFV public key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptionKey {
    pub b0: RingElement,
    pub a0: RingElement,
}

/// Relinearization material `(ν_0, ν_1, ν_2)`, either one party's share or a
/// group aggregate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelinKey {
    /// `k` elements, common to the whole group.
    pub nu0: Vec<RingElement>,
    /// `k` elements.
    pub nu1: Vec<RingElement>,
    /// `k*` elements.
    pub nu2: Vec<RingElement>,
}

/// One party's published key share in CRS mode: `(b_i, v_{0,i}, v_{1,i}, v_{2,i})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKeyShare {
    pub group: GroupId,
    pub b: Vec<RingElement>,
    pub relin: RelinKey,
}

/// CRS-free round one: a party's contribution `a_i` to its group's `α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrsFreeCommitment {
    pub group: GroupId,
    pub a: Vec<RingElement>,
}

/// CRS-free round two: `b_i = −s_i·α + e_{0,i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptionShare {
    pub group: GroupId,
    pub b: Vec<RingElement>,
}

/// CRS-free round three: a party's share of its group's key towards `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossGroupShare {
    pub group: GroupId,
    pub target: GroupId,
    pub relin: RelinKey,
}

/// What a group announces after round two of CRS-free key generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAnnouncement {
    pub group: GroupId,
    pub alpha: Vec<RingElement>,
    pub jek: EncryptionKey,
}

/// Secrets held while keys are generated. `r` is dropped by [`KeygenState::finish`].
#[derive(Clone)]
pub struct KeygenState {
    group: GroupId,
    sk: SecretKey,
    r: RingElement,
}

impl KeygenState {
    fn sample(pp: &PublicParams, group: GroupId, sampler: &mut Sampler) -> Self {
        // r_i is sampled before it is used in v_{1,i}
        let s = sampler.sample(pp.ctx_q(), SampleKind::Secret);
        let r = sampler.sample(pp.ctx_q(), SampleKind::Secret);
        Self {
            group,
            sk: SecretKey { s },
            r,
        }
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn secret_key(&self) -> &SecretKey {
        &self.sk
    }

    /// The relinearization randomness `r_i`, exposed for invariant checks.
    pub fn relin_randomness(&self) -> &RingElement {
        &self.r
    }

    pub fn finish(self) -> SecretKey {
        self.sk
    }
}

/// Output of CRS-mode key generation for one party.
pub struct PartyKeygen {
    pub state: KeygenState,
    pub share: PublicKeyShare,
    pub ek: EncryptionKey,
}

fn errors(pp: &PublicParams, sampler: &mut Sampler, len: usize) -> Vec<RingElement> {
    sampler.sample_vec(pp.ctx_q(), SampleKind::Error, len)
}

/// `−s·a + e` component-wise.
fn rlwe_vec(s: &RingElement, a: &[RingElement], e: Vec<RingElement>) -> Vec<RingElement> {
    a.iter().zip(e).map(|(ai, ei)| &ei - &(s * ai)).collect()
}

/// `v_1 = −s·ν_0 − r·g + e_1` and `v_2 = −r·base + s·⌊(p/q')g*⌉ + e_2`.
fn relin_share(
    pp: &PublicParams,
    state: &KeygenState,
    nu0: Vec<RingElement>,
    base: &[RingElement],
    sampler: &mut Sampler,
) -> RelinKey {
    let s = state.sk.element();
    let e1 = errors(pp, sampler, pp.digits());
    let nu1 = nu0
        .iter()
        .zip(pp.gadget_q())
        .zip(e1)
        .map(|((v0, g), e)| &(&e - &(s * v0)) - &(&state.r * g))
        .collect();
    let e2 = errors(pp, sampler, pp.digits_star());
    let nu2 = base
        .iter()
        .zip(pp.scaled_gadget_star())
        .zip(e2)
        .map(|((a, g), e)| &(&e - &(&state.r * a)) + &(s * g))
        .collect();
    RelinKey { nu0, nu1, nu2 }
}

/// The group's common `ν_0` in CRS mode.
pub fn relin_base_crs(pp: &PublicParams, group: GroupId) -> Result<Vec<RingElement>> {
    let crs = pp.crs().ok_or(Error::WrongMode("crs"))?;
    Ok(expand_uniform(
        pp.ctx_q(),
        b"vmghe/relin-base/crs",
        &[&crs.seed, &group.to_le_bytes()],
        pp.digits(),
    ))
}

/// The common `ν_0` of group-`group` keys towards `target` in CRS-free mode,
/// derived from the group's jointly generated `α`.
pub fn relin_base_crs_free(pp: &PublicParams, alpha: &[RingElement], target: GroupId) -> Vec<RingElement> {
    let alpha_bytes: Vec<u8> = alpha.iter().flat_map(element_to_bytes).collect();
    expand_uniform(
        pp.ctx_q(),
        b"vmghe/relin-base/crs-free",
        &[&alpha_bytes, &target.to_le_bytes()],
        pp.digits(),
    )
}

/// CRS-mode key generation for one party of `group`.
pub fn keygen_party(pp: &PublicParams, group: GroupId, sampler: &mut Sampler) -> Result<PartyKeygen> {
    let crs = pp.crs().ok_or(Error::WrongMode("crs"))?;
    let state = KeygenState::sample(pp, group, sampler);
    let e0 = errors(pp, sampler, pp.digits_star());
    let b = rlwe_vec(state.sk.element(), &crs.a, e0);
    let relin = relin_share(pp, &state, relin_base_crs(pp, group)?, &crs.a, sampler);
    let ek = EncryptionKey {
        b0: b[0].clone(),
        a0: crs.a[0].clone(),
    };
    Ok(PartyKeygen {
        share: PublicKeyShare { group, b, relin },
        state,
        ek,
    })
}

/// CRS-free round one: sample secrets and a contribution `a_i ← U(R_q^{k*})`.
pub fn keygen_party_crs_free(
    pp: &PublicParams,
    group: GroupId,
    sampler: &mut Sampler,
) -> Result<(KeygenState, CrsFreeCommitment)> {
    if pp.mode() != KeyMode::CrsFree {
        return Err(Error::WrongMode("crs_free"));
    }
    let state = KeygenState::sample(pp, group, sampler);
    let a = sampler.sample_vec(pp.ctx_q(), SampleKind::Uniform, pp.digits_star());
    Ok((state, CrsFreeCommitment { group, a }))
}

/// `α = Σ a_i` over one group's commitments.
pub fn aggregate_alpha(pp: &PublicParams, commitments: &[&CrsFreeCommitment]) -> Result<Vec<RingElement>> {
    let first = commitments.first().ok_or(Error::EmptyRoster)?;
    if commitments.iter().any(|c| c.group != first.group) {
        return Err(Error::MixedShares);
    }
    sum_vectors(pp, commitments.iter().map(|c| c.a.as_slice()), pp.digits_star())
}

/// CRS-free round two: the party's encryption share against its group's `α`.
pub fn encryption_share(
    pp: &PublicParams,
    state: &KeygenState,
    alpha: &[RingElement],
    sampler: &mut Sampler,
) -> Result<(EncryptionShare, EncryptionKey)> {
    if alpha.len() != pp.digits_star() {
        return Err(Error::LengthMismatch {
            expected: pp.digits_star(),
            got: alpha.len(),
        });
    }
    let e0 = errors(pp, sampler, pp.digits_star());
    let b = rlwe_vec(state.sk.element(), alpha, e0);
    let ek = EncryptionKey {
        b0: b[0].clone(),
        a0: alpha[0].clone(),
    };
    Ok((EncryptionShare { group: state.group, b }, ek))
}

/// Forms a group's announcement from its `α` and encryption shares.
pub fn announce_group(pp: &PublicParams, group: GroupId, alpha: Vec<RingElement>, shares: &[&EncryptionShare]) -> Result<GroupAnnouncement> {
    if shares.is_empty() {
        return Err(Error::EmptyRoster);
    }
    if shares.iter().any(|s| s.group != group) {
        return Err(Error::MixedShares);
    }
    let beta = sum_vectors(pp, shares.iter().map(|s| s.b.as_slice()), pp.digits_star())?;
    Ok(GroupAnnouncement {
        group,
        jek: EncryptionKey {
            b0: beta[0].clone(),
            a0: alpha[0].clone(),
        },
        alpha,
    })
}

/// CRS-free round three: the party's share of `jpk_l^j` for target group `j`
/// (its own group included).
pub fn keygen_cross_group(
    pp: &PublicParams,
    state: &KeygenState,
    own_alpha: &[RingElement],
    target: &GroupAnnouncement,
    sampler: &mut Sampler,
) -> Result<CrossGroupShare> {
    if pp.mode() != KeyMode::CrsFree {
        return Err(Error::WrongMode("crs_free"));
    }
    let nu0 = relin_base_crs_free(pp, own_alpha, target.group);
    let relin = relin_share(pp, state, nu0, &target.alpha, sampler);
    Ok(CrossGroupShare {
        group: state.group,
        target: target.group,
        relin,
    })
}

fn sum_vectors<'a>(
    pp: &PublicParams,
    vectors: impl Iterator<Item = &'a [RingElement]>,
    len: usize,
) -> Result<Vec<RingElement>> {
    let mut acc = vec![RingElement::zero(pp.ctx_q()); len];
    for v in vectors {
        if v.len() != len {
            return Err(Error::LengthMismatch { expected: len, got: v.len() });
        }
        for (a, x) in acc.iter_mut().zip(v) {
            *a = a.try_add(x)?;
        }
    }
    Ok(acc)
}

fn aggregate_relin<'a>(pp: &PublicParams, shares: impl Iterator<Item = &'a RelinKey> + Clone) -> Result<RelinKey> {
    let first = shares.clone().next().ok_or(Error::EmptyRoster)?;
    if shares.clone().any(|s| s.nu0 != first.nu0) {
        return Err(Error::MixedShares);
    }
    Ok(RelinKey {
        nu0: first.nu0.clone(),
        nu1: sum_vectors(pp, shares.clone().map(|s| s.nu1.as_slice()), pp.digits())?,
        nu2: sum_vectors(pp, shares.map(|s| s.nu2.as_slice()), pp.digits_star())?,
    })
}

/// Keys of one group, as seen by every party and the evaluator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointKeys {
    pub group: GroupId,
    pub roster: Vec<PartyId>,
    pub mode: KeyMode,
    /// `β = Σ b_i ∈ R_q^{k*}`.
    pub beta: Vec<RingElement>,
    pub jek: EncryptionKey,
    /// `α = Σ a_i` (CRS-free only).
    pub alpha: Option<Vec<RingElement>>,
    relin: BTreeMap<GroupId, RelinKey>,
}

impl JointKeys {
    /// The relinearization key used when this group's component meets `target`'s.
    pub fn relin_towards(&self, target: GroupId) -> Result<&RelinKey> {
        match self.mode {
            KeyMode::Crs => self.relin.get(&self.group).ok_or(Error::MissingKey(self.group)),
            KeyMode::CrsFree => self.relin.get(&target).ok_or(Error::MissingCrossKey {
                from: self.group,
                to: target,
            }),
        }
    }

    /// The key for this group's own components.
    pub fn own_relin(&self) -> Result<&RelinKey> {
        self.relin_towards(self.group)
    }

    /// Groups this group holds relinearization keys towards.
    pub fn targets(&self) -> impl Iterator<Item = GroupId> + '_ {
        self.relin.keys().copied()
    }
}

/// Sums a group's CRS-mode shares.
pub fn aggregate_group(pp: &PublicParams, roster: &[(PartyId, &PublicKeyShare)]) -> Result<JointKeys> {
    let crs = pp.crs().ok_or(Error::WrongMode("crs"))?;
    let (_, first) = roster.first().ok_or(Error::EmptyRoster)?;
    let group = first.group;
    if roster.iter().any(|(_, s)| s.group != group) {
        return Err(Error::MixedShares);
    }
    let beta = sum_vectors(pp, roster.iter().map(|(_, s)| s.b.as_slice()), pp.digits_star())?;
    let relin = aggregate_relin(pp, roster.iter().map(|(_, s)| &s.relin))?;
    Ok(JointKeys {
        group,
        roster: roster.iter().map(|(p, _)| *p).collect(),
        mode: KeyMode::Crs,
        jek: EncryptionKey {
            b0: beta[0].clone(),
            a0: crs.a[0].clone(),
        },
        beta,
        alpha: None,
        relin: BTreeMap::from([(group, relin)]),
    })
}

/// Sums a group's CRS-free shares: its announcement plus cross-group shares
/// towards every target group.
pub fn aggregate_group_crs_free(
    pp: &PublicParams,
    roster: &[PartyId],
    announcement: &GroupAnnouncement,
    encryption_shares: &[&EncryptionShare],
    cross: &[&CrossGroupShare],
) -> Result<JointKeys> {
    if roster.is_empty() {
        return Err(Error::EmptyRoster);
    }
    let group = announcement.group;
    if encryption_shares.iter().any(|s| s.group != group) || cross.iter().any(|s| s.group != group) {
        return Err(Error::MixedShares);
    }
    let beta = sum_vectors(pp, encryption_shares.iter().map(|s| s.b.as_slice()), pp.digits_star())?;
    if beta[0] != announcement.jek.b0 {
        return Err(Error::MixedShares);
    }
    let mut targets: BTreeMap<GroupId, Vec<&RelinKey>> = BTreeMap::new();
    for s in cross {
        targets.entry(s.target).or_default().push(&s.relin);
    }
    let relin = targets
        .into_iter()
        .map(|(t, shares)| {
            if shares.len() != roster.len() {
                return Err(Error::MissingCrossKey { from: group, to: t });
            }
            Ok((t, aggregate_relin(pp, shares.into_iter())?))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(JointKeys {
        group,
        roster: roster.to_vec(),
        mode: KeyMode::CrsFree,
        beta,
        jek: announcement.jek.clone(),
        alpha: Some(announcement.alpha.clone()),
        relin,
    })
}

/// The ideal group key `jsk = Σ s_i`. Test oracle only: protocol code never
/// assembles it.
#[derive(Debug, Clone)]
pub struct IdealSecretKey {
    pub group: GroupId,
    pub jsk: RingElement,
}

impl IdealSecretKey {
    pub fn from_shares(group: GroupId, shares: &[&SecretKey]) -> Result<Self> {
        let first = shares.first().ok_or(Error::EmptyRoster)?;
        let mut jsk = first.s.clone();
        for s in &shares[1..] {
            jsk = jsk.try_add(&s.s)?;
        }
        Ok(Self { group, jsk })
    }
}

/// Largest centered coefficient over a vector of residuals.
pub fn max_norm(v: &[RingElement]) -> BigUint {
    v.iter().map(RingElement::infinity_norm).max().unwrap_or_default()
}

/// Residuals of the near-linear key relations for a group with ideal key
/// `jsk` and randomness `r = Σ r_i`, towards a target with base `a`:
/// `(β + jsk·a_β, ν_1 + jsk·ν_0 + r·g, ν_2 + r·a − jsk·⌊(p/q')g*⌉)`.
pub fn linearity_residuals(
    pp: &PublicParams,
    keys: &JointKeys,
    target: GroupId,
    jsk: &RingElement,
    r: &RingElement,
    encryption_base: &[RingElement],
    relin_base: &[RingElement],
) -> Result<[BigUint; 3]> {
    let relin = keys.relin_towards(target)?;
    let beta: Vec<RingElement> = keys
        .beta
        .iter()
        .zip(encryption_base)
        .map(|(b, a)| b + &(jsk * a))
        .collect();
    let nu1: Vec<RingElement> = relin
        .nu1
        .iter()
        .zip(&relin.nu0)
        .zip(pp.gadget_q())
        .map(|((v1, v0), g)| &(v1 + &(jsk * v0)) + &(r * g))
        .collect();
    let nu2: Vec<RingElement> = relin
        .nu2
        .iter()
        .zip(relin_base)
        .zip(pp.scaled_gadget_star())
        .map(|((v2, a), g)| &(v2 + &(r * a)) - &(jsk * g))
        .collect();
    Ok([max_norm(&beta), max_norm(&nu1), max_norm(&nu2)])
}
