//! Replication-encoding homomorphic authenticator.
//!
//! A message `m` is spread over `λ` plaintext slots: slots outside the
//! challenge set `S` carry `m`, slots in `S` carry `F(τ, j)`. Evaluation acts
//! slot-wise, so a correct result carries `f(m_1, …)` in every replica slot and
//! `f(F(τ_1, j), …)` in every challenge slot.

use std::collections::BTreeMap;

use super::challenge::ChallengeSet;
use super::program::{Evaluator, Label, LabeledProgram, MAX_LABEL_LEN};
use super::tags::{expected_tag, hash_tree_eval, Prf, Tag};
use crate::encoding::{decode_slots, encode_slots};
use crate::error::{Error, Result};
use crate::ring::{RingElement, Sampler};
use crate::scheme::{
    add_plain, encrypt, eval_add, eval_mul_any, ideal_decrypt, mul_scalar, EncryptionKey, GroupId, IdealSecretKey,
    KeySet, MultigroupCiphertext, PublicParams,
};

/// `γ = (ct, η)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Authenticator {
    pub ct: MultigroupCiphertext,
    pub tag: Tag,
}

/// The `λ` slot values authenticating `m` under `label`.
pub fn extended_message(prf: &Prf, challenge: &ChallengeSet, m: u64, label: &[u8]) -> Vec<u64> {
    let p = prf.plaintext_modulus();
    (0..challenge.lambda())
        .map(|j| if challenge.contains(j) { prf.challenge(label, j) } else { m % p })
        .collect()
}

/// `Auth(m, τ)` without a session registry.
pub fn auth(
    pp: &PublicParams,
    prf: &Prf,
    challenge: &ChallengeSet,
    m: u64,
    label: &[u8],
    jek: &EncryptionKey,
    group: GroupId,
    sampler: &mut Sampler,
) -> Result<Authenticator> {
    if label.len() > MAX_LABEL_LEN {
        return Err(Error::LabelTooLong);
    }
    if challenge.lambda() > pp.degree() {
        return Err(Error::TooManySlots {
            lambda: challenge.lambda(),
            slots: pp.degree(),
        });
    }
    let slots = extended_message(prf, challenge, m, label);
    let pt = encode_slots(pp.ctx_p(), &slots)?;
    Ok(Authenticator {
        ct: encrypt(pp, jek, group, &pt, sampler)?,
        tag: prf.tag(label),
    })
}

/// Authentication state of one session: the PRF, the challenge set, and every
/// label used so far.
#[derive(Debug, Clone)]
pub struct AuthSession {
    prf: Prf,
    challenge: ChallengeSet,
    registry: BTreeMap<Label, u64>,
}

impl AuthSession {
    pub fn new(prf: Prf, challenge: ChallengeSet) -> Self {
        Self {
            prf,
            challenge,
            registry: BTreeMap::new(),
        }
    }

    pub fn prf(&self) -> &Prf {
        &self.prf
    }

    pub fn challenge(&self) -> &ChallengeSet {
        &self.challenge
    }

    /// The message registered under `label`, if any.
    pub fn registered(&self, label: &[u8]) -> Option<u64> {
        self.registry.get(label).copied()
    }

    /// Authenticates `m` under `label`; a label may not be reused for another message.
    pub fn auth(
        &mut self,
        pp: &PublicParams,
        m: u64,
        label: &[u8],
        jek: &EncryptionKey,
        group: GroupId,
        sampler: &mut Sampler,
    ) -> Result<Authenticator> {
        let m = m % pp.plaintext_modulus();
        if let Some(&prev) = self.registry.get(label) {
            if prev != m {
                return Err(Error::LabelReuse(String::from_utf8_lossy(label).into_owned()));
            }
        }
        let out = auth(pp, &self.prf, &self.challenge, m, label, jek, group, sampler)?;
        self.registry.insert(label.to_vec(), m);
        Ok(out)
    }
}

#[derive(Clone)]
enum Value {
    Plain(u64),
    Cipher(MultigroupCiphertext),
}

struct Homomorphic<'a> {
    pp: &'a PublicParams,
    inputs: &'a [Authenticator],
    keys: &'a KeySet,
}

impl Homomorphic<'_> {
    fn plain(&self, c: u64) -> RingElement {
        RingElement::constant_u64(self.pp.ctx_p(), c % self.pp.plaintext_modulus())
    }
}

impl Evaluator for Homomorphic<'_> {
    type Value = Value;

    fn input(&mut self, index: usize) -> Result<Value> {
        Ok(Value::Cipher(self.inputs[index].ct.clone()))
    }

    fn constant(&mut self, c: u64) -> Result<Value> {
        Ok(Value::Plain(c % self.pp.plaintext_modulus()))
    }

    fn add(&mut self, a: &Value, b: &Value) -> Result<Value> {
        let p = self.pp.plaintext_modulus();
        Ok(match (a, b) {
            (Value::Plain(x), Value::Plain(y)) => Value::Plain((x + y) % p),
            (Value::Cipher(c), Value::Plain(k)) | (Value::Plain(k), Value::Cipher(c)) => {
                Value::Cipher(add_plain(self.pp, c, &self.plain(*k))?)
            }
            (Value::Cipher(x), Value::Cipher(y)) => Value::Cipher(eval_add(x, y)?),
        })
    }

    fn mul(&mut self, a: &Value, b: &Value) -> Result<Value> {
        let p = self.pp.plaintext_modulus();
        Ok(match (a, b) {
            (Value::Plain(x), Value::Plain(y)) => Value::Plain(((*x as u128 * *y as u128) % p as u128) as u64),
            (Value::Cipher(c), Value::Plain(k)) | (Value::Plain(k), Value::Cipher(c)) => {
                Value::Cipher(mul_scalar(self.pp, c, *k))
            }
            (Value::Cipher(x), Value::Cipher(y)) => Value::Cipher(eval_mul_any(self.pp, x, y, self.keys)?),
        })
    }
}

/// Evaluates `program` over ciphertexts, without a tag.
pub fn eval_ciphertexts(
    pp: &PublicParams,
    program: &LabeledProgram,
    inputs: &[Authenticator],
    keys: &KeySet,
) -> Result<MultigroupCiphertext> {
    if inputs.len() != program.labels().len() {
        return Err(Error::LengthMismatch {
            expected: program.labels().len(),
            got: inputs.len(),
        });
    }
    let budget = pp.preset().max_depth;
    if program.depth() > budget {
        return Err(Error::DepthExceeded {
            depth: program.depth(),
            budget,
        });
    }
    let mut ev = Homomorphic { pp, inputs, keys };
    match program.circuit().evaluate(&mut ev)? {
        Value::Cipher(ct) => Ok(ct),
        Value::Plain(k) => add_plain(pp, &MultigroupCiphertext::zero(pp, Vec::new())?, &ev.plain(k)),
    }
}

/// `Eval(f, Γ)`: the evaluated ciphertext with tag `f^H(η_1, …, η_n)`.
pub fn eval_authenticated(
    pp: &PublicParams,
    program: &LabeledProgram,
    inputs: &[Authenticator],
    keys: &KeySet,
) -> Result<Authenticator> {
    let ct = eval_ciphertexts(pp, program, inputs, keys)?;
    let tags: Vec<Tag> = inputs.iter().map(|a| a.tag).collect();
    Ok(Authenticator {
        ct,
        tag: hash_tree_eval(program, &tags)?,
    })
}

/// Why verification failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    TagMismatch,
    ChallengeMismatch,
    ReplicaMismatch,
    DecryptionFailure(String),
}

impl RejectReason {
    pub fn as_str(&self) -> &str {
        match self {
            Self::TagMismatch => "tag-mismatch",
            Self::ChallengeMismatch => "challenge-mismatch",
            Self::ReplicaMismatch => "replica-mismatch",
            Self::DecryptionFailure(_) => "decryption-failure",
        }
    }
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::DecryptionFailure(e) => write!(f, "decryption-failure ({e})"),
            other => f.write_str(other.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept(u64),
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Self::Accept(_))
    }
}

/// How the verifier obtains the plaintext of the result.
pub trait DecryptionPath {
    fn decrypt(&mut self, pp: &PublicParams, ct: &MultigroupCiphertext) -> Result<RingElement>;
}

/// Decryption with the ideal group keys; for tests.
pub struct IdealDecryption<'a>(pub &'a [IdealSecretKey]);

impl DecryptionPath for IdealDecryption<'_> {
    fn decrypt(&mut self, pp: &PublicParams, ct: &MultigroupCiphertext) -> Result<RingElement> {
        ideal_decrypt(pp, ct, self.0)
    }
}

/// `f(F(τ_1, j), …, F(τ_n, j))` for every `j ∈ S`.
pub fn expected_challenges(program: &LabeledProgram, challenge: &ChallengeSet, prf: &Prf) -> Result<Vec<(usize, u64)>> {
    challenge
        .indices()
        .iter()
        .map(|&j| {
            let inputs: Vec<u64> = program.labels().iter().map(|l| prf.challenge(l, j)).collect();
            Ok((j, program.circuit().eval_mod(&inputs, prf.plaintext_modulus())?))
        })
        .collect()
}

/// Decides whether the slot values of a decrypted result are consistent.
pub fn check_slots(slots: &[u64], challenge: &ChallengeSet, expected: &[(usize, u64)]) -> Verdict {
    if expected.iter().any(|&(j, r)| slots.get(j) != Some(&r)) {
        return Verdict::Reject(RejectReason::ChallengeMismatch);
    }
    let replicas = challenge.complement();
    let value = replicas.first().map(|&j| slots[j]).unwrap_or(0);
    if replicas.iter().any(|&j| slots[j] != value) {
        return Verdict::Reject(RejectReason::ReplicaMismatch);
    }
    Verdict::Accept(value)
}

/// `Ver(P, γ)`.
pub fn verify(
    pp: &PublicParams,
    program: &LabeledProgram,
    result: &Authenticator,
    challenge: &ChallengeSet,
    prf: &Prf,
    path: &mut dyn DecryptionPath,
) -> Result<Verdict> {
    let expected = expected_challenges(program, challenge, prf)?;
    if expected_tag(program, prf)? != result.tag {
        return Ok(Verdict::Reject(RejectReason::TagMismatch));
    }
    let pt = match path.decrypt(pp, &result.ct) {
        Ok(pt) => pt,
        Err(e @ (Error::Timeout { .. } | Error::MissingShare { .. } | Error::DuplicateShare { .. } | Error::ForeignShare)) => {
            return Ok(Verdict::Reject(RejectReason::DecryptionFailure(e.to_string())))
        }
        Err(e) => return Err(e),
    };
    Ok(check_slots(&decode_slots(&pt), challenge, &expected))
}
