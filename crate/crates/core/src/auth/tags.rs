//! Keyed PRF, collision-resistant hash and circuit hash trees.

use hmac::{Hmac, Mac};
use sha2::{Digest, Sha256};

use super::program::{Evaluator, LabeledProgram};
use crate::error::{Error, Result};

pub type Tag = [u8; 32];

/// HMAC-SHA256 keyed PRF, scoped to one session.
#[derive(Clone)]
pub struct Prf {
    key: [u8; 32],
    session: Vec<u8>,
    p: u64,
}

impl std::fmt::Debug for Prf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Prf").field("session", &hex::encode(&self.session)).finish_non_exhaustive()
    }
}

impl Prf {
    pub fn new(key: [u8; 32], session: impl Into<Vec<u8>>, p: u64) -> Self {
        Self {
            key,
            session: session.into(),
            p,
        }
    }

    /// Key derived from a master seed.
    pub fn from_seed(seed: &[u8; 32], session: impl Into<Vec<u8>>, p: u64) -> Self {
        let key: [u8; 32] = Sha256::new().chain_update(b"vmghe/prf-key").chain_update(seed).finalize().into();
        Self::new(key, session, p)
    }

    pub fn session(&self) -> &[u8] {
        &self.session
    }

    pub fn plaintext_modulus(&self) -> u64 {
        self.p
    }

    fn mac(&self, domain: &[u8], label: &[u8], extra: &[u8]) -> [u8; 32] {
        let mut m = Hmac::<Sha256>::new_from_slice(&self.key).expect("any key length");
        for part in [domain, &self.session, label, extra] {
            m.update(&(part.len() as u64).to_le_bytes());
            m.update(part);
        }
        m.finalize().into_bytes().into()
    }

    /// `F(τ)`: the leaf tag of label `τ`.
    pub fn tag(&self, label: &[u8]) -> Tag {
        self.mac(b"tag", label, &[])
    }

    /// `F(τ, j) ∈ Z_p`, by rejection sampling on 64-bit blocks.
    pub fn challenge(&self, label: &[u8], slot: usize) -> u64 {
        let limit = u64::MAX - u64::MAX % self.p;
        for counter in 0u64.. {
            let mut extra = (slot as u64).to_le_bytes().to_vec();
            extra.extend_from_slice(&counter.to_le_bytes());
            let block = self.mac(b"challenge", label, &extra);
            for w in block.chunks_exact(8) {
                let x = u64::from_le_bytes(w.try_into().unwrap());
                if x < limit {
                    return x % self.p;
                }
            }
        }
        unreachable!()
    }
}

/// SHA-256 with domain separation per node type.
pub struct Crhf;

impl Crhf {
    pub fn add(a: &Tag, b: &Tag) -> Tag {
        Self::node(b"add", a, b)
    }

    pub fn mul(a: &Tag, b: &Tag) -> Tag {
        Self::node(b"mul", a, b)
    }

    pub fn constant(c: u64) -> Tag {
        Sha256::new()
            .chain_update(b"vmghe/const")
            .chain_update(c.to_le_bytes())
            .finalize()
            .into()
    }

    fn node(kind: &[u8], a: &Tag, b: &Tag) -> Tag {
        Sha256::new()
            .chain_update(b"vmghe/")
            .chain_update(kind)
            .chain_update(a)
            .chain_update(b)
            .finalize()
            .into()
    }
}

struct HashTree<'a> {
    leaves: &'a [Tag],
}

impl Evaluator for HashTree<'_> {
    type Value = Tag;
    fn input(&mut self, index: usize) -> Result<Tag> {
        Ok(self.leaves[index])
    }
    fn constant(&mut self, c: u64) -> Result<Tag> {
        Ok(Crhf::constant(c))
    }
    fn add(&mut self, a: &Tag, b: &Tag) -> Result<Tag> {
        Ok(Crhf::add(a, b))
    }
    fn mul(&mut self, a: &Tag, b: &Tag) -> Result<Tag> {
        Ok(Crhf::mul(a, b))
    }
}

/// `f^H(η_1, …, η_n)`: leaves take the tags, gates hash their operands.
pub fn hash_tree_eval(program: &LabeledProgram, leaves: &[Tag]) -> Result<Tag> {
    if leaves.len() != program.labels().len() {
        return Err(Error::LengthMismatch {
            expected: program.labels().len(),
            got: leaves.len(),
        });
    }
    program.circuit().evaluate(&mut HashTree { leaves })
}

/// `f^H(F(τ_1), …, F(τ_n))` recomputed from the labels.
pub fn expected_tag(program: &LabeledProgram, prf: &Prf) -> Result<Tag> {
    let leaves: Vec<Tag> = program.labels().iter().map(|l| prf.tag(l)).collect();
    hash_tree_eval(program, &leaves)
}
