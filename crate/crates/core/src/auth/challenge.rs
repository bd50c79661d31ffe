//! Jointly generated challenge sets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// `S ⊂ {0, …, λ−1}` with exactly `λ/2` elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChallengeSet {
    lambda: usize,
    indices: Vec<usize>,
    /// Digest of the shares the set was derived from.
    provenance: [u8; 32],
}

impl ChallengeSet {
    /// A set given explicitly. Must have `λ/2` distinct indices below `λ`.
    pub fn from_indices(lambda: usize, mut indices: Vec<usize>) -> Result<Self> {
        check_lambda(lambda)?;
        indices.sort_unstable();
        indices.dedup();
        if indices.len() != lambda / 2 || indices.iter().any(|&j| j >= lambda) {
            return Err(Error::InvalidParams(format!(
                "challenge set must hold {} distinct indices below {lambda}",
                lambda / 2
            )));
        }
        let provenance = Sha256::new()
            .chain_update(b"vmghe/explicit-set")
            .chain_update(indices.iter().flat_map(|j| (*j as u64).to_le_bytes()).collect::<Vec<_>>())
            .finalize()
            .into();
        Ok(Self {
            lambda,
            indices,
            provenance,
        })
    }

    /// The degenerate empty set: every slot carries the message. Offers no
    /// protection; for testing only.
    pub fn empty(lambda: usize) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            lambda,
            indices: Vec::new(),
            provenance: [0; 32],
        })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// Sorted indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// Indices outside the set, sorted.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.lambda).filter(|j| !self.contains(*j)).collect()
    }

    pub fn provenance(&self) -> &[u8; 32] {
        &self.provenance
    }
}

fn check_lambda(lambda: usize) -> Result<()> {
    if lambda < 2 || !lambda.is_power_of_two() {
        return Err(Error::InvalidLambda(lambda));
    }
    Ok(())
}

/// One party's random `λ`-bit share.
pub fn setgen_local<R: Rng + ?Sized>(lambda: usize, rng: &mut R) -> Result<Vec<bool>> {
    check_lambda(lambda)?;
    Ok((0..lambda).map(|_| rng.gen()).collect())
}

/// XOR of the shares.
pub fn combine_mask(shares: &[Vec<bool>], lambda: usize) -> Result<Vec<bool>> {
    check_lambda(lambda)?;
    if shares.is_empty() {
        return Err(Error::EmptyRoster);
    }
    let mut mask = vec![false; lambda];
    for s in shares {
        if s.len() != lambda {
            return Err(Error::LengthMismatch {
                expected: lambda,
                got: s.len(),
            });
        }
        for (m, b) in mask.iter_mut().zip(s) {
            *m ^= b;
        }
    }
    Ok(mask)
}

/// Exactly `λ/2` indices: a partial Fisher-Yates shuffle seeded by the mask.
pub fn select_from_mask(mask: &[bool]) -> Result<ChallengeSet> {
    let lambda = mask.len();
    check_lambda(lambda)?;
    let bits: Vec<u8> = mask.iter().map(|&b| b as u8).collect();
    let seed: [u8; 32] = Sha256::new()
        .chain_update(b"vmghe/challenge-set")
        .chain_update((lambda as u64).to_le_bytes())
        .chain_update(&bits)
        .finalize()
        .into();
    let mut rng = ChaCha20Rng::from_seed(seed);
    let mut all: Vec<usize> = (0..lambda).collect();
    let (chosen, _) = all.partial_shuffle(&mut rng, lambda / 2);
    let mut indices = chosen.to_vec();
    indices.sort_unstable();
    Ok(ChallengeSet {
        lambda,
        indices,
        provenance: seed,
    })
}

/// `S` from every party's share.
pub fn setgen_combine(shares: &[Vec<bool>], lambda: usize) -> Result<ChallengeSet> {
    select_from_mask(&combine_mask(shares, lambda)?)
}
