use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::context::RnsContext;
use super::element::RingElement;
use crate::error::{Error, Result};

/// Ternary key distribution: `P(-1) = P(1) = (1 - zero)/2`, `P(0) = zero`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TernaryDist {
    pub zero: f64,
}

impl Default for TernaryDist {
    fn default() -> Self {
        Self { zero: 0.5 }
    }
}

/// Distribution parameters shared by all samplers of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub key: TernaryDist,
    /// Standard deviation of the error distribution `D(σ)`.
    pub sigma: f64,
    /// Standard deviation of the smudging distribution `D(σ')`.
    pub smudge_sigma: f64,
}

impl SamplerParams {
    pub fn new(key: TernaryDist, sigma: f64, smudge_sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || !(smudge_sigma > 0.0 && smudge_sigma.is_finite()) {
            return Err(Error::InvalidSampler(format!(
                "standard deviations must be positive, got σ = {sigma}, σ' = {smudge_sigma}"
            )));
        }
        if !(0.0..=1.0).contains(&key.zero) {
            return Err(Error::InvalidSampler(format!("P(0) = {} is not a probability", key.zero)));
        }
        Ok(Self {
            key,
            sigma,
            smudge_sigma,
        })
    }

    /// Per-coefficient bound of a fresh error sample.
    pub fn error_bound(&self) -> f64 {
        tail_cut(self.sigma) as f64
    }

    pub fn smudge_bound(&self) -> f64 {
        tail_cut(self.smudge_sigma) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// `χ`
    Secret,
    /// `D(σ)`
    Error,
    /// `D(σ')`
    Smudge,
    /// `U(R_q)`
    Uniform,
}

fn tail_cut(sigma: f64) -> i64 {
    (6.0 * sigma).floor().max(1.0) as i64
}

/// Seeded sampler. Single owner; clone the seed, not the sampler, for parallel use.
#[derive(Debug, Clone)]
pub struct Sampler {
    params: SamplerParams,
    rng: ChaCha20Rng,
    noiseless: bool,
}

impl Sampler {
    pub fn new(params: SamplerParams, seed: [u8; 32]) -> Self {
        Self {
            params,
            rng: ChaCha20Rng::from_seed(seed),
            noiseless: false,
        }
    }

    pub fn from_u64(params: SamplerParams, seed: u64) -> Self {
        Self {
            params,
            rng: ChaCha20Rng::seed_from_u64(seed),
            noiseless: false,
        }
    }

    /// Degenerate sampler whose error and smudging samples are all zero.
    /// Secrets and uniform samples are unaffected.
    pub fn noiseless(params: SamplerParams, seed: u64) -> Self {
        Self {
            noiseless: true,
            ..Self::from_u64(params, seed)
        }
    }

    pub fn params(&self) -> &SamplerParams {
        &self.params
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    pub fn sample(&mut self, ctx: &Arc<RnsContext>, kind: SampleKind) -> RingElement {
        let n = ctx.degree();
        let coeffs: Vec<i64> = match kind {
            SampleKind::Uniform => return RingElement::random(ctx, &mut self.rng),
            SampleKind::Secret => (0..n).map(|_| self.ternary()).collect(),
            SampleKind::Error | SampleKind::Smudge if self.noiseless => vec![0; n],
            SampleKind::Error => {
                let s = self.params.sigma;
                (0..n).map(|_| self.gaussian(s)).collect()
            }
            SampleKind::Smudge => {
                let s = self.params.smudge_sigma;
                (0..n).map(|_| self.gaussian(s)).collect()
            }
        };
        RingElement::from_i64(ctx, &coeffs).expect("length matches degree")
    }

    pub fn sample_vec(&mut self, ctx: &Arc<RnsContext>, kind: SampleKind, len: usize) -> Vec<RingElement> {
        (0..len).map(|_| self.sample(ctx, kind)).collect()
    }

    fn ternary(&mut self) -> i64 {
        let u: f64 = self.rng.gen();
        let z = self.params.key.zero;
        if u < z {
            0
        } else if u < z + (1.0 - z) / 2.0 {
            -1
        } else {
            1
        }
    }

    /// Discrete Gaussian over `[-6σ, 6σ]` by rejection from the uniform.
    fn gaussian(&mut self, sigma: f64) -> i64 {
        let bound = tail_cut(sigma);
        loop {
            let x: i64 = self.rng.gen_range(-bound..=bound);
            let accept = (-(x * x) as f64 / (2.0 * sigma * sigma)).exp();
            if self.rng.gen::<f64>() < accept {
                return x;
            }
        }
    }
}
