//! Parameter presets and their plain-text (TOML) form.
//!
//! The bundled presets are toy-sized and insecure; they exist to exercise the
//! full pipeline quickly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{is_prime, ntt_primes, SamplerParams, TernaryDist};

/// Everything needed to instantiate public parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub degree: usize,
    /// Primes of the ciphertext modulus `q`.
    pub primes: Vec<u64>,
    /// Digit partition of `primes`.
    pub partition: Vec<usize>,
    /// Primes of the auxiliary modulus `q'` (so `q* = q·q'`).
    pub aux_primes: Vec<u64>,
    /// Digit partition of `aux_primes`; appended to `partition` for `q*`.
    pub aux_partition: Vec<usize>,
    pub plaintext_modulus: u64,
    pub sigma: f64,
    pub smudge_sigma: f64,
    #[serde(default = "default_zero_prob")]
    pub key_zero_probability: f64,
    pub lambda: usize,
    #[serde(default = "default_depth")]
    pub max_depth: usize,
}

fn default_zero_prob() -> f64 {
    0.5
}

fn default_depth() -> usize {
    2
}

const SIGMA: f64 = 3.2;

impl Preset {
    /// `N = 16`, three 17-bit primes for `q`, three more for `q'`, `p = 97`.
    pub fn test_s() -> Self {
        let primes = ntt_primes(17, 16, 6);
        Self::from_chain("TEST-S", 16, &primes[..3], &primes[3..], 97)
    }

    /// `N = 256`, five 30-bit primes for `q`, three more for `q'`, `p = 7681`.
    pub fn test_m() -> Self {
        let primes = ntt_primes(30, 256, 8);
        Self::from_chain("TEST-M", 256, &primes[..5], &primes[5..], 7681)
    }

    fn from_chain(name: &str, degree: usize, q: &[u64], aux: &[u64], p: u64) -> Self {
        Self {
            name: name.into(),
            degree,
            primes: q.to_vec(),
            partition: (0..=q.len()).collect(),
            aux_primes: aux.to_vec(),
            aux_partition: (0..=aux.len()).collect(),
            plaintext_modulus: p,
            sigma: SIGMA,
            smudge_sigma: 64.0 * SIGMA,
            key_zero_probability: default_zero_prob(),
            lambda: 8,
            max_depth: default_depth(),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_uppercase().replace('_', "-").as_str() {
            "TEST-S" => Ok(Self::test_s()),
            "TEST-M" => Ok(Self::test_m()),
            other => Err(Error::Config(format!("unknown preset {other:?}"))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let preset: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        preset.validate()?;
        Ok(preset)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("preset serializes")
    }

    pub fn sampler_params(&self) -> Result<SamplerParams> {
        SamplerParams::new(
            TernaryDist {
                zero: self.key_zero_probability,
            },
            self.sigma,
            self.smudge_sigma,
        )
    }

    /// Prime chain of `q*`: the primes of `q` followed by those of `q'`.
    pub fn extended_primes(&self) -> Vec<u64> {
        self.primes.iter().chain(&self.aux_primes).copied().collect()
    }

    pub fn extended_partition(&self) -> Vec<usize> {
        let offset = self.primes.len();
        self.partition
            .iter()
            .copied()
            .chain(self.aux_partition.iter().skip(1).map(|j| j + offset))
            .collect()
    }

    /// Checks the conditions the scheme relies on: `p` prime with
    /// `p ≡ 1 (mod 2N)` and coprime to `q*`; `λ` a power of two within the slot count.
    pub fn validate(&self) -> Result<()> {
        let p = self.plaintext_modulus;
        if !is_prime(p) || (p - 1) % (2 * self.degree as u64) != 0 {
            return Err(Error::InvalidParams(format!(
                "plaintext modulus {p} must be a prime ≡ 1 mod {}",
                2 * self.degree
            )));
        }
        if self.extended_primes().contains(&p) {
            return Err(Error::InvalidParams("plaintext modulus divides q*".into()));
        }
        if self.aux_primes.is_empty() {
            return Err(Error::InvalidParams("auxiliary modulus q' is empty".into()));
        }
        for a in &self.aux_primes {
            if self.primes.contains(a) {
                return Err(Error::NotCoprime(*a, *a));
            }
        }
        if self.lambda < 2 || !self.lambda.is_power_of_two() {
            return Err(Error::InvalidLambda(self.lambda));
        }
        if self.lambda > self.degree {
            return Err(Error::TooManySlots {
                lambda: self.lambda,
                slots: self.degree,
            });
        }
        self.sampler_params()?;
        Ok(())
    }
}
