use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gadget::{Flavor, GadgetVector};
use crate::params::Preset;
use crate::ring::{round_div, RingElement, RnsContext, SamplerParams};

/// How parties link their keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyMode {
    /// A common uniform vector `a` shared by all parties.
    Crs,
    /// No common vector; groups exchange joint keys instead.
    CrsFree,
}

impl std::fmt::Display for KeyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KeyMode::Crs => "crs",
            KeyMode::CrsFree => "crs_free",
        })
    }
}

impl std::str::FromStr for KeyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crs" => Ok(Self::Crs),
            "crs_free" | "crs-free" => Ok(Self::CrsFree),
            _ => Err(Error::Config(format!("unknown mode {s:?}"))),
        }
    }
}

/// Common reference string: the seed and the vector `a ∈ R_q^{k*}` it expands to.
#[derive(Debug, Clone)]
pub struct Crs {
    pub seed: [u8; 32],
    pub a: Vec<RingElement>,
}

/// Public parameters shared by every party and the evaluator.
#[derive(Debug, Clone)]
pub struct PublicParams {
    preset: Preset,
    mode: KeyMode,
    seed: [u8; 32],
    ctx_q: Arc<RnsContext>,
    ctx_star: Arc<RnsContext>,
    ctx_p: Arc<RnsContext>,
    gadget: GadgetVector,
    gadget_star: GadgetVector,
    gadget_q: Vec<RingElement>,
    scaled_gadget_star: Vec<RingElement>,
    q: BigInt,
    aux_modulus: BigInt,
    p: u64,
    delta: BigInt,
    sampler: SamplerParams,
    crs: Option<Crs>,
}

/// Expands a labelled seed into `len` uniform elements of `ctx`.
pub(crate) fn expand_uniform(ctx: &Arc<RnsContext>, domain: &[u8], parts: &[&[u8]], len: usize) -> Vec<RingElement> {
    let mut h = Sha256::new();
    h.update(domain);
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
    (0..len).map(|_| RingElement::random(ctx, &mut rng)).collect()
}

/// Instantiates public parameters. In CRS mode `a` is expanded from `seed`.
pub fn setup(preset: &Preset, mode: KeyMode, seed: [u8; 32]) -> Result<PublicParams> {
    preset.validate()?;
    let ctx_q = RnsContext::new(preset.degree, &preset.primes, &preset.partition)?;
    let ctx_star = RnsContext::new(preset.degree, &preset.extended_primes(), &preset.extended_partition())?;
    let ctx_p = RnsContext::single_digit(preset.degree, &[preset.plaintext_modulus])?;
    let gadget = GadgetVector::new(&ctx_q, Flavor::Digit)?;
    let gadget_star = GadgetVector::new(&ctx_star, Flavor::Digit)?;

    let q = BigInt::from(ctx_q.modulus().clone());
    let aux: BigUint = preset.aux_primes.iter().map(|&p| BigUint::from(p)).product();
    let aux_modulus = BigInt::from(aux);
    let p = preset.plaintext_modulus;
    let delta = &q / p;

    let gadget_q = gadget.as_ring_elements(&ctx_q);
    // ⌊(p/q') · g*⌉ reduced mod q
    let scaled_gadget_star = gadget_star
        .components()
        .iter()
        .map(|g| {
            let v = round_div(&(BigInt::from(g.clone()) * p), &aux_modulus)?;
            Ok(RingElement::constant(&ctx_q, &v))
        })
        .collect::<Result<Vec<_>>>()?;

    let crs = match mode {
        KeyMode::Crs => Some(Crs {
            seed,
            a: expand_uniform(&ctx_q, b"vmghe/crs", &[&seed], gadget_star.len()),
        }),
        KeyMode::CrsFree => None,
    };

    Ok(PublicParams {
        preset: preset.clone(),
        mode,
        seed,
        ctx_q,
        ctx_star,
        ctx_p,
        gadget,
        gadget_star,
        gadget_q,
        scaled_gadget_star,
        q,
        aux_modulus,
        p,
        delta,
        sampler: preset.sampler_params()?,
        crs,
    })
}

impl PublicParams {
    pub fn preset(&self) -> &Preset {
        &self.preset
    }

    pub fn mode(&self) -> KeyMode {
        self.mode
    }

    pub fn seed(&self) -> &[u8; 32] {
        &self.seed
    }

    /// `R_q`.
    pub fn ctx_q(&self) -> &Arc<RnsContext> {
        &self.ctx_q
    }

    /// `R_{q*}` with `q* = q·q'`; its prime chain extends that of `q`.
    pub fn ctx_star(&self) -> &Arc<RnsContext> {
        &self.ctx_star
    }

    /// `R_p`.
    pub fn ctx_p(&self) -> &Arc<RnsContext> {
        &self.ctx_p
    }

    pub fn gadget(&self) -> &GadgetVector {
        &self.gadget
    }

    pub fn gadget_star(&self) -> &GadgetVector {
        &self.gadget_star
    }

    /// `g` as constants of `R_q`.
    pub fn gadget_q(&self) -> &[RingElement] {
        &self.gadget_q
    }

    /// `⌊(p/q')·g*⌉` as constants of `R_q`.
    pub fn scaled_gadget_star(&self) -> &[RingElement] {
        &self.scaled_gadget_star
    }

    /// `k`.
    pub fn digits(&self) -> usize {
        self.gadget.len()
    }

    /// `k*`.
    pub fn digits_star(&self) -> usize {
        self.gadget_star.len()
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    /// `q'`.
    pub fn aux_modulus(&self) -> &BigInt {
        &self.aux_modulus
    }

    pub fn plaintext_modulus(&self) -> u64 {
        self.p
    }

    /// `Δ = ⌊q/p⌋`.
    pub fn delta(&self) -> &BigInt {
        &self.delta
    }

    pub fn sampler_params(&self) -> &SamplerParams {
        &self.sampler
    }

    pub fn crs(&self) -> Option<&Crs> {
        self.crs.as_ref()
    }

    pub fn lambda(&self) -> usize {
        self.preset.lambda
    }

    pub fn degree(&self) -> usize {
        self.preset.degree
    }

    /// Digest binding every public value; used to tag transcripts.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"vmghe/params");
        h.update(self.preset.to_toml().as_bytes());
        h.update(self.mode.to_string().as_bytes());
        h.update(self.seed);
        h.finalize().into()
    }
}
