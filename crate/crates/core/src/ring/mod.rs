//! Arithmetic in `R_q = Z_q[x]/(x^N + 1)` over a residue number system.

mod context;
mod convert;
mod element;
mod modulus;
mod ntt;
mod sampler;

pub use context::RnsContext;
pub use convert::{
    centered_mod, extend_base, extend_base_reference, rescale_round, round_div, DigitConverter,
};
pub use element::{inner_product, Domain, RingElement};
pub use modulus::{is_prime, ntt_primes, Modulus};
pub use ntt::NttTable;
pub use sampler::{SampleKind, Sampler, SamplerParams, TernaryDist};

/// Canonical bytes of a ring element: limb-major little-endian 64-bit residues.
pub fn element_to_bytes(a: &RingElement) -> Vec<u8> {
    let c = a.to_coefficient();
    let mut out = Vec::with_capacity(8 * c.context().num_limbs() * c.context().degree());
    for limb in c.limbs() {
        for x in limb {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

/// Inverse of [`element_to_bytes`] for a known context.
pub fn element_from_bytes(
    ctx: &std::sync::Arc<RnsContext>,
    bytes: &[u8],
) -> crate::error::Result<RingElement> {
    let n = ctx.degree();
    let expected = 8 * n * ctx.num_limbs();
    if bytes.len() != expected {
        return Err(crate::error::Error::LengthMismatch {
            expected,
            got: bytes.len(),
        });
    }
    let limbs = bytes
        .chunks_exact(8 * n)
        .map(|limb| {
            limb.chunks_exact(8)
                .map(|w| u64::from_le_bytes(w.try_into().unwrap()))
                .collect()
        })
        .collect();
    RingElement::from_limbs(ctx, limbs, Domain::Coefficient)
}
