//! Homomorphic product fused with relinearization.
//!
//! For `ct = (c_0, …, c_n)` and `ct' = (c'_0, …, c'_n)` over a common roster:
//!
//! ```text
//! (a) c''_j = ⌊(q'/q)·c'_j⌉                      over q*
//! (b) c*_0  = ⌊(p/q')·c_0·c''_0⌉                 mod q
//! (c) c*_j  = ⌊(p/q')·(c_0·c''_j + c_j·c''_0)⌉   mod q
//! (d) z     = Σ_i h*(c_i) ⊙ ν_{2,i}              (per target j without a CRS)
//! (e) w     = Σ_j h*(c''_j) ⊙ β_j
//! (f) c*_j += ⟨h*(c''_j), z⟩
//!     c*_0 += ⟨h(y_i), ν_{1,i}⟩, c*_i += ⟨h(y_i), ν_{0,i}⟩  with y_i = ⟨h*(c_i), w⟩
//! ```
//!
//! Decrypting `ct*` under `(1, jsk_1, …, jsk_n)` yields `Δ·M·M'` plus noise.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::ciphertext::{align, MultigroupCiphertext};
use super::keys::{GroupId, JointKeys, RelinKey};
use super::params::{KeyMode, PublicParams};
use crate::error::{Error, Result};
use crate::ring::{extend_base, rescale_round, RingElement};

/// Joint keys of every group, indexed by group id.
pub type KeySet = BTreeMap<GroupId, JointKeys>;

fn to_ntt_all(v: &[RingElement]) -> Vec<RingElement> {
    v.iter().map(RingElement::to_ntt).collect()
}

fn dot(a: &[RingElement], b: &[RingElement]) -> RingElement {
    let mut acc = &a[0] * &b[0];
    for t in 1..a.len() {
        acc += &(&a[t] * &b[t]);
    }
    acc
}

fn lookup(keys: &KeySet, group: GroupId) -> Result<&JointKeys> {
    keys.get(&group).ok_or(Error::MissingKey(group))
}

/// Product in CRS mode.
pub fn eval_mul(
    pp: &PublicParams,
    a: &MultigroupCiphertext,
    b: &MultigroupCiphertext,
    keys: &KeySet,
) -> Result<MultigroupCiphertext> {
    if pp.mode() != KeyMode::Crs {
        return Err(Error::WrongMode("crs"));
    }
    multiply(pp, a, b, keys)
}

/// Product in CRS-free mode, relinearizing with cross-group keys.
pub fn eval_mul_crsfree(
    pp: &PublicParams,
    a: &MultigroupCiphertext,
    b: &MultigroupCiphertext,
    keys: &KeySet,
) -> Result<MultigroupCiphertext> {
    if pp.mode() != KeyMode::CrsFree {
        return Err(Error::WrongMode("crs_free"));
    }
    multiply(pp, a, b, keys)
}

/// Dispatches on the parameter mode.
pub fn eval_mul_any(
    pp: &PublicParams,
    a: &MultigroupCiphertext,
    b: &MultigroupCiphertext,
    keys: &KeySet,
) -> Result<MultigroupCiphertext> {
    multiply(pp, a, b, keys)
}

fn multiply(
    pp: &PublicParams,
    a: &MultigroupCiphertext,
    b: &MultigroupCiphertext,
    keys: &KeySet,
) -> Result<MultigroupCiphertext> {
    let (a, b) = align(a, b)?;
    if !a.constant_term().context().same_ring(pp.ctx_q()) {
        return Err(Error::ContextMismatch);
    }
    let roster = a.roster().to_vec();
    let n = roster.len();
    let group_keys: Vec<&JointKeys> = roster.iter().map(|&g| lookup(keys, g)).collect::<Result<_>>()?;
    for k in &group_keys {
        if k.mode != pp.mode() {
            return Err(Error::WrongMode(match pp.mode() {
                KeyMode::Crs => "crs",
                KeyMode::CrsFree => "crs_free",
            }));
        }
    }
    // Relinearization keys: relin[i][j] is group i's key towards group j.
    let relin: Vec<Vec<&RelinKey>> = group_keys
        .iter()
        .map(|k| roster.iter().map(|&t| k.relin_towards(t)).collect::<Result<_>>())
        .collect::<Result<_>>()?;

    let (ctx_q, ctx_star) = (pp.ctx_q(), pp.ctx_star());
    let p = BigInt::from(pp.plaintext_modulus());

    // (a)
    let cpp: Vec<RingElement> = b
        .components()
        .iter()
        .map(|c| rescale_round(c, pp.aux_modulus(), pp.q(), ctx_star))
        .collect::<Result<_>>()?;
    let cs: Vec<RingElement> = a
        .components()
        .iter()
        .map(|c| extend_base(c, ctx_star))
        .collect::<Result<_>>()?;
    let cs_ntt = to_ntt_all(&cs);
    let cpp_ntt = to_ntt_all(&cpp);

    // (b), (c): products over q* then scaled down to q
    let mut out = Vec::with_capacity(n + 1);
    out.push(rescale_round(&(&cs_ntt[0] * &cpp_ntt[0]), &p, pp.aux_modulus(), ctx_q)?);
    for j in 1..=n {
        let mut x = &cs_ntt[0] * &cpp_ntt[j];
        x += &(&cs_ntt[j] * &cpp_ntt[0]);
        out.push(rescale_round(&x, &p, pp.aux_modulus(), ctx_q)?);
    }
    let mut out: Vec<RingElement> = out.into_iter().map(|c| c.to_ntt()).collect();

    if n > 0 {
        let star = pp.gadget_star();
        let decompose = |c: &RingElement| -> Result<Vec<RingElement>> {
            Ok(to_ntt_all(&star.decompose_into(c, ctx_q)?.parts))
        };
        let hc: Vec<Vec<RingElement>> = cs[1..].iter().map(decompose).collect::<Result<_>>()?;
        let hcpp: Vec<Vec<RingElement>> = cpp[1..].iter().map(decompose).collect::<Result<_>>()?;
        let nu2: Vec<Vec<Vec<RingElement>>> = relin
            .iter()
            .map(|row| row.iter().map(|k| to_ntt_all(&k.nu2)).collect())
            .collect();

        // (d) then (f)(i). With a CRS every row of `nu2` repeats the same key,
        // so z is the same for every j.
        let mut z_shared: Option<Vec<RingElement>> = None;
        for j in 0..n {
            let z = match (pp.mode(), &z_shared) {
                (KeyMode::Crs, Some(z)) => z.clone(),
                _ => {
                    let z: Vec<RingElement> = (0..pp.digits_star())
                        .map(|t| {
                            let mut acc = &hc[0][t] * &nu2[0][j][t];
                            for i in 1..n {
                                acc += &(&hc[i][t] * &nu2[i][j][t]);
                            }
                            acc
                        })
                        .collect();
                    if pp.mode() == KeyMode::Crs {
                        z_shared = Some(z.clone());
                    }
                    z
                }
            };
            out[j + 1] += &dot(&hcpp[j], &z);
        }

        // (e)
        let w: Vec<RingElement> = (0..pp.digits_star())
            .map(|t| {
                let mut acc = RingElement::zero(ctx_q).to_ntt();
                for (j, k) in group_keys.iter().enumerate() {
                    acc += &(&hcpp[j][t] * &k.beta[t].to_ntt());
                }
                acc
            })
            .collect();

        // (f)(ii)
        for i in 0..n {
            let y = dot(&hc[i], &w).to_coefficient();
            let hy = to_ntt_all(&pp.gadget().decompose(&y)?.parts);
            let own = relin[i][i];
            out[0] += &dot(&hy, &to_ntt_all(&own.nu1));
            out[i + 1] += &dot(&hy, &to_ntt_all(&own.nu0));
        }
    }

    MultigroupCiphertext::new(out, roster)
}
