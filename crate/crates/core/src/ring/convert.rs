//! Exact rescaling and residue-base conversion.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::context::RnsContext;
use super::element::{Domain, RingElement};
use super::modulus::Modulus;
use crate::error::{Error, Result};

/// `⌊x / d⌉` with ties rounded away from zero.
pub fn round_div(x: &BigInt, d: &BigInt) -> Result<BigInt> {
    if d.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let negative = x.is_negative() != d.is_negative();
    let (xa, da) = (x.abs(), d.abs());
    let r = (xa * 2u32 + &da) / (da * 2u32);
    Ok(if negative { -r } else { r })
}

/// `⌊(num/den) · lift(a)⌉` reduced into `target`, where `lift` is the
/// centered representative of each coefficient.
pub fn rescale_round(
    a: &RingElement,
    num: &BigInt,
    den: &BigInt,
    target: &Arc<RnsContext>,
) -> Result<RingElement> {
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    if a.context().degree() != target.degree() {
        return Err(Error::ContextMismatch);
    }
    let coeffs = a
        .to_bigint()
        .iter()
        .map(|c| round_div(&(c * num), den))
        .collect::<Result<Vec<_>>>()?;
    RingElement::from_bigint(target, &coeffs)
}

/// Converts one residue digit (a set of source primes with product `Q`) to
/// the centered representative `[a]_Q` modulo arbitrary target moduli.
///
/// With `y_j = [a_j · (Q/q_j)^{-1}]_{q_j}`,
/// `[a]_Q = Σ y_j · (Q/q_j) − Q · ⌊Σ y_j / q_j⌉`, and the identity holds over
/// the integers so it can be evaluated modulo any target.
#[derive(Debug, Clone)]
pub struct DigitConverter {
    source: Vec<Modulus>,
    targets: Vec<Modulus>,
    /// `[(Q/q_j)^{-1}]_{q_j}`.
    inv_cofactor: Vec<u64>,
    /// `1 / q_j` as a float.
    recip: Vec<f64>,
    /// `[Q/q_j]_t`, indexed `[t][j]`.
    cofactor_mod_target: Vec<Vec<u64>>,
    /// `[Q]_t`.
    q_mod_target: Vec<u64>,
    /// `Q/q_j` exactly, for the tie fallback.
    cofactor: Vec<BigUint>,
    digit_modulus: BigUint,
}

// Distance from one half below which the float estimate is re-checked exactly.
const TIE_MARGIN: f64 = 1e-6;

impl DigitConverter {
    pub fn new(source: &[Modulus], targets: &[u64]) -> Result<Self> {
        let digit_modulus: BigUint = source.iter().map(|m| BigUint::from(m.value())).product();
        let cofactor: Vec<BigUint> = source.iter().map(|m| &digit_modulus / m.value()).collect();
        let inv_cofactor = source
            .iter()
            .zip(&cofactor)
            .map(|(m, c)| {
                m.inv((c % m.value()).to_u64().unwrap())
                    .ok_or(Error::NotCoprime(m.value(), m.value()))
            })
            .collect::<Result<Vec<_>>>()?;
        let targets = targets
            .iter()
            .map(|&t| Modulus::new(t))
            .collect::<Result<Vec<_>>>()?;
        let cofactor_mod_target = targets
            .iter()
            .map(|t| cofactor.iter().map(|c| (c % t.value()).to_u64().unwrap()).collect())
            .collect();
        let q_mod_target = targets
            .iter()
            .map(|t| (&digit_modulus % t.value()).to_u64().unwrap())
            .collect();
        Ok(Self {
            recip: source.iter().map(|m| 1.0 / m.value() as f64).collect(),
            source: source.to_vec(),
            targets,
            inv_cofactor,
            cofactor_mod_target,
            q_mod_target,
            cofactor,
            digit_modulus,
        })
    }

    pub fn digit_modulus(&self) -> &BigUint {
        &self.digit_modulus
    }

    /// Converts one coefficient given its residues mod the source primes.
    /// Writes one value per target into `out`.
    pub fn convert(&self, residues: &[u64], out: &mut [u64]) {
        debug_assert_eq!(residues.len(), self.source.len());
        let mut y = [0u64; 16];
        let y = if self.source.len() <= 16 {
            &mut y[..self.source.len()]
        } else {
            return self.convert_slow(residues, out);
        };
        let mut v = 0.0f64;
        for (j, m) in self.source.iter().enumerate() {
            y[j] = m.mul(residues[j], self.inv_cofactor[j]);
            v += y[j] as f64 * self.recip[j];
        }
        let k = self.round_estimate(v, y);
        for (t_idx, t) in self.targets.iter().enumerate() {
            let mut acc = 0u64;
            for (j, &yj) in y.iter().enumerate() {
                acc = t.add(acc, t.mul(yj % t.value(), self.cofactor_mod_target[t_idx][j]));
            }
            out[t_idx] = t.sub(acc, t.mul(k % t.value(), self.q_mod_target[t_idx]));
        }
    }

    fn convert_slow(&self, residues: &[u64], out: &mut [u64]) {
        let y: Vec<u64> = self
            .source
            .iter()
            .enumerate()
            .map(|(j, m)| m.mul(residues[j], self.inv_cofactor[j]))
            .collect();
        let v: f64 = y.iter().zip(&self.recip).map(|(&a, r)| a as f64 * r).sum();
        let k = self.round_estimate(v, &y);
        for (t_idx, t) in self.targets.iter().enumerate() {
            let mut acc = 0u64;
            for (j, &yj) in y.iter().enumerate() {
                acc = t.add(acc, t.mul(yj % t.value(), self.cofactor_mod_target[t_idx][j]));
            }
            out[t_idx] = t.sub(acc, t.mul(k % t.value(), self.q_mod_target[t_idx]));
        }
    }

    /// `⌊Σ y_j / q_j⌉`, exact: the float estimate is only trusted away from ties.
    fn round_estimate(&self, v: f64, y: &[u64]) -> u64 {
        let frac = v - v.floor();
        if (frac - 0.5).abs() > TIE_MARGIN {
            return v.round() as u64;
        }
        let s: BigUint = y.iter().zip(&self.cofactor).map(|(&a, c)| c * a).sum();
        // round half up; Q is odd, so an exact tie cannot occur
        ((s * 2u32 + &self.digit_modulus) / (&self.digit_modulus * 2u32))
            .to_u64()
            .unwrap()
    }
}

/// Base extension of `a` from its context into `target`, whose prime chain
/// must extend `a`'s. The extension carries the centered representative.
pub fn extend_base(a: &RingElement, target: &Arc<RnsContext>) -> Result<RingElement> {
    let src_ctx = a.context();
    if !target.extends(src_ctx) {
        return Err(Error::ContextMismatch);
    }
    let extra: Vec<u64> = target.primes()[src_ctx.num_limbs()..].to_vec();
    let conv = DigitConverter::new(src_ctx.moduli(), &extra)?;
    let src = a.to_coefficient();
    let mut limbs = src.limbs().to_vec();
    let mut ext = vec![vec![0u64; target.degree()]; extra.len()];
    let mut residues = vec![0u64; src_ctx.num_limbs()];
    let mut out = vec![0u64; extra.len()];
    for c in 0..target.degree() {
        for (j, limb) in src.limbs().iter().enumerate() {
            residues[j] = limb[c];
        }
        conv.convert(&residues, &mut out);
        for (t, v) in out.iter().enumerate() {
            ext[t][c] = *v;
        }
    }
    limbs.extend(ext);
    RingElement::from_limbs(target, limbs, Domain::Coefficient)
}

/// Big-integer reference for [`extend_base`]: centered lift then reduction.
pub fn extend_base_reference(a: &RingElement, target: &Arc<RnsContext>) -> Result<RingElement> {
    RingElement::from_bigint(target, &a.to_bigint())
}

/// `[c]_m` for a big integer, centered in `(-m/2, m/2]`.
pub fn centered_mod(c: &BigInt, m: &BigUint) -> BigInt {
    let m = BigInt::from(m.clone());
    let r = c.mod_floor(&m);
    if r.clone() * 2 > m {
        r - m
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::element::reduce_bigint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tie_rule() {
        let d = BigInt::from(2);
        assert_eq!(round_div(&BigInt::from(7), &d).unwrap(), BigInt::from(4));
        assert_eq!(round_div(&BigInt::from(-7), &d).unwrap(), BigInt::from(-4));
        assert_eq!(round_div(&BigInt::from(5), &BigInt::from(3)).unwrap(), BigInt::from(2));
        assert_eq!(round_div(&BigInt::from(1), &BigInt::zero()), Err(Error::ZeroDenominator));
    }

    #[test]
    fn rescale_scalar_half() {
        let ctx = RnsContext::new(4, &[17, 97], &[0, 1, 2]).unwrap();
        let a = RingElement::constant_u64(&ctx, 7);
        let r = rescale_round(&a, &BigInt::from(1), &BigInt::from(2), &ctx).unwrap();
        assert_eq!(r.to_bigint()[0], BigInt::from(4));
    }

    #[test]
    fn converter_matches_centered_lift() {
        let primes = [7681u64, 12289, 40961];
        let source: Vec<Modulus> = primes.iter().map(|&p| Modulus::new(p).unwrap()).collect();
        let conv = DigitConverter::new(&source, &[97, 65537, 1 << 40]).unwrap();
        let q = conv.digit_modulus().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let half = &q >> 1u32;
        let mut samples: Vec<BigUint> = (0..500).map(|_| BigUint::from(rng.gen::<u64>()) % &q).collect();
        // values straddling ±Q/2 exercise the exact fallback
        samples.extend([half.clone(), &half + 1u32, &half - 1u32, BigUint::zero(), &q - 1u32]);
        for x in samples {
            let residues: Vec<u64> = primes.iter().map(|&p| (&x % p).to_u64().unwrap()).collect();
            let mut out = [0u64; 3];
            conv.convert(&residues, &mut out);
            let centered = centered_mod(&BigInt::from(x), &q);
            for (o, t) in out.iter().zip([97u64, 65537, 1 << 40]) {
                assert_eq!(*o, reduce_bigint(&centered, t));
            }
        }
    }
}
