//! CRT slot packing for plaintexts in `R_p`.
//!
//! With `p ≡ 1 (mod 2N)`, `x^N + 1` splits into `N` linear factors mod `p`,
//! so `R_p ≅ Z_p^N`. Slot `i` is the evaluation at the `i`-th root (in the NTT's
//! bit-reversed order); ring addition and multiplication act slot-wise.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::{Domain, RingElement, RnsContext};

/// Packs up to `N` values into the plaintext ring; remaining slots are zero.
pub fn encode_slots(ctx: &Arc<RnsContext>, slots: &[u64]) -> Result<RingElement> {
    if ctx.num_limbs() != 1 {
        return Err(Error::InvalidParams("slot encoding needs a single-prime context".into()));
    }
    let n = ctx.degree();
    if slots.len() > n {
        return Err(Error::TooManySlots {
            lambda: slots.len(),
            slots: n,
        });
    }
    let p = ctx.moduli()[0].value();
    let mut values = vec![0u64; n];
    for (v, &s) in values.iter_mut().zip(slots) {
        *v = s % p;
    }
    let mut el = RingElement::from_limbs(ctx, vec![values], Domain::Ntt)?;
    el.make_coefficient();
    Ok(el)
}

/// All `N` slot values of a plaintext.
pub fn decode_slots(pt: &RingElement) -> Vec<u64> {
    pt.to_ntt().limbs()[0].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slotwise_arithmetic() {
        let ctx = RnsContext::new(16, &[97], &[0, 1]).unwrap();
        let a: Vec<u64> = (0..16).map(|i| (i * 7 + 1) % 97).collect();
        let b: Vec<u64> = (0..16).map(|i| (i * i + 3) % 97).collect();
        let (pa, pb) = (encode_slots(&ctx, &a).unwrap(), encode_slots(&ctx, &b).unwrap());
        assert_eq!(decode_slots(&pa), a);
        let sum: Vec<u64> = a.iter().zip(&b).map(|(x, y)| (x + y) % 97).collect();
        let prod: Vec<u64> = a.iter().zip(&b).map(|(x, y)| (x * y) % 97).collect();
        assert_eq!(decode_slots(&(&pa + &pb)), sum);
        assert_eq!(decode_slots(&(&pa * &pb)), prod);
    }

    #[test]
    fn constants_fill_every_slot() {
        let ctx = RnsContext::new(16, &[97], &[0, 1]).unwrap();
        assert_eq!(decode_slots(&RingElement::constant_u64(&ctx, 5)), vec![5; 16]);
        assert!(encode_slots(&ctx, &[0; 17]).is_err());
    }
}
