mod common;

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use vmghe::params::Preset;
use vmghe::ring::{RingElement, Sampler};
use vmghe::scheme::*;
use vmghe::Error;

fn params(preset: Preset, mode: KeyMode) -> PublicParams {
    setup(&preset, mode, [9; 32]).unwrap()
}

fn enc(pp: &PublicParams, groups: &common::Groups, g: GroupId, m: &RingElement, s: &mut Sampler) -> MultigroupCiphertext {
    encrypt(pp, &groups.keys[&g].jek, g, m, s).unwrap()
}

fn scalar(pp: &PublicParams, v: u64) -> RingElement {
    RingElement::constant_u64(pp.ctx_p(), v)
}

fn bound(pp: &PublicParams, parties: usize) -> BigUint {
    BigUint::from(parties as u64 * pp.sampler_params().error_bound() as u64)
}

#[test]
fn noiseless_share_is_exact() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    let mut s = Sampler::noiseless(*pp.sampler_params(), 4);
    let out = keygen_party(&pp, 0, &mut s).unwrap();
    let sk = out.state.secret_key().element();
    for (b, a) in out.share.b.iter().zip(&pp.crs().unwrap().a) {
        assert_eq!(b, &-&(sk * a));
    }
    assert_eq!(out.ek.b0, out.share.b[0]);
}

#[test]
fn party_shares_are_near_linear() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 5);
    let a = &pp.crs().unwrap().a;
    for _ in 0..100 {
        let out = keygen_party(&pp, 3, &mut s).unwrap();
        let sk = out.state.secret_key().element();
        let r = out.state.relin_randomness();
        assert!(sk.to_i64().unwrap().iter().all(|c| (-1..=1).contains(c)));
        let jk = aggregate_group(&pp, &[(0, &out.share)]).unwrap();
        let res = linearity_residuals(&pp, &jk, 3, sk, r, a, a).unwrap();
        for x in res {
            assert!(x <= bound(&pp, 1), "{x}");
        }
    }
}

#[test]
fn crs_free_contributions_differ() {
    let pp = params(Preset::test_s(), KeyMode::CrsFree);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 6);
    let (_, c1) = keygen_party_crs_free(&pp, 0, &mut s).unwrap();
    let (_, c2) = keygen_party_crs_free(&pp, 0, &mut s).unwrap();
    assert_ne!(c1.a, c2.a);
    assert!(matches!(keygen_party(&pp, 0, &mut s), Err(Error::WrongMode(_))));
}

#[test]
fn aggregation_sums_shares() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 7);
    let p1 = keygen_party(&pp, 1, &mut s).unwrap();
    let single = aggregate_group(&pp, &[(10, &p1.share)]).unwrap();
    assert_eq!(single.beta, p1.share.b);
    assert_eq!(single.own_relin().unwrap(), &p1.share.relin);
    let p2 = keygen_party(&pp, 1, &mut s).unwrap();
    let pair = aggregate_group(&pp, &[(10, &p1.share), (11, &p2.share)]).unwrap();
    for t in 0..pp.digits_star() {
        assert_eq!(pair.beta[t], &p1.share.b[t] + &p2.share.b[t]);
    }
    assert_eq!(pair.roster, vec![10, 11]);
    assert!(matches!(aggregate_group(&pp, &[]), Err(Error::EmptyRoster)));
    let other = keygen_party(&pp, 2, &mut s).unwrap();
    assert!(matches!(
        aggregate_group(&pp, &[(10, &p1.share), (12, &other.share)]),
        Err(Error::MixedShares)
    ));
}

#[test]
fn joint_keys_are_near_linear() {
    for mode in [KeyMode::Crs, KeyMode::CrsFree] {
        let pp = params(Preset::test_s(), mode);
        let mut s = Sampler::from_u64(*pp.sampler_params(), 8);
        for trial in 0..50 {
            let sizes = [1 + trial % 3, 1 + (trial / 3) % 3];
            let groups = common::keygen(&pp, &sizes, &mut s);
            for (g, jk) in &groups.keys {
                let jsk = &groups.ideal[*g as usize].jsk;
                let r = groups.relin_randomness(*g);
                for target in groups.keys.keys() {
                    let (enc_base, relin_base) = match mode {
                        KeyMode::Crs => (pp.crs().unwrap().a.clone(), pp.crs().unwrap().a.clone()),
                        KeyMode::CrsFree => (
                            jk.alpha.clone().unwrap(),
                            groups.keys[target].alpha.clone().unwrap(),
                        ),
                    };
                    let res = linearity_residuals(&pp, jk, *target, jsk, &r, &enc_base, &relin_base).unwrap();
                    for x in res {
                        assert!(x <= bound(&pp, jk.roster.len()), "{mode} {x}");
                    }
                }
            }
        }
    }
}

#[test]
fn crs_free_cross_keys() {
    let pp = params(Preset::test_s(), KeyMode::CrsFree);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 9);
    let single = common::keygen(&pp, &[2], &mut s);
    assert_eq!(single.keys[&0].targets().collect::<Vec<_>>(), vec![0]);
    assert!(matches!(
        single.keys[&0].relin_towards(5),
        Err(Error::MissingCrossKey { from: 0, to: 5 })
    ));

    // noiseless: ν_1 = −jsk·ν_0 − r·g and ν_2 = −r·α_j + jsk·⌊(p/q')g*⌉ exactly
    let mut quiet = Sampler::noiseless(*pp.sampler_params(), 10);
    let groups = common::keygen(&pp, &[2, 1], &mut quiet);
    let r = groups.relin_randomness(0);
    let jk = &groups.keys[&0];
    let res = linearity_residuals(
        &pp,
        jk,
        1,
        &groups.ideal[0].jsk,
        &r,
        jk.alpha.as_ref().unwrap(),
        groups.keys[&1].alpha.as_ref().unwrap(),
    )
    .unwrap();
    assert!(res.iter().all(|x| *x == BigUint::default()));
}

#[test]
fn secret_key_bytes_roundtrip() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 11);
    let sk = keygen_party(&pp, 0, &mut s).unwrap().state.finish();
    let bytes = sk.to_bytes();
    assert!(bytes.starts_with(SECRET_KEY_CANARY));
    assert_eq!(SecretKey::from_bytes(&pp, &bytes).unwrap(), sk);
    assert!(SecretKey::from_bytes(&pp, &bytes[1..]).is_err());
    assert_eq!(format!("{sk:?}"), "SecretKey(..)");
}

#[test]
fn encryption_roundtrip() {
    for mode in [KeyMode::Crs, KeyMode::CrsFree] {
        let pp = params(Preset::test_s(), mode);
        let mut s = Sampler::from_u64(*pp.sampler_params(), 12);
        let groups = common::keygen(&pp, &[3], &mut s);
        for _ in 0..100 {
            let m = common::random_plaintext(&pp, &mut s);
            let ct = enc(&pp, &groups, 0, &m, &mut s);
            assert_eq!(ideal_decrypt(&pp, &ct, &groups.ideal).unwrap(), m);
        }
        let m = scalar(&pp, 3);
        assert_ne!(enc(&pp, &groups, 0, &m, &mut s), enc(&pp, &groups, 0, &m, &mut s));
    }
}

#[test]
fn trivial_ciphertexts_decrypt() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 13);
    let groups = common::keygen(&pp, &[1, 1], &mut s);
    let zero = MultigroupCiphertext::zero(&pp, vec![0, 1]).unwrap();
    assert!(ideal_decrypt(&pp, &zero, &groups.ideal).unwrap().is_zero());
    // (Δ·M, 0)
    let m = common::random_plaintext(&pp, &mut s);
    let ct = add_plain(&pp, &MultigroupCiphertext::zero(&pp, vec![0]).unwrap(), &m).unwrap();
    assert_eq!(ideal_decrypt(&pp, &ct, &groups.ideal).unwrap(), m);
    let wrong = RingElement::zero(pp.ctx_q());
    assert!(matches!(encrypt(&pp, &groups.keys[&0].jek, 0, &wrong, &mut s), Err(Error::PlaintextOutOfRing)));
}

#[test]
fn expansion_preserves_decryption() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 14);
    let groups = common::keygen(&pp, &[1, 2, 1], &mut s);
    let m = common::random_plaintext(&pp, &mut s);
    let ct = enc(&pp, &groups, 1, &m, &mut s);
    let e = expand(&ct, 2, &[0, 1, 2]).unwrap();
    assert_eq!(e.components()[2], ct.components()[1]);
    assert!(e.components()[1].is_zero() && e.components()[3].is_zero());
    assert_eq!(ideal_decrypt(&pp, &e, &groups.ideal).unwrap(), m);
}

#[test]
fn addition() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 15);
    let groups = common::keygen(&pp, &[2, 2], &mut s);
    let (m1, m2) = (common::random_plaintext(&pp, &mut s), common::random_plaintext(&pp, &mut s));
    let a = enc(&pp, &groups, 0, &m1, &mut s);
    let zero = MultigroupCiphertext::zero(&pp, vec![0]).unwrap();
    assert_eq!(eval_add(&a, &zero).unwrap(), a);
    let a2 = enc(&pp, &groups, 0, &m2, &mut s);
    assert_eq!(ideal_decrypt(&pp, &eval_add(&a, &a2).unwrap(), &groups.ideal).unwrap(), &m1 + &m2);
    let b = enc(&pp, &groups, 1, &m2, &mut s);
    let sum = eval_add(&a, &b).unwrap();
    assert_eq!(sum.roster(), &[0, 1]);
    assert_eq!(ideal_decrypt(&pp, &sum, &groups.ideal).unwrap(), &m1 + &m2);
    let other = eval_add(&b, &a).unwrap();
    assert_eq!(other.roster(), &[1, 0]);
    assert_eq!(ideal_decrypt(&pp, &other, &groups.ideal).unwrap(), &m1 + &m2);
}

fn multiplication(mode: KeyMode) {
    let pp = params(Preset::test_m(), mode);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 16);
    let groups = common::keygen(&pp, &[2, 2], &mut s);

    let zero = enc(&pp, &groups, 0, &scalar(&pp, 0), &mut s);
    let m = common::random_plaintext(&pp, &mut s);
    let ct = enc(&pp, &groups, 1, &m, &mut s);
    assert!(ideal_decrypt(&pp, &eval_mul_any(&pp, &zero, &ct, &groups.keys).unwrap(), &groups.ideal)
        .unwrap()
        .is_zero());

    let two = enc(&pp, &groups, 0, &scalar(&pp, 2), &mut s);
    let three = enc(&pp, &groups, 1, &scalar(&pp, 3), &mut s);
    let six = eval_mul_any(&pp, &two, &three, &groups.keys).unwrap();
    assert_eq!(ideal_decrypt(&pp, &six, &groups.ideal).unwrap(), scalar(&pp, 6));

    for _ in 0..5 {
        let (m1, m2) = (common::random_plaintext(&pp, &mut s), common::random_plaintext(&pp, &mut s));
        let a = enc(&pp, &groups, 0, &m1, &mut s);
        let b = enc(&pp, &groups, 1, &m2, &mut s);
        let prod = eval_mul_any(&pp, &a, &b, &groups.keys).unwrap();
        let expected = &m1 * &m2;
        assert_eq!(ideal_decrypt(&pp, &prod, &groups.ideal).unwrap(), expected);
        let noise = noise_norm(&pp, &prod, &groups.ideal, &expected).unwrap();
        assert!(BigInt::from(noise) * 2 < *pp.delta());
    }
}

#[test]
fn multiplication_crs() {
    multiplication(KeyMode::Crs);
}

#[test]
fn multiplication_crs_free() {
    multiplication(KeyMode::CrsFree);
}

#[test]
fn multiplication_mode_is_checked() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 17);
    let groups = common::keygen(&pp, &[1, 1], &mut s);
    let a = enc(&pp, &groups, 0, &scalar(&pp, 1), &mut s);
    let b = enc(&pp, &groups, 1, &scalar(&pp, 1), &mut s);
    assert!(matches!(eval_mul_crsfree(&pp, &a, &b, &groups.keys), Err(Error::WrongMode(_))));
    let mut partial = groups.keys.clone();
    partial.remove(&1);
    assert!(matches!(eval_mul(&pp, &a, &b, &partial), Err(Error::MissingKey(1))));
}

#[test]
fn missing_cross_key_fails() {
    let pp = params(Preset::test_s(), KeyMode::CrsFree);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 18);
    let g0 = common::keygen(&pp, &[1], &mut s);
    let mut g1 = common::keygen(&pp, &[1, 1], &mut s);
    // group 0 from a separate run holds no key towards group 1
    g1.keys.insert(0, g0.keys[&0].clone());
    let a = enc(&pp, &g1, 0, &scalar(&pp, 1), &mut s);
    let b = enc(&pp, &g1, 1, &scalar(&pp, 1), &mut s);
    assert!(matches!(
        eval_mul_crsfree(&pp, &a, &b, &g1.keys),
        Err(Error::MissingCrossKey { from: 0, to: 1 })
    ));
}

#[test]
fn depth_two_on_three_groups() {
    let pp = params(Preset::test_m(), KeyMode::Crs);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 19);
    let groups = common::keygen(&pp, &[3, 3, 3], &mut s);
    let ms: Vec<RingElement> = (0..4).map(|_| common::random_plaintext(&pp, &mut s)).collect();
    let cts: Vec<_> = ms
        .iter()
        .enumerate()
        .map(|(i, m)| enc(&pp, &groups, (i % 3) as GroupId, m, &mut s))
        .collect();
    let left = eval_mul(&pp, &cts[0], &cts[1], &groups.keys).unwrap();
    let right = eval_mul(&pp, &cts[2], &cts[3], &groups.keys).unwrap();
    let out = eval_mul(&pp, &left, &right, &groups.keys).unwrap();
    let expected = &(&ms[0] * &ms[1]) * &(&ms[2] * &ms[3]);
    assert_eq!(ideal_decrypt(&pp, &out, &groups.ideal).unwrap(), expected);
}

#[test]
fn distributed_decryption() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    // one party, no smudging: identical to ideal decryption
    let mut quiet = Sampler::noiseless(*pp.sampler_params(), 20);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 20);
    let single = common::keygen(&pp, &[1], &mut s);
    let m = common::random_plaintext(&pp, &mut s);
    let ct = enc(&pp, &single, 0, &m, &mut s);
    let sk = single.secrets[&0][0].1.secret_key();
    let share = partial_decrypt(&pp, &ct, sk, 0, 0, &mut quiet).unwrap();
    assert_eq!(share.mu, ct.components()[1].try_mul(sk.element()).unwrap().to_coefficient());
    let rosters = single.rosters();
    assert_eq!(combine_shares(&pp, &ct, &rosters, &[share]).unwrap(), m);

    let groups = common::keygen(&pp, &[3, 3], &mut s);
    let rosters = groups.rosters();
    for _ in 0..100 {
        let (m1, m2) = (common::random_plaintext(&pp, &mut s), common::random_plaintext(&pp, &mut s));
        let ct = eval_add(&enc(&pp, &groups, 0, &m1, &mut s), &enc(&pp, &groups, 1, &m2, &mut s)).unwrap();
        let mut shares = Vec::new();
        for (g, states) in &groups.secrets {
            for (p, st) in states {
                let share = partial_decrypt(&pp, &ct, st.secret_key(), *g, *p, &mut s).unwrap();
                let e = share_noise(&ct, st.secret_key(), &share).unwrap();
                assert!(e <= BigUint::from(pp.sampler_params().smudge_bound() as u64));
                shares.push(share);
            }
        }
        let ideal = ideal_decrypt(&pp, &ct, &groups.ideal).unwrap();
        assert_eq!(ideal, &m1 + &m2);
        assert_eq!(combine_shares(&pp, &ct, &rosters, &shares).unwrap(), ideal);
        let missing = &shares[1..];
        assert!(matches!(
            combine_shares(&pp, &ct, &rosters, missing),
            Err(Error::MissingShare { group: 0, party: 0 })
        ));
        let mut dup = shares.clone();
        dup.push(shares[0].clone());
        assert!(matches!(combine_shares(&pp, &ct, &rosters, &dup), Err(Error::DuplicateShare { .. })));
    }
}

#[test]
fn shares_bind_their_ciphertext() {
    let pp = params(Preset::test_s(), KeyMode::Crs);
    let mut s = Sampler::from_u64(*pp.sampler_params(), 21);
    let groups = common::keygen(&pp, &[1], &mut s);
    let a = enc(&pp, &groups, 0, &scalar(&pp, 1), &mut s);
    let b = enc(&pp, &groups, 0, &scalar(&pp, 2), &mut s);
    let sk = groups.secrets[&0][0].1.secret_key();
    let share = partial_decrypt(&pp, &a, sk, 0, 0, &mut s).unwrap();
    let rosters: BTreeMap<_, _> = groups.rosters();
    assert!(matches!(combine_shares(&pp, &b, &rosters, &[share]), Err(Error::ForeignShare)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sums_decrypt_for_any_rosters(seed in any::<u64>(), sizes in proptest::collection::vec(1usize..=3, 1..=3)) {
        let pp = params(Preset::test_s(), KeyMode::Crs);
        let mut s = Sampler::from_u64(*pp.sampler_params(), seed);
        let groups = common::keygen(&pp, &sizes, &mut s);
        let mut acc: Option<MultigroupCiphertext> = None;
        let mut expected = RingElement::zero(pp.ctx_p());
        for g in 0..sizes.len() as GroupId {
            let m = common::random_plaintext(&pp, &mut s);
            expected = &expected + &m;
            let ct = enc(&pp, &groups, g, &m, &mut s);
            acc = Some(match acc { None => ct, Some(a) => eval_add(&a, &ct).unwrap() });
        }
        let acc = acc.unwrap();
        prop_assert_eq!(acc.roster().len(), sizes.len());
        prop_assert_eq!(ideal_decrypt(&pp, &acc, &groups.ideal).unwrap(), expected);
    }

    #[test]
    fn scalar_operations(seed in any::<u64>(), c in 0u64..97) {
        let pp = params(Preset::test_s(), KeyMode::Crs);
        let mut s = Sampler::from_u64(*pp.sampler_params(), seed);
        let groups = common::keygen(&pp, &[2], &mut s);
        let m = common::random_plaintext(&pp, &mut s);
        let ct = enc(&pp, &groups, 0, &m, &mut s);
        let k = scalar(&pp, c);
        prop_assert_eq!(ideal_decrypt(&pp, &mul_scalar(&pp, &ct, c), &groups.ideal).unwrap(), &m * &k);
        prop_assert_eq!(ideal_decrypt(&pp, &add_plain(&pp, &ct, &k).unwrap(), &groups.ideal).unwrap(), &m + &k);
    }
}
