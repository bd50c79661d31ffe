mod common;

use proptest::prelude::*;
use vmghe::auth::*;
use vmghe::encoding::decode_slots;
use vmghe::params::Preset;
use vmghe::ring::Sampler;
use vmghe::scheme::*;
use vmghe::Error;

struct Fixture {
    pp: PublicParams,
    groups: common::Groups,
    sampler: Sampler,
}

fn fixture(preset: Preset, mode: KeyMode, sizes: &[usize], seed: u64) -> Fixture {
    let pp = setup(&preset, mode, [seed as u8; 32]).unwrap();
    let mut sampler = Sampler::from_u64(*pp.sampler_params(), seed);
    let groups = common::keygen(&pp, sizes, &mut sampler);
    Fixture { pp, groups, sampler }
}

impl Fixture {
    fn authenticate(&mut self, session: &mut AuthSession, inputs: &[(&str, u64, GroupId)]) -> Vec<Authenticator> {
        inputs
            .iter()
            .map(|(label, m, g)| {
                let jek = self.groups.keys[g].jek.clone();
                session
                    .auth(&self.pp, *m, label.as_bytes(), &jek, *g, &mut self.sampler)
                    .unwrap()
            })
            .collect()
    }

    fn verify(&self, program: &LabeledProgram, result: &Authenticator, session: &AuthSession) -> Verdict {
        let mut path = IdealDecryption(&self.groups.ideal);
        verify(&self.pp, program, result, session.challenge(), session.prf(), &mut path).unwrap()
    }
}

fn session(pp: &PublicParams, seed: u8, mask: &[bool]) -> AuthSession {
    let prf = Prf::from_seed(&[seed; 32], "test", pp.plaintext_modulus());
    AuthSession::new(prf, select_from_mask(mask).unwrap())
}

const MASK: [bool; 8] = [true, false, false, true, true, false, true, true];

#[test]
fn honest_sum_is_accepted() {
    let mut f = fixture(Preset::test_s(), KeyMode::Crs, &[3], 1);
    let mut s = session(&f.pp, 1, &MASK);
    let program = LabeledProgram::parse("x + y + 4").unwrap();
    let inputs = f.authenticate(&mut s, &[("x", 40, 0), ("y", 50, 0)]);
    let result = eval_authenticated(&f.pp, &program, &inputs, &f.groups.keys).unwrap();
    assert_eq!(f.verify(&program, &result, &s), Verdict::Accept(94));
}

#[test]
fn honest_product_across_groups() {
    for mode in [KeyMode::Crs, KeyMode::CrsFree] {
        let mut f = fixture(Preset::test_m(), mode, &[2, 1], 2);
        let mut s = session(&f.pp, 2, &MASK);
        let program = LabeledProgram::parse("x * y + 3 * x").unwrap();
        let inputs = f.authenticate(&mut s, &[("x", 1234, 0), ("y", 4321, 1)]);
        let result = eval_authenticated(&f.pp, &program, &inputs, &f.groups.keys).unwrap();
        assert_eq!(result.ct.roster(), &[0, 1]);
        let expected = (1234u64 * 4321 + 3 * 1234) % 7681;
        assert_eq!(f.verify(&program, &result, &s), Verdict::Accept(expected), "{mode}");
    }
}

#[test]
fn wrong_circuit_fails_the_tag() {
    let mut f = fixture(Preset::test_s(), KeyMode::Crs, &[1, 1], 3);
    let mut s = session(&f.pp, 3, &MASK);
    let program = LabeledProgram::parse("x + y").unwrap();
    let inputs = f.authenticate(&mut s, &[("x", 1, 0), ("y", 2, 1)]);
    let other = perturbed_program(&program).unwrap();
    let result = eval_authenticated(&f.pp, &other, &inputs, &f.groups.keys).unwrap();
    assert_eq!(f.verify(&program, &result, &s), Verdict::Reject(RejectReason::TagMismatch));
    // honest for the program it actually computed
    assert_eq!(f.verify(&other, &result, &s), Verdict::Accept(4));
}

#[test]
fn stale_result_from_another_session() {
    let mut f = fixture(Preset::test_s(), KeyMode::Crs, &[2], 4);
    let program = LabeledProgram::parse("x + y").unwrap();
    let mut old = session(&f.pp, 4, &MASK);
    let old_inputs = f.authenticate(&mut old, &[("x", 5, 0), ("y", 6, 0)]);
    let stale = eval_authenticated(&f.pp, &program, &old_inputs, &f.groups.keys).unwrap();
    let prf = Prf::from_seed(&[4; 32], "another", f.pp.plaintext_modulus());
    let fresh = AuthSession::new(prf, select_from_mask(&MASK).unwrap());
    assert_eq!(f.verify(&program, &stale, &fresh), Verdict::Reject(RejectReason::TagMismatch));
}

#[test]
fn label_reuse_is_refused() {
    let mut f = fixture(Preset::test_s(), KeyMode::Crs, &[1], 5);
    let mut s = session(&f.pp, 5, &MASK);
    f.authenticate(&mut s, &[("x", 7, 0)]);
    let jek = f.groups.keys[&0].jek.clone();
    assert!(s.auth(&f.pp, 7, b"x", &jek, 0, &mut f.sampler).is_ok());
    assert!(matches!(
        s.auth(&f.pp, 8, b"x", &jek, 0, &mut f.sampler),
        Err(Error::LabelReuse(_))
    ));
    assert_eq!(s.registered(b"x"), Some(7));
    assert_eq!(
        s.auth(&f.pp, 1, &[b'a'; 257], &jek, 0, &mut f.sampler),
        Err(Error::LabelTooLong)
    );
}

#[test]
fn depth_budget_is_enforced() {
    let mut f = fixture(Preset::test_s(), KeyMode::Crs, &[1], 6);
    let mut s = session(&f.pp, 6, &MASK);
    let program = LabeledProgram::parse("x * x * x * x * x").unwrap();
    let inputs = f.authenticate(&mut s, &[("x", 2, 0)]);
    assert!(matches!(
        eval_authenticated(&f.pp, &program, &inputs, &f.groups.keys),
        Err(Error::DepthExceeded { depth: 4, budget: 2 })
    ));
}

#[test]
fn tampered_slots_are_caught_unless_the_guess_is_exact() {
    let mut f = fixture(Preset::test_s(), KeyMode::Crs, &[2], 7);
    let mut s = session(&f.pp, 7, &MASK);
    let program = LabeledProgram::parse("x + y").unwrap();
    let inputs = f.authenticate(&mut s, &[("x", 3, 0), ("y", 4, 0)]);
    let mut server = Sampler::from_u64(*f.pp.sampler_params(), 70);
    let complement = s.challenge().complement();
    let mut escapes = 0;
    for _ in 0..60 {
        let mut adv = Adversary {
            tamper: Tamper::SlotSubstitute,
            sampler: &mut server,
            stale: None,
            decoy: None,
            encryption_key: None,
        };
        let (forged, record) = server_eval(&f.pp, &program, &inputs, &f.groups.keys, &mut adv).unwrap();
        let verdict = f.verify(&program, &forged, &s);
        if record.slots == complement {
            escapes += 1;
            assert_eq!(verdict, Verdict::Accept((7 + record.delta) % 97));
        } else {
            assert!(matches!(
                verdict,
                Verdict::Reject(RejectReason::ChallengeMismatch | RejectReason::ReplicaMismatch)
            ));
        }
    }
    assert!(escapes < 10, "{escapes}");
}

#[test]
fn empty_challenge_set_offers_no_protection() {
    let mut f = fixture(Preset::test_s(), KeyMode::Crs, &[1], 8);
    let prf = Prf::from_seed(&[8; 32], "test", 97);
    let mut s = AuthSession::new(prf, ChallengeSet::empty(8).unwrap());
    let program = LabeledProgram::identity("x").unwrap();
    let inputs = f.authenticate(&mut s, &[("x", 10, 0)]);
    let shifted = add_plain(
        &f.pp,
        &inputs[0].ct,
        &vmghe::encoding::encode_slots(f.pp.ctx_p(), &[5; 8]).unwrap(),
    )
    .unwrap();
    let forged = Authenticator {
        ct: shifted,
        tag: inputs[0].tag,
    };
    assert_eq!(f.verify(&program, &forged, &s), Verdict::Accept(15));
}

#[test]
fn composition_matches_direct_evaluation() {
    let prf = Prf::from_seed(&[9; 32], "c", 97);
    let inner_a = LabeledProgram::parse("x * y").unwrap();
    let inner_b = LabeledProgram::parse("y + z").unwrap();
    let outer = LabeledProgram::parse("u + v").unwrap();
    let composed = compose(outer.circuit(), &[inner_a.clone(), inner_b.clone()]).unwrap();
    assert_eq!(composed.labels(), &[b"x".to_vec(), b"y".to_vec(), b"z".to_vec()]);
    let direct = hash_tree_eval(
        &outer,
        &[expected_tag(&inner_a, &prf).unwrap(), expected_tag(&inner_b, &prf).unwrap()],
    )
    .unwrap();
    assert_eq!(expected_tag(&composed, &prf).unwrap(), direct);
    assert_eq!(composed.circuit().eval_mod(&[2, 3, 4], 97).unwrap(), 13);
}

#[test]
fn auth_ciphertext_carries_the_extended_message() {
    let mut f = fixture(Preset::test_s(), KeyMode::Crs, &[2], 10);
    let mut s = session(&f.pp, 10, &MASK);
    let a = f.authenticate(&mut s, &[("m", 42, 0)]);
    let slots = decode_slots(&ideal_decrypt(&f.pp, &a[0].ct, &f.groups.ideal).unwrap());
    assert_eq!(slots[..8], extended_message(s.prf(), s.challenge(), 42, b"m")[..]);
    assert!(slots[8..].iter().all(|&v| v == 0));
    assert_eq!(a[0].tag, s.prf().tag(b"m"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn honest_pipelines_always_verify(
        x in 0u64..97, y in 0u64..97, c in 0u64..97,
        mask in proptest::collection::vec(any::<bool>(), 8),
        seed in 0u64..1000,
    ) {
        let mut f = fixture(Preset::test_s(), KeyMode::Crs, &[1, 2], seed);
        let mut s = session(&f.pp, seed as u8, &mask);
        let program = LabeledProgram::parse(&format!("(x + {c}) * 2 + y")).unwrap();
        let inputs = f.authenticate(&mut s, &[("x", x, 0), ("y", y, 1)]);
        let result = eval_authenticated(&f.pp, &program, &inputs, &f.groups.keys).unwrap();
        prop_assert_eq!(f.verify(&program, &result, &s), Verdict::Accept(((x + c) * 2 + y) % 97));
    }

    #[test]
    fn challenge_sets_have_half_the_slots(mask in proptest::collection::vec(any::<bool>(), 16)) {
        let set = select_from_mask(&mask).unwrap();
        prop_assert_eq!(set.indices().len(), 8);
        prop_assert!(set.indices().windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(set.complement().len() + set.indices().len(), 16);
    }
}
