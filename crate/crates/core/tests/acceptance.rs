//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::oracle;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use vmghe::auth::{LabeledProgram, Tamper, Verdict};
use vmghe::encoding::{decode_slots, encode_slots};
use vmghe::gadget::{Flavor, GadgetVector};
use vmghe::params::Preset;
use vmghe::protocol::{replay, run_scenario, Harness, InputSpec, Scenario};
use vmghe::ring::RingElement;
use vmghe::scheme::{ideal_decrypt, noise_norm, setup, KeyMode, PublicParams};
use vmghe::stats::{guess_probability, wilson_interval, Z_99};

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        println!("criterion {id} {}: {name} ({detail})", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }
}

fn gadget_homomorphism(preset: &Preset, pairs: usize) -> (usize, Duration) {
    let start = Instant::now();
    let pp = setup(preset, KeyMode::Crs, [1; 32]).unwrap();
    let g = GadgetVector::new(pp.ctx_q(), Flavor::Digit).unwrap();
    let bad = (0..pairs)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha20Rng::seed_from_u64(i as u64);
            let a = RingElement::random(pp.ctx_q(), &mut rng);
            let b = RingElement::random(pp.ctx_q(), &mut rng);
            let (ha, hb) = (g.decompose(&a).unwrap(), g.decompose(&b).unwrap());
            g.reconstruct(&ha.add(&hb).unwrap()).unwrap() != &a + &b
                || g.reconstruct(&ha.hadamard(&hb).unwrap()).unwrap() != (&a * &b).to_coefficient()
        })
        .count();
    (bad, start.elapsed())
}

fn foreign_decomposition(pairs: usize) -> usize {
    let presets = [Preset::test_s(), Preset::test_m()];
    (0..pairs)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = ChaCha20Rng::seed_from_u64(10_000 + i as u64);
            let preset = &presets[i % 2];
            let pp = setup(preset, KeyMode::Crs, [2; 32]).unwrap();
            let ctx = pp.ctx_star();
            let g = GadgetVector::new(ctx, Flavor::Digit).unwrap();
            let a = RingElement::random(ctx, &mut rng);
            let p = rng.gen_range(2..1u64 << 62);
            let got = g.decompose_foreign(&a, p).unwrap();
            let q = BigInt::from(ctx.modulus().clone());
            let lifted: Vec<BigUint> = a.to_bigint().iter().map(|c| c.mod_floor(&q).to_biguint().unwrap()).collect();
            got.iter().zip(g.digit_moduli()).any(|(digit, qi)| {
                digit
                    .iter()
                    .zip(&lifted)
                    .any(|(v, c)| *v != oracle::foreign_digit(c, qi, p))
            })
        })
        .count()
}

/// Random expression over `labels` with multiplicative depth ≤ 2 and at most
/// four ciphertext products.
fn random_program(rng: &mut ChaCha20Rng, labels: &[String]) -> LabeledProgram {
    loop {
        let terms = rng.gen_range(1..=3);
        let mut parts = Vec::new();
        for _ in 0..terms {
            let factors = rng.gen_range(1..=3);
            let f: Vec<String> = (0..factors)
                .map(|_| match rng.gen_range(0..6) {
                    0 => rng.gen_range(0..50u64).to_string(),
                    1 => format!(
                        "({} + {})",
                        labels[rng.gen_range(0..labels.len())],
                        labels[rng.gen_range(0..labels.len())]
                    ),
                    _ => labels[rng.gen_range(0..labels.len())].clone(),
                })
                .collect();
            parts.push(f.join(" * "));
        }
        let expr = parts.join(" + ");
        if let Ok(p) = LabeledProgram::parse(&expr) {
            if !p.labels().is_empty() && p.depth() <= 2 && p.circuit().multiplications() <= 4 {
                return p;
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Random,
    /// 2 groups × 3 parties.
    TwoByThree,
    /// One group.
    SingleGroup,
    /// Singleton groups only.
    Singletons,
}

fn random_scenario(seed: u64, mode: KeyMode, shape: Shape) -> Scenario {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = match shape {
        Shape::Random => (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=3)).collect(),
        Shape::TwoByThree => vec![3, 3],
        Shape::SingleGroup => vec![rng.gen_range(1..=3)],
        Shape::Singletons => vec![1; rng.gen_range(1..=3)],
    };
    let labels: Vec<String> = (0..rng.gen_range(sizes.len().max(2)..=4)).map(|i| format!("x{i}")).collect();
    let mut program = random_program(&mut rng, &labels);
    if shape == Shape::Singletons {
        // every party contributes, so the result spans all n groups
        while program.labels().len() < sizes.len() {
            program = random_program(&mut rng, &labels);
        }
    }
    let mut groups = std::collections::BTreeMap::new();
    let mut next = 0;
    for (g, &n) in sizes.iter().enumerate() {
        groups.insert(g.to_string(), (next..next + n as u32).collect::<Vec<_>>());
        next += n as u32;
    }
    let inputs = program
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let group = match shape {
                Shape::Singletons => i % sizes.len(),
                _ => rng.gen_range(0..sizes.len()),
            };
            let spec = InputSpec {
                value: rng.gen_range(0..7681),
                group: group as u32,
                party: None,
            };
            (String::from_utf8(l.clone()).unwrap(), spec)
        })
        .collect();
    Scenario {
        name: format!("random-{seed}"),
        preset: "TEST-M".into(),
        mode,
        lambda: None,
        seed,
        groups,
        program: vmghe::protocol::ProgramSection {
            expr: program.to_expression(),
        },
        inputs,
        tamper: Default::default(),
    }
}

struct Case {
    groups: usize,
    roster_groups: usize,
    components: usize,
    /// Distributed decryption gave the plaintext-oracle value.
    correct: bool,
    accepted: bool,
    distributed_equals_ideal: bool,
    /// Result noise is at least Δ/2.
    noise_overflow: bool,
    two_by_three: bool,
}

/// Full pipeline, then oracle comparisons.
fn run_case(scenario: &Scenario) -> Case {
    let program = scenario.program().unwrap();
    let inputs = scenario.ordered_inputs().unwrap();
    let cfg = scenario.config().unwrap();
    let mut h = Harness::new(cfg.clone()).unwrap();
    h.run_keygen().unwrap();
    h.run_setgen().unwrap();
    let out = h.run_session(&program, &inputs, Tamper::None).unwrap();
    let verdict = h.run_verify(&program, &out.result).unwrap();
    let pp: &PublicParams = h.params();
    let ideal = h.ideal_keys().unwrap();
    let ct = &out.result.ct;

    // Plaintext oracle: evaluate the program slot-wise on the input slots.
    let p = pp.plaintext_modulus();
    let input_slots: Vec<Vec<u64>> = out
        .inputs
        .iter()
        .map(|a| decode_slots(&ideal_decrypt(pp, &a.ct, &ideal).unwrap()))
        .collect();
    let slots: Vec<u64> = (0..pp.degree())
        .map(|j| {
            let xs: Vec<u64> = input_slots.iter().map(|s| s[j]).collect();
            program.circuit().eval_mod(&xs, p).unwrap()
        })
        .collect();
    let expected_pt = encode_slots(pp.ctx_p(), &slots).unwrap();
    let expected_value = scenario.expected().unwrap();
    let replica = h.challenge().unwrap().complement()[0];
    assert_eq!(slots[replica], expected_value);

    let distributed = h.last_decryption().cloned();
    let ideal_pt = ideal_decrypt(pp, ct, &ideal).unwrap();
    let noise = noise_norm(pp, ct, &ideal, &expected_pt).unwrap();
    let half_delta = (pp.delta() / 2u32).magnitude().clone();
    Case {
        groups: cfg.groups.len(),
        roster_groups: ct.roster().len(),
        components: ct.components().len(),
        correct: distributed.as_ref() == Some(&expected_pt),
        accepted: verdict == Verdict::Accept(expected_value),
        distributed_equals_ideal: distributed.as_ref() == Some(&ideal_pt),
        noise_overflow: noise >= half_delta,
        two_by_three: cfg.groups.len() == 2 && cfg.groups.iter().all(|(_, r)| r.len() == 3),
    }
}

fn run_cases(seeds: std::ops::Range<u64>, mode: KeyMode, shape: impl Fn(u64) -> Shape + Sync) -> (Vec<Case>, Duration) {
    let start = Instant::now();
    let cases = seeds
        .into_par_iter()
        .map(|s| run_case(&random_scenario(s, mode, shape(s))))
        .collect();
    (cases, start.elapsed())
}

fn pass_bar(cases: &[Case]) -> (usize, bool) {
    let ok = cases.iter().filter(|c| c.correct).count();
    let attributed = cases.iter().filter(|c| !c.correct).all(|c| c.noise_overflow);
    (ok, ok * 100 >= 99 * cases.len() && attributed)
}

fn tamper_scenario(seed: u64, tamper: Tamper) -> Scenario {
    Scenario::from_toml(&format!(
        r#"
name = "forge-{seed}"
preset = "TEST-S"
seed = {seed}
[groups]
0 = [0, 1]
1 = [2]
[program]
expr = "x * 3 + y"
[inputs]
x = {{ value = 11, group = 0 }}
y = {{ value = 5, group = 1 }}
[tamper]
kind = "{tamper}"
"#
    ))
    .unwrap()
}

fn main() {
    let mut report = Report { failed: 0 };
    let shape = |s: u64| if s % 10 == 0 { Shape::TwoByThree } else { Shape::Random };

    // 1
    let (bad_s, time_s) = gadget_homomorphism(&Preset::test_s(), 1000);
    let (bad_m, _) = gadget_homomorphism(&Preset::test_m(), 1000);
    report.check(
        1,
        "gadget homomorphism",
        bad_s == 0 && bad_m == 0 && time_s < Duration::from_secs(10),
        format!("mismatches TEST-S {bad_s}, TEST-M {bad_m}; TEST-S time {time_s:.2?}"),
    );

    // 2
    let bad = foreign_decomposition(1000);
    report.check(2, "foreign-modulus decomposition", bad == 0, format!("{bad}/1000 mismatches"));

    // 3, 5, 7
    let (crs, crs_time) = run_cases(0..100, KeyMode::Crs, shape);
    let (ok, pass) = pass_bar(&crs);
    report.check(
        3,
        "scheme correctness (crs)",
        pass && crs_time < Duration::from_secs(120),
        format!("{ok}/100 correct in {crs_time:.2?}"),
    );

    // 4
    let (free, free_time) = run_cases(0..100, KeyMode::CrsFree, shape);
    let (ok, pass) = pass_bar(&free);
    report.check(
        4,
        "scheme correctness (crs_free)",
        pass && free_time < Duration::from_secs(120),
        format!("{ok}/100 correct in {free_time:.2?}"),
    );

    // 5
    let accepted = crs.iter().chain(&free).filter(|c| c.accepted).count();
    report.check(5, "honest authenticator acceptance", accepted == 200, format!("{accepted}/200 accepted"));

    // 6
    let trials = 700u64;
    let escapes = (0..trials)
        .into_par_iter()
        .filter(|&s| run_scenario(&tamper_scenario(s, Tamper::SlotSubstitute)).unwrap().verdict.is_accept())
        .count() as u64;
    let (lo, hi) = wilson_interval(escapes, trials, Z_99);
    let target = guess_probability(8);
    let detected = |t: Tamper| {
        (0..200u64)
            .into_par_iter()
            .filter(|&s| !run_scenario(&tamper_scenario(5000 + s, t)).unwrap().verdict.is_accept())
            .count()
    };
    let (wrong, stale) = (detected(Tamper::WrongCircuit), detected(Tamper::StaleLabel));
    report.check(
        6,
        "forgery detection",
        lo <= target && target <= hi && wrong == 200 && stale == 200,
        format!(
            "slot guess escaped {escapes}/{trials}, 99% interval [{lo:.4}, {hi:.4}] vs {target:.4}; wrong-circuit {wrong}/200, stale-label {stale}/200"
        ),
    );

    // 7
    let equal = crs.iter().filter(|c| c.distributed_equals_ideal).count();
    let has_2x3 = crs.iter().any(|c| c.two_by_three && c.roster_groups == 2);
    report.check(
        7,
        "distributed equals ideal decryption",
        equal == 100 && has_2x3,
        format!("{equal}/100 equal; 2x3 roster exercised: {has_2x3}"),
    );

    // 8
    let (single, _) = run_cases(1000..1100, KeyMode::Crs, |_| Shape::SingleGroup);
    let (singletons, _) = run_cases(2000..2100, KeyMode::Crs, |_| Shape::Singletons);
    let mphe = single.iter().all(|c| c.components == 2);
    let mkhe = singletons.iter().all(|c| c.components == c.groups + 1 && c.roster_groups == c.groups);
    let (ok_single, pass_single) = pass_bar(&single);
    let (ok_singletons, pass_singletons) = pass_bar(&singletons);
    report.check(
        8,
        "specializations",
        mphe && mkhe && pass_single && pass_singletons,
        format!(
            "single-group 2 components: {mphe}, {ok_single}/100 correct; singletons n+1 components: {mkhe}, {ok_singletons}/100 correct"
        ),
    );

    // 9
    let mut replayed = 0;
    let mut identical = 0;
    for s in 0..6u64 {
        let tamper = if s % 2 == 0 { Tamper::SlotSubstitute } else { Tamper::WrongCircuit };
        let out = run_scenario(&tamper_scenario(s, tamper)).unwrap();
        if out.verdict.is_accept() {
            continue;
        }
        replayed += 1;
        if let Ok(again) = replay(&out.transcript.to_text()) {
            identical += (again.state_digest == out.state_digest) as usize;
        }
    }
    let honest = run_scenario(&random_scenario(7, KeyMode::CrsFree, Shape::Random)).unwrap();
    let honest_ok = replay(&honest.transcript.to_text()).is_ok();
    report.check(
        9,
        "deterministic replay",
        replayed > 0 && identical == replayed && honest_ok,
        format!("{identical}/{replayed} rejected runs and 1 honest run replayed byte-identically: {honest_ok}"),
    );

    if report.failed > 0 {
        println!("{} criteria failed", report.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
