use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use rayon::prelude::*;
use vmghe::auth::{hash_tree_eval, verify, AuthSession, Authenticator, LabeledProgram, Prf, Verdict};
use vmghe::params::Preset;
use vmghe::protocol::{replay, run_scenario, Harness, Outcome, Scenario, SessionConfig};
use vmghe::ring::Sampler;
use vmghe::scheme::{eval_add, eval_mul_any, KeyMode};
use vmghe::stats::{guess_probability, wilson_interval, Z_99};

use crate::report::*;

pub const MIN_TRIALS: u64 = 30;

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<KeyMode>,
    pub lambda: Option<usize>,
}

impl Overrides {
    fn apply(&self, s: &mut Scenario) -> Result<()> {
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(mode) = self.mode {
            s.mode = mode;
        }
        if let Some(l) = self.lambda {
            s.lambda = Some(l);
        }
        s.validate()?;
        Ok(())
    }
}

pub fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut s = Scenario::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
    overrides.apply(&mut s)?;
    Ok(s)
}

fn run_report(s: &Scenario, out: &Outcome) -> Result<RunReport> {
    let cfg = s.config()?;
    let (value, reason) = match &out.verdict {
        Verdict::Accept(v) => (Some(*v), None),
        Verdict::Reject(r) => (None, Some(r.to_string())),
    };
    Ok(RunReport {
        scenario: s.name.clone(),
        preset: cfg.preset.name.clone(),
        mode: s.mode.to_string(),
        lambda: cfg.effective_preset().lambda,
        seed: s.seed,
        tamper: out.tamper.as_str().into(),
        verdict: if value.is_some() { "accept" } else { "reject" }.into(),
        rejected: value.is_none(),
        reject_reason: reason,
        value,
        expected: out.expected,
        correct: out.correct(),
        decrypted: out.decrypted,
        challenge: out.challenge.clone(),
        ciphertext_components: out.ciphertext_components,
        noise_budget_bits: out.noise_budget_bits,
        complaints: out.complaints.clone(),
        state_digest: hex::encode(out.state_digest),
        transcript_records: out.transcript.records().len(),
        timings: out.timings.iter().map(|(n, d)| Timing::new(n, *d)).collect(),
    })
}

/// Full pipeline on one scenario. Returns the transcript text alongside the report.
pub fn run(s: &Scenario) -> Result<(RunReport, String)> {
    let out = run_scenario(s)?;
    Ok((run_report(s, &out)?, out.transcript.to_text()))
}

/// Re-executes a saved transcript and checks it byte for byte.
pub fn replay_file(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let out = replay(&text)?;
    let record = &out.transcript.records()[0];
    let s = Scenario::from_toml(std::str::from_utf8(&record.payload)?)?;
    run_report(&s, &out)
}

/// Seed of trial `i`, kept within the range a scenario file can hold.
fn trial_seed(base: u64, i: u64) -> u64 {
    base.wrapping_add(i.wrapping_mul(0x9e37_79b9_7f4a_7c15)) & i64::MAX as u64
}

/// Runs `trials` independently seeded copies of the scenario and reports how
/// often the verifier rejected.
pub fn stats(s: &Scenario, trials: u64) -> Result<StatsReport> {
    ensure!(trials >= MIN_TRIALS, "at least {MIN_TRIALS} trials are needed, got {trials}");
    let lambda = s.config()?.effective_preset().lambda;
    let verdicts = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut t = s.clone();
            t.seed = trial_seed(s.seed, i);
            run_scenario(&t).map(|o| (t.seed, o.verdict)).with_context(|| format!("trial {i}"))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut reasons = BTreeMap::new();
    let mut escaped_seeds = Vec::new();
    for (seed, v) in &verdicts {
        match v {
            Verdict::Accept(_) => escaped_seeds.push(*seed),
            Verdict::Reject(r) => *reasons.entry(r.as_str().to_string()).or_insert(0u64) += 1,
        }
    }
    let escaped = escaped_seeds.len() as u64;
    let detected = trials - escaped;
    let interval = wilson_interval(detected, trials, Z_99);
    let guess_bound = 1.0 - guess_probability(lambda);
    Ok(StatsReport {
        scenario: s.name.clone(),
        tamper: s.tamper.kind.as_str().into(),
        lambda,
        trials,
        detected,
        escaped,
        detection_rate: detected as f64 / trials as f64,
        interval,
        confidence: 0.99,
        guess_bound,
        bound_in_interval: interval.0 <= guess_bound && guess_bound <= interval.1,
        reasons: reasons.into_iter().collect(),
        escaped_seeds,
    })
}

fn bench_once(preset: &Preset, mode: KeyMode, seed: u64) -> Result<Vec<(&'static str, Duration)>> {
    let cfg = SessionConfig::with_sizes(preset.clone(), mode, seed, &[2, 1])?;
    let mut h = Harness::new(cfg.clone())?;
    let mut times = Vec::new();

    let t = Instant::now();
    h.run_keygen()?;
    times.push(("keygen", t.elapsed()));
    let challenge = h.run_setgen()?;
    let pp = h.params().clone();
    let prf = Prf::from_seed(&cfg.derive_seed("prf", 0), "bench", pp.plaintext_modulus());
    let mut session = AuthSession::new(prf, challenge);
    let mut sampler = Sampler::from_u64(*pp.sampler_params(), seed);

    let t = Instant::now();
    let x = session.auth(&pp, 3, b"x", &h.keys()[&0].jek, 0, &mut sampler)?;
    let y = session.auth(&pp, 4, b"y", &h.keys()[&1].jek, 1, &mut sampler)?;
    times.push(("auth", t.elapsed() / 2));

    let t = Instant::now();
    let sum = eval_add(&x.ct, &y.ct)?;
    times.push(("eval_add", t.elapsed()));

    let t = Instant::now();
    eval_mul_any(&pp, &x.ct, &y.ct, h.keys())?;
    times.push(("eval_mul", t.elapsed()));

    let program = LabeledProgram::parse("x + y")?;
    let result = Authenticator {
        ct: sum,
        tag: hash_tree_eval(&program, &[x.tag, y.tag])?,
    };
    let t = Instant::now();
    let verdict = verify(&pp, &program, &result, session.challenge(), session.prf(), &mut h)?;
    times.push(("verify", t.elapsed()));
    ensure!(verdict == Verdict::Accept(7), "benchmark pipeline was rejected: {verdict:?}");
    Ok(times)
}

/// Times each scheme operation on a two-group roster.
pub fn bench(preset: &Preset, mode: KeyMode, seed: u64, iterations: usize) -> Result<BenchReport> {
    ensure!(iterations > 0, "need at least one iteration");
    let runs = (0..iterations)
        .map(|i| bench_once(preset, mode, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let rows = runs[0]
        .iter()
        .enumerate()
        .map(|(k, (name, _))| {
            let mut ms: Vec<f64> = runs.iter().map(|r| r[k].1.as_secs_f64() * 1e3).collect();
            ms.sort_by(f64::total_cmp);
            BenchRow {
                operation: name.to_string(),
                median_millis: ms[ms.len() / 2],
                min_millis: ms[0],
                max_millis: ms[ms.len() - 1],
            }
        })
        .collect();
    Ok(BenchReport {
        preset: preset.name.clone(),
        mode: mode.to_string(),
        degree: preset.degree,
        iterations,
        rows,
    })
}
