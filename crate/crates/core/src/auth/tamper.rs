//! Scripted dishonest servers.

use rand::seq::SliceRandom;
use rand::Rng;

use super::authenticator::{eval_authenticated, Authenticator};
use super::program::{Circuit, Gate, LabeledProgram};
use crate::encoding::encode_slots;
use crate::error::{Error, Result};
use crate::ring::Sampler;
use crate::scheme::{add_plain, encrypt, EncryptionKey, GroupId, KeySet, PublicParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tamper {
    #[default]
    None,
    /// Evaluates `f + x_1` instead of `f` and tags it honestly.
    WrongCircuit,
    /// Adds `δ ≠ 0` to a guessed set of `λ/2` slots.
    SlotSubstitute,
    /// Adds `δ ≠ 0` to one slot.
    AdditiveNoise,
    /// Replays the result of an earlier session.
    StaleLabel,
    /// Returns another ciphertext under the honest tag.
    CiphertextSwap,
    /// Returns a fresh encryption of a constant under the honest tag.
    ConstantOutput,
}

impl Tamper {
    pub const ALL: [Tamper; 7] = [
        Tamper::None,
        Tamper::WrongCircuit,
        Tamper::SlotSubstitute,
        Tamper::AdditiveNoise,
        Tamper::StaleLabel,
        Tamper::CiphertextSwap,
        Tamper::ConstantOutput,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Tamper::None => "none",
            Tamper::WrongCircuit => "wrong-circuit",
            Tamper::SlotSubstitute => "slot-substitute",
            Tamper::AdditiveNoise => "additive-noise",
            Tamper::StaleLabel => "stale-label",
            Tamper::CiphertextSwap => "ciphertext-swap",
            Tamper::ConstantOutput => "constant-output",
        }
    }
}

impl std::fmt::Display for Tamper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Tamper {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| Error::Config(format!("unknown tamper directive {s:?}")))
    }
}

/// What the adversary did, for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TamperRecord {
    /// Slots that were modified.
    pub slots: Vec<usize>,
    pub delta: u64,
}

/// Everything a dishonest server may draw on besides the honest inputs.
pub struct Adversary<'a> {
    pub tamper: Tamper,
    pub sampler: &'a mut Sampler,
    /// An authenticator for the same program from an earlier session.
    pub stale: Option<&'a Authenticator>,
    /// Some other ciphertext seen during the session.
    pub decoy: Option<&'a Authenticator>,
    /// A public encryption key the server can encrypt under.
    pub encryption_key: Option<(GroupId, &'a EncryptionKey)>,
}

/// `f + x_1`: same labels, different circuit.
pub fn perturbed_program(program: &LabeledProgram) -> Result<LabeledProgram> {
    let mut gates = program.circuit().gates().to_vec();
    let out = gates.len() - 1;
    let first_input = gates
        .iter()
        .position(|g| matches!(g, Gate::Input(_)))
        .ok_or_else(|| Error::Circuit("program has no inputs".into()))?;
    gates.push(Gate::Add(out, first_input));
    LabeledProgram::new(Circuit::new(gates, program.labels().len())?, program.labels().to_vec())
}

/// Runs the server's evaluation, deviating as `adv.tamper` prescribes.
pub fn server_eval(
    pp: &PublicParams,
    program: &LabeledProgram,
    inputs: &[Authenticator],
    keys: &KeySet,
    adv: &mut Adversary<'_>,
) -> Result<(Authenticator, TamperRecord)> {
    let lambda = pp.lambda();
    let p = pp.plaintext_modulus();
    let mut record = TamperRecord::default();
    let out = match adv.tamper {
        Tamper::None => eval_authenticated(pp, program, inputs, keys)?,
        Tamper::WrongCircuit => eval_authenticated(pp, &perturbed_program(program)?, inputs, keys)?,
        Tamper::SlotSubstitute | Tamper::AdditiveNoise => {
            let honest = eval_authenticated(pp, program, inputs, keys)?;
            let rng = adv.sampler.rng();
            let mut all: Vec<usize> = (0..lambda).collect();
            let count = if adv.tamper == Tamper::SlotSubstitute { lambda / 2 } else { 1 };
            let (chosen, _) = all.partial_shuffle(rng, count);
            record.slots = chosen.to_vec();
            record.slots.sort_unstable();
            record.delta = rng.gen_range(1..p);
            let mut shift = vec![0u64; lambda];
            for &j in &record.slots {
                shift[j] = record.delta;
            }
            Authenticator {
                ct: add_plain(pp, &honest.ct, &encode_slots(pp.ctx_p(), &shift)?)?,
                tag: honest.tag,
            }
        }
        Tamper::StaleLabel => adv
            .stale
            .cloned()
            .ok_or_else(|| Error::Protocol("stale-label tamper needs an earlier result".into()))?,
        Tamper::CiphertextSwap => {
            let honest = eval_authenticated(pp, program, inputs, keys)?;
            let decoy = adv
                .decoy
                .ok_or_else(|| Error::Protocol("ciphertext-swap tamper needs a decoy".into()))?;
            Authenticator {
                ct: decoy.ct.clone(),
                tag: honest.tag,
            }
        }
        Tamper::ConstantOutput => {
            let honest = eval_authenticated(pp, program, inputs, keys)?;
            let (group, ek) = adv
                .encryption_key
                .ok_or_else(|| Error::Protocol("constant-output tamper needs an encryption key".into()))?;
            record.delta = adv.sampler.rng().gen_range(0..p);
            let pt = encode_slots(pp.ctx_p(), &vec![record.delta; lambda])?;
            record.slots = (0..lambda).collect();
            Authenticator {
                ct: encrypt(pp, ek, group, &pt, adv.sampler)?,
                tag: honest.tag,
            }
        }
    };
    Ok((out, record))
}
