//! Session configuration and scenario files.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::auth::{LabeledProgram, Tamper};
use crate::error::{Error, Result};
use crate::params::Preset;
use crate::scheme::{GroupId, KeyMode, PartyId};

/// Who takes part and under which parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub preset: Preset,
    pub mode: KeyMode,
    pub lambda: usize,
    pub master_seed: u64,
    /// Group rosters in group-id order.
    pub groups: Vec<(GroupId, Vec<PartyId>)>,
}

impl SessionConfig {
    pub fn new(preset: Preset, mode: KeyMode, master_seed: u64, groups: Vec<(GroupId, Vec<PartyId>)>) -> Result<Self> {
        let cfg = Self {
            lambda: preset.lambda,
            preset,
            mode,
            master_seed,
            groups,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Groups `0..sizes.len()` with consecutive party ids.
    pub fn with_sizes(preset: Preset, mode: KeyMode, master_seed: u64, sizes: &[usize]) -> Result<Self> {
        let mut next = 0;
        let groups = sizes
            .iter()
            .enumerate()
            .map(|(g, &n)| {
                let roster = (next..next + n as PartyId).collect();
                next += n as PartyId;
                (g as GroupId, roster)
            })
            .collect();
        Self::new(preset, mode, master_seed, groups)
    }

    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::EmptyRoster);
        }
        let mut group_ids = BTreeSet::new();
        let mut party_ids = BTreeSet::new();
        for (g, roster) in &self.groups {
            if !group_ids.insert(*g) {
                return Err(Error::Config(format!("duplicate group id {g}")));
            }
            if roster.is_empty() {
                return Err(Error::EmptyRoster);
            }
            for p in roster {
                if !party_ids.insert(*p) {
                    return Err(Error::Config(format!("duplicate party id {p}")));
                }
            }
        }
        if self.lambda < 2 || !self.lambda.is_power_of_two() {
            return Err(Error::InvalidLambda(self.lambda));
        }
        let mut preset = self.preset.clone();
        preset.lambda = self.lambda;
        preset.validate()
    }

    /// The preset with `λ` overridden by the session's.
    pub fn effective_preset(&self) -> Preset {
        let mut preset = self.preset.clone();
        preset.lambda = self.lambda;
        preset
    }

    /// 32-byte seed for one purpose, derived from the master seed.
    pub fn derive_seed(&self, domain: &str, index: u64) -> [u8; 32] {
        Sha256::new()
            .chain_update(b"vmghe/seed/")
            .chain_update(domain.as_bytes())
            .chain_update(self.master_seed.to_le_bytes())
            .chain_update(index.to_le_bytes())
            .finalize()
            .into()
    }

    pub fn roster(&self, group: GroupId) -> Option<&[PartyId]> {
        self.groups.iter().find(|(g, _)| *g == group).map(|(_, r)| r.as_slice())
    }

    pub fn group_of(&self, party: PartyId) -> Option<GroupId> {
        self.groups.iter().find(|(_, r)| r.contains(&party)).map(|(g, _)| *g)
    }

    pub fn parties(&self) -> impl Iterator<Item = (GroupId, PartyId)> + '_ {
        self.groups.iter().flat_map(|(g, r)| r.iter().map(move |p| (*g, *p)))
    }

    pub fn rosters(&self) -> BTreeMap<GroupId, Vec<PartyId>> {
        self.groups.iter().cloned().collect()
    }
}

/// One program input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    pub value: u64,
    pub group: GroupId,
    /// Authenticating party; defaults to the first member of `group`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party: Option<PartyId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramSection {
    pub expr: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamperSection {
    #[serde(default)]
    pub kind: Tamper,
}

fn default_preset() -> String {
    "TEST-S".into()
}

fn default_mode() -> KeyMode {
    KeyMode::Crs
}

/// A complete run: who, what, with which inputs, against which server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default = "default_mode")]
    pub mode: KeyMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Group id (as a string key) to party ids.
    pub groups: BTreeMap<String, Vec<PartyId>>,
    pub program: ProgramSection,
    pub inputs: BTreeMap<String, InputSpec>,
    #[serde(default)]
    pub tamper: TamperSection,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn program(&self) -> Result<LabeledProgram> {
        LabeledProgram::parse(&self.program.expr)
    }

    pub fn config(&self) -> Result<SessionConfig> {
        let mut preset = Preset::by_name(&self.preset)?;
        if let Some(l) = self.lambda {
            preset.lambda = l;
        }
        let mut groups = self
            .groups
            .iter()
            .map(|(g, r)| {
                let id = g
                    .trim()
                    .parse::<GroupId>()
                    .map_err(|_| Error::Config(format!("group key {g:?} is not a number")))?;
                Ok((id, r.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        groups.sort_by_key(|(g, _)| *g);
        SessionConfig::new(preset, self.mode, self.seed, groups)
    }

    /// Inputs in the program's label order.
    pub fn ordered_inputs(&self) -> Result<Vec<(String, InputSpec)>> {
        let program = self.program()?;
        program
            .labels()
            .iter()
            .map(|l| {
                let name = String::from_utf8_lossy(l).into_owned();
                let spec = self
                    .inputs
                    .get(&name)
                    .ok_or_else(|| Error::Config(format!("no input for label {name:?}")))?;
                Ok((name, spec.clone()))
            })
            .collect()
    }

    /// Plaintext value of the program on the scenario's inputs.
    pub fn expected(&self) -> Result<u64> {
        let program = self.program()?;
        let values: Vec<u64> = self.ordered_inputs()?.iter().map(|(_, s)| s.value).collect();
        let p = Preset::by_name(&self.preset)?.plaintext_modulus;
        program.circuit().eval_mod(&values, p)
    }

    pub fn validate(&self) -> Result<()> {
        // TOML integers are signed 64-bit
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed {} does not fit a scenario file", self.seed)));
        }
        let cfg = self.config()?;
        let program = self.program()?;
        for (name, spec) in self.ordered_inputs()? {
            let roster = cfg
                .roster(spec.group)
                .ok_or_else(|| Error::Config(format!("input {name:?} names unknown group {}", spec.group)))?;
            if let Some(p) = spec.party {
                if !roster.contains(&p) {
                    return Err(Error::Config(format!(
                        "input {name:?}: party {p} is not in group {}",
                        spec.group
                    )));
                }
            }
        }
        let extra: Vec<&String> = self
            .inputs
            .keys()
            .filter(|k| !program.labels().iter().any(|l| l == k.as_bytes()))
            .collect();
        if !extra.is_empty() {
            return Err(Error::Config(format!("inputs {extra:?} are not used by the program")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "demo"
preset = "TEST-S"
mode = "crs"
seed = 7

[groups]
0 = [0, 1]
1 = [2]

[program]
expr = "x * 3 + y"

[inputs]
x = { value = 5, group = 0 }
y = { value = 2, group = 1, party = 2 }

[tamper]
kind = "slot-substitute"
"#;

    #[test]
    fn scenario_roundtrip() {
        let s = Scenario::from_toml(SAMPLE).unwrap();
        assert_eq!(s.tamper.kind, Tamper::SlotSubstitute);
        assert_eq!(s.expected().unwrap(), 17);
        let cfg = s.config().unwrap();
        assert_eq!(cfg.groups, vec![(0, vec![0, 1]), (1, vec![2])]);
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_rosters() {
        let mut huge = Scenario::from_toml(SAMPLE).unwrap();
        huge.seed = u64::MAX;
        assert!(matches!(huge.validate(), Err(Error::Config(_))));
        let dup = SAMPLE.replace("1 = [2]", "1 = [1]");
        assert!(matches!(Scenario::from_toml(&dup), Err(Error::Config(_))));
        let missing = SAMPLE.replace("y = { value = 2, group = 1, party = 2 }", "");
        assert!(Scenario::from_toml(&missing).is_err());
        let foreign = SAMPLE.replace("party = 2", "party = 0");
        assert!(Scenario::from_toml(&foreign).is_err());
        assert!(SessionConfig::new(Preset::test_s(), KeyMode::Crs, 0, vec![(0, vec![0]), (0, vec![1])]).is_err());
    }

    #[test]
    fn seeds_are_separated() {
        let cfg = SessionConfig::with_sizes(Preset::test_s(), KeyMode::Crs, 1, &[2, 1]).unwrap();
        assert_eq!(cfg.groups, vec![(0, vec![0, 1]), (1, vec![2])]);
        assert_ne!(cfg.derive_seed("party", 0), cfg.derive_seed("party", 1));
        assert_ne!(cfg.derive_seed("party", 0), cfg.derive_seed("server", 0));
        assert_eq!(cfg.group_of(2), Some(1));
    }
}
