//! Lock-step simulation of parties, groups and the evaluating server.
//!
//! Every message goes through the transcript: parties read what earlier rounds
//! broadcast by decoding transcript payloads, never by sharing memory. Within a
//! round, party computations run in parallel; their messages are appended in
//! party order, so transcripts are deterministic.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{InputSpec, Scenario, SessionConfig};
use super::transcript::{Record, Sender, Transcript};
use crate::auth::{
    server_eval, setgen_combine, setgen_local, verify, Adversary, AuthSession, Authenticator, ChallengeSet,
    DecryptionPath, LabeledProgram, Prf, Tamper, TamperRecord, Verdict,
};
use crate::encoding::{decode_slots, encode_slots};
use crate::error::{Error, Result};
use crate::ring::{RingElement, Sampler};
use crate::scheme::{
    aggregate_alpha, aggregate_group, aggregate_group_crs_free, aggregate_shares, announce_group, combine_group_shares,
    encrypt, encryption_share, ideal_decrypt, keygen_cross_group, keygen_party, keygen_party_crs_free,
    noise_budget_bits, noise_norm, partial_decrypt, scale_to_plaintext, setup, CrossGroupShare, CrsFreeCommitment,
    DecryptionShare, EncryptionKey, EncryptionShare, GroupAnnouncement, GroupDecryptionShare, GroupId, IdealSecretKey,
    KeyMode, KeySet, KeygenState, MultigroupCiphertext, PartyId, PublicKeyShare, PublicParams, SecretKey,
};
use crate::wire::{Reader, Wire, Writer};

pub mod kinds {
    pub const CONFIG: &str = "config";
    pub const PK_SHARE: &str = "pk-share";
    pub const COMMITMENT: &str = "commitment";
    pub const ENCRYPTION_SHARE: &str = "encryption-share";
    pub const JEK: &str = "jek";
    pub const CROSS_SHARE: &str = "cross-share";
    pub const SETGEN_SHARE: &str = "setgen-share";
    pub const SETGEN_DIGEST: &str = "setgen-digest";
    pub const AUTHENTICATOR: &str = "authenticator";
    pub const RESULT: &str = "result";
    pub const DECRYPTION_SHARE: &str = "decryption-share";
    pub const GROUP_DECRYPTION_SHARE: &str = "group-decryption-share";
    pub const VERDICT: &str = "verdict";
}

const DECOY_LABEL: &[u8] = b"~decoy";

/// One simulated participant.
pub struct Party {
    id: PartyId,
    group: GroupId,
    sampler: Sampler,
    keygen: Option<KeygenState>,
    sk: Option<SecretKey>,
    challenge: Option<ChallengeSet>,
    /// Number of transcript records this party has read.
    inbox: usize,
}

impl Party {
    pub fn id(&self) -> PartyId {
        self.id
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn secret_key(&self) -> Option<&SecretKey> {
        self.sk.as_ref()
    }

    pub fn challenge(&self) -> Option<&ChallengeSet> {
        self.challenge.as_ref()
    }

    pub fn inbox(&self) -> usize {
        self.inbox
    }

    fn secret(&self) -> Result<&SecretKey> {
        self.sk
            .as_ref()
            .ok_or_else(|| Error::Protocol(format!("party {} has no key yet", self.id)))
    }
}

/// Faults injected by tests and demos.
#[derive(Debug, Clone, Default)]
pub struct Faults {
    /// This party never sends its decryption share.
    pub withhold: Option<PartyId>,
    /// Flip one bit of the SetGen message from the first party to the second.
    pub setgen_flip: Option<(PartyId, PartyId)>,
}

/// What the server returned for one evaluation request.
#[derive(Debug, Clone)]
pub struct SessionOutput {
    pub inputs: Vec<Authenticator>,
    pub result: Authenticator,
    pub tamper: TamperRecord,
}

pub struct Harness {
    cfg: SessionConfig,
    pp: Arc<PublicParams>,
    parties: Vec<Party>,
    server: Sampler,
    transcript: Transcript,
    round: u32,
    keys: KeySet,
    individual_keys: BTreeMap<PartyId, (GroupId, EncryptionKey)>,
    challenge: Option<ChallengeSet>,
    session: Option<AuthSession>,
    sessions: u64,
    last_honest: Option<Authenticator>,
    last_decryption: Option<Result<RingElement>>,
    complaints: Vec<String>,
    pub faults: Faults,
}

impl Harness {
    pub fn new(cfg: SessionConfig) -> Result<Self> {
        cfg.validate()?;
        let pp = Arc::new(setup(&cfg.effective_preset(), cfg.mode, cfg.derive_seed("crs", 0))?);
        let sampler_params = *pp.sampler_params();
        let parties = cfg
            .parties()
            .map(|(group, id)| Party {
                id,
                group,
                sampler: Sampler::new(sampler_params, cfg.derive_seed("party", id as u64)),
                keygen: None,
                sk: None,
                challenge: None,
                inbox: 0,
            })
            .collect();
        Ok(Self {
            server: Sampler::new(sampler_params, cfg.derive_seed("server", 0)),
            transcript: Transcript::new(pp.digest()),
            round: 0,
            keys: KeySet::new(),
            individual_keys: BTreeMap::new(),
            challenge: None,
            session: None,
            sessions: 0,
            last_honest: None,
            last_decryption: None,
            complaints: Vec::new(),
            faults: Faults::default(),
            cfg,
            pp,
            parties,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn params(&self) -> &Arc<PublicParams> {
        &self.pp
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn keys(&self) -> &KeySet {
        &self.keys
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn challenge(&self) -> Option<&ChallengeSet> {
        self.challenge.as_ref()
    }

    /// Anomalies parties noticed without aborting.
    pub fn complaints(&self) -> &[String] {
        &self.complaints
    }

    /// Individual encryption key of a party, as derived from its broadcast.
    pub fn individual_key(&self, party: PartyId) -> Option<&EncryptionKey> {
        self.individual_keys.get(&party).map(|(_, k)| k)
    }

    /// Digest of everything public so far plus the agreed challenge set.
    pub fn state_digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.transcript.digest());
        if let Some(s) = &self.challenge {
            h.update(s.provenance());
        }
        h.finalize().into()
    }

    /// Ideal group keys assembled from the parties' shares. Telemetry and
    /// tests only: no party ever sees them.
    pub fn ideal_keys(&self) -> Result<Vec<IdealSecretKey>> {
        self.cfg
            .groups
            .iter()
            .map(|(g, roster)| {
                let shares = roster
                    .iter()
                    .map(|p| self.party(*p).and_then(Party::secret))
                    .collect::<Result<Vec<_>>>()?;
                IdealSecretKey::from_shares(*g, &shares)
            })
            .collect()
    }

    pub fn record_config(&mut self, text: &str) {
        self.transcript
            .push(0, Sender::Harness, kinds::CONFIG, text.as_bytes().to_vec());
    }

    fn party(&self, id: PartyId) -> Result<&Party> {
        self.parties
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| Error::Protocol(format!("unknown party {id}")))
    }

    fn party_mut(&mut self, id: PartyId) -> Result<&mut Party> {
        self.parties
            .iter_mut()
            .find(|p| p.id == id)
            .ok_or_else(|| Error::Protocol(format!("unknown party {id}")))
    }

    fn next_round(&mut self) -> u32 {
        self.round += 1;
        self.round
    }

    fn broadcast(&mut self, sender: Sender, kind: &str, payload: Vec<u8>) {
        self.transcript.push(self.round, sender, kind, payload);
    }

    /// Ends a round: every party has read every record.
    fn deliver(&mut self) {
        let n = self.transcript.records().len();
        for p in &mut self.parties {
            p.inbox = n;
        }
    }

    fn messages(&self, round: u32, kind: &str) -> Vec<&Record> {
        self.transcript
            .records()
            .iter()
            .filter(|r| r.round == round && r.kind == kind)
            .collect()
    }

    fn sender_party(&self, record: &Record) -> Result<(PartyId, GroupId)> {
        match record.sender {
            Sender::Party(p) => Ok((p, self.cfg.group_of(p).ok_or_else(|| Error::Protocol(format!("unknown party {p}")))?)),
            other => Err(Error::Protocol(format!("{} message from {other}", record.kind))),
        }
    }

    fn decode<T: Wire>(&self, record: &Record) -> Result<T> {
        T::from_bytes(&record.payload, &self.pp)
    }

    /// Key generation: joint keys for every group.
    pub fn run_keygen(&mut self) -> Result<&KeySet> {
        match self.cfg.mode {
            KeyMode::Crs => self.keygen_crs()?,
            KeyMode::CrsFree => self.keygen_crs_free()?,
        }
        for p in &mut self.parties {
            p.sk = p.keygen.take().map(KeygenState::finish);
        }
        Ok(&self.keys)
    }

    fn keygen_crs(&mut self) -> Result<()> {
        let round = self.next_round();
        let pp = self.pp.clone();
        let outputs = self
            .parties
            .par_iter_mut()
            .map(|p| {
                let out = keygen_party(&pp, p.group, &mut p.sampler)?;
                p.keygen = Some(out.state);
                Ok((p.id, out.share.to_bytes()))
            })
            .collect::<Result<Vec<_>>>()?;
        for (id, payload) in outputs {
            self.broadcast(Sender::Party(id), kinds::PK_SHARE, payload);
        }
        self.deliver();

        let crs_a0 = pp.crs().ok_or(Error::WrongMode("crs"))?.a[0].clone();
        let mut by_group: BTreeMap<GroupId, Vec<(PartyId, PublicKeyShare)>> = BTreeMap::new();
        for r in self.messages(round, kinds::PK_SHARE) {
            let (party, group) = self.sender_party(r)?;
            let share: PublicKeyShare = self.decode(r)?;
            if share.group != group {
                return Err(Error::MixedShares);
            }
            by_group.entry(group).or_default().push((party, share));
        }
        for (group, shares) in &by_group {
            for (party, share) in shares {
                self.individual_keys.insert(
                    *party,
                    (
                        *group,
                        EncryptionKey {
                            b0: share.b[0].clone(),
                            a0: crs_a0.clone(),
                        },
                    ),
                );
            }
            let roster: Vec<(PartyId, &PublicKeyShare)> = shares.iter().map(|(p, s)| (*p, s)).collect();
            self.keys.insert(*group, aggregate_group(&pp, &roster)?);
        }
        self.check_all_groups_keyed()
    }

    fn keygen_crs_free(&mut self) -> Result<()> {
        let pp = self.pp.clone();

        let round = self.next_round();
        let outputs = self
            .parties
            .par_iter_mut()
            .map(|p| {
                let (state, commitment) = keygen_party_crs_free(&pp, p.group, &mut p.sampler)?;
                p.keygen = Some(state);
                Ok((p.id, commitment.to_bytes()))
            })
            .collect::<Result<Vec<_>>>()?;
        for (id, payload) in outputs {
            self.broadcast(Sender::Party(id), kinds::COMMITMENT, payload);
        }
        self.deliver();
        let mut commitments: BTreeMap<GroupId, Vec<CrsFreeCommitment>> = BTreeMap::new();
        for r in self.messages(round, kinds::COMMITMENT) {
            let (_, group) = self.sender_party(r)?;
            let c: CrsFreeCommitment = self.decode(r)?;
            if c.group != group {
                return Err(Error::MixedShares);
            }
            commitments.entry(group).or_default().push(c);
        }
        let alphas = commitments
            .iter()
            .map(|(g, cs)| Ok((*g, aggregate_alpha(&pp, &cs.iter().collect::<Vec<_>>())?)))
            .collect::<Result<BTreeMap<_, _>>>()?;

        let round = self.next_round();
        let outputs = self
            .parties
            .par_iter_mut()
            .map(|p| {
                let alpha = alphas.get(&p.group).ok_or(Error::MissingKey(p.group))?;
                let state = p.keygen.as_ref().ok_or(Error::MissingKey(p.group))?;
                let (share, _) = encryption_share(&pp, state, alpha, &mut p.sampler)?;
                Ok((p.id, share.to_bytes()))
            })
            .collect::<Result<Vec<_>>>()?;
        for (id, payload) in outputs {
            self.broadcast(Sender::Party(id), kinds::ENCRYPTION_SHARE, payload);
        }
        self.deliver();
        let mut enc_shares: BTreeMap<GroupId, Vec<EncryptionShare>> = BTreeMap::new();
        let mut individual = Vec::new();
        for r in self.messages(round, kinds::ENCRYPTION_SHARE) {
            let (party, group) = self.sender_party(r)?;
            let s: EncryptionShare = self.decode(r)?;
            if s.group != group {
                return Err(Error::MixedShares);
            }
            let ek = EncryptionKey {
                b0: s.b[0].clone(),
                a0: alphas[&group][0].clone(),
            };
            individual.push((party, (group, ek)));
            enc_shares.entry(group).or_default().push(s);
        }
        self.individual_keys.extend(individual);

        // Each group's first member announces (α, jek).
        let round = self.next_round();
        for (group, roster) in self.cfg.groups.clone() {
            let shares = enc_shares.get(&group).ok_or(Error::MissingKey(group))?;
            let alpha = alphas[&group].clone();
            let ann = announce_group(&pp, group, alpha, &shares.iter().collect::<Vec<_>>())?;
            self.broadcast(Sender::Party(roster[0]), kinds::JEK, ann.to_bytes());
        }
        self.deliver();
        let announcements = self
            .messages(round, kinds::JEK)
            .into_iter()
            .map(|r| {
                let (_, group) = self.sender_party(r)?;
                let a: GroupAnnouncement = self.decode(r)?;
                if a.group != group {
                    return Err(Error::MixedShares);
                }
                Ok((group, a))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;

        let round = self.next_round();
        let outputs = self
            .parties
            .par_iter_mut()
            .map(|p| {
                let state = p.keygen.as_ref().ok_or(Error::MissingKey(p.group))?;
                let own = &alphas[&p.group];
                let payloads = announcements
                    .values()
                    .map(|target| Ok(keygen_cross_group(&pp, state, own, target, &mut p.sampler)?.to_bytes()))
                    .collect::<Result<Vec<_>>>()?;
                Ok((p.id, payloads))
            })
            .collect::<Result<Vec<_>>>()?;
        for (id, payloads) in outputs {
            for payload in payloads {
                self.broadcast(Sender::Party(id), kinds::CROSS_SHARE, payload);
            }
        }
        self.deliver();
        let mut cross: BTreeMap<GroupId, Vec<CrossGroupShare>> = BTreeMap::new();
        for r in self.messages(round, kinds::CROSS_SHARE) {
            let (_, group) = self.sender_party(r)?;
            let s: CrossGroupShare = self.decode(r)?;
            if s.group != group {
                return Err(Error::MixedShares);
            }
            cross.entry(group).or_default().push(s);
        }
        for (group, roster) in &self.cfg.groups {
            let jk = aggregate_group_crs_free(
                &pp,
                roster,
                &announcements[group],
                &enc_shares[group].iter().collect::<Vec<_>>(),
                &cross.get(group).map(|v| v.iter().collect::<Vec<_>>()).unwrap_or_default(),
            )?;
            self.keys.insert(*group, jk);
        }
        self.check_all_groups_keyed()
    }

    fn check_all_groups_keyed(&self) -> Result<()> {
        for (g, _) in &self.cfg.groups {
            if !self.keys.contains_key(g) {
                return Err(Error::MissingKey(*g));
            }
        }
        Ok(())
    }

    /// Joint challenge set: every party encrypts its random share to every
    /// other party under that party's individual key.
    pub fn run_setgen(&mut self) -> Result<ChallengeSet> {
        if self.keys.is_empty() {
            return Err(Error::Protocol("key generation has not run".into()));
        }
        let pp = self.pp.clone();
        let lambda = pp.lambda();
        let recipients: Vec<(PartyId, GroupId, EncryptionKey)> = self
            .parties
            .iter()
            .map(|p| {
                let (g, ek) = self.individual_keys.get(&p.id).ok_or(Error::MissingKey(p.group))?;
                Ok((p.id, *g, ek.clone()))
            })
            .collect::<Result<_>>()?;

        let round = self.next_round();
        let outputs = self
            .parties
            .par_iter_mut()
            .map(|p| {
                let share = setgen_local(lambda, p.sampler.rng())?;
                let bits: Vec<u64> = share.iter().map(|&b| b as u64).collect();
                let pt = encode_slots(pp.ctx_p(), &bits)?;
                let messages = recipients
                    .iter()
                    .filter(|(id, _, _)| *id != p.id)
                    .map(|(id, g, ek)| {
                        let ct = encrypt(&pp, ek, *g, &pt, &mut p.sampler)?;
                        let mut w = Writer::default();
                        w.u32(*id);
                        ct.write(&mut w);
                        Ok((*id, w.finish()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((p.id, share, messages))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut own_shares = BTreeMap::new();
        for (id, share, messages) in outputs {
            own_shares.insert(id, share);
            for (to, mut payload) in messages {
                if self.faults.setgen_flip == Some((id, to)) {
                    let at = payload.len() / 2;
                    payload[at] ^= 1;
                }
                self.broadcast(Sender::Party(id), kinds::SETGEN_SHARE, payload);
            }
        }
        self.deliver();

        let records: Vec<Record> = self.messages(round, kinds::SETGEN_SHARE).into_iter().cloned().collect();
        let views = self
            .parties
            .par_iter()
            .map(|p| {
                let mut shares = vec![own_shares[&p.id].clone()];
                let mut complaints = Vec::new();
                for r in &records {
                    let mut reader = Reader::new(&r.payload);
                    if reader.u32()? != p.id {
                        continue;
                    }
                    let decoded = MultigroupCiphertext::read(&mut reader, &pp).and_then(|ct| {
                        reader.finish()?;
                        decrypt_single(&pp, &ct, p.secret()?)
                    });
                    match decoded {
                        Ok(slots) => {
                            if slots[..lambda].iter().any(|&v| v > 1) {
                                complaints.push(format!("party {}: malformed share from {}", p.id, r.sender));
                            }
                            shares.push(slots[..lambda].iter().map(|&v| v != 0).collect());
                        }
                        Err(e) => complaints.push(format!("party {}: unreadable share from {}: {e}", p.id, r.sender)),
                    }
                }
                Ok((setgen_combine(&shares, lambda)?, complaints))
            })
            .collect::<Result<Vec<_>>>()?;

        self.next_round();
        for (p, (set, complaints)) in self.parties.iter_mut().zip(views) {
            let mut payload = set.provenance().to_vec();
            payload.extend(set.indices().iter().flat_map(|&j| (j as u32).to_le_bytes()));
            self.transcript.push(self.round, Sender::Party(p.id), kinds::SETGEN_DIGEST, payload);
            p.challenge = Some(set);
            self.complaints.extend(complaints);
        }
        self.deliver();
        let first = self.parties[0].challenge.clone().expect("set just assigned");
        let distinct = self
            .parties
            .iter()
            .filter(|p| p.challenge.as_ref() != Some(&first))
            .count();
        if distinct > 0 {
            return Err(Error::Divergence(format!(
                "{distinct} of {} parties hold a different challenge set",
                self.parties.len()
            )));
        }
        self.challenge = Some(first.clone());
        Ok(first)
    }

    /// One evaluation request: parties authenticate their inputs, the server
    /// evaluates (deviating as `tamper` says) and broadcasts the result.
    pub fn run_session(
        &mut self,
        program: &LabeledProgram,
        inputs: &[(String, InputSpec)],
        tamper: Tamper,
    ) -> Result<SessionOutput> {
        let challenge = self
            .challenge
            .clone()
            .ok_or_else(|| Error::Protocol("challenge set has not been generated".into()))?;
        if tamper == Tamper::StaleLabel && self.last_honest.is_none() {
            let p = self.pp.plaintext_modulus();
            let earlier: Vec<(String, InputSpec)> = inputs
                .iter()
                .map(|(l, s)| {
                    let mut s = s.clone();
                    s.value = (s.value + 1) % p;
                    (l.clone(), s)
                })
                .collect();
            self.run_session(program, &earlier, Tamper::None)?;
        }
        if inputs.len() != program.labels().len()
            || inputs.iter().zip(program.labels()).any(|((l, _), want)| l.as_bytes() != want.as_slice())
        {
            return Err(Error::Config("inputs do not match the program's labels".into()));
        }

        let pp = self.pp.clone();
        self.sessions += 1;
        let prf = Prf::from_seed(
            &self.cfg.derive_seed("prf", 0),
            format!("session-{}", self.sessions),
            pp.plaintext_modulus(),
        );
        let mut session = AuthSession::new(prf, challenge);

        let round = self.next_round();
        let mut requests: Vec<(PartyId, Vec<u8>, u64, GroupId)> = Vec::new();
        for (label, spec) in inputs {
            let roster = self
                .cfg
                .roster(spec.group)
                .ok_or(Error::MissingKey(spec.group))?;
            let owner = spec.party.unwrap_or(roster[0]);
            if !roster.contains(&owner) {
                return Err(Error::Config(format!("party {owner} is not in group {}", spec.group)));
            }
            requests.push((owner, label.as_bytes().to_vec(), spec.value, spec.group));
        }
        if tamper == Tamper::CiphertextSwap {
            let (owner, _, value, group) = requests[0].clone();
            requests.push((owner, DECOY_LABEL.to_vec(), value + 1, group));
        }
        for (owner, label, value, group) in requests {
            let jek = self.keys.get(&group).ok_or(Error::MissingKey(group))?.jek.clone();
            let party = self.party_mut(owner)?;
            let a = session.auth(&pp, value, &label, &jek, group, &mut party.sampler)?;
            let mut w = Writer::default();
            w.bytes(&label);
            a.write(&mut w);
            self.broadcast(Sender::Party(owner), kinds::AUTHENTICATOR, w.finish());
        }
        self.deliver();

        let mut received: BTreeMap<Vec<u8>, Authenticator> = BTreeMap::new();
        for r in self.messages(round, kinds::AUTHENTICATOR) {
            let mut reader = Reader::new(&r.payload);
            let label = reader.bytes()?.to_vec();
            let a = Authenticator::read(&mut reader, &pp)?;
            reader.finish()?;
            received.insert(label, a);
        }
        let ordered = program
            .labels()
            .iter()
            .map(|l| {
                received
                    .get(l)
                    .cloned()
                    .ok_or_else(|| Error::Protocol(format!("no authenticator for {}", String::from_utf8_lossy(l))))
            })
            .collect::<Result<Vec<_>>>()?;

        let first_group = self.cfg.groups[0].0;
        let mut adversary = Adversary {
            tamper,
            sampler: &mut self.server,
            stale: self.last_honest.as_ref(),
            decoy: received.get(DECOY_LABEL),
            encryption_key: Some((first_group, &self.keys[&first_group].jek)),
        };
        let (result, record) = server_eval(&pp, program, &ordered, &self.keys, &mut adversary)?;

        self.next_round();
        self.broadcast(Sender::Server, kinds::RESULT, result.to_bytes());
        self.deliver();
        if tamper == Tamper::None {
            self.last_honest = Some(result.clone());
        }
        self.session = Some(session);
        Ok(SessionOutput {
            inputs: ordered,
            result,
            tamper: record,
        })
    }

    /// Distributed decryption: party shares, then group shares for groups with
    /// more than one member, then a local merge.
    pub fn run_distributed_decrypt(&mut self, ct: &MultigroupCiphertext) -> Result<RingElement> {
        let pp = self.pp.clone();
        for g in ct.roster() {
            if self.cfg.roster(*g).is_none() {
                return Err(Error::MissingKey(*g));
            }
        }
        let round = self.next_round();
        let withhold = self.faults.withhold;
        let outputs = self
            .parties
            .par_iter_mut()
            .filter(|p| ct.roster().contains(&p.group) && Some(p.id) != withhold)
            .map(|p| {
                let sk = p
                    .sk
                    .as_ref()
                    .ok_or_else(|| Error::Protocol(format!("party {} has no key yet", p.id)))?;
                Ok((p.id, partial_decrypt(&pp, ct, sk, p.group, p.id, &mut p.sampler)?.to_bytes()))
            })
            .collect::<Result<Vec<_>>>()?;
        for (id, payload) in outputs {
            self.broadcast(Sender::Party(id), kinds::DECRYPTION_SHARE, payload);
        }
        self.deliver();
        let mut by_group: BTreeMap<GroupId, Vec<DecryptionShare>> = BTreeMap::new();
        for r in self.messages(round, kinds::DECRYPTION_SHARE) {
            let (party, group) = self.sender_party(r)?;
            let s: DecryptionShare = self.decode(r)?;
            if s.group != group || s.party != party {
                return Err(Error::ForeignShare);
            }
            by_group.entry(group).or_default().push(s);
        }

        let mut group_shares = Vec::new();
        let mut merged_round = None;
        for &g in ct.roster() {
            let roster = self.cfg.roster(g).expect("checked above").to_vec();
            let shares = by_group.remove(&g).unwrap_or_default();
            if let Some(&party) = roster.iter().find(|p| !shares.iter().any(|s| s.party == **p)) {
                return Err(Error::Timeout { group: g, party });
            }
            let aggregated = aggregate_shares(ct, g, &roster, &shares.iter().collect::<Vec<_>>())?;
            if roster.len() == 1 {
                group_shares.push(aggregated);
                continue;
            }
            if merged_round.is_none() {
                merged_round = Some(self.next_round());
            }
            self.broadcast(Sender::Party(roster[0]), kinds::GROUP_DECRYPTION_SHARE, aggregated.to_bytes());
        }
        if let Some(r2) = merged_round {
            self.deliver();
            for r in self.messages(r2, kinds::GROUP_DECRYPTION_SHARE) {
                let s: GroupDecryptionShare = self.decode(r)?;
                group_shares.push(s);
            }
        }
        combine_group_shares(&pp, ct, &group_shares)
    }

    /// Every party verifies the server's result; all must agree.
    pub fn run_verify(&mut self, program: &LabeledProgram, result: &Authenticator) -> Result<Verdict> {
        let session = self
            .session
            .clone()
            .ok_or_else(|| Error::Protocol("no evaluation session has run".into()))?;
        let pp = self.pp.clone();
        self.last_decryption = None;
        let first = verify(&pp, program, result, session.challenge(), session.prf(), self)?;
        let mut cached = Cached(self.last_decryption.clone());
        let mut verdicts = vec![first];
        for p in &self.parties[1..] {
            let challenge = p.challenge.as_ref().unwrap_or(session.challenge());
            verdicts.push(verify(&pp, program, result, challenge, session.prf(), &mut cached)?);
        }
        self.next_round();
        let ids: Vec<PartyId> = self.parties.iter().map(|p| p.id).collect();
        for (id, v) in ids.into_iter().zip(&verdicts) {
            self.broadcast(Sender::Party(id), kinds::VERDICT, verdict_text(v).into_bytes());
        }
        self.deliver();
        if verdicts.iter().any(|v| v != &verdicts[0]) {
            return Err(Error::Divergence("parties reached different verdicts".into()));
        }
        Ok(verdicts.swap_remove(0))
    }

    /// Plaintext from the last verification's distributed decryption.
    pub fn last_decryption(&self) -> Option<&RingElement> {
        self.last_decryption.as_ref().and_then(|r| r.as_ref().ok())
    }
}

impl DecryptionPath for Harness {
    fn decrypt(&mut self, _pp: &PublicParams, ct: &MultigroupCiphertext) -> Result<RingElement> {
        let out = self.run_distributed_decrypt(ct);
        self.last_decryption = Some(out.clone());
        out
    }
}

/// Replays an earlier decryption outcome.
struct Cached(Option<Result<RingElement>>);

impl DecryptionPath for Cached {
    fn decrypt(&mut self, _pp: &PublicParams, _ct: &MultigroupCiphertext) -> Result<RingElement> {
        self.0
            .clone()
            .unwrap_or_else(|| Err(Error::Protocol("no decryption available".into())))
    }
}

/// Single-key decryption by the holder of `sk`; returns slot values.
fn decrypt_single(pp: &PublicParams, ct: &MultigroupCiphertext, sk: &SecretKey) -> Result<Vec<u64>> {
    if ct.roster().len() != 1 {
        return Err(Error::RosterMismatch);
    }
    let mu = ct
        .constant_term()
        .try_add(&ct.components()[1].try_mul(sk.element())?.to_coefficient())?;
    Ok(decode_slots(&scale_to_plaintext(pp, &mu)?))
}

pub fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Accept(m) => format!("accept {m}"),
        Verdict::Reject(r) => format!("reject {}", r.as_str()),
    }
}

/// Everything a scenario run reports.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: String,
    pub verdict: Verdict,
    /// Plaintext value of the program on the inputs.
    pub expected: u64,
    /// Replica-slot value of the distributed decryption, when it ran.
    pub decrypted: Option<u64>,
    pub challenge: Vec<usize>,
    pub ciphertext_components: usize,
    /// `log2(Δ/2) − log2‖noise‖` of the result.
    pub noise_budget_bits: f64,
    pub tamper: Tamper,
    pub tamper_record: TamperRecord,
    pub complaints: Vec<String>,
    pub state_digest: [u8; 32],
    pub transcript: Transcript,
    pub timings: Vec<(&'static str, Duration)>,
}

impl Outcome {
    /// Accepted with the right value.
    pub fn correct(&self) -> bool {
        self.verdict == Verdict::Accept(self.expected)
    }
}

/// Runs keygen, setgen, one session, distributed decryption and verification.
pub fn run_scenario(scenario: &Scenario) -> Result<Outcome> {
    scenario.validate()?;
    let program = scenario.program()?;
    let inputs = scenario.ordered_inputs()?;
    let mut h = Harness::new(scenario.config()?)?;
    h.record_config(&scenario.to_toml());
    let mut timings = Vec::new();
    let mut timed = |name: &'static str, start: Instant| timings.push((name, start.elapsed()));

    let t = Instant::now();
    h.run_keygen()?;
    timed("keygen", t);
    let t = Instant::now();
    let challenge = h.run_setgen()?;
    timed("setgen", t);
    let t = Instant::now();
    let out = h.run_session(&program, &inputs, scenario.tamper.kind)?;
    timed("session", t);
    let t = Instant::now();
    let verdict = h.run_verify(&program, &out.result)?;
    timed("verify", t);

    let pp = h.params().clone();
    let ideal = h.ideal_keys()?;
    let noise = noise_norm(&pp, &out.result.ct, &ideal, &ideal_decrypt(&pp, &out.result.ct, &ideal)?)?;
    let replica = challenge.complement().first().copied().unwrap_or(0);
    Ok(Outcome {
        name: scenario.name.clone(),
        verdict,
        expected: scenario.expected()?,
        decrypted: h.last_decryption().map(|m| decode_slots(m)[replica]),
        challenge: challenge.indices().to_vec(),
        ciphertext_components: out.result.ct.components().len(),
        noise_budget_bits: noise_budget_bits(&pp, &noise),
        tamper: scenario.tamper.kind,
        tamper_record: out.tamper,
        complaints: h.complaints().to_vec(),
        state_digest: h.state_digest(),
        transcript: h.transcript().clone(),
        timings,
    })
}

/// Re-runs the scenario embedded in a transcript and checks that the new
/// transcript is byte-identical.
pub fn replay(text: &str) -> Result<Outcome> {
    let original = Transcript::from_text(text)?;
    let config = original
        .records()
        .first()
        .filter(|r| r.kind == kinds::CONFIG && r.sender == Sender::Harness)
        .ok_or_else(|| Error::Decode("transcript does not start with a configuration record".into()))?;
    let scenario = Scenario::from_toml(
        std::str::from_utf8(&config.payload).map_err(|e| Error::Decode(e.to_string()))?,
    )?;
    let outcome = run_scenario(&scenario)?;
    let again = outcome.transcript.to_text();
    if again != text {
        let line = again
            .lines()
            .zip(text.lines())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| again.lines().count().min(text.lines().count()));
        return Err(Error::Divergence(format!("replay differs from line {}", line + 1)));
    }
    Ok(outcome)
}
