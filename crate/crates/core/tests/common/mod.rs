#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;

use vmghe::ring::{RingElement, Sampler};
use vmghe::scheme::*;

pub struct Groups {
    pub keys: KeySet,
    pub ideal: Vec<IdealSecretKey>,
    pub secrets: BTreeMap<GroupId, Vec<(PartyId, KeygenState)>>,
}

impl Groups {
    pub fn rosters(&self) -> BTreeMap<GroupId, Vec<PartyId>> {
        self.keys.iter().map(|(g, k)| (*g, k.roster.clone())).collect()
    }

    pub fn relin_randomness(&self, group: GroupId) -> RingElement {
        let states = &self.secrets[&group];
        let mut r = states[0].1.relin_randomness().clone();
        for (_, s) in &states[1..] {
            r = &r + s.relin_randomness();
        }
        r
    }
}

/// Runs key generation for groups `0..sizes.len()` with consecutive party ids.
pub fn keygen(pp: &PublicParams, sizes: &[usize], sampler: &mut Sampler) -> Groups {
    let mut secrets: BTreeMap<GroupId, Vec<(PartyId, KeygenState)>> = BTreeMap::new();
    let mut keys = KeySet::new();
    let mut next_party = 0;
    match pp.mode() {
        KeyMode::Crs => {
            for (g, &size) in sizes.iter().enumerate() {
                let g = g as GroupId;
                let mut shares = Vec::new();
                for _ in 0..size {
                    let out = keygen_party(pp, g, sampler).unwrap();
                    secrets.entry(g).or_default().push((next_party, out.state));
                    shares.push((next_party, out.share));
                    next_party += 1;
                }
                let roster: Vec<(PartyId, &PublicKeyShare)> = shares.iter().map(|(p, s)| (*p, s)).collect();
                keys.insert(g, aggregate_group(pp, &roster).unwrap());
            }
        }
        KeyMode::CrsFree => {
            let mut announcements = BTreeMap::new();
            let mut enc_shares: BTreeMap<GroupId, Vec<EncryptionShare>> = BTreeMap::new();
            for (g, &size) in sizes.iter().enumerate() {
                let g = g as GroupId;
                let mut commits = Vec::new();
                for _ in 0..size {
                    let (state, c) = keygen_party_crs_free(pp, g, sampler).unwrap();
                    secrets.entry(g).or_default().push((next_party, state));
                    commits.push(c);
                    next_party += 1;
                }
                let alpha = aggregate_alpha(pp, &commits.iter().collect::<Vec<_>>()).unwrap();
                let shares: Vec<EncryptionShare> = secrets[&g]
                    .iter()
                    .map(|(_, s)| encryption_share(pp, s, &alpha, sampler).unwrap().0)
                    .collect();
                announcements.insert(g, announce_group(pp, g, alpha, &shares.iter().collect::<Vec<_>>()).unwrap());
                enc_shares.insert(g, shares);
            }
            for (g, states) in &secrets {
                let own = &announcements[g];
                let cross: Vec<CrossGroupShare> = states
                    .iter()
                    .flat_map(|(_, s)| {
                        announcements
                            .values()
                            .map(|t| keygen_cross_group(pp, s, &own.alpha, t, sampler).unwrap())
                            .collect::<Vec<_>>()
                    })
                    .collect();
                let roster: Vec<PartyId> = states.iter().map(|(p, _)| *p).collect();
                let jk = aggregate_group_crs_free(
                    pp,
                    &roster,
                    own,
                    &enc_shares[g].iter().collect::<Vec<_>>(),
                    &cross.iter().collect::<Vec<_>>(),
                )
                .unwrap();
                keys.insert(*g, jk);
            }
        }
    }
    let ideal = secrets
        .iter()
        .map(|(g, states)| {
            let sks: Vec<&SecretKey> = states.iter().map(|(_, s)| s.secret_key()).collect();
            IdealSecretKey::from_shares(*g, &sks).unwrap()
        })
        .collect();
    Groups { keys, ideal, secrets }
}

pub fn random_plaintext(pp: &PublicParams, sampler: &mut Sampler) -> RingElement {
    RingElement::random(pp.ctx_p(), sampler.rng())
}
