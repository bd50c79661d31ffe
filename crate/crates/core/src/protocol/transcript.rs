//! Ordered broadcast log with a line-oriented text form.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scheme::PartyId;

const HEADER: &str = "vmghe-transcript 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sender {
    /// The harness itself (session configuration).
    Harness,
    Party(PartyId),
    Server,
}

impl fmt::Display for Sender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sender::Harness => f.write_str("harness"),
            Sender::Server => f.write_str("server"),
            Sender::Party(p) => write!(f, "p{p}"),
        }
    }
}

impl FromStr for Sender {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harness" => Ok(Sender::Harness),
            "server" => Ok(Sender::Server),
            _ => s
                .strip_prefix('p')
                .and_then(|n| n.parse().ok())
                .map(Sender::Party)
                .ok_or_else(|| Error::Decode(format!("bad sender {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub round: u32,
    pub sender: Sender,
    pub kind: String,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    params_digest: [u8; 32],
    records: Vec<Record>,
}

impl Transcript {
    pub fn new(params_digest: [u8; 32]) -> Self {
        Self {
            params_digest,
            records: Vec::new(),
        }
    }

    pub fn params_digest(&self) -> &[u8; 32] {
        &self.params_digest
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn push(&mut self, round: u32, sender: Sender, kind: &str, payload: Vec<u8>) {
        debug_assert!(!kind.contains(char::is_whitespace));
        self.records.push(Record {
            round,
            sender,
            kind: kind.to_owned(),
            payload,
        });
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.kind == kind)
    }

    /// Records appended after the first `since`.
    pub fn since(&self, since: usize) -> &[Record] {
        &self.records[since.min(self.records.len())..]
    }

    pub fn last_round(&self) -> u32 {
        self.records.last().map_or(0, |r| r.round)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER} {}\n", hex::encode(self.params_digest));
        for r in &self.records {
            out.push_str(&format!("{} {} {} {}\n", r.round, r.sender, r.kind, hex::encode(&r.payload)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Decode("empty transcript".into()))?;
        let digest_hex = header
            .strip_prefix(HEADER)
            .map(str::trim)
            .ok_or_else(|| Error::Decode("missing transcript header".into()))?;
        let params_digest = decode_hex(digest_hex)?
            .try_into()
            .map_err(|_| Error::Decode("parameter digest must be 32 bytes".into()))?;
        let mut records = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(' ').collect();
            let [round, sender, kind, payload] = fields[..] else {
                return Err(Error::Decode(format!("line {}: expected 4 fields", n + 2)));
            };
            records.push(Record {
                round: round
                    .parse()
                    .map_err(|_| Error::Decode(format!("line {}: bad round", n + 2)))?,
                sender: sender.parse()?,
                kind: kind.to_owned(),
                payload: decode_hex(payload)?,
            });
        }
        Ok(Self {
            params_digest,
            records,
        })
    }

    /// SHA-256 of the text form.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_text().as_bytes()).into()
    }

    /// Whether any payload contains `needle`.
    pub fn contains_bytes(&self, needle: &[u8]) -> bool {
        !needle.is_empty()
            && self
                .records
                .iter()
                .any(|r| r.payload.windows(needle.len()).any(|w| w == needle))
    }
}

fn decode_hex(s: &str) -> Result<Vec<u8>> {
    hex::decode(s).map_err(|e| Error::Decode(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let mut t = Transcript::new([7; 32]);
        t.push(0, Sender::Harness, "config", b"name = 1".to_vec());
        t.push(1, Sender::Party(3), "pk-share", vec![0, 255, 16]);
        t.push(2, Sender::Server, "result", Vec::new());
        let text = t.to_text();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(2).unwrap().starts_with("1 p3 pk-share 00ff10"));
        let back = Transcript::from_text(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.digest(), t.digest());
        assert!(t.contains_bytes(&[255, 16]));
        assert!(!t.contains_bytes(&[16, 255]));
    }

    #[test]
    fn malformed_text() {
        assert!(Transcript::from_text("").is_err());
        assert!(Transcript::from_text("nope 00").is_err());
        let head = format!("{HEADER} {}\n", hex::encode([0u8; 32]));
        assert!(Transcript::from_text(&format!("{head}1 p1 x\n")).is_err());
        assert!(Transcript::from_text(&format!("{head}1 q1 x 00\n")).is_err());
        assert!(Transcript::from_text(&format!("{head}1 p1 x 0g\n")).is_err());
        assert!(Transcript::from_text(&format!("{head}1 p1 x 00\n")).is_ok());
    }
}
