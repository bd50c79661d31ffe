//! Verifiable multigroup homomorphic encryption.
//!
//! A BFV-style multigroup scheme over a residue number system whose product
//! uses a homomorphic gadget decomposition, wrapped in a replication-encoding
//! homomorphic authenticator and driven by an in-process multiparty protocol
//! simulator.
//!
//! Layers, bottom up:
//! - [`ring`]: `R_q` in residue form, NTT, samplers, exact rescaling.
//! - [`gadget`]: gadget vectors and digit decompositions.
//! - [`scheme`]: parameters, key generation, encryption, evaluation, decryption.
//! - [`auth`]: labeled programs, hash trees, challenge sets, authenticators.
//! - [`protocol`]: deterministic round-based simulation with transcripts.

pub mod auth;
pub mod error;
pub mod encoding;
pub mod gadget;
pub mod params;
pub mod protocol;
pub mod ring;
pub mod scheme;
pub mod stats;
pub mod wire;

pub use error::{Error, Result};
