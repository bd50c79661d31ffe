//! Multigroup BFV over `R_q`.

mod ciphertext;
mod decrypt;
mod eval;
mod keys;
mod params;

pub use ciphertext::{
    add_plain, align, encrypt, eval_add, expand, mul_scalar, realign, union_roster, MultigroupCiphertext,
};
pub use decrypt::{
    aggregate_shares, combine_group_shares, combine_shares, ideal_decrypt, ideal_phase, noise_budget_bits,
    noise_norm, partial_decrypt, scale_to_plaintext, share_noise, DecryptionShare, GroupDecryptionShare,
};
pub use eval::{eval_mul, eval_mul_any, eval_mul_crsfree, KeySet};
pub use keys::{
    aggregate_alpha, aggregate_group, aggregate_group_crs_free, announce_group, encryption_share,
    keygen_cross_group, keygen_party, keygen_party_crs_free, linearity_residuals, max_norm, relin_base_crs,
    relin_base_crs_free, CrossGroupShare, CrsFreeCommitment, EncryptionKey, EncryptionShare, GroupAnnouncement,
    GroupId, IdealSecretKey, JointKeys, KeygenState, PartyId, PartyKeygen, PublicKeyShare, RelinKey, SecretKey,
    SECRET_KEY_CANARY,
};
pub use params::{setup, Crs, KeyMode, PublicParams};
