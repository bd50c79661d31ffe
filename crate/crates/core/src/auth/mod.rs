//! Labeled programs, hash trees, challenge sets and the authenticator.

mod authenticator;
mod challenge;
mod program;
mod tags;
mod tamper;

pub use authenticator::{
    auth, check_slots, eval_authenticated, eval_ciphertexts, expected_challenges, extended_message, verify,
    AuthSession, Authenticator, DecryptionPath, IdealDecryption, RejectReason, Verdict,
};
pub use challenge::{combine_mask, select_from_mask, setgen_combine, setgen_local, ChallengeSet};
pub use program::{compose, Circuit, Evaluator, Gate, Label, LabeledProgram, MAX_LABEL_LEN};
pub use tags::{expected_tag, hash_tree_eval, Crhf, Prf, Tag};
pub use tamper::{perturbed_program, server_eval, Adversary, Tamper, TamperRecord};
