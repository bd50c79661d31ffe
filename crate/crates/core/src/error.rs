use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("ring degree {0} is not a power of two")]
    InvalidDegree(usize),
    #[error("modulus {0} is not a prime below 2^62")]
    InvalidModulus(u64),
    #[error("modulus chain is empty")]
    EmptyModulusChain,
    #[error("prime {prime} is not congruent to 1 mod 2N for N = {degree}")]
    NotNttFriendly { prime: u64, degree: usize },
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("malformed digit partition {0:?}")]
    MalformedPartition(Vec<usize>),
    #[error("ring elements belong to different contexts")]
    ContextMismatch,
    #[error("ring elements are in different representations")]
    DomainMismatch,
    #[error("division by zero in rescaling")]
    ZeroDenominator,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid sampler parameters: {0}")]
    InvalidSampler(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("operation requires {0} mode")]
    WrongMode(&'static str),
    #[error("group roster is empty")]
    EmptyRoster,
    #[error("key shares were generated in different modes or for different groups")]
    MixedShares,
    #[error("no key material for group {0}")]
    MissingKey(u32),
    #[error("no cross-group key from group {from} towards group {to}")]
    MissingCrossKey { from: u32, to: u32 },
    #[error("expansion position {position} out of range for {groups} groups")]
    PositionOutOfRange { position: usize, groups: usize },
    #[error("ciphertext rosters are incompatible")]
    RosterMismatch,
    #[error("plaintext is not an element of R_p")]
    PlaintextOutOfRing,
    #[error("decryption share missing for party {party} of group {group}")]
    MissingShare { group: u32, party: u32 },
    #[error("duplicate decryption share from party {party} of group {group}")]
    DuplicateShare { group: u32, party: u32 },
    #[error("decryption share refers to a different ciphertext")]
    ForeignShare,
    #[error("label {0:?} was already authenticated with a different message")]
    LabelReuse(String),
    #[error("label longer than 256 bytes")]
    LabelTooLong,
    #[error("replication factor {lambda} exceeds the {slots} plaintext slots")]
    TooManySlots { lambda: usize, slots: usize },
    #[error("replication factor {0} must be a power of two, at least 2")]
    InvalidLambda(usize),
    #[error("circuit error: {0}")]
    Circuit(String),
    #[error("circuit needs multiplicative depth {depth}, budget is {budget}")]
    DepthExceeded { depth: usize, budget: usize },
    #[error("malformed encoding: {0}")]
    Decode(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("timed out waiting for a share from party {party} of group {group}")]
    Timeout { group: u32, party: u32 },
    #[error("parties diverged: {0}")]
    Divergence(String),
    #[error("config error: {0}")]
    Config(String),
}
