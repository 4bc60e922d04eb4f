use thiserror::Error;

use crate::crypto::CryptoError;
use crate::framework::AdversaryError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("identity {0} is already registered")]
    DuplicateIdentity(String),
    #[error("identity {0} is not registered")]
    UnknownIdentity(String),
    #[error("password change needs the server and none is reachable")]
    ServerUnreachable,
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("scenario {scenario} does not apply to {scheme}")]
    UnsupportedScenario { scheme: String, scenario: String },
    #[error("tamper `{tamper}` is not defined for {scheme}")]
    UnsupportedTamper { scheme: String, tamper: String },
    #[error("{scheme} has no {phase} phase")]
    UnsupportedPhase { scheme: String, phase: &'static str },
    #[error("no recorded session to replay")]
    NoRecordedSession,
    #[error("missing slot `{0}`")]
    MissingSlot(String),
    #[error("slot `{0}` holds a value of the wrong kind")]
    SlotKind(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
