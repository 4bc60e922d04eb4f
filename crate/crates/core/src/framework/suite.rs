use serde::{Deserialize, Serialize};

use super::{Env, Identity, Message, Password, Payload, SchemeId, ServerState, Slots, SmartCard};
use crate::crypto::HashFn;
use crate::{Error, Result};

/// Why a protocol step stopped the session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Halt {
    /// A named verification failed.
    Reject(String),
    /// The message could not be processed at all (malformed, undecodable).
    Abort(String),
}

impl Halt {
    pub fn reject(step: &str) -> Self {
        Halt::Reject(step.to_owned())
    }
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Abort(e.to_string())
    }
}

impl From<crate::crypto::CryptoError> for Halt {
    fn from(e: crate::crypto::CryptoError) -> Self {
        Halt::Abort(e.to_string())
    }
}

pub type Step<T> = std::result::Result<T, Halt>;

/// Rejects with `step` unless `ok`.
pub fn check(ok: bool, step: &str) -> Step<()> {
    if ok {
        Ok(())
    } else {
        Err(Halt::reject(step))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteMeta {
    pub defines_session_key: bool,
    pub uses_timestamps: bool,
    /// Password change needs the server (first two authentication steps).
    pub online_password_change: bool,
    pub supports_revocation: bool,
    /// Messages in an honest authentication run: 2 or 3.
    pub messages: usize,
}

/// The user's answer to the server's first message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserFinal {
    pub reply: Option<Payload>,
    pub key: Option<Vec<u8>>,
}

/// One scheme's phase functions.
///
/// Phase functions are pure given their arguments: all randomness and time
/// come from the [`Env`]. Session-local values travel in a [`Slots`] scratch
/// map that the driver threads from one step to the next.
pub trait SchemeSuite: Send + Sync {
    fn id(&self) -> SchemeId;

    fn meta(&self) -> SuiteMeta;

    fn hasher(&self) -> HashFn {
        HashFn::default()
    }

    /// Everything the scheme publishes. This is the adversary's whole view
    /// beyond the channel.
    fn public_params(&self) -> Slots;

    /// A fresh server holding this deployment's secrets and no accounts.
    fn new_server(&self) -> ServerState;

    /// Exact slot set of a freshly issued card.
    fn card_slots(&self) -> &'static [&'static str];

    fn register(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard>;

    /// Card side of the first message. Takes whatever the user typed; no
    /// local validation happens.
    fn login_begin(
        &self,
        env: &mut Env<'_>,
        card: &mut SmartCard,
        id: &Identity,
        pw: &Password,
    ) -> Result<(Payload, Slots)>;

    fn server_respond(&self, env: &mut Env<'_>, server: &mut ServerState, m1: &Message) -> Step<(Payload, Slots)>;

    fn user_finalize(&self, env: &mut Env<'_>, card: &SmartCard, session: &Slots, m2: &Message) -> Step<UserFinal>;

    /// Checks the third message when there is one and returns the server's key.
    fn server_finalize(
        &self,
        env: &mut Env<'_>,
        server: &mut ServerState,
        session: &Slots,
        m3: Option<&Message>,
    ) -> Step<Option<Vec<u8>>>;

    /// Card-local password change. Runs whatever the old password input is.
    fn change_password(
        &self,
        _env: &mut Env<'_>,
        _card: &mut SmartCard,
        _old: &Password,
        _new: &Password,
    ) -> Result<()> {
        Err(Error::UnsupportedPhase { scheme: self.id().to_string(), phase: "offline password change" })
    }

    /// Last step of a server-assisted change, run on the server's first reply.
    fn complete_online_change(
        &self,
        _env: &mut Env<'_>,
        _card: &mut SmartCard,
        _session: &Slots,
        _m2: &Message,
        _old: &Password,
        _new: &Password,
    ) -> Step<()> {
        Err(Halt::Abort(format!("{} has no online password change", self.id())))
    }

    fn revoke(
        &self,
        _env: &mut Env<'_>,
        _server: &mut ServerState,
        _id: &Identity,
        _pw: &Password,
    ) -> Result<SmartCard> {
        Err(Error::UnsupportedPhase { scheme: self.id().to_string(), phase: "revocation" })
    }
}
