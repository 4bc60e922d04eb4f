use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Message, OpCounts, Role, SchemeId, Slots};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionOutcome {
    /// Both sides accepted. Keys are `None` for schemes without key agreement.
    MutualAuthSuccess {
        user_key: Option<Vec<u8>>,
        server_key: Option<Vec<u8>>,
    },
    ServerReject {
        step: String,
    },
    UserReject {
        step: String,
    },
    Aborted {
        reason: String,
    },
}

impl SessionOutcome {
    pub fn kind(&self) -> &'static str {
        match self {
            SessionOutcome::MutualAuthSuccess { .. } => "MutualAuthSuccess",
            SessionOutcome::ServerReject { .. } => "ServerReject",
            SessionOutcome::UserReject { .. } => "UserReject",
            SessionOutcome::Aborted { .. } => "Aborted",
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, SessionOutcome::MutualAuthSuccess { .. })
    }

    pub fn failure_step(&self) -> Option<&str> {
        match self {
            SessionOutcome::ServerReject { step } | SessionOutcome::UserReject { step } => Some(step),
            _ => None,
        }
    }

    /// `Some(true)` when both sides hold the same key, `None` when no keys.
    pub fn keys_match(&self) -> Option<bool> {
        match self {
            SessionOutcome::MutualAuthSuccess { user_key: Some(u), server_key: Some(s) } => Some(u == s),
            SessionOutcome::MutualAuthSuccess { user_key: None, server_key: None } => None,
            SessionOutcome::MutualAuthSuccess { .. } => Some(false),
            _ => None,
        }
    }
}

impl fmt::Display for SessionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionOutcome::MutualAuthSuccess { .. } => f.write_str("MutualAuthSuccess"),
            SessionOutcome::ServerReject { step } => write!(f, "ServerReject at {step}"),
            SessionOutcome::UserReject { step } => write!(f, "UserReject at {step}"),
            SessionOutcome::Aborted { reason } => write!(f, "Aborted: {reason}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub user: OpCounts,
    pub server: OpCounts,
}

/// Append-only record of one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub scheme: SchemeId,
    pub seed: u64,
    pub outcome: SessionOutcome,
    pub messages: Vec<Message>,
    pub counters: Counters,
    /// Session-local values of both parties, prefixed `user.` / `server.`.
    /// Never serialized; only declared-leak scenarios read them.
    pub ephemerals: Slots,
}

impl Transcript {
    pub(crate) fn new(scheme: SchemeId, seed: u64) -> Self {
        Transcript {
            scheme,
            seed,
            outcome: SessionOutcome::Aborted { reason: "not run".into() },
            messages: Vec::new(),
            counters: Counters::default(),
            ephemerals: Slots::new(),
        }
    }

    pub(crate) fn record_ephemerals(&mut self, prefix: &str, scratch: &Slots) {
        for (k, v) in scratch.iter() {
            self.ephemerals.set(&format!("{prefix}.{k}"), v.clone());
        }
    }

    pub fn messages_sent(&self) -> usize {
        self.messages.len()
    }

    pub fn messages_from(&self, role: Role) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(move |m| m.from == role)
    }

    pub fn failure_step(&self) -> Option<&str> {
        self.outcome.failure_step()
    }
}

#[derive(Serialize)]
struct KeysJson {
    user: Option<String>,
    server: Option<String>,
}

#[derive(Serialize)]
struct TranscriptJson<'a> {
    scheme: SchemeId,
    outcome: &'static str,
    failure_step: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    session_keys: Option<KeysJson>,
    messages: &'a [Message],
    counters: Counters,
    seed: u64,
}

impl Serialize for Transcript {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let session_keys = match &self.outcome {
            SessionOutcome::MutualAuthSuccess { user_key, server_key }
                if user_key.is_some() || server_key.is_some() =>
            {
                Some(KeysJson {
                    user: user_key.as_ref().map(hex::encode),
                    server: server_key.as_ref().map(hex::encode),
                })
            }
            _ => None,
        };
        let reason = match &self.outcome {
            SessionOutcome::Aborted { reason } => Some(reason.as_str()),
            _ => None,
        };
        TranscriptJson {
            scheme: self.scheme,
            outcome: self.outcome.kind(),
            failure_step: self.failure_step(),
            reason,
            session_keys,
            messages: &self.messages,
            counters: self.counters,
            seed: self.seed,
        }
        .serialize(s)
    }
}
