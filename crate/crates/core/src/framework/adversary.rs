//! Dolev-Yao style channel adversary.
//!
//! The adversary sees every message that crosses the channel plus the
//! scheme's public parameters, and nothing else. Card slots and server
//! secrets are not reachable through this type at all; naming one in a
//! transform fails with [`AdversaryError::UnknownField`].

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Fields, Message, Role, Slots, Value};
use crate::crypto::{HashArg, HashFn};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("`{0}` is neither a field of the intercepted message nor a public parameter")]
    UnknownField(String),
    #[error("field `{0}` has the wrong kind for this transform")]
    FieldKind(String),
    #[error("replay of observation #{requested}, but only {observed} messages have been observed")]
    Clairvoyance { requested: usize, observed: usize },
}

/// Rewrite applied to one field of an intercepted message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Leaves the field as it is.
    Identity,
    /// `v * factor mod m`, with `m` named from the adversary's view.
    MulMod {
        factor: BigUint,
        modulus: String,
    },
    /// `h(v || other)`, with `other` named from the adversary's view.
    RehashWith {
        other: String,
    },
    /// Integer XOR with a constant.
    Xor {
        mask: BigUint,
    },
    Set {
        value: Value,
    },
}

/// What the adversary does with the message at one channel position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Record and forward unchanged.
    Observe,
    Drop,
    /// Deliver a previously observed message instead, optionally stamping
    /// `refresh` with the current time.
    Replay {
        source: usize,
        refresh: Option<String>,
    },
    Replace {
        field: String,
        transform: Transform,
    },
    Inject {
        message: Message,
    },
}

/// Actions for one session, by channel position. Positions past the end are
/// observed and forwarded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryScript(Vec<Action>);

impl AdversaryScript {
    pub fn passive() -> Self {
        Self::default()
    }

    pub fn new(actions: Vec<Action>) -> Self {
        AdversaryScript(actions)
    }

    pub fn action(&self, position: usize) -> &Action {
        self.0.get(position).unwrap_or(&Action::Observe)
    }

    pub fn is_passive(&self) -> bool {
        self.0.iter().all(|a| *a == Action::Observe)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Delivery {
    Deliver(Message),
    Dropped,
}

/// Channel adversary whose observations persist across sessions.
#[derive(Debug, Clone)]
pub struct Adversary {
    hasher: HashFn,
    public: Slots,
    script: AdversaryScript,
    observed: Vec<Message>,
}

impl Adversary {
    /// `public` is everything the scheme publishes; nothing else is visible.
    pub fn new(hasher: HashFn, public: Slots) -> Self {
        Adversary { hasher, public, script: AdversaryScript::passive(), observed: Vec::new() }
    }

    pub fn with_script(mut self, script: AdversaryScript) -> Self {
        self.script = script;
        self
    }

    /// Script for the next session.
    pub fn set_script(&mut self, script: AdversaryScript) {
        self.script = script;
    }

    pub fn script(&self) -> &AdversaryScript {
        &self.script
    }

    pub fn observed(&self) -> &[Message] {
        &self.observed
    }

    pub fn public(&self) -> &Slots {
        &self.public
    }

    /// Handles the message at `position` of the current session, sent
    /// through the channel at time `now`.
    pub fn intercept(&mut self, position: usize, msg: Message, now: u64) -> Result<Delivery, AdversaryError> {
        self.observed.push(msg.clone());
        match self.script.action(position).clone() {
            Action::Observe => Ok(Delivery::Deliver(msg)),
            Action::Drop => Ok(Delivery::Dropped),
            Action::Replay { source, refresh } => {
                let mut stale = self
                    .observed
                    .get(source)
                    .cloned()
                    .ok_or(AdversaryError::Clairvoyance { requested: source, observed: self.observed.len() })?;
                if let Some(field) = refresh {
                    if stale.lookup(&field).is_none() {
                        return Err(AdversaryError::UnknownField(field));
                    }
                    stale.payload.set(&field, now);
                }
                stale.from = Role::Adversary;
                stale.to = msg.to;
                stale.sent_at = now;
                Ok(Delivery::Deliver(stale))
            }
            Action::Replace { field, transform } => {
                let mut forged = msg;
                let old = forged.lookup(&field).cloned().ok_or_else(|| AdversaryError::UnknownField(field.clone()))?;
                let new = self.apply(&forged, &field, old, &transform)?;
                forged.payload.set(&field, new);
                if transform != Transform::Identity {
                    forged.from = Role::Adversary;
                }
                Ok(Delivery::Deliver(forged))
            }
            Action::Inject { mut message } => {
                message.from = Role::Adversary;
                message.sent_at = now;
                Ok(Delivery::Deliver(message))
            }
        }
    }

    fn view<'a>(&'a self, msg: &'a Message, name: &str) -> Result<&'a Value, AdversaryError> {
        msg.lookup(name)
            .or_else(|| self.public.lookup(name))
            .ok_or_else(|| AdversaryError::UnknownField(name.to_owned()))
    }

    fn apply(&self, msg: &Message, field: &str, old: Value, t: &Transform) -> Result<Value, AdversaryError> {
        let kind = || AdversaryError::FieldKind(field.to_owned());
        match t {
            Transform::Identity => Ok(old),
            Transform::MulMod { factor, modulus } => {
                let Value::Int(m) = self.view(msg, modulus)? else {
                    return Err(AdversaryError::FieldKind(modulus.clone()));
                };
                let Value::Int(v) = old else { return Err(kind()) };
                Ok(Value::Int(v * factor % m))
            }
            Transform::RehashWith { other } => {
                let other = self.view(msg, other)?;
                let digest = self.hasher.hash(&[hash_arg(&old).ok_or_else(kind)?, hash_arg(other).ok_or_else(kind)?]);
                Ok(Value::from(digest))
            }
            Transform::Xor { mask } => match old {
                Value::Int(v) => Ok(Value::Int(v ^ mask)),
                _ => Err(kind()),
            },
            Transform::Set { value } => Ok(value.clone()),
        }
    }
}

fn hash_arg(v: &Value) -> Option<HashArg<'_>> {
    match v {
        Value::Int(i) => Some(HashArg::Int(i)),
        Value::Bytes(b) => Some(HashArg::Bytes(b)),
        Value::Point(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::Payload;

    fn m1(b: u64) -> Message {
        Message::new("M_1", Role::User, Role::Server, Payload::new().with("B'", b).with("h_1", vec![1u8, 2]), 0)
    }

    fn adversary(script: Vec<Action>) -> Adversary {
        Adversary::new(HashFn::default(), Slots::new().with("p", 23u64)).with_script(AdversaryScript::new(script))
    }

    #[test]
    fn observe_forwards_unchanged() {
        let mut a = adversary(vec![]);
        assert_eq!(a.intercept(0, m1(5), 0).unwrap(), Delivery::Deliver(m1(5)));
        assert_eq!(a.observed().len(), 1);
    }

    #[test]
    fn mul_mod_uses_public_modulus() {
        let t = Transform::MulMod { factor: 3u32.into(), modulus: "p".into() };
        let mut a = adversary(vec![Action::Replace { field: "B'".into(), transform: t }]);
        let Delivery::Deliver(out) = a.intercept(0, m1(10), 0).unwrap() else { panic!() };
        assert_eq!(out.u64("B'").unwrap(), 30 % 23);
        assert_eq!(out.from, Role::Adversary);
    }

    #[test]
    fn secrets_and_card_slots_are_out_of_view() {
        for name in ["x", "B", "d"] {
            let t = Transform::MulMod { factor: 2u32.into(), modulus: name.into() };
            let mut a = adversary(vec![Action::Replace { field: "B'".into(), transform: t }]);
            assert_eq!(a.intercept(0, m1(1), 0), Err(AdversaryError::UnknownField(name.into())));
        }
        let mut a = adversary(vec![Action::Replace { field: "N".into(), transform: Transform::Identity }]);
        assert_eq!(a.intercept(0, m1(1), 0), Err(AdversaryError::UnknownField("N".into())));
    }

    #[test]
    fn replay_requires_prior_observation() {
        let mut a = adversary(vec![Action::Replay { source: 3, refresh: None }]);
        assert_eq!(a.intercept(0, m1(1), 0), Err(AdversaryError::Clairvoyance { requested: 3, observed: 1 }));
    }

    #[test]
    fn replay_can_refresh_a_stamp() {
        let mut a = adversary(vec![]);
        let stamped = Message::new("M_1", Role::User, Role::Server, Payload::new().with("T_1", 0u64), 0);
        a.intercept(0, stamped, 0).unwrap();
        a.set_script(AdversaryScript::new(vec![Action::Replay { source: 0, refresh: Some("T_1".into()) }]));
        let Delivery::Deliver(out) = a.intercept(0, m1(2), 40).unwrap() else { panic!() };
        assert_eq!(out.u64("T_1").unwrap(), 40);
        assert_eq!(out.sent_at, 40);
    }

    #[test]
    fn rehash_matches_direct_hash() {
        let t = Transform::RehashWith { other: "B'".into() };
        let mut a = adversary(vec![Action::Replace { field: "h_1".into(), transform: t }]);
        let Delivery::Deliver(out) = a.intercept(0, m1(7), 0).unwrap() else { panic!() };
        let expect = HashFn::default().hash(&[HashArg::Bytes(&[1, 2]), HashArg::Int(&7u32.into())]);
        assert_eq!(out.bytes("h_1").unwrap(), expect.as_bytes());
    }
}
