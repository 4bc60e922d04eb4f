use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Fields, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Server,
    Adversary,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::User => "user",
            Role::Server => "server",
            Role::Adversary => "adversary",
        })
    }
}

/// Ordered named fields of one protocol message.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload(Vec<(String, Value)>);

impl Payload {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a field, replacing any earlier field of the same name in place.
    pub fn with(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.set(name, v);
        self
    }

    pub fn set(&mut self, name: &str, v: impl Into<Value>) {
        let v = v.into();
        match self.0.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = v,
            None => self.0.push((name.to_owned(), v)),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(k, _)| k.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Fields for Payload {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }
}

/// One message on the channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub label: String,
    pub from: Role,
    pub to: Role,
    pub payload: Payload,
    pub sent_at: u64,
}

impl Message {
    pub fn new(label: &str, from: Role, to: Role, payload: Payload, sent_at: u64) -> Self {
        Message { label: label.to_owned(), from, to, payload, sent_at }
    }
}

impl Fields for Message {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.payload.lookup(name)
    }
}
