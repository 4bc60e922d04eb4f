//! A desk-scale laboratory for smart-card password authentication schemes used by
//! telecare medical information systems (TMIS).
//!
//! The crate runs seven published schemes as three-party protocol state machines
//! (smart card, user, server) over a channel an adversary controls, and replays the
//! known weaknesses of their login and password-change phases: unverified password
//! change leading to denial of service, login requests that are only rejected after
//! the server has done the work, tampering, replay, and leakage of session
//! temporaries. [`attack_lab::attribute_matrix`] turns the outcomes into a
//! security-attribute table.
//!
//! Layout:
//! - [`crypto`]: hashing, modular arithmetic, RSA, Rabin, a toy elliptic curve,
//!   fixed-width packing and a deterministic symmetric cipher.
//! - [`framework`]: cards, server state, messages, clock, adversary, transcripts
//!   and the drivers that push a [`framework::SchemeSuite`] through its phases.
//! - [`schemes`]: one suite per scheme.
//! - [`attack_lab`]: scripted scenarios and the attribute matrix.

pub mod attack_lab;
pub mod crypto;
mod error;
pub mod framework;
pub mod schemes;

pub use error::{Error, Result};
