//! Actors, channel, clock and drivers shared by every scheme.

mod actors;
mod adversary;
mod clock;
mod driver;
mod env;
mod message;
mod suite;
mod transcript;
mod value;

pub use actors::{Account, Identity, Password, SchemeId, ServerState, SmartCard, IDENTITY_BITS};
pub use adversary::{Action, Adversary, AdversaryError, AdversaryScript, Delivery, Transform};
pub use clock::{Clock, DEFAULT_DELTA_T};
pub use driver::{ChangeOutcome, ChangeReport, Simulation};
pub use env::{Env, OpCounts};
pub use message::{Message, Payload, Role};
pub use suite::{check, Halt, SchemeSuite, Step, SuiteMeta, UserFinal};
pub use transcript::{Counters, SessionOutcome, Transcript};
pub use value::{Fields, Slots, Value};
