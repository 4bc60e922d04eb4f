use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{
    Adversary, Clock, Delivery, Env, Halt, Identity, Message, OpCounts, Password, Payload, Role, SchemeSuite,
    ServerState, SessionOutcome, SmartCard, Transcript, UserFinal,
};
use crate::{Error, Result};

/// Result of a password-change attempt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChangeOutcome {
    Applied,
    Refused { step: String },
}

#[derive(Debug, Clone)]
pub struct ChangeReport {
    pub outcome: ChangeOutcome,
    pub card_mutated: bool,
    /// Channel record of a server-assisted change.
    pub transcript: Option<Transcript>,
}

enum Mode<'a> {
    Login,
    Change { old: &'a Password, new: &'a Password },
}

enum RunEnd {
    Session(SessionOutcome),
    Change(ChangeOutcome),
}

/// One deterministic simulation: a seeded RNG and a logical clock.
///
/// Every message takes `hop_latency` ticks to cross the channel. A
/// simulation is single-threaded; separate instances share nothing.
#[derive(Debug, Clone)]
pub struct Simulation {
    rng: ChaCha20Rng,
    clock: Clock,
    seed: u64,
    hop_latency: u64,
}

impl Simulation {
    pub fn new(seed: u64) -> Self {
        Self::with_clock(seed, Clock::default())
    }

    pub fn with_clock(seed: u64, clock: Clock) -> Self {
        Simulation { rng: ChaCha20Rng::seed_from_u64(seed), clock, seed, hop_latency: 1 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn clock_mut(&mut self) -> &mut Clock {
        &mut self.clock
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    fn env<'a>(&'a mut self, suite: &dyn SchemeSuite, ops: &'a mut OpCounts) -> Env<'a> {
        Env::new(&mut self.rng, ops, suite.hasher(), self.clock.now(), self.clock.delta_t())
    }

    /// Registration over the secure channel; the adversary takes no part.
    pub fn run_registration(
        &mut self,
        suite: &dyn SchemeSuite,
        server: &mut ServerState,
        id: &Identity,
        pw: &Password,
    ) -> Result<SmartCard> {
        same_scheme(suite, server.scheme())?;
        let mut ops = OpCounts::default();
        let mut env = self.env(suite, &mut ops);
        suite.register(&mut env, server, id, pw)
    }

    /// Full authentication run over the adversarial channel.
    ///
    /// Protocol failures are reported in the [`SessionOutcome`]; `Err` is
    /// reserved for misuse (mismatched scheme, invalid adversary script).
    pub fn run_authentication(
        &mut self,
        suite: &dyn SchemeSuite,
        card: &mut SmartCard,
        id_input: &Identity,
        pw_input: &Password,
        server: &mut ServerState,
        adversary: &mut Adversary,
    ) -> Result<(SessionOutcome, Transcript)> {
        let (end, tr) = self.exchange(suite, card, id_input, pw_input, server, adversary, Mode::Login)?;
        let RunEnd::Session(outcome) = end else { unreachable!("login mode ends in a session outcome") };
        Ok((outcome, tr))
    }

    /// Password change. Offline schemes rewrite the card whatever the old
    /// password input is; server-assisted schemes run the first two
    /// authentication steps and need `server`.
    #[allow(clippy::too_many_arguments)]
    pub fn run_password_change(
        &mut self,
        suite: &dyn SchemeSuite,
        card: &mut SmartCard,
        id_input: &Identity,
        old_pw: &Password,
        new_pw: &Password,
        server: Option<&mut ServerState>,
        adversary: Option<&mut Adversary>,
    ) -> Result<ChangeReport> {
        same_scheme(suite, card.scheme())?;
        let before = card.clone();
        if !suite.meta().online_password_change {
            let mut ops = OpCounts::default();
            let mut env = self.env(suite, &mut ops);
            suite.change_password(&mut env, card, old_pw, new_pw)?;
            return Ok(ChangeReport {
                outcome: ChangeOutcome::Applied,
                card_mutated: *card != before,
                transcript: None,
            });
        }
        let server = server.ok_or(Error::ServerUnreachable)?;
        let mut passive;
        let adversary = match adversary {
            Some(a) => a,
            None => {
                passive = Adversary::new(suite.hasher(), suite.public_params());
                &mut passive
            }
        };
        let mode = Mode::Change { old: old_pw, new: new_pw };
        let (end, tr) = self.exchange(suite, card, id_input, old_pw, server, adversary, mode)?;
        let RunEnd::Change(outcome) = end else { unreachable!("change mode ends in a change outcome") };
        Ok(ChangeReport { outcome, card_mutated: *card != before, transcript: Some(tr) })
    }

    /// Card reissue over the secure channel.
    pub fn run_revocation(
        &mut self,
        suite: &dyn SchemeSuite,
        server: &mut ServerState,
        id: &Identity,
        pw: &Password,
    ) -> Result<SmartCard> {
        same_scheme(suite, server.scheme())?;
        if !server.is_registered(id) {
            return Err(Error::UnknownIdentity(id.to_string()));
        }
        let mut ops = OpCounts::default();
        let mut env = self.env(suite, &mut ops);
        suite.revoke(&mut env, server, id, pw)
    }

    /// Sends `payload` from `from` and lets the adversary handle it.
    /// Returns the delivered message, if any.
    fn send(
        &mut self,
        tr: &mut Transcript,
        adversary: &mut Adversary,
        position: usize,
        (from, to): (Role, Role),
        payload: Payload,
    ) -> Result<Option<Message>> {
        let label = format!("M_{}", position + 1);
        let sent = Message::new(&label, from, to, payload, self.clock.now());
        tr.messages.push(sent.clone());
        self.clock.advance(self.hop_latency);
        match adversary.intercept(position, sent.clone(), self.clock.now()).map_err(Error::from)? {
            Delivery::Dropped => Ok(None),
            Delivery::Deliver(m) => {
                if m != sent {
                    tr.messages.push(m.clone());
                }
                Ok(Some(m))
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn exchange(
        &mut self,
        suite: &dyn SchemeSuite,
        card: &mut SmartCard,
        id_input: &Identity,
        pw_input: &Password,
        server: &mut ServerState,
        adversary: &mut Adversary,
        mode: Mode<'_>,
    ) -> Result<(RunEnd, Transcript)> {
        same_scheme(suite, card.scheme())?;
        same_scheme(suite, server.scheme())?;
        let mut tr = Transcript::new(suite.id(), self.seed);
        let end = self.exchange_inner(suite, card, id_input, pw_input, server, adversary, &mode, &mut tr)?;
        let end = match end {
            Ok(RunEnd::Change(ChangeOutcome::Applied)) => {
                tr.outcome = SessionOutcome::Aborted { reason: "session closed after the card update".into() };
                RunEnd::Change(ChangeOutcome::Applied)
            }
            Ok(end) => end,
            Err(outcome) => {
                tr.outcome = outcome.clone();
                match mode {
                    Mode::Login => RunEnd::Session(outcome),
                    Mode::Change { .. } => RunEnd::Change(ChangeOutcome::Refused {
                        step: match outcome {
                            SessionOutcome::ServerReject { step } | SessionOutcome::UserReject { step } => step,
                            SessionOutcome::Aborted { reason } => reason,
                            SessionOutcome::MutualAuthSuccess { .. } => unreachable!("success is not a stop"),
                        },
                    }),
                }
            }
        };
        if let RunEnd::Session(o) = &end {
            tr.outcome = o.clone();
        }
        Ok((end, tr))
    }

    /// `Ok(Err(outcome))` is an early protocol stop.
    #[allow(clippy::too_many_arguments)]
    fn exchange_inner(
        &mut self,
        suite: &dyn SchemeSuite,
        card: &mut SmartCard,
        id_input: &Identity,
        pw_input: &Password,
        server: &mut ServerState,
        adversary: &mut Adversary,
        mode: &Mode<'_>,
        tr: &mut Transcript,
    ) -> Result<std::result::Result<RunEnd, SessionOutcome>> {
        let user_to_server = (Role::User, Role::Server);
        let server_to_user = (Role::Server, Role::User);

        let mut user_ops = tr.counters.user;
        let begun = {
            let mut env = self.env(suite, &mut user_ops);
            suite.login_begin(&mut env, card, id_input, pw_input)
        };
        tr.counters.user = user_ops;
        let (p1, user_state) = match begun {
            Ok(v) => v,
            Err(e) => return Ok(Err(SessionOutcome::Aborted { reason: e.to_string() })),
        };
        tr.record_ephemerals("user", &user_state);

        let Some(m1) = self.send(tr, adversary, 0, user_to_server, p1)? else {
            return Ok(Err(dropped(0)));
        };

        let mut server_ops = tr.counters.server;
        let responded = {
            let mut env = self.env(suite, &mut server_ops);
            suite.server_respond(&mut env, server, &m1)
        };
        tr.counters.server = server_ops;
        let (p2, server_state) = match responded {
            Ok(v) => v,
            Err(h) => return Ok(Err(server_halt(h))),
        };
        tr.record_ephemerals("server", &server_state);

        let Some(m2) = self.send(tr, adversary, 1, server_to_user, p2)? else {
            return Ok(Err(dropped(1)));
        };

        let mut user_ops = tr.counters.user;
        if let Mode::Change { old, new } = mode {
            let done = {
                let mut env = self.env(suite, &mut user_ops);
                suite.complete_online_change(&mut env, card, &user_state, &m2, old, new)
            };
            tr.counters.user = user_ops;
            return Ok(match done {
                Ok(()) => Ok(RunEnd::Change(ChangeOutcome::Applied)),
                Err(h) => Err(user_halt(h)),
            });
        }

        let finished = {
            let mut env = self.env(suite, &mut user_ops);
            suite.user_finalize(&mut env, card, &user_state, &m2)
        };
        tr.counters.user = user_ops;
        let UserFinal { reply, key: user_key } = match finished {
            Ok(v) => v,
            Err(h) => return Ok(Err(user_halt(h))),
        };

        let m3 = match reply {
            Some(p3) => match self.send(tr, adversary, 2, user_to_server, p3)? {
                Some(m) => Some(m),
                None => return Ok(Err(dropped(2))),
            },
            None => None,
        };

        let mut server_ops = tr.counters.server;
        let closed = {
            let mut env = self.env(suite, &mut server_ops);
            suite.server_finalize(&mut env, server, &server_state, m3.as_ref())
        };
        tr.counters.server = server_ops;
        Ok(match closed {
            Ok(server_key) => Ok(RunEnd::Session(SessionOutcome::MutualAuthSuccess { user_key, server_key })),
            Err(h) => Err(server_halt(h)),
        })
    }
}

fn same_scheme(suite: &dyn SchemeSuite, other: super::SchemeId) -> Result<()> {
    if suite.id() == other {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{} state used with the {} suite", other, suite.id())))
    }
}

fn dropped(position: usize) -> SessionOutcome {
    SessionOutcome::Aborted { reason: format!("M_{} not delivered", position + 1) }
}

fn server_halt(h: Halt) -> SessionOutcome {
    match h {
        Halt::Reject(step) => SessionOutcome::ServerReject { step },
        Halt::Abort(reason) => SessionOutcome::Aborted { reason },
    }
}

fn user_halt(h: Halt) -> SessionOutcome {
    match h {
        Halt::Reject(step) => SessionOutcome::UserReject { step },
        Halt::Abort(reason) => SessionOutcome::Aborted { reason },
    }
}
