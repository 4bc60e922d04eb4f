use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::bench::{mistyped_password, replacement_password, stranger_id, victim_id, victim_password, Bench};
use super::{AttackReport, Leak, Scenario, ScenarioOptions, Tamper, TrialRecord};
use crate::crypto::{mod_exp, random_range, HashArg};
use crate::framework::{
    Action, AdversaryScript, ChangeOutcome, Fields, Role, SchemeId, SessionOutcome, Transcript, Transform, Value,
};
use crate::{Error, Result};

const TAMPER_SALT: u64 = 0x5bd1_e995_c2b2_ae35;

/// One trial's record plus the session worth keeping as a sample.
struct Trial {
    record: TrialRecord,
    transcript: Option<Transcript>,
    notes: Vec<String>,
}

impl Trial {
    fn new(seed: u64, tr: &Transcript, vulnerable: bool) -> Trial {
        Trial {
            record: TrialRecord {
                seed,
                outcome: tr.outcome.kind().to_owned(),
                failure_step: tr.failure_step().map(str::to_owned),
                messages_sent: tr.messages_sent(),
                server_hash_ops: tr.counters.server.hash,
                card_mutated: None,
                vulnerable,
            },
            transcript: Some(tr.clone()),
            notes: Vec::new(),
        }
    }

    /// Adds another session's traffic and server work to the counts.
    fn absorb(&mut self, tr: &Transcript) {
        self.record.messages_sent += tr.messages_sent();
        self.record.server_hash_ops += tr.counters.server.hash;
    }
}

pub(super) fn run(scheme: SchemeId, scenario: Scenario, opts: &ScenarioOptions) -> Result<AttackReport> {
    let variant = variant(scheme, scenario, opts)?;
    let mut records = Vec::with_capacity(opts.trials);
    let mut sample = None;
    let mut notes = scenario_notes(scheme, scenario, variant.as_deref());
    for i in 0..opts.trials {
        let seed = opts.seed.wrapping_add(i as u64);
        let trial = match scenario {
            Scenario::WrongPasswordLogin => wrong_input(scheme, seed, opts, &victim_id(), &mistyped_password())?,
            Scenario::WrongIdentityLogin => wrong_input(scheme, seed, opts, &stranger_id(), &victim_password())?,
            Scenario::DosViaPasswordChange => dos(scheme, seed, opts)?,
            Scenario::TamperLogin => tamper(scheme, seed, opts)?,
            Scenario::ReplayLogin => replay(scheme, seed, opts)?,
            Scenario::TempInfoLeak => temp_leak(scheme, seed, opts)?,
            Scenario::OfflineChangeBlocked => offline_change(scheme, seed, opts)?,
            Scenario::FailureIndistinguishability => indistinguishability(scheme, seed, opts)?,
            Scenario::HonestKeyAgreement => honest_key(scheme, seed, opts)?,
        };
        if i == 0 {
            sample = trial.transcript;
            notes.extend(trial.notes);
        }
        records.push(trial.record);
    }
    Ok(AttackReport::assemble(scheme, scenario, variant, records, sample, notes))
}

fn variant(scheme: SchemeId, scenario: Scenario, opts: &ScenarioOptions) -> Result<Option<String>> {
    Ok(match scenario {
        Scenario::TamperLogin => {
            let t = opts.tamper.or(Tamper::default_for(scheme)).unwrap_or(Tamper::Identity);
            if !t.defined_for(scheme) {
                return Err(Error::UnsupportedTamper { scheme: scheme.to_string(), tamper: t.to_string() });
            }
            Some(t.to_string())
        }
        Scenario::ReplayLogin if timestamp_field(scheme).is_some() => {
            Some(if opts.refresh_timestamp { "refreshed" } else { "stale" }.to_owned())
        }
        Scenario::TempInfoLeak => Some(opts.leak.to_string()),
        _ => None,
    })
}

fn scenario_notes(scheme: SchemeId, scenario: Scenario, variant: Option<&str>) -> Vec<String> {
    let mut notes = Vec::new();
    match (scheme, scenario) {
        (SchemeId::CaoZhai, Scenario::ReplayLogin) => notes.push(
            "replay is judged by whether the server decrypts a stale AID and answers it; \
             the adversary still cannot finish the session"
                .into(),
        ),
        (SchemeId::CaoZhai, Scenario::TempInfoLeak) => {
            notes.push("r_s travels in clear in M_2, so the adversary only ever lacks r_u".into());
            if variant == Some("user_nonce") {
                notes.push("leaking r_u alone therefore reproduces K".into());
            }
        }
        (SchemeId::Xie, Scenario::TempInfoLeak) => {
            notes.push("with a, C = B^a mod n from the public B; with b alone the sealed A is out of reach".into())
        }
        (_, Scenario::ReplayLogin) if timestamp_field(scheme).is_none() => {
            notes.push("login message carries no timestamp; stale and refreshed replays coincide".into())
        }
        _ => {}
    }
    notes
}

/// Field restamped by a refreshed replay.
fn timestamp_field(scheme: SchemeId) -> Option<&'static str> {
    match scheme {
        SchemeId::Lin | SchemeId::Xu => Some("T_1"),
        SchemeId::Xie => Some("T_u"),
        _ => None,
    }
}

/// Vulnerable iff the card sent its login message and only the server
/// caught the mistake.
fn wrong_input(
    scheme: SchemeId,
    seed: u64,
    opts: &ScenarioOptions,
    id: &crate::framework::Identity,
    pw: &crate::framework::Password,
) -> Result<Trial> {
    let mut b = Bench::new(scheme, seed, opts.delta_t)?;
    let (outcome, tr) = b.login(id, pw)?;
    let emitted = tr.messages_from(Role::User).next().is_some();
    let server_caught = matches!(outcome, SessionOutcome::ServerReject { .. });
    Ok(Trial::new(seed, &tr, emitted && server_caught))
}

/// Wrong-old-password change, then logins with the old and the new password.
fn dos(scheme: SchemeId, seed: u64, opts: &ScenarioOptions) -> Result<Trial> {
    let mut b = Bench::new(scheme, seed, opts.delta_t)?;
    let before = b.card.clone();
    let change = b.change_password(&mistyped_password(), &replacement_password())?;
    let mutated = b.card != before;
    let (old_outcome, old_tr) = b.honest_login()?;
    let (new_outcome, new_tr) = b.login(&victim_id(), &replacement_password())?;
    let locked_out = !old_outcome.is_success() && !new_outcome.is_success();

    let mut trial = Trial::new(seed, &new_tr, mutated && locked_out);
    trial.absorb(&old_tr);
    if let Some(tr) = &change.transcript {
        trial.absorb(tr);
    }
    trial.record.card_mutated = Some(mutated);
    if let ChangeOutcome::Refused { step } = &change.outcome {
        trial.notes.push(format!("password change refused at {step}"));
    }
    trial.notes.push(format!(
        "card {}; login with old password: {}; with new password: {}",
        if mutated { "mutated" } else { "unchanged" },
        old_outcome,
        new_outcome
    ));
    Ok(trial)
}

fn tamper_action(b: &Bench, tamper: Tamper, seed: u64) -> Result<Action> {
    Ok(match tamper {
        Tamper::WeiScaleBprime => {
            let p = b.adversary.public().int("p")?.clone();
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ TAMPER_SALT);
            let r_e = random_range(&mut rng, &BigUint::from(2u32), &p);
            Action::Replace { field: "B'".into(), transform: Transform::MulMod { factor: r_e, modulus: "p".into() } }
        }
        Tamper::LinRehashR => {
            Action::Replace { field: "R".into(), transform: Transform::RehashWith { other: "T_1".into() } }
        }
        Tamper::Identity => Action::Observe,
    })
}

/// Vulnerable iff the server accepts a genuinely altered login message.
fn tamper(scheme: SchemeId, seed: u64, opts: &ScenarioOptions) -> Result<Trial> {
    let t = opts.tamper.or(Tamper::default_for(scheme)).unwrap_or(Tamper::Identity);
    let mut b = Bench::new(scheme, seed, opts.delta_t)?;
    let action = tamper_action(&b, t, seed)?;
    let (outcome, tr) = b.login_with(AdversaryScript::new(vec![action]), &victim_id(), &victim_password())?;
    let accepted = outcome.is_success();
    let mut trial = Trial::new(seed, &tr, accepted && t != Tamper::Identity);
    if t == Tamper::Identity && !accepted {
        trial.notes.push(format!("control run did not complete: {outcome}"));
    }
    Ok(trial)
}

/// Honest session, then a stale copy of its first message once the
/// freshness window has passed. Vulnerable iff the server answers it.
fn replay(scheme: SchemeId, seed: u64, opts: &ScenarioOptions) -> Result<Trial> {
    let mut b = Bench::new(scheme, seed, opts.delta_t)?;
    let (first, _) = b.honest_login()?;
    if !first.is_success() {
        return Err(Error::NoRecordedSession);
    }
    b.sim.clock_mut().advance(4 * opts.delta_t + 1);
    let refresh = if opts.refresh_timestamp { timestamp_field(scheme).map(str::to_owned) } else { None };
    let script = AdversaryScript::new(vec![Action::Replay { source: 0, refresh }, Action::Drop]);
    let (_, tr) = b.login_with(script, &victim_id(), &victim_password())?;
    let answered = tr.messages_from(Role::Server).next().is_some();
    let mut trial = Trial::new(seed, &tr, answered);
    if answered {
        trial.notes.push("server answered the stale login message".into());
    }
    Ok(trial)
}

fn observed_field<'a>(b: &'a Bench, name: &str) -> Option<&'a Value> {
    b.adversary.observed().iter().rev().find_map(|m| m.lookup(name))
}

fn leaked<'a>(tr: &'a Transcript, allowed: bool, name: &str) -> Option<&'a BigUint> {
    if !allowed {
        return None;
    }
    match tr.ephemerals.get(name) {
        Some(Value::Int(v)) => Some(v),
        _ => None,
    }
}

/// The adversary's best guess at the session key from the channel plus the
/// declared leak.
fn guess_key(b: &Bench, tr: &Transcript, leak: Leak) -> Option<Vec<u8>> {
    let h = b.suite.hasher();
    match b.scheme() {
        SchemeId::CaoZhai => {
            let r_u = leaked(tr, leak.user(), "user.r_u")?;
            let r_s = match leaked(tr, leak.server(), "server.r_s") {
                Some(v) => v.clone(),
                None => observed_field(b, "r_s")?.as_int()?.clone(),
            };
            Some(h.hash(&[r_u.into(), (&r_s).into()]).into_bytes())
        }
        SchemeId::Xie => {
            let a = leaked(tr, leak.user(), "user.a")?;
            let n = b.adversary.public().int("n").ok()?;
            let big_b = observed_field(b, "B")?.as_int()?;
            let t_u = observed_field(b, "T_u")?.as_int()?;
            let t_s = observed_field(b, "T_s")?.as_int()?;
            let c = mod_exp(big_b, a, n);
            let t_u: u64 = t_u.try_into().ok()?;
            let t_s: u64 = t_s.try_into().ok()?;
            Some(h.hash(&[HashArg::U64(t_u), (&c).into(), HashArg::U64(t_s)]).into_bytes())
        }
        _ => None,
    }
}

/// Vulnerable iff the adversary's key equals both honest keys.
fn temp_leak(scheme: SchemeId, seed: u64, opts: &ScenarioOptions) -> Result<Trial> {
    let mut b = Bench::new(scheme, seed, opts.delta_t)?;
    let (outcome, tr) = b.honest_login()?;
    let guess = guess_key(&b, &tr, opts.leak);
    let reproduced = match (&outcome, &guess) {
        (SessionOutcome::MutualAuthSuccess { user_key: Some(u), server_key: Some(s) }, Some(g)) => g == u && g == s,
        _ => false,
    };
    let mut trial = Trial::new(seed, &tr, reproduced);
    if guess.is_none() {
        trial.notes.push("the adversary lacks an input of the key derivation".into());
    }
    Ok(trial)
}

/// Vulnerable iff the change cannot proceed without the server.
fn offline_change(scheme: SchemeId, seed: u64, opts: &ScenarioOptions) -> Result<Trial> {
    let mut b = Bench::new(scheme, seed, opts.delta_t)?;
    let (blocked, note) = match b.change_password_offline(&victim_password(), &replacement_password()) {
        Ok(_) => {
            let (after, _) = b.login(&victim_id(), &replacement_password())?;
            (false, format!("changed on the card alone; login with the new password: {after}"))
        }
        Err(Error::ServerUnreachable) => (true, "change needs a round trip to the server".to_owned()),
        Err(e) => return Err(e),
    };
    let mut trial = Trial {
        record: TrialRecord {
            seed,
            outcome: if blocked { "blocked" } else { "applied" }.into(),
            failure_step: None,
            messages_sent: 0,
            server_hash_ops: 0,
            card_mutated: None,
            vulnerable: blocked,
        },
        transcript: None,
        notes: Vec::new(),
    };
    trial.notes.push(note);
    Ok(trial)
}

/// What the user can see of a session: the index of its last message and
/// how the exchange ended from its side.
fn user_signal(tr: &Transcript) -> (usize, String) {
    let sent = tr.messages_from(Role::User).count();
    let verdict = match &tr.outcome {
        SessionOutcome::MutualAuthSuccess { .. } => "accepted".to_owned(),
        SessionOutcome::UserReject { step } => format!("card rejects reply at {step}"),
        SessionOutcome::ServerReject { .. } | SessionOutcome::Aborted { .. } => "no reply".to_owned(),
    };
    (sent.saturating_sub(1), verdict)
}

fn indistinguishability_cases(scheme: SchemeId) -> &'static [&'static str] {
    match scheme {
        SchemeId::Wei => &["wrong_password", "tamper"],
        SchemeId::Lin => &["wrong_password", "wrong_identity", "both_wrong", "tamper"],
        SchemeId::Xie => &["wrong_password", "replay"],
        _ => &[],
    }
}

fn failure_case(scheme: SchemeId, case: &str, seed: u64, opts: &ScenarioOptions) -> Result<Transcript> {
    let mut b = Bench::new(scheme, seed, opts.delta_t)?;
    let (_, tr) = match case {
        "wrong_password" => b.login(&victim_id(), &mistyped_password())?,
        "wrong_identity" => b.login(&stranger_id(), &victim_password())?,
        "both_wrong" => b.login(&stranger_id(), &mistyped_password())?,
        "tamper" => {
            let t = Tamper::default_for(scheme).unwrap_or(Tamper::Identity);
            let action = tamper_action(&b, t, seed)?;
            b.login_with(AdversaryScript::new(vec![action]), &victim_id(), &victim_password())?
        }
        "replay" => {
            b.honest_login()?;
            b.sim.clock_mut().advance(4 * opts.delta_t + 1);
            let refresh = timestamp_field(scheme).map(str::to_owned);
            let script = AdversaryScript::new(vec![Action::Replay { source: 0, refresh }]);
            b.login_with(script, &victim_id(), &victim_password())?
        }
        other => unreachable!("unknown failure case {other}"),
    };
    Ok(tr)
}

/// Vulnerable iff every failure case fails and the user sees the same
/// signal in all of them.
fn indistinguishability(scheme: SchemeId, seed: u64, opts: &ScenarioOptions) -> Result<Trial> {
    let mut sessions = Vec::new();
    for case in indistinguishability_cases(scheme) {
        sessions.push((*case, failure_case(scheme, case, seed, opts)?));
    }
    let signals: Vec<_> = sessions.iter().map(|(_, tr)| user_signal(tr)).collect();
    let all_failed = sessions.iter().all(|(_, tr)| !tr.outcome.is_success());
    let identical = signals.windows(2).all(|w| w[0] == w[1]);

    let (_, first) = &sessions[0];
    let mut trial = Trial::new(seed, first, all_failed && identical);
    trial.record.failure_step = None;
    for (_, tr) in &sessions[1..] {
        trial.absorb(tr);
    }
    for ((case, tr), (idx, verdict)) in sessions.iter().zip(&signals) {
        trial.notes.push(format!(
            "{case}: user sees \"{verdict}\" after message {}; server side: {}",
            idx + 1,
            tr.outcome
        ));
    }
    Ok(trial)
}

/// Vulnerable iff an honest session ends without a shared key.
fn honest_key(scheme: SchemeId, seed: u64, opts: &ScenarioOptions) -> Result<Trial> {
    let mut b = Bench::new(scheme, seed, opts.delta_t)?;
    let (outcome, tr) = b.honest_login()?;
    let agreed = outcome.is_success() && outcome.keys_match() == Some(true);
    let mut trial = Trial::new(seed, &tr, !agreed);
    if outcome.is_success() && outcome.keys_match().is_none() {
        trial.notes.push("the session authenticates both parties but defines no key".into());
    }
    Ok(trial)
}
