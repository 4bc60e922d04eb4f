//! Scripted attack scenarios and the security-attribute matrix.
//!
//! Every scenario runs `trials` independent deployments, each seeded with
//! `seed + i`, and derives its verdict from the recorded outcomes. Attacks
//! only read what crossed the channel, the scheme's public parameters and,
//! for [`Scenario::TempInfoLeak`], the ephemerals a [`Leak`] explicitly hands
//! over.

mod bench;
mod expected;
mod matrix;
mod scenarios;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::framework::{SchemeId, Transcript, DEFAULT_DELTA_T};
use crate::{Error, Result};

pub use bench::{mistyped_password, replacement_password, stranger_id, victim_id, victim_password, Bench};
pub use expected::{expectation, Expectation};
pub use matrix::{attribute_matrix, attribute_matrix_with, Mark, Matrix, MatrixCell, MatrixRow, Mismatch, RowSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    WrongPasswordLogin,
    WrongIdentityLogin,
    DosViaPasswordChange,
    TamperLogin,
    ReplayLogin,
    TempInfoLeak,
    OfflineChangeBlocked,
    FailureIndistinguishability,
    HonestKeyAgreement,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::WrongPasswordLogin,
        Scenario::WrongIdentityLogin,
        Scenario::DosViaPasswordChange,
        Scenario::TamperLogin,
        Scenario::ReplayLogin,
        Scenario::TempInfoLeak,
        Scenario::OfflineChangeBlocked,
        Scenario::FailureIndistinguishability,
        Scenario::HonestKeyAgreement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::WrongPasswordLogin => "wrong_password_login",
            Scenario::WrongIdentityLogin => "wrong_identity_login",
            Scenario::DosViaPasswordChange => "dos_via_password_change",
            Scenario::TamperLogin => "tamper_login",
            Scenario::ReplayLogin => "replay_login",
            Scenario::TempInfoLeak => "temp_info_leak",
            Scenario::OfflineChangeBlocked => "offline_change_blocked",
            Scenario::FailureIndistinguishability => "failure_indistinguishability",
            Scenario::HonestKeyAgreement => "honest_key_agreement",
        }
    }

    /// Whether the scenario is defined for `scheme` at all.
    pub fn applies_to(self, scheme: SchemeId) -> bool {
        use SchemeId::*;
        match self {
            Scenario::WrongIdentityLogin => matches!(scheme, Lin | CaoZhai | Xu),
            Scenario::TamperLogin => matches!(scheme, Wei | Lin),
            Scenario::TempInfoLeak => matches!(scheme, CaoZhai | Xie),
            Scenario::FailureIndistinguishability => matches!(scheme, Wei | Lin | Xie),
            _ => true,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| Error::UnknownScenario(s.to_owned()))
    }
}

/// Named rewrite of the first login message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tamper {
    /// `B* = B' * r_E mod p` for a fresh random `r_E`.
    #[serde(rename = "wei_scale_Bprime")]
    WeiScaleBprime,
    /// `R* = h(R || T_1)`.
    #[serde(rename = "lin_rehash_R")]
    LinRehashR,
    /// Forward unchanged; the control run.
    #[serde(rename = "identity")]
    Identity,
}

impl Tamper {
    pub const ALL: [Tamper; 3] = [Tamper::WeiScaleBprime, Tamper::LinRehashR, Tamper::Identity];

    pub fn as_str(self) -> &'static str {
        match self {
            Tamper::WeiScaleBprime => "wei_scale_Bprime",
            Tamper::LinRehashR => "lin_rehash_R",
            Tamper::Identity => "identity",
        }
    }

    pub fn default_for(scheme: SchemeId) -> Option<Tamper> {
        match scheme {
            SchemeId::Wei => Some(Tamper::WeiScaleBprime),
            SchemeId::Lin => Some(Tamper::LinRehashR),
            _ => None,
        }
    }

    fn defined_for(self, scheme: SchemeId) -> bool {
        match self {
            Tamper::WeiScaleBprime => scheme == SchemeId::Wei,
            Tamper::LinRehashR => scheme == SchemeId::Lin,
            Tamper::Identity => true,
        }
    }
}

impl fmt::Display for Tamper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tamper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tamper::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown tamper `{s}`")))
    }
}

/// Ephemerals handed to the adversary in [`Scenario::TempInfoLeak`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leak {
    /// Both parties' session nonces.
    #[default]
    Nonces,
    UserNonce,
    ServerNonce,
    /// Nothing beyond the channel.
    ChannelOnly,
}

impl Leak {
    pub const ALL: [Leak; 4] = [Leak::Nonces, Leak::UserNonce, Leak::ServerNonce, Leak::ChannelOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Leak::Nonces => "nonces",
            Leak::UserNonce => "user_nonce",
            Leak::ServerNonce => "server_nonce",
            Leak::ChannelOnly => "channel_only",
        }
    }

    fn user(self) -> bool {
        matches!(self, Leak::Nonces | Leak::UserNonce)
    }

    fn server(self) -> bool {
        matches!(self, Leak::Nonces | Leak::ServerNonce)
    }
}

impl fmt::Display for Leak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Leak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Leak::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown leak `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    pub trials: usize,
    pub seed: u64,
    pub delta_t: u64,
    /// `None` picks the scheme's named tamper.
    pub tamper: Option<Tamper>,
    /// Restamp the replayed message's timestamp field, where it has one.
    pub refresh_timestamp: bool,
    pub leak: Leak,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            trials: 100,
            seed: 0,
            delta_t: DEFAULT_DELTA_T,
            tamper: None,
            refresh_timestamp: true,
            leak: Leak::Nonces,
        }
    }
}

impl ScenarioOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        ScenarioOptions { trials, seed, ..Self::default() }
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub outcome: String,
    pub failure_step: Option<String>,
    pub messages_sent: usize,
    pub server_hash_ops: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub card_mutated: Option<bool>,
    pub vulnerable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttackReport {
    pub scheme: SchemeId,
    pub scenario: Scenario,
    /// Tamper, leak or replay flavour, if the scenario has one.
    pub variant: Option<String>,
    /// True iff every trial was vulnerable.
    pub vulnerable: bool,
    /// Shared by every trial, or `None` if trials disagree or none failed.
    pub failure_step: Option<String>,
    /// Totals over all trials.
    pub messages_sent: usize,
    pub server_hash_ops: u64,
    pub trials: usize,
    pub notes: Vec<String>,
    pub expected_vulnerable: Option<bool>,
    pub expected_failure_step: Option<String>,
    pub matches_reference: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trial_records: Vec<TrialRecord>,
    /// Main session of the first trial.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_transcript: Option<Transcript>,
}

impl AttackReport {
    fn assemble(
        scheme: SchemeId,
        scenario: Scenario,
        variant: Option<String>,
        records: Vec<TrialRecord>,
        sample: Option<Transcript>,
        mut notes: Vec<String>,
    ) -> AttackReport {
        let vulnerable = !records.is_empty() && records.iter().all(|r| r.vulnerable);
        let first = records.first().and_then(|r| r.failure_step.clone());
        let failure_step = if records.iter().all(|r| r.failure_step == first) {
            first
        } else {
            let mut steps: Vec<String> =
                records.iter().map(|r| r.failure_step.clone().unwrap_or_else(|| "-".into())).collect();
            steps.sort();
            steps.dedup();
            notes.push(format!("failure steps differ across trials: {}", steps.join(", ")));
            None
        };
        let vulnerable_count = records.iter().filter(|r| r.vulnerable).count();
        if vulnerable_count != 0 && vulnerable_count != records.len() {
            notes.push(format!("{vulnerable_count}/{} trials vulnerable", records.len()));
        }
        let exp = expectation(scheme, scenario, variant.as_deref());
        let expected_vulnerable = exp.as_ref().map(|e| e.vulnerable);
        let expected_failure_step = exp.as_ref().and_then(|e| e.failure_step.map(str::to_owned));
        let matches_reference = exp
            .map(|e| e.vulnerable == vulnerable && e.failure_step.is_none_or(|s| failure_step.as_deref() == Some(s)));
        AttackReport {
            scheme,
            scenario,
            variant,
            vulnerable,
            failure_step,
            messages_sent: records.iter().map(|r| r.messages_sent).sum(),
            server_hash_ops: records.iter().map(|r| r.server_hash_ops).sum(),
            trials: records.len(),
            notes,
            expected_vulnerable,
            expected_failure_step,
            matches_reference,
            trial_records: records,
            sample_transcript: sample,
        }
    }

    /// The report without per-trial records and the sample transcript.
    pub fn summary(&self) -> AttackReport {
        AttackReport { trial_records: Vec::new(), sample_transcript: None, ..self.clone() }
    }

    /// `false` only when the reference makes a claim and the run contradicts it.
    pub fn agrees_with_reference(&self) -> bool {
        self.matches_reference != Some(false)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let variant = self.variant.as_deref().map(|v| format!(" [{v}]")).unwrap_or_default();
        out.push_str(&format!("{} / {}{}\n", self.scheme, self.scenario, variant));
        out.push_str(&format!("  vulnerable:      {}\n", self.vulnerable));
        out.push_str(&format!("  failure step:    {}\n", self.failure_step.as_deref().unwrap_or("-")));
        out.push_str(&format!("  trials:          {}\n", self.trials));
        out.push_str(&format!("  messages sent:   {}\n", self.messages_sent));
        out.push_str(&format!("  server hash ops: {}\n", self.server_hash_ops));
        let expected = match (self.expected_vulnerable, &self.expected_failure_step) {
            (None, _) => "no claim".to_owned(),
            (Some(v), None) => format!("vulnerable={v}"),
            (Some(v), Some(s)) => format!("vulnerable={v}, step {s}"),
        };
        out.push_str(&format!("  expected:        {expected}\n"));
        let verdict = match self.matches_reference {
            None => "n/a",
            Some(true) => "match",
            Some(false) => "MISMATCH",
        };
        out.push_str(&format!("  vs reference:    {verdict}\n"));
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

/// Runs `scenario` against `scheme`.
pub fn run_scenario(scheme: SchemeId, scenario: Scenario, opts: &ScenarioOptions) -> Result<AttackReport> {
    if opts.trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    if opts.delta_t == 0 {
        return Err(Error::InvalidInput("delta_t must be positive".into()));
    }
    if !scenario.applies_to(scheme) {
        if scenario == Scenario::TamperLogin {
            let tamper = opts.tamper.unwrap_or(Tamper::Identity);
            if tamper != Tamper::Identity {
                return Err(Error::UnsupportedTamper { scheme: scheme.to_string(), tamper: tamper.to_string() });
            }
        } else {
            return Err(Error::UnsupportedScenario { scheme: scheme.to_string(), scenario: scenario.to_string() });
        }
    }
    scenarios::run(scheme, scenario, opts)
}

pub fn wrong_password_login(scheme: SchemeId, trials: usize, seed: u64) -> Result<AttackReport> {
    run_scenario(scheme, Scenario::WrongPasswordLogin, &ScenarioOptions::new(trials, seed))
}

pub fn wrong_identity_login(scheme: SchemeId, trials: usize, seed: u64) -> Result<AttackReport> {
    run_scenario(scheme, Scenario::WrongIdentityLogin, &ScenarioOptions::new(trials, seed))
}

pub fn dos_via_password_change(scheme: SchemeId, trials: usize, seed: u64) -> Result<AttackReport> {
    run_scenario(scheme, Scenario::DosViaPasswordChange, &ScenarioOptions::new(trials, seed))
}

pub fn tamper_login_message(scheme: SchemeId, tamper: Tamper, trials: usize, seed: u64) -> Result<AttackReport> {
    let opts = ScenarioOptions { tamper: Some(tamper), ..ScenarioOptions::new(trials, seed) };
    run_scenario(scheme, Scenario::TamperLogin, &opts)
}

pub fn replay_login(scheme: SchemeId, refresh_timestamp: bool, trials: usize, seed: u64) -> Result<AttackReport> {
    let opts = ScenarioOptions { refresh_timestamp, ..ScenarioOptions::new(trials, seed) };
    run_scenario(scheme, Scenario::ReplayLogin, &opts)
}

pub fn temp_info_leak(scheme: SchemeId, leak: Leak, trials: usize, seed: u64) -> Result<AttackReport> {
    let opts = ScenarioOptions { leak, ..ScenarioOptions::new(trials, seed) };
    run_scenario(scheme, Scenario::TempInfoLeak, &opts)
}

pub fn failure_indistinguishability(scheme: SchemeId, trials: usize, seed: u64) -> Result<AttackReport> {
    run_scenario(scheme, Scenario::FailureIndistinguishability, &ScenarioOptions::new(trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.as_str().parse::<Scenario>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), s.as_str());
        }
        for t in Tamper::ALL {
            assert_eq!(t.as_str().parse::<Tamper>().unwrap(), t);
            assert_eq!(serde_json::to_value(t).unwrap(), t.as_str());
        }
        for l in Leak::ALL {
            assert_eq!(l.as_str().parse::<Leak>().unwrap(), l);
        }
        assert!(matches!("nope".parse::<Scenario>(), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn zero_trials_is_rejected() {
        let opts = ScenarioOptions::new(0, 0);
        assert!(run_scenario(SchemeId::Wei, Scenario::WrongPasswordLogin, &opts).is_err());
    }

    #[test]
    fn unsupported_tamper() {
        let err = tamper_login_message(SchemeId::Zhu, Tamper::LinRehashR, 1, 0).unwrap_err();
        assert!(matches!(err, Error::UnsupportedTamper { .. }));
        let err = tamper_login_message(SchemeId::Wei, Tamper::LinRehashR, 1, 0).unwrap_err();
        assert!(matches!(err, Error::UnsupportedTamper { .. }));
    }
}
