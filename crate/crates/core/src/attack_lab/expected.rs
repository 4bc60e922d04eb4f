//! The verdicts the reference case analyses and attribute table commit to.

use serde::Serialize;

use super::Scenario;
use crate::framework::SchemeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Expectation {
    pub vulnerable: bool,
    /// Step at which the server must reject, where the reference names one.
    pub failure_step: Option<&'static str>,
}

const fn vuln(vulnerable: bool) -> Option<Expectation> {
    Some(Expectation { vulnerable, failure_step: None })
}

const fn at(vulnerable: bool, step: &'static str) -> Option<Expectation> {
    Some(Expectation { vulnerable, failure_step: Some(step) })
}

/// Expected verdict for a scenario run, or `None` where the reference is silent.
/// `variant` is the report's variant string.
pub fn expectation(scheme: SchemeId, scenario: Scenario, variant: Option<&str>) -> Option<Expectation> {
    use SchemeId::*;
    match scenario {
        Scenario::WrongPasswordLogin => match scheme {
            Wei | Zhu | LeeLiu => at(true, "h_1"),
            Lin => at(true, "CID"),
            CaoZhai => at(true, "J"),
            Xie => at(true, "C_1"),
            Xu => at(true, "F"),
        },
        Scenario::WrongIdentityLogin => match scheme {
            Lin => at(true, "CID"),
            CaoZhai => at(true, "ID"),
            Xu => at(true, "F"),
            _ => None,
        },
        Scenario::DosViaPasswordChange => vuln(scheme != CaoZhai),
        Scenario::TamperLogin => match (scheme, variant) {
            (_, Some("identity")) => vuln(false),
            (Wei, _) => at(false, "h_1"),
            (Lin, _) => at(false, "R"),
            _ => None,
        },
        Scenario::ReplayLogin => match (scheme, variant) {
            (CaoZhai, _) => vuln(true),
            (LeeLiu, _) => at(false, "SN"),
            (Xie, Some("refreshed")) => at(false, "C_1"),
            _ => vuln(false),
        },
        Scenario::TempInfoLeak => match (scheme, variant) {
            (CaoZhai, Some("nonces")) => vuln(true),
            (CaoZhai, Some("server_nonce" | "channel_only")) => vuln(false),
            _ => None,
        },
        Scenario::OfflineChangeBlocked => vuln(!matches!(scheme, Lin | Xie | Xu)),
        Scenario::FailureIndistinguishability => match scheme {
            Wei | Lin | Xie => vuln(true),
            _ => None,
        },
        Scenario::HonestKeyAgreement => vuln(scheme == Zhu),
    }
}
