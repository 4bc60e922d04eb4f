//! Rabin-based dynamic-ID scheme. The server decodes all four square roots
//! and keeps the one whose identity is registered and whose `J` verifies.

use num_bigint::BigUint;

use crate::crypto::{rabin_square, CryptoError, Digest, PackLayout, RabinKeys};
use crate::framework::{
    check, Account, Env, Fields, Halt, Identity, Message, Password, Payload, SchemeId, SchemeSuite, ServerState, Slots,
    SmartCard, Step, SuiteMeta, UserFinal,
};
use crate::{Error, Result};

use super::{field, HASH_FIELD_BITS, ID_BITS, NONCE_BITS};

#[derive(Debug, Clone)]
pub struct CaoZhai {
    keys: RabinKeys,
}

pub fn build_cao_zhai(keys: RabinKeys) -> Result<CaoZhai> {
    keys.validate()?;
    let s = CaoZhai { keys };
    s.layout().pack(&vec![BigUint::default(); 3])?.encode_below(&s.keys.n)?;
    Ok(s)
}

impl CaoZhai {
    fn layout(&self) -> PackLayout {
        PackLayout::new(&[("ID", ID_BITS), ("J", HASH_FIELD_BITS), ("r_u", NONCE_BITS)])
    }

    /// `h(b || PW)`, cut to the width of `J`.
    fn w(env: &mut Env<'_>, b: &BigUint, pw: &Password) -> BigUint {
        env.h_trunc(HASH_FIELD_BITS, &[b.into(), pw.as_bytes().into()])
    }

    /// `J = h(p || q || ID || N)`, cut to the packed width.
    fn j(env: &mut Env<'_>, secrets: &Slots, id: &BigUint, counter: u64) -> Result<BigUint> {
        let (p, q) = (secrets.int("p")?, secrets.int("q")?);
        Ok(env.h_trunc(HASH_FIELD_BITS, &[p.into(), q.into(), id.into(), counter.into()]))
    }

    fn issue(
        &self,
        env: &mut Env<'_>,
        server: &ServerState,
        id: &Identity,
        pw: &Password,
        counter: u64,
    ) -> Result<SmartCard> {
        let b = env.nonce(NONCE_BITS.into());
        let w = Self::w(env, &b, pw);
        let j = Self::j(env, server.secrets(), &id.to_int(), counter)?;
        let slots = Slots::new().with("L", j ^ w).with("n", self.keys.n.clone()).with("b", b);
        Ok(SmartCard::issue(SchemeId::CaoZhai, slots))
    }

    /// `K = h(r_u || r_s)`.
    pub fn session_key(env: &mut Env<'_>, r_u: &BigUint, r_s: &BigUint) -> Digest {
        env.h(&[r_u.into(), r_s.into()])
    }

    fn check_c_s(env: &mut Env<'_>, s: &Slots, m2: &Message) -> Step<(BigUint, Digest)> {
        let r_s = m2.int("r_s")?.clone();
        let k_u = Self::session_key(env, s.int("r_u")?, &r_s);
        let expect = env.h(&[(&k_u).into(), (&r_s).into()]);
        check(expect.as_bytes() == m2.bytes("C_s")?, "C_s")?;
        Ok((r_s, k_u))
    }
}

impl SchemeSuite for CaoZhai {
    fn id(&self) -> SchemeId {
        SchemeId::CaoZhai
    }

    fn meta(&self) -> SuiteMeta {
        SuiteMeta {
            defines_session_key: true,
            uses_timestamps: false,
            online_password_change: true,
            supports_revocation: true,
            messages: 3,
        }
    }

    fn public_params(&self) -> Slots {
        Slots::new().with("n", self.keys.n.clone())
    }

    fn new_server(&self) -> ServerState {
        let secrets = Slots::new().with("p", self.keys.p.clone()).with("q", self.keys.q.clone());
        ServerState::new(SchemeId::CaoZhai, secrets)
    }

    fn card_slots(&self) -> &'static [&'static str] {
        &["L", "b", "n"]
    }

    fn register(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard> {
        if server.is_registered(id) {
            return Err(Error::DuplicateIdentity(id.to_string()));
        }
        let card = self.issue(env, server, id, pw, 0)?;
        server.insert_account(Account::new(id.clone()))?;
        Ok(card)
    }

    fn login_begin(
        &self,
        env: &mut Env<'_>,
        card: &mut SmartCard,
        id: &Identity,
        pw: &Password,
    ) -> Result<(Payload, Slots)> {
        let c = card.slots();
        let (l, n, b) = (c.int("L")?, c.int("n")?, c.int("b")?);
        let r_u = env.nonce(NONCE_BITS.into());
        let j = l ^ Self::w(env, b, pw);
        let m = self.layout().pack(&[id.to_int(), j.clone(), r_u.clone()])?.encode_below(n)?;
        let aid = rabin_square(&m, n);
        Ok((Payload::new().with("AID", aid), Slots::new().with("r_u", r_u).with("J", j)))
    }

    fn server_respond(&self, env: &mut Env<'_>, server: &mut ServerState, m1: &Message) -> Step<(Payload, Slots)> {
        let aid = m1.int("AID")?;
        let roots = match env.rabin_roots(aid, &self.keys) {
            Ok(r) => r,
            Err(Error::Crypto(CryptoError::NonResidue | CryptoError::OutOfRange)) => return Err(Halt::reject("ID")),
            Err(e) => return Err(e.into()),
        };
        let layout = self.layout();
        let mut registered = Vec::new();
        for root in &roots {
            let Ok(pt) = layout.unpack(root) else { continue };
            let id = field(&pt, "ID");
            if let Some(ident) = super::identity_of(&id).filter(|i| server.is_registered(i)) {
                registered.push((ident, pt));
            }
        }
        check(!registered.is_empty(), "ID")?;
        let mut verified = Vec::new();
        for (ident, pt) in registered {
            let counter = server.account(&ident).map(|a| a.counter).unwrap_or_default();
            let j = Self::j(env, server.secrets(), &ident.to_int(), counter)?;
            if j == field(&pt, "J") {
                verified.push(pt);
            }
        }
        check(!verified.is_empty(), "J")?;
        if verified.len() > 1 {
            return Err(CryptoError::DecodeAmbiguous.into());
        }
        let r_u = field(&verified[0], "r_u");
        let r_s = env.nonce(NONCE_BITS.into());
        let k_s = Self::session_key(env, &r_u, &r_s);
        let c_s = env.h(&[(&k_s).into(), (&r_s).into()]);
        let payload = Payload::new().with("r_s", r_s.clone()).with("C_s", c_s);
        Ok((payload, Slots::new().with("r_u'", r_u).with("r_s", r_s).with("K_s", k_s)))
    }

    fn user_finalize(&self, env: &mut Env<'_>, _card: &SmartCard, s: &Slots, m2: &Message) -> Step<UserFinal> {
        let (r_s, k_u) = Self::check_c_s(env, s, m2)?;
        let c_u = env.h(&[(&r_s).into(), (&k_u).into()]);
        Ok(UserFinal { reply: Some(Payload::new().with("C_u", c_u)), key: Some(k_u.into_bytes()) })
    }

    fn server_finalize(
        &self,
        env: &mut Env<'_>,
        _server: &mut ServerState,
        s: &Slots,
        m3: Option<&Message>,
    ) -> Step<Option<Vec<u8>>> {
        let m3 = m3.ok_or_else(|| Halt::Abort("missing M_3".into()))?;
        let k_s = s.digest("K_s")?;
        let expect = env.h(&[s.int("r_s")?.into(), (&k_s).into()]);
        check(expect.as_bytes() == m3.bytes("C_u")?, "C_u")?;
        Ok(Some(k_s.into_bytes()))
    }

    fn complete_online_change(
        &self,
        env: &mut Env<'_>,
        card: &mut SmartCard,
        s: &Slots,
        m2: &Message,
        old: &Password,
        new: &Password,
    ) -> Step<()> {
        Self::check_c_s(env, s, m2)?;
        let (l, b) = (card.slots().int("L")?.clone(), card.slots().int("b")?.clone());
        let l_new = l ^ Self::w(env, &b, old) ^ Self::w(env, &b, new);
        card.slots_mut().set("L", l_new);
        Ok(())
    }

    fn revoke(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard> {
        let acct = server.account_mut(id).ok_or_else(|| Error::UnknownIdentity(id.to_string()))?;
        acct.counter += 1;
        let counter = acct.counter;
        self.issue(env, server, id, pw, counter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{ChangeOutcome, SessionOutcome};
    use crate::schemes::testing::{alice, wrong_pw, Rig};

    #[test]
    fn honest_run_agrees_on_k() {
        for seed in 0..5 {
            let (outcome, _) = Rig::new(SchemeId::CaoZhai, seed).honest();
            assert_eq!(outcome.keys_match(), Some(true));
        }
    }

    #[test]
    fn input_errors() {
        let mut rig = Rig::new(SchemeId::CaoZhai, 1);
        let (id, pw) = alice();
        assert_eq!(rig.login(&id, &wrong_pw()).0, SessionOutcome::ServerReject { step: "J".into() });
        let stranger = Identity::from_u16(0x7777);
        assert_eq!(rig.login(&stranger, &pw).0, SessionOutcome::ServerReject { step: "ID".into() });
    }

    #[test]
    fn password_change_needs_the_server() {
        let mut rig = Rig::new(SchemeId::CaoZhai, 2);
        let (id, pw) = alice();
        let new = Password::new(b"new".to_vec()).unwrap();
        let err =
            rig.sim.run_password_change(rig.suite.as_ref(), &mut rig.card, &id, &pw, &new, None, None).unwrap_err();
        assert_eq!(err, Error::ServerUnreachable);

        let before = rig.card.clone();
        let r = rig
            .sim
            .run_password_change(rig.suite.as_ref(), &mut rig.card, &id, &wrong_pw(), &new, Some(&mut rig.server), None)
            .unwrap();
        assert_eq!(r.outcome, ChangeOutcome::Refused { step: "J".into() });
        assert_eq!(rig.card, before);

        let r = rig
            .sim
            .run_password_change(rig.suite.as_ref(), &mut rig.card, &id, &pw, &new, Some(&mut rig.server), None)
            .unwrap();
        assert_eq!(r.outcome, ChangeOutcome::Applied);
        assert!(r.card_mutated);
        assert!(rig.login(&id, &new).0.is_success());
    }

    #[test]
    fn revocation_bumps_counter_and_retires_old_card() {
        let mut rig = Rig::new(SchemeId::CaoZhai, 3);
        let (id, pw) = alice();
        let new_card = rig.sim.run_revocation(rig.suite.as_ref(), &mut rig.server, &id, &pw).unwrap();
        assert_eq!(rig.server.account(&id).unwrap().counter, 1);
        assert_eq!(rig.login(&id, &pw).0, SessionOutcome::ServerReject { step: "J".into() });
        rig.card = new_card;
        assert!(rig.login(&id, &pw).0.is_success());
        let unknown = rig.sim.run_revocation(rig.suite.as_ref(), &mut rig.server, &Identity::from_u16(9), &pw);
        assert!(matches!(unknown, Err(Error::UnknownIdentity(_))));
    }
}
