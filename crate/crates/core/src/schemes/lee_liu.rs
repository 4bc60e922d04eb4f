//! Zhu's construction plus a card serial counter `SN_U` and a server
//! watermark that rejects any login whose counter does not move forward.
//!
//! The card increments `SN_U` at the start of every login, so login is the
//! one phase besides password change that rewrites a card slot.

use num_bigint::BigUint;

use crate::crypto::{Digest, PackLayout, RsaKeys};
use crate::framework::{
    check, Account, Env, Fields, Halt, Identity, Message, Password, Payload, SchemeId, SchemeSuite, ServerState, Slots,
    SmartCard, Step, SuiteMeta, UserFinal,
};
use crate::{Error, Result};

use super::{field, seal, unseal, COUNTER_BITS, HASH_FIELD_BITS, ID_BITS, NONCE_BITS};

#[derive(Debug, Clone)]
pub struct LeeLiu {
    keys: RsaKeys,
}

pub fn build_lee_liu(keys: RsaKeys) -> Result<LeeLiu> {
    keys.validate()?;
    let s = LeeLiu { keys };
    s.layout().pack(&vec![BigUint::default(); 4])?.encode_below(&s.keys.n)?;
    Ok(s)
}

impl LeeLiu {
    fn layout(&self) -> PackLayout {
        PackLayout::new(&[("ID", ID_BITS), ("h_1", HASH_FIELD_BITS), ("r_U", NONCE_BITS), ("SN_U", COUNTER_BITS)])
    }

    /// `W = h(PW || N)`.
    fn w(env: &mut Env<'_>, pw: &Password, n: &BigUint) -> Digest {
        env.h(&[pw.as_bytes().into(), n.into()])
    }

    fn session_key(env: &mut Env<'_>, id: &BigUint, r_s: &BigUint, r_u: &BigUint, sn: &BigUint) -> Digest {
        env.h(&[id.into(), r_s.into(), r_u.into(), sn.into()])
    }
}

impl SchemeSuite for LeeLiu {
    fn id(&self) -> SchemeId {
        SchemeId::LeeLiu
    }

    fn meta(&self) -> SuiteMeta {
        SuiteMeta {
            defines_session_key: true,
            uses_timestamps: false,
            online_password_change: false,
            supports_revocation: false,
            messages: 3,
        }
    }

    fn public_params(&self) -> Slots {
        Slots::new().with("n", self.keys.n.clone()).with("e", self.keys.e.clone())
    }

    fn new_server(&self) -> ServerState {
        ServerState::new(SchemeId::LeeLiu, Slots::new().with("d", self.keys.d.clone()))
    }

    fn card_slots(&self) -> &'static [&'static str] {
        &["B", "ID", "N", "SN_U", "e", "n"]
    }

    fn register(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard> {
        if server.is_registered(id) {
            return Err(Error::DuplicateIdentity(id.to_string()));
        }
        let n_u = env.nonce(NONCE_BITS.into());
        let w = Self::w(env, pw, &n_u);
        let d = server.secrets().int("d")?.clone();
        let b = env.h(&[(&(id.to_int() ^ d)).into()]).xor(&w);
        server.insert_account(Account::new(id.clone()))?;
        let slots = Slots::new()
            .with("n", self.keys.n.clone())
            .with("e", self.keys.e.clone())
            .with("ID", id.to_int())
            .with("B", b)
            .with("N", n_u)
            .with("SN_U", 0u64);
        Ok(SmartCard::issue(SchemeId::LeeLiu, slots))
    }

    fn login_begin(
        &self,
        env: &mut Env<'_>,
        card: &mut SmartCard,
        _id: &Identity,
        pw: &Password,
    ) -> Result<(Payload, Slots)> {
        let sn = card.slots().u64("SN_U")? + 1;
        if sn >= 1 << COUNTER_BITS {
            return Err(Error::InvalidInput("card serial number exhausted".into()));
        }
        card.slots_mut().set("SN_U", sn);
        let c = card.slots();
        let (n, e) = (c.int("n")?.clone(), c.int("e")?.clone());
        let id = c.int("ID")?.clone();
        let b = c.digest("B")?;
        let n_u = c.int("N")?.clone();
        let sn = BigUint::from(sn);
        let r_u = env.nonce(NONCE_BITS.into());
        let h = b.xor(&Self::w(env, pw, &n_u));
        let h_1 = env.h_trunc(HASH_FIELD_BITS, &[(&h).into(), (&r_u).into(), (&sn).into()]);
        let x = seal(env, &self.layout(), &[id.clone(), h_1, r_u.clone(), sn.clone()], &e, &n)?;
        let session = Slots::new().with("ID", id).with("r_U", r_u).with("SN_U", sn);
        Ok((Payload::new().with("X", x), session))
    }

    fn server_respond(&self, env: &mut Env<'_>, server: &mut ServerState, m1: &Message) -> Step<(Payload, Slots)> {
        let d = server.secrets().int("d")?.clone();
        let pt = unseal(env, &self.layout(), m1.int("X")?, &d, &self.keys.n).map_err(|_| Halt::reject("ID"))?;
        let (id, h_1, r_u, sn) = (field(&pt, "ID"), field(&pt, "h_1"), field(&pt, "r_U"), field(&pt, "SN_U"));
        let ident = super::identity_of(&id).filter(|i| server.is_registered(i));
        let Some(ident) = ident else { return Err(Halt::reject("ID")) };
        let watermark = server.account(&ident).map(|a| a.sn_watermark()).unwrap_or_default();
        check(sn > BigUint::from(watermark), "SN")?;
        let hid = env.h(&[(&(&id ^ &d)).into()]);
        let expect = env.h_trunc(HASH_FIELD_BITS, &[(&hid).into(), (&r_u).into(), (&sn).into()]);
        check(expect == h_1, "h_1")?;
        let sn_u64 = u64::try_from(&sn).expect("16-bit field");
        if let Some(acct) = server.account_mut(&ident) {
            acct.raise_watermark(sn_u64);
        }
        let r_s = env.nonce(NONCE_BITS.into());
        let h_2 = env.h(&[(&id).into(), (&r_u).into(), (&r_s).into(), (&sn).into()]);
        let payload = Payload::new().with("h_2", h_2).with("r_S^r_U", &r_s ^ &r_u);
        let session = Slots::new().with("ID", id).with("r_U'", r_u).with("r_S", r_s).with("SN_U'", sn);
        Ok((payload, session))
    }

    fn user_finalize(&self, env: &mut Env<'_>, _card: &SmartCard, s: &Slots, m2: &Message) -> Step<UserFinal> {
        let (id, r_u, sn) = (s.int("ID")?, s.int("r_U")?, s.int("SN_U")?);
        let r_s = m2.int("r_S^r_U")? ^ r_u;
        let expect = env.h(&[id.into(), r_u.into(), (&r_s).into(), sn.into()]);
        check(expect.as_bytes() == m2.bytes("h_2")?, "h_2")?;
        let sk = Self::session_key(env, id, &r_s, r_u, sn);
        let h_3 = env.h(&[(&sk).into()]);
        Ok(UserFinal { reply: Some(Payload::new().with("h_3", h_3)), key: Some(sk.into_bytes()) })
    }

    fn server_finalize(
        &self,
        env: &mut Env<'_>,
        _server: &mut ServerState,
        s: &Slots,
        m3: Option<&Message>,
    ) -> Step<Option<Vec<u8>>> {
        let m3 = m3.ok_or_else(|| Halt::Abort("missing M_3".into()))?;
        let sk = Self::session_key(env, s.int("ID")?, s.int("r_S")?, s.int("r_U'")?, s.int("SN_U'")?);
        let expect = env.h(&[(&sk).into()]);
        check(expect.as_bytes() == m3.bytes("h_3")?, "h_3")?;
        Ok(Some(sk.into_bytes()))
    }

    fn change_password(&self, env: &mut Env<'_>, card: &mut SmartCard, old: &Password, new: &Password) -> Result<()> {
        let n_u = card.slots().int("N")?.clone();
        let b = card.slots().digest("B")?;
        let b_new = b.xor(&Self::w(env, old, &n_u)).xor(&Self::w(env, new, &n_u));
        card.slots_mut().set("B", b_new);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{Action, AdversaryScript, SessionOutcome};
    use crate::schemes::testing::{alice, wrong_pw, Rig};

    #[test]
    fn honest_run_agrees_and_advances_watermark() {
        let mut rig = Rig::new(SchemeId::LeeLiu, 0);
        let (id, _) = alice();
        for round in 1..=3u64 {
            let (outcome, _) = rig.honest();
            assert_eq!(outcome.keys_match(), Some(true));
            assert_eq!(rig.server.account(&id).unwrap().sn_watermark(), round);
            assert_eq!(rig.card.slots().u64("SN_U").unwrap(), round);
        }
    }

    #[test]
    fn replayed_login_hits_the_watermark() {
        let mut rig = Rig::new(SchemeId::LeeLiu, 1);
        rig.honest();
        rig.adversary.set_script(AdversaryScript::new(vec![Action::Replay { source: 0, refresh: None }]));
        let (outcome, _) = rig.honest();
        assert_eq!(outcome, SessionOutcome::ServerReject { step: "SN".into() });
    }

    #[test]
    fn wrong_password_is_rejected_at_h1() {
        let mut rig = Rig::new(SchemeId::LeeLiu, 2);
        let (id, _) = alice();
        assert_eq!(rig.login(&id, &wrong_pw()).0, SessionOutcome::ServerReject { step: "h_1".into() });
    }
}
