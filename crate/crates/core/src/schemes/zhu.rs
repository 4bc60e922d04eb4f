//! RSA-based mutual authentication without key agreement.

use num_bigint::BigUint;

use crate::crypto::{Digest, PackLayout, RsaKeys};
use crate::framework::{
    check, Account, Env, Fields, Halt, Identity, Message, Password, Payload, SchemeId, SchemeSuite, ServerState, Slots,
    SmartCard, Step, SuiteMeta, UserFinal,
};
use crate::{Error, Result};

use super::{field, seal, unseal, HASH_FIELD_BITS, NONCE_BITS};

#[derive(Debug, Clone)]
pub struct Zhu {
    keys: RsaKeys,
}

pub fn build_zhu(keys: RsaKeys) -> Result<Zhu> {
    keys.validate()?;
    let zhu = Zhu { keys };
    zhu.layout().pack(&[BigUint::default(), BigUint::default()])?.encode_below(&zhu.keys.n)?;
    Ok(zhu)
}

impl Zhu {
    fn layout(&self) -> PackLayout {
        PackLayout::new(&[("h_1", HASH_FIELD_BITS), ("r_U", NONCE_BITS)])
    }

    /// `h(W)` with `W = h(PW || N)`.
    fn h_w(env: &mut Env<'_>, pw: &Password, n: &BigUint) -> Digest {
        let w = env.h(&[pw.as_bytes().into(), n.into()]);
        env.h(&[(&w).into()])
    }
}

impl SchemeSuite for Zhu {
    fn id(&self) -> SchemeId {
        SchemeId::Zhu
    }

    fn meta(&self) -> SuiteMeta {
        SuiteMeta {
            defines_session_key: false,
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
        ServerState::new(SchemeId::Zhu, Slots::new().with("d", self.keys.d.clone()))
    }

    fn card_slots(&self) -> &'static [&'static str] {
        &["B", "ID", "N", "e", "n"]
    }

    fn register(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard> {
        if server.is_registered(id) {
            return Err(Error::DuplicateIdentity(id.to_string()));
        }
        let n_u = env.nonce(NONCE_BITS.into());
        let hw = Self::h_w(env, pw, &n_u);
        let d = server.secrets().int("d")?.clone();
        let b = env.h(&[(&(id.to_int() ^ d)).into()]).xor(&hw);
        server.insert_account(Account::new(id.clone()))?;
        let slots = Slots::new()
            .with("n", self.keys.n.clone())
            .with("e", self.keys.e.clone())
            .with("ID", id.to_int())
            .with("B", b)
            .with("N", n_u);
        Ok(SmartCard::issue(SchemeId::Zhu, slots))
    }

    fn login_begin(
        &self,
        env: &mut Env<'_>,
        card: &mut SmartCard,
        _id: &Identity,
        pw: &Password,
    ) -> Result<(Payload, Slots)> {
        let c = card.slots();
        let (n, e) = (c.int("n")?.clone(), c.int("e")?.clone());
        let id = c.int("ID")?.clone();
        let b = c.digest("B")?;
        let n_u = c.int("N")?.clone();
        let r_u = env.nonce(NONCE_BITS.into());
        let b_prime = b.xor(&Self::h_w(env, pw, &n_u));
        let h_1 = env.h_trunc(HASH_FIELD_BITS, &[(&b_prime).into(), (&r_u).into()]);
        let x = seal(env, &self.layout(), &[h_1, r_u.clone()], &e, &n)?;
        let payload = Payload::new().with("ID", id.clone()).with("X", x);
        Ok((payload, Slots::new().with("ID", id).with("r_U", r_u)))
    }

    fn server_respond(&self, env: &mut Env<'_>, server: &mut ServerState, m1: &Message) -> Step<(Payload, Slots)> {
        let id = m1.int("ID")?.clone();
        let known = super::identity_of(&id).is_some_and(|i| server.is_registered(&i));
        check(known, "ID")?;
        let d = server.secrets().int("d")?.clone();
        let pt = unseal(env, &self.layout(), m1.int("X")?, &d, &self.keys.n).map_err(|_| Halt::reject("h_1"))?;
        let (h_1, r_u) = (field(&pt, "h_1"), field(&pt, "r_U"));
        let hid = env.h(&[(&(&id ^ &d)).into()]);
        let expect = env.h_trunc(HASH_FIELD_BITS, &[(&hid).into(), (&r_u).into()]);
        check(expect == h_1, "h_1")?;
        let r_s = env.nonce(NONCE_BITS.into());
        let h_2 = env.h(&[(&id).into(), (&r_u).into(), (&r_s).into()]);
        let payload = Payload::new().with("h_2", h_2).with("r_S", r_s.clone());
        Ok((payload, Slots::new().with("ID", id).with("r_U'", r_u).with("r_S", r_s)))
    }

    fn user_finalize(&self, env: &mut Env<'_>, _card: &SmartCard, s: &Slots, m2: &Message) -> Step<UserFinal> {
        let (id, r_u) = (s.int("ID")?, s.int("r_U")?);
        let r_s = m2.int("r_S")?;
        let expect = env.h(&[id.into(), r_u.into(), r_s.into()]);
        check(expect.as_bytes() == m2.bytes("h_2")?, "h_2")?;
        let h_3 = env.h(&[id.into(), r_s.into(), r_u.into()]);
        Ok(UserFinal { reply: Some(Payload::new().with("h_3", h_3)), key: None })
    }

    fn server_finalize(
        &self,
        env: &mut Env<'_>,
        _server: &mut ServerState,
        s: &Slots,
        m3: Option<&Message>,
    ) -> Step<Option<Vec<u8>>> {
        let m3 = m3.ok_or_else(|| Halt::Abort("missing M_3".into()))?;
        let expect = env.h(&[s.int("ID")?.into(), s.int("r_S")?.into(), s.int("r_U'")?.into()]);
        check(expect.as_bytes() == m3.bytes("h_3")?, "h_3")?;
        Ok(None)
    }

    fn change_password(&self, env: &mut Env<'_>, card: &mut SmartCard, old: &Password, new: &Password) -> Result<()> {
        let n_u = card.slots().int("N")?.clone();
        let b = card.slots().digest("B")?;
        let b_new = b.xor(&Self::h_w(env, old, &n_u)).xor(&Self::h_w(env, new, &n_u));
        card.slots_mut().set("B", b_new);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::SessionOutcome;
    use crate::schemes::testing::{alice, wrong_pw, Rig};

    #[test]
    fn honest_run_authenticates_without_key() {
        for seed in 0..5 {
            let (outcome, tr) = Rig::new(SchemeId::Zhu, seed).honest();
            assert_eq!(outcome, SessionOutcome::MutualAuthSuccess { user_key: None, server_key: None });
            assert_eq!(tr.messages.len(), 3);
        }
    }

    #[test]
    fn wrong_password_is_rejected_at_h1() {
        let mut rig = Rig::new(SchemeId::Zhu, 1);
        let (id, _) = alice();
        assert_eq!(rig.login(&id, &wrong_pw()).0, SessionOutcome::ServerReject { step: "h_1".into() });
    }

    #[test]
    fn change_round_trip_restores_b() {
        let mut rig = Rig::new(SchemeId::Zhu, 2);
        let (id, pw) = alice();
        let before = rig.card.clone();
        let new = Password::new(b"new".to_vec()).unwrap();
        rig.sim.run_password_change(rig.suite.as_ref(), &mut rig.card, &id, &pw, &new, None, None).unwrap();
        assert_ne!(rig.card, before);
        rig.sim.run_password_change(rig.suite.as_ref(), &mut rig.card, &id, &new, &pw, None, None).unwrap();
        assert_eq!(rig.card, before);
    }
}
