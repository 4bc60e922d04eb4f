//! RSA-based dynamic-ID scheme with a server-side encrypted registration
//! record `RID = E_X(ID, N, SC)`, keyed by the private exponent `X`.
//!
//! `A = J^a mod n` is as wide as `n`, so it cannot share an RSA block with the
//! other fields. The login carries two blocks: `AID` seals
//! `ID || N || SC || C_1` and `AID_A` seals `A`.

use num_bigint::BigUint;

use crate::crypto::{PackLayout, RsaKeys};
use crate::framework::{
    check, Account, Env, Fields, Halt, Identity, Message, Password, Payload, SchemeId, SchemeSuite, ServerState, Slots,
    SmartCard, Step, SuiteMeta, UserFinal,
};
use crate::{Error, Result};

use super::{field, seal, unseal, CARD_NUMBER_BITS, COUNTER_BITS, HASH_FIELD_BITS, ID_BITS};

/// Bits of the exponent nonces `a` and `b`.
const EXPONENT_NONCE_BITS: u64 = 64;

#[derive(Debug, Clone)]
pub struct Xie {
    keys: RsaKeys,
}

pub fn build_xie(keys: RsaKeys) -> Result<Xie> {
    keys.validate()?;
    let s = Xie { keys };
    s.aid_layout().pack(&vec![BigUint::default(); 4])?.encode_below(&s.keys.n)?;
    Ok(s)
}

impl Xie {
    fn aid_layout(&self) -> PackLayout {
        PackLayout::new(&[("ID", ID_BITS), ("N", COUNTER_BITS), ("SC", CARD_NUMBER_BITS), ("C_1", HASH_FIELD_BITS)])
    }

    fn rid_layout() -> PackLayout {
        PackLayout::new(&[("ID", ID_BITS), ("N", COUNTER_BITS), ("SC", CARD_NUMBER_BITS)])
    }

    /// `J = h(X || ID || N || SC) mod n`.
    fn j(&self, env: &mut Env<'_>, x: &BigUint, id: &BigUint, counter: u64, sc: u64) -> BigUint {
        env.h_mod(&self.keys.n, &[x.into(), id.into(), counter.into(), sc.into()])
    }

    fn h_pw(env: &mut Env<'_>, pw: &Password) -> BigUint {
        env.h(&[pw.as_bytes().into()]).to_int()
    }

    fn c_1(env: &mut Env<'_>, t_u: u64, j: &BigUint, a: &BigUint) -> BigUint {
        env.h_trunc(HASH_FIELD_BITS, &[t_u.into(), j.into(), a.into()])
    }

    fn new_card_number(env: &mut Env<'_>, avoid: Option<u64>) -> u64 {
        loop {
            let sc = u64::try_from(env.nonce(CARD_NUMBER_BITS.into())).expect("16-bit value");
            if sc != 0 && Some(sc) != avoid {
                return sc;
            }
        }
    }

    /// Writes the account record and returns the card for `(ID, N, SC)`.
    fn issue(
        &self,
        env: &mut Env<'_>,
        server: &mut ServerState,
        id: &Identity,
        pw: &Password,
        counter: u64,
        sc: u64,
    ) -> Result<SmartCard> {
        let x = server.secrets().int("X")?.clone();
        let j = self.j(env, &x, &id.to_int(), counter, sc);
        let record = Self::rid_layout().pack(&[id.to_int(), counter.into(), sc.into()])?;
        let rid = env.sym_encrypt(&x.to_bytes_be(), &record)?;
        let acct = server.account_mut(id).expect("account exists");
        acct.counter = counter;
        acct.card_number = Some(sc);
        acct.rid = Some(rid);
        let l = j ^ Self::h_pw(env, pw);
        let slots = Slots::new()
            .with("ID", id.to_int())
            .with("SC", sc)
            .with("N", counter)
            .with("L", l)
            .with("n", self.keys.n.clone())
            .with("e", self.keys.e.clone());
        Ok(SmartCard::issue(SchemeId::Xie, slots))
    }
}

impl SchemeSuite for Xie {
    fn id(&self) -> SchemeId {
        SchemeId::Xie
    }

    fn meta(&self) -> SuiteMeta {
        SuiteMeta {
            defines_session_key: true,
            uses_timestamps: true,
            online_password_change: false,
            supports_revocation: true,
            messages: 2,
        }
    }

    fn public_params(&self) -> Slots {
        Slots::new().with("n", self.keys.n.clone()).with("e", self.keys.e.clone())
    }

    fn new_server(&self) -> ServerState {
        ServerState::new(SchemeId::Xie, Slots::new().with("X", self.keys.d.clone()))
    }

    fn card_slots(&self) -> &'static [&'static str] {
        &["ID", "L", "N", "SC", "e", "n"]
    }

    fn register(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard> {
        server.insert_account(Account::new(id.clone()))?;
        let sc = Self::new_card_number(env, None);
        self.issue(env, server, id, pw, 0, sc)
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
        let (id, counter, sc) = (c.int("ID")?.clone(), c.int("N")?.clone(), c.int("SC")?.clone());
        let j = c.int("L")? ^ Self::h_pw(env, pw);
        let a = env.nonce(EXPONENT_NONCE_BITS);
        let big_a = env.exp(&(&j % &n), &a, &n);
        let t_u = env.now();
        let c_1 = Self::c_1(env, t_u, &j, &big_a);
        let aid = seal(env, &self.aid_layout(), &[id, counter, sc, c_1.clone()], &e, &n)?;
        let aid_a = env.rsa(&big_a, &e, &n)?;
        let payload = Payload::new().with("AID", aid).with("AID_A", aid_a).with("T_u", t_u);
        Ok((payload, Slots::new().with("a", a).with("C_1", c_1).with("T_u", t_u)))
    }

    fn server_respond(&self, env: &mut Env<'_>, server: &mut ServerState, m1: &Message) -> Step<(Payload, Slots)> {
        let n = &self.keys.n;
        let t_u = m1.u64("T_u")?;
        check(env.is_fresh(t_u), "T_u")?;
        let x = server.secrets().int("X")?.clone();
        let pt = unseal(env, &self.aid_layout(), m1.int("AID")?, &x, n).map_err(|_| Halt::reject("ID"))?;
        let big_a = env.rsa(m1.int("AID_A")?, &x, n).map_err(|_| Halt::reject("C_1"))?;
        let (id, counter, sc, c_1) = (field(&pt, "ID"), field(&pt, "N"), field(&pt, "SC"), field(&pt, "C_1"));
        let ident = super::identity_of(&id).filter(|i| server.is_registered(i));
        let Some(ident) = ident else { return Err(Halt::reject("ID")) };
        let rid = server.account(&ident).and_then(|a| a.rid.clone()).ok_or_else(|| Halt::reject("SC"))?;
        let record = env.sym_decrypt(&x.to_bytes_be(), &rid)?;
        let matches =
            record.get("ID") == Some(&id) && record.get("N") == Some(&counter) && record.get("SC") == Some(&sc);
        check(matches, "SC")?;
        let (counter, sc) = (u64::try_from(&counter).expect("16-bit"), u64::try_from(&sc).expect("16-bit"));
        let j = self.j(env, &x, &id, counter, sc);
        check(Self::c_1(env, t_u, &j, &big_a) == c_1, "C_1")?;
        let b = env.nonce(EXPONENT_NONCE_BITS);
        let big_b = env.exp(&j, &b, n);
        let c = env.exp(&big_a, &b, n);
        let t_s = env.now();
        let c_2 = env.h(&[(&c_1).into(), (&c).into(), t_s.into(), (&big_b).into()]);
        let sk = env.h(&[t_u.into(), (&c).into(), t_s.into()]);
        let payload = Payload::new().with("C_2", c_2).with("T_s", t_s).with("B", big_b);
        Ok((payload, Slots::new().with("b", b).with("sk", sk)))
    }

    fn user_finalize(&self, env: &mut Env<'_>, _card: &SmartCard, s: &Slots, m2: &Message) -> Step<UserFinal> {
        let t_s = m2.u64("T_s")?;
        check(env.is_fresh(t_s), "T_s")?;
        let big_b = m2.int("B")?;
        let c = env.exp(big_b, s.int("a")?, &self.keys.n);
        let c_2 = env.h(&[s.int("C_1")?.into(), (&c).into(), t_s.into(), big_b.into()]);
        check(c_2.as_bytes() == m2.bytes("C_2")?, "C_2")?;
        let sk = env.h(&[s.u64("T_u")?.into(), (&c).into(), t_s.into()]);
        Ok(UserFinal { reply: None, key: Some(sk.into_bytes()) })
    }

    fn server_finalize(
        &self,
        _env: &mut Env<'_>,
        _server: &mut ServerState,
        s: &Slots,
        m3: Option<&Message>,
    ) -> Step<Option<Vec<u8>>> {
        if m3.is_some() {
            return Err(Halt::Abort("unexpected third message".into()));
        }
        Ok(Some(s.bytes("sk")?.to_vec()))
    }

    fn change_password(&self, env: &mut Env<'_>, card: &mut SmartCard, old: &Password, new: &Password) -> Result<()> {
        let l = card.slots().int("L")?.clone();
        let l_new = l ^ Self::h_pw(env, old) ^ Self::h_pw(env, new);
        card.slots_mut().set("L", l_new);
        Ok(())
    }

    fn revoke(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard> {
        let acct = server.account(id).ok_or_else(|| Error::UnknownIdentity(id.to_string()))?;
        let counter = acct.counter + 1;
        let old_sc = acct.card_number;
        let sc = Self::new_card_number(env, old_sc);
        self.issue(env, server, id, pw, counter, sc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::{Action, AdversaryScript, SessionOutcome};
    use crate::schemes::testing::{alice, wrong_pw, Rig};

    #[test]
    fn honest_run_agrees_on_sk() {
        for seed in 0..5 {
            let (outcome, _) = Rig::new(SchemeId::Xie, seed).honest();
            assert_eq!(outcome.keys_match(), Some(true));
        }
    }

    #[test]
    fn wrong_password_fails_at_c1() {
        let mut rig = Rig::new(SchemeId::Xie, 1);
        let (id, _) = alice();
        assert_eq!(rig.login(&id, &wrong_pw()).0, SessionOutcome::ServerReject { step: "C_1".into() });
    }

    #[test]
    fn refreshed_replay_fails_at_c1() {
        let mut rig = Rig::new(SchemeId::Xie, 2);
        rig.honest();
        rig.sim.clock_mut().advance(100);
        let script = vec![Action::Replay { source: 0, refresh: Some("T_u".into()) }];
        rig.adversary.set_script(AdversaryScript::new(script));
        assert_eq!(rig.honest().0, SessionOutcome::ServerReject { step: "C_1".into() });
    }

    #[test]
    fn revocation_issues_a_new_card_number() {
        let mut rig = Rig::new(SchemeId::Xie, 3);
        let (id, pw) = alice();
        let old_sc = rig.card.slots().u64("SC").unwrap();
        let card = rig.sim.run_revocation(rig.suite.as_ref(), &mut rig.server, &id, &pw).unwrap();
        let acct = rig.server.account(&id).unwrap();
        assert_eq!(acct.counter, 1);
        assert_ne!(card.slots().u64("SC").unwrap(), old_sc);
        assert_eq!(rig.login(&id, &pw).0, SessionOutcome::ServerReject { step: "SC".into() });
        rig.card = card;
        assert!(rig.login(&id, &pw).0.is_success());
    }
}
