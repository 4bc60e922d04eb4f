//! RSA-based dynamic-ID scheme with timestamps. The RSA modulus lives on the
//! card under the name `N`.

use num_bigint::BigUint;

use crate::crypto::{Digest, PackLayout, RsaKeys};
use crate::framework::{
    check, Account, Env, Fields, Halt, Identity, Message, Password, Payload, SchemeId, SchemeSuite, ServerState, Slots,
    SmartCard, Step, SuiteMeta, UserFinal,
};
use crate::{Error, Result};

use super::{field, seal, unseal, HASH_FIELD_BITS, ID_BITS, NONCE_BITS};

#[derive(Debug, Clone)]
pub struct Lin {
    keys: RsaKeys,
}

pub fn build_lin(keys: RsaKeys) -> Result<Lin> {
    keys.validate()?;
    let s = Lin { keys };
    s.layout().pack(&vec![BigUint::default(); 3])?.encode_below(&s.keys.n)?;
    Ok(s)
}

impl Lin {
    fn layout(&self) -> PackLayout {
        PackLayout::new(&[("CID", HASH_FIELD_BITS), ("k", NONCE_BITS), ("ID", ID_BITS)])
    }

    /// `h(PW xor t)`.
    fn w(env: &mut Env<'_>, pw: &Password, t: &BigUint) -> Digest {
        env.h(&[(&(pw.to_int() ^ t)).into()])
    }

    /// `h(H xor k)`, cut to the packed width.
    fn cid(env: &mut Env<'_>, h: &Digest, k: &BigUint) -> BigUint {
        env.h_trunc(HASH_FIELD_BITS, &[(&(h.to_int() ^ k)).into()])
    }

    fn lambda(env: &mut Env<'_>, h: &Digest, cid: &BigUint, r: &[u8], t1: u64, t2: u64) -> Digest {
        env.h(&[h.into(), cid.into(), r.into(), t1.into(), t2.into()])
    }

    fn verifier(env: &mut Env<'_>, lambda: &Digest, h: &Digest, t1: u64, t2: u64) -> Digest {
        env.h(&[lambda.into(), h.into(), t1.into(), t2.into()])
    }
}

impl SchemeSuite for Lin {
    fn id(&self) -> SchemeId {
        SchemeId::Lin
    }

    fn meta(&self) -> SuiteMeta {
        SuiteMeta {
            defines_session_key: true,
            uses_timestamps: true,
            online_password_change: false,
            supports_revocation: false,
            messages: 2,
        }
    }

    fn public_params(&self) -> Slots {
        Slots::new().with("N", self.keys.n.clone()).with("e", self.keys.e.clone())
    }

    fn new_server(&self) -> ServerState {
        ServerState::new(SchemeId::Lin, Slots::new().with("d", self.keys.d.clone()))
    }

    fn card_slots(&self) -> &'static [&'static str] {
        &["N", "e", "t", "v"]
    }

    fn register(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard> {
        if server.is_registered(id) {
            return Err(Error::DuplicateIdentity(id.to_string()));
        }
        let t = env.nonce_range(&BigUint::default(), &self.keys.n);
        let w = Self::w(env, pw, &t);
        let d = server.secrets().int("d")?.clone();
        let v = w.xor(&env.h(&[(&(d ^ id.to_int())).into()]));
        server.insert_account(Account::new(id.clone()))?;
        let slots =
            Slots::new().with("N", self.keys.n.clone()).with("v", v).with("e", self.keys.e.clone()).with("t", t);
        Ok(SmartCard::issue(SchemeId::Lin, slots))
    }

    fn login_begin(
        &self,
        env: &mut Env<'_>,
        card: &mut SmartCard,
        id: &Identity,
        pw: &Password,
    ) -> Result<(Payload, Slots)> {
        let c = card.slots();
        let (n, e) = (c.int("N")?.clone(), c.int("e")?.clone());
        let (v, t) = (c.digest("v")?, c.int("t")?.clone());
        let id = id.to_int();
        let k = env.nonce(NONCE_BITS.into());
        let h = v.xor(&Self::w(env, pw, &t));
        let cid = Self::cid(env, &h, &k);
        let t1 = env.now();
        let r = env.h(&[(&cid).into(), (&k).into(), (&id).into(), t1.into()]);
        let x = seal(env, &self.layout(), &[cid.clone(), k.clone(), id], &e, &n)?;
        let payload = Payload::new().with("X", x).with("R", r.clone()).with("T_1", t1);
        let session = Slots::new().with("H", h).with("CID", cid).with("k", k).with("R", r).with("T_1", t1);
        Ok((payload, session))
    }

    fn server_respond(&self, env: &mut Env<'_>, server: &mut ServerState, m1: &Message) -> Step<(Payload, Slots)> {
        let t1 = m1.u64("T_1")?;
        check(env.is_fresh(t1), "T_1")?;
        let d = server.secrets().int("d")?.clone();
        let pt = unseal(env, &self.layout(), m1.int("X")?, &d, &self.keys.n).map_err(|_| Halt::reject("CID"))?;
        let (cid, k, id) = (field(&pt, "CID"), field(&pt, "k"), field(&pt, "ID"));
        let h = env.h(&[(&(&d ^ &id)).into()]);
        let cid_expect = Self::cid(env, &h, &k);
        check(cid == cid_expect, "CID")?;
        let r_expect = env.h(&[(&cid_expect).into(), (&k).into(), (&id).into(), t1.into()]);
        let r = m1.bytes("R")?;
        check(r_expect.as_bytes() == r, "R")?;
        let t2 = env.now();
        let lambda = Self::lambda(env, &h, &cid, r, t1, t2);
        let v = Self::verifier(env, &lambda, &h, t1, t2);
        let payload = Payload::new().with("V", v).with("T_2", t2);
        Ok((payload, Slots::new().with("ID", id).with("k", k).with("lambda", lambda)))
    }

    fn user_finalize(&self, env: &mut Env<'_>, _card: &SmartCard, s: &Slots, m2: &Message) -> Step<UserFinal> {
        // Receive time minus T_2, within the window.
        let t2 = m2.u64("T_2")?;
        check(env.is_fresh(t2), "T_2")?;
        let h = s.digest("H")?;
        let r = s.digest("R")?;
        let t1 = s.u64("T_1")?;
        let lambda = Self::lambda(env, &h, s.int("CID")?, r.as_bytes(), t1, t2);
        let v = Self::verifier(env, &lambda, &h, t1, t2);
        check(v.as_bytes() == m2.bytes("V")?, "V")?;
        Ok(UserFinal { reply: None, key: Some(lambda.into_bytes()) })
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
        Ok(Some(s.bytes("lambda")?.to_vec()))
    }

    fn change_password(&self, env: &mut Env<'_>, card: &mut SmartCard, old: &Password, new: &Password) -> Result<()> {
        let t = card.slots().int("t")?.clone();
        let v = card.slots().digest("v")?;
        let v_new = v.xor(&Self::w(env, old, &t)).xor(&Self::w(env, new, &t));
        card.slots_mut().set("v", v_new);
        Ok(())
    }
}
