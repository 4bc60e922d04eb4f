//! Elliptic-curve key agreement with timestamps.
//!
//! `h_1` hashes one point through its affine encoding `x || y` (identity as a
//! reserved tag) under its own domain label; `CID` uses its leading 16 bits.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::crypto::{Digest, EcParams, Point};
use crate::framework::{
    check, Account, Env, Fields, Halt, Identity, Message, Password, Payload, SchemeId, SchemeSuite, ServerState, Slots,
    SmartCard, Step, SuiteMeta, UserFinal,
};
use crate::{Error, Result};

use super::{ID_BITS, NONCE_BITS};

const H1_LABEL: &[u8] = b"h_1";

#[derive(Debug, Clone)]
pub struct Xu {
    params: EcParams,
    s: BigUint,
}

/// `s` is the server scalar; the public point becomes `Y = s * P`.
pub fn build_xu(params: EcParams, s: BigUint) -> Result<Xu> {
    if s.is_zero() || s >= params.order {
        return Err(Error::InvalidInput("server scalar must lie in [1, order)".into()));
    }
    let params = params.with_server_scalar(&s)?;
    params.validate()?;
    Ok(Xu { params, s })
}

impl Xu {
    pub fn params(&self) -> &EcParams {
        &self.params
    }

    fn h_1(&self, env: &mut Env<'_>, pt: &Point) -> Digest {
        let enc = pt.to_bytes(self.params.field_bytes());
        env.h(&[H1_LABEL.into(), (&enc).into()])
    }

    /// `W = h(PW || r)`.
    fn w(env: &mut Env<'_>, pw: &Password, r: &BigUint) -> Digest {
        env.h(&[pw.as_bytes().into(), r.into()])
    }

    /// `H = h(s xor ID)`.
    fn big_h(env: &mut Env<'_>, s: &BigUint, id: &BigUint) -> Digest {
        env.h(&[(&(s ^ id)).into()])
    }

    fn scalar(&self, env: &mut Env<'_>) -> BigUint {
        env.nonce_range(&BigUint::from(1u32), &self.params.order)
    }
}

impl SchemeSuite for Xu {
    fn id(&self) -> SchemeId {
        SchemeId::Xu
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
        Slots::new()
            .with("a", self.params.a.clone())
            .with("b", self.params.b.clone())
            .with("p", self.params.p.clone())
            .with("P", self.params.base.clone())
            .with("Y", self.params.public.clone())
            .with("order", self.params.order.clone())
    }

    fn new_server(&self) -> ServerState {
        ServerState::new(SchemeId::Xu, Slots::new().with("s", self.s.clone()))
    }

    fn card_slots(&self) -> &'static [&'static str] {
        &["B", "P", "Y", "a", "b", "p", "r"]
    }

    fn register(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard> {
        if server.is_registered(id) {
            return Err(Error::DuplicateIdentity(id.to_string()));
        }
        let r = env.nonce(NONCE_BITS.into());
        let w = Self::w(env, pw, &r);
        let s = server.secrets().int("s")?.clone();
        let b = Self::big_h(env, &s, &id.to_int()).xor(&w);
        server.insert_account(Account::new(id.clone()))?;
        let slots = Slots::new()
            .with("a", self.params.a.clone())
            .with("b", self.params.b.clone())
            .with("p", self.params.p.clone())
            .with("P", self.params.base.clone())
            .with("Y", self.params.public.clone())
            .with("B", b)
            .with("r", r);
        Ok(SmartCard::issue(SchemeId::Xu, slots))
    }

    fn login_begin(
        &self,
        env: &mut Env<'_>,
        card: &mut SmartCard,
        id: &Identity,
        pw: &Password,
    ) -> Result<(Payload, Slots)> {
        let c = card.slots();
        let (b, r) = (c.digest("B")?, c.int("r")?.clone());
        let (base, y) = (c.point("P")?.clone(), c.point("Y")?.clone());
        let id = id.to_int();
        let h = b.xor(&Self::w(env, pw, &r));
        let a = self.scalar(env);
        let c_1 = env.ec_mul(&a, &base, &self.params)?;
        let c_2 = env.ec_mul(&a, &y, &self.params)?;
        let cid = &id ^ self.h_1(env, &c_2).truncate(ID_BITS);
        let t_1 = env.now();
        let f = env.h(&[(&id).into(), (&h).into(), t_1.into()]);
        let payload = Payload::new().with("C_1", c_1).with("CID", cid).with("F", f).with("T_1", t_1);
        Ok((payload, Slots::new().with("a", a).with("ID", id).with("H", h)))
    }

    fn server_respond(&self, env: &mut Env<'_>, server: &mut ServerState, m1: &Message) -> Step<(Payload, Slots)> {
        // A missing stamp is the null timestamp.
        let t_1 = m1.u64("T_1").map_err(|_| Halt::reject("T_1"))?;
        check(env.is_fresh(t_1), "T_1")?;
        let c_1 = m1.point("C_1")?.clone();
        check(self.params.contains(&c_1), "C_1")?;
        let s = server.secrets().int("s")?.clone();
        let c_2 = env.ec_mul(&s, &c_1, &self.params)?;
        let id = m1.int("CID")? ^ self.h_1(env, &c_2).truncate(ID_BITS);
        let h = Self::big_h(env, &s, &id);
        let f = env.h(&[(&id).into(), (&h).into(), t_1.into()]);
        check(f.as_bytes() == m1.bytes("F")?, "F")?;
        let c = self.scalar(env);
        let d_1 = env.ec_mul(&c, &self.params.base, &self.params)?;
        let d_2 = env.ec_mul(&c, &c_1, &self.params)?;
        let h1_d2 = self.h_1(env, &d_2);
        let sk = env.h(&[(&id).into(), (&h1_d2).into(), (&h).into()]);
        let t_2 = env.now();
        let g = env.h(&[(&sk).into(), (&h).into(), t_2.into()]);
        let payload = Payload::new().with("D_1", d_1).with("G", g).with("T_2", t_2);
        Ok((payload, Slots::new().with("c", c).with("ID'", id).with("sk", sk)))
    }

    fn user_finalize(&self, env: &mut Env<'_>, _card: &SmartCard, s: &Slots, m2: &Message) -> Step<UserFinal> {
        let t_2 = m2.u64("T_2").map_err(|_| Halt::reject("T_2"))?;
        check(env.is_fresh(t_2), "T_2")?;
        let d_1 = m2.point("D_1")?.clone();
        check(self.params.contains(&d_1), "D_1")?;
        let d_2 = env.ec_mul(s.int("a")?, &d_1, &self.params)?;
        let h = s.digest("H")?;
        let h1_d2 = self.h_1(env, &d_2);
        let sk = env.h(&[s.int("ID")?.into(), (&h1_d2).into(), (&h).into()]);
        let g = env.h(&[(&sk).into(), (&h).into(), t_2.into()]);
        check(g.as_bytes() == m2.bytes("G")?, "G")?;
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
        let (b, r) = (card.slots().digest("B")?, card.slots().int("r")?.clone());
        let h = b.xor(&Self::w(env, old, &r));
        let b_new = h.xor(&Self::w(env, new, &r));
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
    fn honest_run_agrees_on_sk() {
        for seed in 0..10 {
            let (outcome, _) = Rig::new(SchemeId::Xu, seed).honest();
            assert_eq!(outcome.keys_match(), Some(true), "seed {seed}");
        }
    }

    #[test]
    fn input_errors_fail_at_f() {
        let mut rig = Rig::new(SchemeId::Xu, 1);
        let (id, pw) = alice();
        assert_eq!(rig.login(&id, &wrong_pw()).0, SessionOutcome::ServerReject { step: "F".into() });
        assert_eq!(rig.login(&Identity::from_u16(3), &pw).0, SessionOutcome::ServerReject { step: "F".into() });
    }

    #[test]
    fn change_round_trip_is_bit_identical() {
        let mut rig = Rig::new(SchemeId::Xu, 2);
        let (id, pw) = alice();
        let before = rig.card.slots().digest("B").unwrap();
        let new = Password::new(b"fresh".to_vec()).unwrap();
        rig.sim.run_password_change(rig.suite.as_ref(), &mut rig.card, &id, &pw, &new, None, None).unwrap();
        rig.sim.run_password_change(rig.suite.as_ref(), &mut rig.card, &id, &new, &pw, None, None).unwrap();
        assert_eq!(rig.card.slots().digest("B").unwrap(), before);
    }
}
