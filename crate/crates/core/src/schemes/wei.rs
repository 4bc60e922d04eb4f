//! Discrete-log scheme over the order-`q` subgroup of `Z_p^*`, `p = 2q + 1`.
//!
//! Hash outputs that enter arithmetic are reduced modulo `p`; division by
//! `h(ID^x)` is multiplication by its inverse.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::crypto::DhParams;
use crate::framework::{
    check, Account, Env, Fields, Halt, Identity, Message, Password, Payload, SchemeId, SchemeSuite, ServerState, Slots,
    SmartCard, Step, SuiteMeta, UserFinal,
};
use crate::{Error, Result};

use super::NONCE_BITS;

#[derive(Debug, Clone)]
pub struct Wei {
    params: DhParams,
    x: BigUint,
}

/// `x` is the server master key in `[1, q)`.
pub fn build_wei(params: DhParams, x: BigUint) -> Result<Wei> {
    params.validate()?;
    if x.is_zero() || x >= params.q {
        return Err(Error::InvalidInput("master key must lie in [1, q)".into()));
    }
    Ok(Wei { params, x })
}

impl Wei {
    pub fn params(&self) -> &DhParams {
        &self.params
    }

    /// `h(ID^x) mod p`.
    fn h_id(&self, env: &mut Env<'_>, id: &BigUint, x: &BigUint) -> BigUint {
        let p = &self.params.p;
        let idx = env.exp(id, x, p);
        env.h_mod(p, &[(&idx).into()])
    }

    /// `h(W) mod p` with `W = h(PW || N)`.
    fn h_w(&self, env: &mut Env<'_>, pw: &Password, n: &BigUint) -> BigUint {
        let w = env.h(&[pw.as_bytes().into(), n.into()]);
        env.h_mod(&self.params.p, &[(&w).into()])
    }
}

impl SchemeSuite for Wei {
    fn id(&self) -> SchemeId {
        SchemeId::Wei
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
        Slots::new().with("p", self.params.p.clone()).with("q", self.params.q.clone()).with("g", self.params.g.clone())
    }

    fn new_server(&self) -> ServerState {
        ServerState::new(SchemeId::Wei, Slots::new().with("x", self.x.clone()))
    }

    fn card_slots(&self) -> &'static [&'static str] {
        &["B", "ID", "N", "g", "p"]
    }

    fn register(&self, env: &mut Env<'_>, server: &mut ServerState, id: &Identity, pw: &Password) -> Result<SmartCard> {
        if server.is_registered(id) {
            return Err(Error::DuplicateIdentity(id.to_string()));
        }
        let p = &self.params.p;
        let n = env.nonce(NONCE_BITS.into());
        let hw = self.h_w(env, pw, &n);
        let x = server.secrets().int("x")?.clone();
        let hid = self.h_id(env, &id.to_int(), &x);
        if hid.is_zero() {
            return Err(Error::InvalidInput(format!("h(ID^x) = 0 mod p for identity {id}")));
        }
        let b = (hid + hw) % p;
        server.insert_account(Account::new(id.clone()))?;
        let slots = Slots::new()
            .with("g", self.params.g.clone())
            .with("p", p.clone())
            .with("ID", id.to_int())
            .with("B", b)
            .with("N", n);
        Ok(SmartCard::issue(SchemeId::Wei, slots))
    }

    fn login_begin(
        &self,
        env: &mut Env<'_>,
        card: &mut SmartCard,
        _id: &Identity,
        pw: &Password,
    ) -> Result<(Payload, Slots)> {
        let c = card.slots();
        let (p, g) = (c.int("p")?.clone(), c.int("g")?.clone());
        let id = c.int("ID")?.clone();
        let b = c.int("B")?.clone();
        let n = c.int("N")?.clone();
        let q = (&p - 1u32) >> 1;
        let r_u = env.nonce_range(&BigUint::from(1u32), &q);
        let a = env.exp(&g, &r_u, &p);
        let hw = self.h_w(env, pw, &n);
        let b_prime = (b + &p - hw) % &p * &a % &p;
        let h_1 = env.h(&[(&a).into(), (&b_prime).into(), (&id).into()]);
        let payload = Payload::new().with("ID", id.clone()).with("B'", b_prime.clone()).with("h_1", h_1);
        let session = Slots::new().with("r_U", r_u).with("A", a).with("B'", b_prime).with("ID", id);
        Ok((payload, session))
    }

    fn server_respond(&self, env: &mut Env<'_>, server: &mut ServerState, m1: &Message) -> Step<(Payload, Slots)> {
        let p = &self.params.p;
        let id = m1.int("ID")?.clone();
        let known = super::identity_of(&id).is_some_and(|i| server.is_registered(&i));
        check(known, "ID")?;
        let x = server.secrets().int("x")?.clone();
        let hid = self.h_id(env, &id, &x);
        let inv = crate::crypto::mod_inv(&hid, p)?;
        let b_prime = m1.int("B'")? % p;
        let a_prime = &b_prime * inv % p;
        let expect = env.h(&[(&a_prime).into(), (&b_prime).into(), (&id).into()]);
        check(expect.as_bytes() == m1.bytes("h_1")?, "h_1")?;
        let r_s = env.nonce(NONCE_BITS.into());
        let sk = env.h(&[(&id).into(), (&a_prime).into(), (&b_prime).into(), (&r_s).into()]);
        let h_2 = env.h(&[(&sk).into(), (&r_s).into()]);
        let payload = Payload::new().with("h_2", h_2).with("r_S", r_s.clone());
        let session = Slots::new().with("ID", id).with("A'", a_prime).with("r_S", r_s).with("sk", sk);
        Ok((payload, session))
    }

    fn user_finalize(&self, env: &mut Env<'_>, _card: &SmartCard, s: &Slots, m2: &Message) -> Step<UserFinal> {
        let (id, a, b_prime) = (s.int("ID")?, s.int("A")?, s.int("B'")?);
        let r_s = m2.int("r_S")?;
        let sk = env.h(&[id.into(), a.into(), b_prime.into(), r_s.into()]);
        let expect = env.h(&[(&sk).into(), r_s.into()]);
        check(expect.as_bytes() == m2.bytes("h_2")?, "h_2")?;
        let h_3 = env.h(&[id.into(), (&sk).into()]);
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
        let sk = s.digest("sk")?;
        let expect = env.h(&[s.int("ID")?.into(), (&sk).into()]);
        check(expect.as_bytes() == m3.bytes("h_3")?, "h_3")?;
        Ok(Some(sk.into_bytes()))
    }

    fn change_password(&self, env: &mut Env<'_>, card: &mut SmartCard, old: &Password, new: &Password) -> Result<()> {
        let p = self.params.p.clone();
        let n = card.slots().int("N")?.clone();
        let b = card.slots().int("B")?.clone();
        let hw = self.h_w(env, old, &n);
        let hw_new = self.h_w(env, new, &n);
        card.slots_mut().set("B", (b + &p - hw + hw_new) % &p);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{mod_exp, HashFn};
    use crate::framework::{Action, AdversaryScript, SessionOutcome, Simulation, Transform};
    use crate::schemes::testing::{alice, wrong_pw, Rig};

    fn hp(args: &[crate::crypto::HashArg<'_>], p: &BigUint) -> BigUint {
        HashFn::default().hash(args).to_int() % p
    }

    #[test]
    fn toy_group_registration_matches_equation() {
        let suite = build_wei(DhParams::toy(), 7u32.into()).unwrap();
        let mut server = suite.new_server();
        let mut sim = Simulation::new(3);
        let p = BigUint::from(23u32);
        let pw = Password::new(b"pw".to_vec()).unwrap();
        // pick identities whose h(ID^7) is invertible mod 23
        let mut done = 0;
        for raw in 1u16..200 {
            let id = Identity::from_u16(raw);
            let idx = mod_exp(&id.to_int(), &7u32.into(), &p);
            let hid = hp(&[(&idx).into()], &p);
            let res = sim.run_registration(&suite, &mut server, &id, &pw);
            if hid.is_zero() {
                assert!(res.is_err());
                continue;
            }
            let card = res.unwrap();
            let n = card.slots().int("N").unwrap();
            let w = HashFn::default().hash(&[pw.as_bytes().into(), n.into()]);
            let expect = (hid + hp(&[(&w).into()], &p)) % &p;
            assert_eq!(card.slots().int("B").unwrap(), &expect);
            done += 1;
        }
        assert!(done > 150);
    }

    #[test]
    fn honest_run_agrees_on_key() {
        for seed in 0..5 {
            let (outcome, tr) = Rig::new(SchemeId::Wei, seed).honest();
            assert_eq!(outcome.keys_match(), Some(true), "seed {seed}: {outcome}");
            assert_eq!(tr.messages.len(), 3);
        }
    }

    #[test]
    fn wrong_password_is_rejected_at_h1() {
        let mut rig = Rig::new(SchemeId::Wei, 1);
        let (id, _) = alice();
        let (outcome, _) = rig.login(&id, &wrong_pw());
        assert_eq!(outcome, SessionOutcome::ServerReject { step: "h_1".into() });
    }

    #[test]
    fn scaled_b_prime_is_rejected_at_h1() {
        let mut rig = Rig::new(SchemeId::Wei, 2);
        let t = Transform::MulMod { factor: 5u32.into(), modulus: "p".into() };
        rig.adversary.set_script(AdversaryScript::new(vec![Action::Replace { field: "B'".into(), transform: t }]));
        let (outcome, _) = rig.honest();
        assert_eq!(outcome, SessionOutcome::ServerReject { step: "h_1".into() });
    }

    #[test]
    fn duplicate_registration_is_refused() {
        let mut rig = Rig::new(SchemeId::Wei, 4);
        let (id, pw) = alice();
        let err = rig.sim.run_registration(rig.suite.as_ref(), &mut rig.server, &id, &pw).unwrap_err();
        assert!(matches!(err, Error::DuplicateIdentity(_)));
    }
}
