use crate::framework::{
    Adversary, AdversaryScript, ChangeReport, Clock, Identity, Password, SchemeId, SchemeSuite, ServerState,
    SessionOutcome, Simulation, SmartCard, Transcript,
};
use crate::schemes::deploy_seeded;
use crate::Result;

const DEPLOY_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// The victim's registered identity.
pub fn victim_id() -> Identity {
    Identity::from_u16(0x0a11)
}

/// An identity nobody registered.
pub fn stranger_id() -> Identity {
    Identity::from_u16(0x0b22)
}

pub fn victim_password() -> Password {
    Password::new(b"victim password".to_vec()).expect("non-empty")
}

/// A plausible typo of the victim's password.
pub fn mistyped_password() -> Password {
    Password::new(b"victim passw0rd".to_vec()).expect("non-empty")
}

pub fn replacement_password() -> Password {
    Password::new(b"replacement".to_vec()).expect("non-empty")
}

/// One deployed scheme with a registered victim, a simulation and a passive
/// adversary.
pub struct Bench {
    pub suite: Box<dyn SchemeSuite>,
    pub server: ServerState,
    pub card: SmartCard,
    pub sim: Simulation,
    pub adversary: Adversary,
}

impl Bench {
    pub fn new(scheme: SchemeId, seed: u64, delta_t: u64) -> Result<Bench> {
        let suite = deploy_seeded(scheme, seed ^ DEPLOY_SALT)?;
        let mut server = suite.new_server();
        let mut sim = Simulation::with_clock(seed, Clock::new(delta_t));
        let card = sim.run_registration(suite.as_ref(), &mut server, &victim_id(), &victim_password())?;
        let adversary = Adversary::new(suite.hasher(), suite.public_params());
        Ok(Bench { suite, server, card, sim, adversary })
    }

    pub fn scheme(&self) -> SchemeId {
        self.suite.id()
    }

    pub fn login(&mut self, id: &Identity, pw: &Password) -> Result<(SessionOutcome, Transcript)> {
        self.sim.run_authentication(self.suite.as_ref(), &mut self.card, id, pw, &mut self.server, &mut self.adversary)
    }

    pub fn login_with(
        &mut self,
        script: AdversaryScript,
        id: &Identity,
        pw: &Password,
    ) -> Result<(SessionOutcome, Transcript)> {
        self.adversary.set_script(script);
        let r = self.login(id, pw);
        self.adversary.set_script(AdversaryScript::passive());
        r
    }

    pub fn honest_login(&mut self) -> Result<(SessionOutcome, Transcript)> {
        self.login(&victim_id(), &victim_password())
    }

    /// Password change with the server reachable only if the scheme needs it.
    pub fn change_password(&mut self, old: &Password, new: &Password) -> Result<ChangeReport> {
        let server = self.suite.meta().online_password_change.then_some(&mut self.server);
        self.sim.run_password_change(self.suite.as_ref(), &mut self.card, &victim_id(), old, new, server, None)
    }

    /// Password change with no server reachable.
    pub fn change_password_offline(&mut self, old: &Password, new: &Password) -> Result<ChangeReport> {
        self.sim.run_password_change(self.suite.as_ref(), &mut self.card, &victim_id(), old, new, None, None)
    }
}
