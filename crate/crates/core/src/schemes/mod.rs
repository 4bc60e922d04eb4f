//! The seven scheme suites.
//!
//! Each suite binds the framework's phase slots to one scheme's equations.
//! Concatenations under an exponent go through [`PackLayout`]s with fixed
//! widths (identity 16 bits, counters and card numbers 16, nonces 32, hash
//! fields truncated to 32), so moduli of 160 bits and up always fit.

mod cao_zhai;
mod lee_liu;
mod lin;
mod wei;
mod xie;
mod xu;
mod zhu;

pub use cao_zhai::{build_cao_zhai, CaoZhai};
pub use lee_liu::{build_lee_liu, LeeLiu};
pub use lin::{build_lin, Lin};
pub use wei::{build_wei, Wei};
pub use xie::{build_xie, Xie};
pub use xu::{build_xu, Xu};
pub use zhu::{build_zhu, Zhu};

use num_bigint::BigUint;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::crypto::{self, DhParams, EcParams, PackLayout, PackedPlaintext};
use crate::framework::{Env, Identity, SchemeId, SchemeSuite};
use crate::Result;

pub const ID_BITS: u32 = 16;
pub const COUNTER_BITS: u32 = 16;
pub const CARD_NUMBER_BITS: u32 = 16;
pub const NONCE_BITS: u32 = 32;
pub const HASH_FIELD_BITS: u32 = 32;

/// Prime size for RSA and Rabin moduli; `n` comes out near 192 bits.
pub const MODULUS_PRIME_BITS: u64 = 96;
/// Size of the safe prime `p = 2q + 1` for the discrete-log scheme.
pub const DH_GROUP_BITS: u64 = 64;

/// Builds `id` with fresh parameters drawn from `rng`.
pub fn deploy<R: RngCore + ?Sized>(id: SchemeId, rng: &mut R) -> Result<Box<dyn SchemeSuite>> {
    Ok(match id {
        SchemeId::Wei => {
            let params = DhParams::generate(rng, DH_GROUP_BITS);
            let x = crypto::random_range(rng, &BigUint::from(1u32), &params.q);
            Box::new(build_wei(params, x)?)
        }
        SchemeId::Zhu => Box::new(build_zhu(crypto::rsa_keygen(rng, MODULUS_PRIME_BITS))?),
        SchemeId::LeeLiu => Box::new(build_lee_liu(crypto::rsa_keygen(rng, MODULUS_PRIME_BITS))?),
        SchemeId::Lin => Box::new(build_lin(crypto::rsa_keygen(rng, MODULUS_PRIME_BITS))?),
        SchemeId::CaoZhai => Box::new(build_cao_zhai(crypto::rabin_keygen(rng, MODULUS_PRIME_BITS))?),
        SchemeId::Xie => Box::new(build_xie(crypto::rsa_keygen(rng, MODULUS_PRIME_BITS))?),
        SchemeId::Xu => {
            let params = EcParams::toy();
            let s = crypto::random_range(rng, &BigUint::from(1u32), &params.order);
            Box::new(build_xu(params, s)?)
        }
    })
}

/// [`deploy`] with a generator seeded from `seed`.
pub fn deploy_seeded(id: SchemeId, seed: u64) -> Result<Box<dyn SchemeSuite>> {
    deploy(id, &mut ChaCha20Rng::seed_from_u64(seed))
}

/// `pack(values)^e mod n`.
pub(crate) fn seal(
    env: &mut Env<'_>,
    layout: &PackLayout,
    values: &[BigUint],
    e: &BigUint,
    n: &BigUint,
) -> Result<BigUint> {
    let m = layout.pack(values)?.encode_below(n)?;
    env.rsa(&m, e, n)
}

/// `c^d mod n`, split by `layout`.
pub(crate) fn unseal(
    env: &mut Env<'_>,
    layout: &PackLayout,
    c: &BigUint,
    d: &BigUint,
    n: &BigUint,
) -> Result<PackedPlaintext> {
    let m = env.rsa(c, d, n)?;
    Ok(layout.unpack(&m)?)
}

pub(crate) fn field(pt: &PackedPlaintext, tag: &str) -> BigUint {
    pt.get(tag).cloned().unwrap_or_else(|| panic!("layout has no field {tag}"))
}

/// Recovers an identity from a decoded field; `None` if it cannot be one.
pub(crate) fn identity_of(v: &BigUint) -> Option<Identity> {
    Identity::from_int(v)
}
