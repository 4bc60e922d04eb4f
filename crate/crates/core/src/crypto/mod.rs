//! Number-theoretic and symbolic primitives shared by the schemes.
//!
//! Everything here is a pure function of its inputs. Sizes are desk scale: the
//! default moduli are a few hundred bits and the elliptic curve is a 19-point
//! textbook group. None of it is meant to protect anything.

mod ec;
mod hash;
mod modular;
mod pack;
mod rabin;
mod rsa;
mod sym;

pub use ec::{ec_add, ec_mul, EcParams, Point};
pub use hash::{hash_to_int, Digest, HashArg, HashFn, DEFAULT_DIGEST_WIDTH};
pub use modular::{
    gen_prime, gen_safe_prime, is_probable_prime, mod_exp, mod_inv, random_below, random_bits, random_range, DhParams,
};
pub use pack::{PackLayout, PackedField, PackedPlaintext, PACK_HEADROOM_BITS};
pub use rabin::{rabin_keygen, rabin_roots, rabin_square, RabinKeys};
pub use rsa::{rsa_apply, rsa_keygen, RsaKeys};
pub use sym::{sym_decrypt, sym_encrypt, SYM_TAG_LEN};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("value is not invertible modulo the given modulus")]
    NotInvertible,
    #[error("input is not below the modulus")]
    OutOfRange,
    #[error("value has no square root modulo the secret primes")]
    NonResidue,
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("ciphertext failed its integrity check")]
    DecryptFailure,
    #[error("packed fields do not fit: {0}")]
    PackingOverflow(String),
    #[error("more than one square root decodes to a valid plaintext")]
    DecodeAmbiguous,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
