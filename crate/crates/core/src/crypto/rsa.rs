use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::modular::{gen_prime, is_probable_prime, mod_inv};
use super::CryptoError;

/// Textbook RSA key material. `d` is the server's master secret in the RSA
/// based schemes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsaKeys {
    pub n: BigUint,
    pub e: BigUint,
    pub d: BigUint,
    pub p: BigUint,
    pub q: BigUint,
}

impl RsaKeys {
    pub fn new(p: BigUint, q: BigUint, e: BigUint, d: BigUint) -> Result<Self, CryptoError> {
        let keys = RsaKeys { n: &p * &q, e, d, p, q };
        keys.validate()?;
        Ok(keys)
    }

    pub fn phi(&self) -> BigUint {
        (&self.p - 1u32) * (&self.q - 1u32)
    }

    pub fn validate(&self) -> Result<(), CryptoError> {
        if self.n != &self.p * &self.q {
            return Err(CryptoError::InvalidParams("n != p*q".into()));
        }
        let phi = self.phi();
        if !self.e.gcd(&phi).is_one() {
            return Err(CryptoError::InvalidParams("gcd(e, phi) != 1".into()));
        }
        if !((&self.e * &self.d) % &phi).is_one() {
            return Err(CryptoError::InvalidParams("e*d != 1 mod phi".into()));
        }
        Ok(())
    }

    pub fn modulus_bits(&self) -> u64 {
        self.n.bits()
    }
}

/// Two distinct `prime_bits`-bit primes, public exponent 65537 when coprime to
/// phi, otherwise the smallest prime that is.
pub fn rsa_keygen<R: RngCore + ?Sized>(rng: &mut R, prime_bits: u64) -> RsaKeys {
    assert!(prime_bits >= 4, "prime_bits must be at least 4");
    loop {
        let p = gen_prime(rng, prime_bits, |_| true);
        let q = gen_prime(rng, prime_bits, |c| *c != p);
        let phi = (&p - 1u32) * (&q - 1u32);
        let Some(e) = pick_exponent(&phi) else { continue };
        let d = mod_inv(&e, &phi).expect("e is coprime to phi");
        return RsaKeys { n: &p * &q, e, d, p, q };
    }
}

fn pick_exponent(phi: &BigUint) -> Option<BigUint> {
    let f4 = BigUint::from(65537u32);
    if f4.gcd(phi).is_one() {
        return Some(f4);
    }
    (3u32..1000).map(BigUint::from).filter(is_probable_prime).find(|e| e.gcd(phi).is_one() && e < phi)
}

/// `x^exponent mod n`, refusing inputs outside `[0, n)`.
pub fn rsa_apply(x: &BigUint, exponent: &BigUint, n: &BigUint) -> Result<BigUint, CryptoError> {
    if x >= n {
        return Err(CryptoError::OutOfRange);
    }
    Ok(x.modpow(exponent, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn toy_triple_is_valid() {
        // 3 * 27 = 81 = 2*40 + 1
        let keys = RsaKeys::new(big(5), big(11), big(3), big(27)).unwrap();
        assert_eq!(keys.n, big(55));
        assert!(RsaKeys::new(big(5), big(11), big(3), big(26)).is_err());
    }

    #[test]
    fn toy_examples() {
        let n = big(55);
        assert_eq!(rsa_apply(&big(2), &big(3), &n).unwrap(), big(8));
        assert_eq!(rsa_apply(&big(8), &big(27), &n).unwrap(), big(2));
        assert_eq!(rsa_apply(&big(0), &big(3), &n).unwrap(), big(0));
        assert_eq!(rsa_apply(&big(55), &big(3), &n), Err(CryptoError::OutOfRange));
    }

    #[test]
    fn keygen_is_seeded_and_valid() {
        let a = rsa_keygen(&mut ChaCha20Rng::seed_from_u64(0), 4);
        let b = rsa_keygen(&mut ChaCha20Rng::seed_from_u64(0), 4);
        assert_eq!(a, b);
        a.validate().unwrap();
        let k = rsa_keygen(&mut ChaCha20Rng::seed_from_u64(3), 96);
        k.validate().unwrap();
        assert!(k.modulus_bits() >= 191);
    }
}
