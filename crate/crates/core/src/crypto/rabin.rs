use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::modular::{gen_prime, is_probable_prime, mod_inv};
use super::CryptoError;

/// Rabin moduli with both primes congruent to 3 mod 4.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RabinKeys {
    pub n: BigUint,
    pub p: BigUint,
    pub q: BigUint,
}

impl RabinKeys {
    pub fn new(p: BigUint, q: BigUint) -> Result<Self, CryptoError> {
        let keys = RabinKeys { n: &p * &q, p, q };
        keys.validate()?;
        Ok(keys)
    }

    pub fn validate(&self) -> Result<(), CryptoError> {
        let three = BigUint::from(3u32);
        if self.n != &self.p * &self.q || self.p == self.q {
            return Err(CryptoError::InvalidParams("n must be a product of two distinct primes".into()));
        }
        if &self.p % 4u32 != three || &self.q % 4u32 != three {
            return Err(CryptoError::InvalidParams("p and q must be 3 mod 4".into()));
        }
        if !is_probable_prime(&self.p) || !is_probable_prime(&self.q) {
            return Err(CryptoError::InvalidParams("p or q is not prime".into()));
        }
        Ok(())
    }
}

pub fn rabin_keygen<R: RngCore + ?Sized>(rng: &mut R, prime_bits: u64) -> RabinKeys {
    let three_mod_4 = |c: &BigUint| c % 4u32 == BigUint::from(3u32);
    let p = gen_prime(rng, prime_bits, three_mod_4);
    let q = gen_prime(rng, prime_bits, |c| three_mod_4(c) && *c != p);
    RabinKeys { n: &p * &q, p, q }
}

pub fn rabin_square(m: &BigUint, n: &BigUint) -> BigUint {
    (m * m) % n
}

/// All square roots of `c` modulo `n = pq`, ascending.
///
/// Per-prime roots come from `c^((p+1)/4)`, then the four sign combinations are
/// joined by CRT. When `c` shares a factor with `n` some roots coincide and
/// fewer than four distinct values come back.
pub fn rabin_roots(c: &BigUint, keys: &RabinKeys) -> Result<Vec<BigUint>, CryptoError> {
    let (p, q, n) = (&keys.p, &keys.q, &keys.n);
    let rp = sqrt_3_mod_4(c, p)?;
    let rq = sqrt_3_mod_4(c, q)?;
    // yp = q^-1 mod p, yq = p^-1 mod q
    let yp = mod_inv(q, p)?;
    let yq = mod_inv(p, q)?;
    let crt = |a: &BigUint, b: &BigUint| (a * q * &yp + b * p * &yq) % n;
    let neg = |v: &BigUint, m: &BigUint| if v.is_zero() { v.clone() } else { m - v };
    let mut roots =
        vec![crt(&rp, &rq), crt(&neg(&rp, p), &rq), crt(&rp, &neg(&rq, q)), crt(&neg(&rp, p), &neg(&rq, q))];
    roots.sort();
    roots.dedup();
    Ok(roots)
}

fn sqrt_3_mod_4(c: &BigUint, p: &BigUint) -> Result<BigUint, CryptoError> {
    let c = c % p;
    let exp = (p + BigUint::one()) >> 2;
    let r = c.modpow(&exp, p);
    if (&r * &r) % p != c {
        return Err(CryptoError::NonResidue);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn toy() -> RabinKeys {
        RabinKeys::new(big(7), big(11)).unwrap()
    }

    // oracle: every x in Z_77 whose square is c
    fn brute_roots(c: u64) -> Vec<u64> {
        (0..77u64).filter(|x| x * x % 77 == c).collect()
    }

    #[test]
    fn roots_of_four() {
        assert_eq!(brute_roots(4), vec![2, 9, 68, 75]);
        let roots = rabin_roots(&big(4), &toy()).unwrap();
        assert_eq!(roots, vec![big(2), big(9), big(68), big(75)]);
        for r in &roots {
            assert_eq!(rabin_square(r, &big(77)), big(4));
        }
    }

    #[test]
    fn five_is_a_non_residue() {
        assert!(brute_roots(5).is_empty());
        assert_eq!(rabin_roots(&big(5), &toy()), Err(CryptoError::NonResidue));
    }

    #[test]
    fn rejects_bad_primes() {
        assert!(RabinKeys::new(big(5), big(11)).is_err());
        assert!(RabinKeys::new(big(7), big(7)).is_err());
    }

    #[test]
    fn keygen_primes_are_3_mod_4() {
        let k = rabin_keygen(&mut ChaCha20Rng::seed_from_u64(2), 80);
        k.validate().unwrap();
    }
}
