use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::CryptoError;

/// `base^exp mod m`. Requires `m >= 2`.
pub fn mod_exp(base: &BigUint, exp: &BigUint, m: &BigUint) -> BigUint {
    assert!(*m >= BigUint::from(2u32), "modulus must be at least 2");
    base.modpow(exp, m)
}

/// Multiplicative inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn mod_inv(a: &BigUint, m: &BigUint) -> Result<BigUint, CryptoError> {
    if m.is_zero() {
        return Err(CryptoError::NotInvertible);
    }
    if m.is_one() {
        return Ok(BigUint::zero());
    }
    let m_int = BigInt::from_biguint(Sign::Plus, m.clone());
    let (mut old_r, mut r) = (BigInt::from_biguint(Sign::Plus, a % m), m_int.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        return Err(CryptoError::NotInvertible);
    }
    let inv = old_s.mod_floor(&m_int);
    Ok(inv.to_biguint().expect("mod_floor is non-negative"))
}

/// Uniform integer with at most `bits` bits.
pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    if bits == 0 {
        return BigUint::zero();
    }
    let nbytes = bits.div_ceil(8) as usize;
    let mut buf = vec![0u8; nbytes];
    rng.fill_bytes(&mut buf);
    let excess = nbytes as u64 * 8 - bits;
    buf[0] &= 0xffu8 >> excess;
    BigUint::from_bytes_be(&buf)
}

/// Uniform integer in `[0, n)` by rejection sampling. `n` must be positive.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, n: &BigUint) -> BigUint {
    assert!(!n.is_zero(), "empty range");
    let bits = n.bits();
    loop {
        let c = random_bits(rng, bits);
        if &c < n {
            return c;
        }
    }
}

/// Uniform integer in `[lo, hi)`.
pub fn random_range<R: RngCore + ?Sized>(rng: &mut R, lo: &BigUint, hi: &BigUint) -> BigUint {
    assert!(lo < hi, "empty range");
    lo + random_below(rng, &(hi - lo))
}

const SMALL_PRIMES: [u32; 24] =
    [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

/// Miller-Rabin with the first 24 primes as fixed bases.
///
/// Deterministic for every n below 3.3 * 10^24, and fixed bases keep key
/// generation a pure function of the seed.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for p in SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Random prime with exactly `bits` bits that also satisfies `accept`.
pub fn gen_prime<R, F>(rng: &mut R, bits: u64, accept: F) -> BigUint
where
    R: RngCore + ?Sized,
    F: Fn(&BigUint) -> bool,
{
    assert!(bits >= 3, "prime_bits must be at least 3");
    let top = BigUint::one() << (bits - 1);
    loop {
        let c = random_bits(rng, bits - 1) | &top | BigUint::one();
        if accept(&c) && is_probable_prime(&c) {
            return c;
        }
    }
}

/// Random safe prime `p = 2q + 1` with `p` of exactly `bits` bits. Returns `(p, q)`.
pub fn gen_safe_prime<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> (BigUint, BigUint) {
    assert!(bits >= 4, "safe primes need at least 4 bits");
    let top = BigUint::one() << (bits - 2);
    loop {
        let q = random_bits(rng, bits - 2) | &top | BigUint::one();
        // p = 2q+1 is divisible by 3 whenever q = 1 mod 3
        if q > BigUint::from(3u32) && (&q % 3u32).is_one() {
            continue;
        }
        let p = (&q << 1) + 1u32;
        if is_probable_prime(&q) && is_probable_prime(&p) {
            return (p, q);
        }
    }
}

/// Prime-order subgroup of `Z_p^*` with `p = 2q + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DhParams {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
}

impl DhParams {
    pub fn new(p: BigUint, q: BigUint, g: BigUint) -> Result<Self, CryptoError> {
        let params = DhParams { p, q, g };
        params.validate()?;
        Ok(params)
    }

    /// `p = 23, q = 11, g = 2`.
    pub fn toy() -> Self {
        DhParams::new(23u32.into(), 11u32.into(), 2u32.into()).expect("toy group is valid")
    }

    /// Fresh safe-prime group; `g` is a random square, so it has order `q`.
    pub fn generate<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> Self {
        let (p, q) = gen_safe_prime(rng, bits);
        let two = BigUint::from(2u32);
        loop {
            let h = random_range(rng, &two, &(&p - 1u32));
            let g = h.modpow(&two, &p);
            if !g.is_one() {
                return DhParams { p, q, g };
            }
        }
    }

    pub fn validate(&self) -> Result<(), CryptoError> {
        if self.p != (&self.q << 1) + 1u32 {
            return Err(CryptoError::InvalidParams("p != 2q + 1".into()));
        }
        if !is_probable_prime(&self.p) || !is_probable_prime(&self.q) {
            return Err(CryptoError::InvalidParams("p or q is not prime".into()));
        }
        if self.g.is_one() || self.g >= self.p || !mod_exp(&self.g, &self.q, &self.p).is_one() {
            return Err(CryptoError::InvalidParams("g does not generate the order-q subgroup".into()));
        }
        Ok(())
    }
}
