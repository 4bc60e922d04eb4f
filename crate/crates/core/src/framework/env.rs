use std::ops::AddAssign;

use num_bigint::BigUint;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::crypto::{self, Digest, EcParams, HashArg, HashFn, Point};
use crate::Result;

/// Per-actor computation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub hash: u64,
    pub exp: u64,
    pub ec_mul: u64,
    pub sym: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.hash + self.exp + self.ec_mul + self.sym
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.hash += rhs.hash;
        self.exp += rhs.exp;
        self.ec_mul += rhs.ec_mul;
        self.sym += rhs.sym;
    }
}

/// What one actor sees while running a phase step: randomness, the clock
/// reading, and metered primitives.
pub struct Env<'a> {
    rng: &'a mut ChaCha20Rng,
    ops: &'a mut OpCounts,
    hasher: HashFn,
    now: u64,
    delta_t: u64,
}

impl<'a> Env<'a> {
    pub fn new(rng: &'a mut ChaCha20Rng, ops: &'a mut OpCounts, hasher: HashFn, now: u64, delta_t: u64) -> Self {
        Env { rng, ops, hasher, now, delta_t }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn delta_t(&self) -> u64 {
        self.delta_t
    }

    /// `now - stamp <= delta_t`.
    pub fn is_fresh(&self, stamp: u64) -> bool {
        self.now.saturating_sub(stamp) <= self.delta_t
    }

    pub fn hasher(&self) -> HashFn {
        self.hasher
    }

    pub fn h(&mut self, args: &[HashArg<'_>]) -> Digest {
        self.ops.hash += 1;
        self.hasher.hash(args)
    }

    /// Hash, then keep the leading `bits` bits.
    pub fn h_trunc(&mut self, bits: u32, args: &[HashArg<'_>]) -> BigUint {
        self.h(args).truncate(bits)
    }

    /// Hash, then reduce the digest modulo `m`.
    pub fn h_mod(&mut self, m: &BigUint, args: &[HashArg<'_>]) -> BigUint {
        crypto::hash_to_int(&self.h(args), m)
    }

    pub fn exp(&mut self, base: &BigUint, e: &BigUint, m: &BigUint) -> BigUint {
        self.ops.exp += 1;
        crypto::mod_exp(base, e, m)
    }

    pub fn rsa(&mut self, x: &BigUint, e: &BigUint, n: &BigUint) -> Result<BigUint> {
        self.ops.exp += 1;
        Ok(crypto::rsa_apply(x, e, n)?)
    }

    pub fn rabin_roots(&mut self, c: &BigUint, keys: &crypto::RabinKeys) -> Result<Vec<BigUint>> {
        self.ops.exp += 2;
        Ok(crypto::rabin_roots(c, keys)?)
    }

    pub fn ec_mul(&mut self, k: &BigUint, p: &Point, params: &EcParams) -> Result<Point> {
        self.ops.ec_mul += 1;
        Ok(crypto::ec_mul(k, p, params)?)
    }

    pub fn sym_encrypt(&mut self, key: &[u8], pt: &crypto::PackedPlaintext) -> Result<Vec<u8>> {
        self.ops.sym += 1;
        Ok(crypto::sym_encrypt(key, pt)?)
    }

    pub fn sym_decrypt(&mut self, key: &[u8], ct: &[u8]) -> Result<crypto::PackedPlaintext> {
        self.ops.sym += 1;
        Ok(crypto::sym_decrypt(key, ct)?)
    }

    /// Uniform nonce of at most `bits` bits.
    pub fn nonce(&mut self, bits: u64) -> BigUint {
        crypto::random_bits(self.rng, bits)
    }

    /// Uniform value in `[lo, hi)`.
    pub fn nonce_range(&mut self, lo: &BigUint, hi: &BigUint) -> BigUint {
        crypto::random_range(self.rng, lo, hi)
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        self.rng
    }
}
