use std::fmt;

use num_bigint::BigUint;
use sha2::{Digest as _, Sha256};

/// Default digest width in octets.
pub const DEFAULT_DIGEST_WIDTH: usize = 32;

const TAG_BYTES: u8 = 0x01;
const TAG_INT: u8 = 0x02;

/// Fixed-width hash output.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(Vec<u8>);

impl Digest {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Digest(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn to_int(&self) -> BigUint {
        BigUint::from_bytes_be(&self.0)
    }

    /// The leading `bits` bits of the digest as an integer.
    pub fn truncate(&self, bits: u32) -> BigUint {
        let total = self.0.len() as u32 * 8;
        if bits >= total {
            return self.to_int();
        }
        self.to_int() >> (total - bits)
    }

    /// Bytewise XOR. Both operands must have the same width.
    pub fn xor(&self, other: &Digest) -> Digest {
        assert_eq!(self.width(), other.width(), "digest widths differ");
        Digest(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", hex::encode(&self.0))
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(&self.0))
    }
}

/// One argument of a hash call.
///
/// Integers and byte strings carry distinct type tags, so `Int(5)` and
/// `Bytes([5])` never hash alike.
#[derive(Debug, Clone, Copy)]
pub enum HashArg<'a> {
    Bytes(&'a [u8]),
    Int(&'a BigUint),
    U64(u64),
}

impl<'a> From<&'a [u8]> for HashArg<'a> {
    fn from(b: &'a [u8]) -> Self {
        HashArg::Bytes(b)
    }
}

impl<'a> From<&'a Vec<u8>> for HashArg<'a> {
    fn from(b: &'a Vec<u8>) -> Self {
        HashArg::Bytes(b)
    }
}

impl<'a> From<&'a str> for HashArg<'a> {
    fn from(s: &'a str) -> Self {
        HashArg::Bytes(s.as_bytes())
    }
}

impl<'a> From<&'a BigUint> for HashArg<'a> {
    fn from(v: &'a BigUint) -> Self {
        HashArg::Int(v)
    }
}

impl<'a> From<&'a Digest> for HashArg<'a> {
    fn from(d: &'a Digest) -> Self {
        HashArg::Bytes(d.as_bytes())
    }
}

impl From<u64> for HashArg<'_> {
    fn from(v: u64) -> Self {
        HashArg::U64(v)
    }
}

/// SHA-256 over a length-prefixed argument list, truncated to `width` octets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFn {
    width: usize,
}

impl Default for HashFn {
    fn default() -> Self {
        HashFn { width: DEFAULT_DIGEST_WIDTH }
    }
}

impl HashFn {
    /// `width` must be between 4 and 32 octets.
    pub fn new(width: usize) -> Self {
        assert!((4..=32).contains(&width), "digest width {width} outside 4..=32");
        HashFn { width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn hash(&self, args: &[HashArg<'_>]) -> Digest {
        assert!(!args.is_empty(), "hash needs at least one argument");
        let mut h = Sha256::new();
        h.update((args.len() as u32).to_be_bytes());
        for arg in args {
            match arg {
                HashArg::Bytes(b) => absorb(&mut h, TAG_BYTES, b),
                HashArg::Int(v) => absorb(&mut h, TAG_INT, &int_bytes(v)),
                HashArg::U64(v) => absorb(&mut h, TAG_INT, &int_bytes(&BigUint::from(*v))),
            }
        }
        let out = h.finalize();
        Digest(out[..self.width].to_vec())
    }
}

fn absorb(h: &mut Sha256, tag: u8, data: &[u8]) {
    h.update([tag]);
    h.update((data.len() as u64).to_be_bytes());
    h.update(data);
}

// Minimal big-endian encoding; zero encodes as the empty string.
fn int_bytes(v: &BigUint) -> Vec<u8> {
    if v.bits() == 0 {
        Vec::new()
    } else {
        v.to_bytes_be()
    }
}

/// Reads the digest as a big-endian integer and reduces it modulo `m`.
pub fn hash_to_int(d: &Digest, m: &BigUint) -> BigUint {
    d.to_int() % m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let h = HashFn::default();
        assert_eq!(h.hash(&["m".into()]), h.hash(&["m".into()]));
    }

    #[test]
    fn split_ambiguity_is_impossible() {
        let h = HashFn::default();
        assert_ne!(h.hash(&["a".into(), "b".into()]), h.hash(&["ab".into(), "".into()]));
        assert_ne!(h.hash(&["ab".into()]), h.hash(&["a".into(), "b".into()]));
    }

    #[test]
    fn ints_and_bytes_are_distinguished() {
        let h = HashFn::default();
        let five = BigUint::from(5u32);
        assert_ne!(h.hash(&[(&five).into()]), h.hash(&[HashArg::Bytes(&[5])]));
        assert_eq!(h.hash(&[(&five).into()]), h.hash(&[5u64.into()]));
    }

    #[test]
    fn reduction_mod_11_matches_big_integer_reading() {
        let h = HashFn::default();
        let d = h.hash(&["x".into()]);
        let m = BigUint::from(11u32);
        // oracle: Horner evaluation of the digest bytes mod 11
        let expected = d.as_bytes().iter().fold(0u64, |acc, b| (acc * 256 + *b as u64) % 11);
        assert_eq!(hash_to_int(&d, &m), BigUint::from(expected));
        assert!(hash_to_int(&d, &m) < m);
    }

    #[test]
    fn width_and_truncation() {
        let h = HashFn::new(8);
        let d = h.hash(&["x".into()]);
        assert_eq!(d.width(), 8);
        let t = d.truncate(16);
        assert_eq!(t, BigUint::from(u16::from_be_bytes([d.as_bytes()[0], d.as_bytes()[1]])));
    }
}
