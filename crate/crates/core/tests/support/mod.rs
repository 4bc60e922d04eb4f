//! Reference implementations the tests check the crate against. Nothing
//! here calls into the crate's crypto module.
#![allow(dead_code)]

use num_bigint::BigUint;
use sha2::{Digest as _, Sha256};

pub enum Arg<'a> {
    B(&'a [u8]),
    I(&'a BigUint),
    U(u64),
}

/// SHA-256 over `count || (tag || len || data)*`, ints as minimal big-endian.
pub fn h(args: &[Arg<'_>]) -> Vec<u8> {
    let mut s = Sha256::new();
    s.update((args.len() as u32).to_be_bytes());
    for a in args {
        let (tag, data): (u8, Vec<u8>) = match a {
            Arg::B(b) => (1, b.to_vec()),
            Arg::I(v) => (2, if **v == BigUint::from(0u32) { vec![] } else { v.to_bytes_be() }),
            Arg::U(v) => {
                let bytes = v.to_be_bytes();
                let skip = bytes.iter().take_while(|b| **b == 0).count();
                (2, bytes[skip..].to_vec())
            }
        };
        s.update([tag]);
        s.update((data.len() as u64).to_be_bytes());
        s.update(&data);
    }
    s.finalize().to_vec()
}

pub fn int(bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_be(bytes)
}

/// Leading `bits` bits of a digest.
pub fn trunc(d: &[u8], bits: u64) -> BigUint {
    int(d) >> (d.len() as u64 * 8 - bits)
}

pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Concatenates `(value, width)` pairs, first field most significant.
pub fn pack(fields: &[(&BigUint, u64)]) -> BigUint {
    let mut acc = BigUint::from(0u32);
    for (v, w) in fields {
        assert!(v.bits() <= *w, "field wider than its slot");
        acc = (acc << *w) | *v;
    }
    acc
}

/// The textbook curve `y^2 = x^3 + 2x + 2` over `F_17`.
pub mod toy_curve {
    pub const P: i64 = 17;
    pub const A: i64 = 2;
    pub const B: i64 = 2;
    pub const BASE: Pt = Some((5, 1));

    pub type Pt = Option<(i64, i64)>;

    fn md(v: i64) -> i64 {
        v.rem_euclid(P)
    }

    fn inv(v: i64) -> i64 {
        (1..P).find(|k| md(v * k) == 1).expect("invertible")
    }

    pub fn on_curve(pt: Pt) -> bool {
        match pt {
            None => true,
            Some((x, y)) => md(y * y) == md(x * x * x + A * x + B),
        }
    }

    pub fn add(p: Pt, q: Pt) -> Pt {
        let (Some((x1, y1)), Some((x2, y2))) = (p, q) else { return p.or(q) };
        if x1 == x2 && md(y1 + y2) == 0 {
            return None;
        }
        let l = if (x1, y1) == (x2, y2) { md((3 * x1 * x1 + A) * inv(2 * y1)) } else { md((y2 - y1) * inv(x2 - x1)) };
        let x3 = md(l * l - x1 - x2);
        Some((x3, md(l * (x1 - x3) - y1)))
    }

    /// Repeated addition; slow on purpose.
    pub fn mul(k: u64, p: Pt) -> Pt {
        (0..k).fold(None, |acc, _| add(acc, p))
    }

    /// Same encoding as the scheme: `04 || x || y`, identity `00`.
    pub fn encode(p: Pt) -> Vec<u8> {
        match p {
            None => vec![0],
            Some((x, y)) => vec![4, x as u8, y as u8],
        }
    }
}
