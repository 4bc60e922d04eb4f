use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::CryptoError;

/// Bits a packed plaintext must leave free below the modulus size.
pub const PACK_HEADROOM_BITS: u64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedField {
    pub tag: String,
    pub width: u32,
    pub value: BigUint,
}

/// Fixed-width concatenation of tagged integers; the first field is the most
/// significant. Stands in for every `a || b || c` that ends up under an
/// exponent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackedPlaintext {
    fields: Vec<PackedField>,
}

impl PackedPlaintext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(mut self, tag: &str, width: u32, value: BigUint) -> Result<Self, CryptoError> {
        if width == 0 || value.bits() > u64::from(width) {
            return Err(CryptoError::PackingOverflow(format!(
                "field {tag} needs {} bits but has {width}",
                value.bits()
            )));
        }
        if self.fields.iter().any(|f| f.tag == tag) {
            return Err(CryptoError::PackingOverflow(format!("duplicate field {tag}")));
        }
        self.fields.push(PackedField { tag: tag.to_owned(), width, value });
        Ok(self)
    }

    pub fn fields(&self) -> &[PackedField] {
        &self.fields
    }

    pub fn get(&self, tag: &str) -> Option<&BigUint> {
        self.fields.iter().find(|f| f.tag == tag).map(|f| &f.value)
    }

    pub fn total_width(&self) -> u64 {
        self.fields.iter().map(|f| u64::from(f.width)).sum()
    }

    pub fn encode(&self) -> BigUint {
        self.fields.iter().fold(BigUint::zero(), |acc, f| (acc << f.width) | &f.value)
    }

    /// Encodes for exponentiation modulo `modulus`, which must have at least
    /// [`PACK_HEADROOM_BITS`] more bits than the packing.
    pub fn encode_below(&self, modulus: &BigUint) -> Result<BigUint, CryptoError> {
        if self.total_width() + PACK_HEADROOM_BITS >= modulus.bits() {
            return Err(CryptoError::PackingOverflow(format!(
                "{} packed bits do not fit a {}-bit modulus",
                self.total_width(),
                modulus.bits()
            )));
        }
        Ok(self.encode())
    }

    /// Self-describing byte form used by the symmetric cipher.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend((self.fields.len() as u16).to_be_bytes());
        for f in &self.fields {
            out.push(f.tag.len() as u8);
            out.extend(f.tag.as_bytes());
            out.extend(f.width.to_be_bytes());
            let nbytes = f.width.div_ceil(8) as usize;
            let raw = if f.value.is_zero() { Vec::new() } else { f.value.to_bytes_be() };
            out.extend(std::iter::repeat_n(0u8, nbytes - raw.len()));
            out.extend(raw);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let bad = || CryptoError::PackingOverflow("truncated packed plaintext".into());
        let mut cur = bytes;
        let mut take = |n: usize| -> Result<&[u8], CryptoError> {
            if cur.len() < n {
                return Err(bad());
            }
            let (head, tail) = cur.split_at(n);
            cur = tail;
            Ok(head)
        };
        let count = u16::from_be_bytes(take(2)?.try_into().expect("2 bytes"));
        let mut packed = PackedPlaintext::new();
        for _ in 0..count {
            let tag_len = take(1)?[0] as usize;
            let tag = String::from_utf8(take(tag_len)?.to_vec()).map_err(|_| bad())?;
            let width = u32::from_be_bytes(take(4)?.try_into().expect("4 bytes"));
            let value = BigUint::from_bytes_be(take(width.div_ceil(8) as usize)?);
            packed = packed.push(&tag, width, value)?;
        }
        if !cur.is_empty() {
            return Err(bad());
        }
        Ok(packed)
    }
}

/// Field names and widths of one packing, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackLayout {
    fields: Vec<(&'static str, u32)>,
}

impl PackLayout {
    pub fn new(fields: &[(&'static str, u32)]) -> Self {
        PackLayout { fields: fields.to_vec() }
    }

    pub fn total_width(&self) -> u64 {
        self.fields.iter().map(|(_, w)| u64::from(*w)).sum()
    }

    pub fn pack(&self, values: &[BigUint]) -> Result<PackedPlaintext, CryptoError> {
        assert_eq!(values.len(), self.fields.len(), "value count does not match the layout");
        self.fields
            .iter()
            .zip(values)
            .try_fold(PackedPlaintext::new(), |acc, ((tag, width), v)| acc.push(tag, *width, v.clone()))
    }

    /// Splits an integer back into fields. Values wider than the layout are
    /// rejected rather than silently truncated.
    pub fn unpack(&self, value: &BigUint) -> Result<PackedPlaintext, CryptoError> {
        if value.bits() > self.total_width() {
            return Err(CryptoError::PackingOverflow(format!(
                "{}-bit value exceeds the {}-bit layout",
                value.bits(),
                self.total_width()
            )));
        }
        let mut rest = value.clone();
        let mut parts = Vec::with_capacity(self.fields.len());
        for (tag, width) in self.fields.iter().rev() {
            let mask = (BigUint::one() << *width) - 1u32;
            parts.push((*tag, *width, &rest & &mask));
            rest >>= *width;
        }
        parts.into_iter().rev().try_fold(PackedPlaintext::new(), |acc, (tag, width, v)| acc.push(tag, width, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layout() -> PackLayout {
        PackLayout::new(&[("ID", 16), ("h_1", 32), ("r", 32), ("SN", 16)])
    }

    #[test]
    fn first_field_is_most_significant() {
        let l = PackLayout::new(&[("a", 8), ("b", 8)]);
        let p = l.pack(&[0xABu32.into(), 0xCDu32.into()]).unwrap();
        assert_eq!(p.encode(), BigUint::from(0xABCDu32));
    }

    #[test]
    fn overflow_is_reported() {
        let l = PackLayout::new(&[("a", 4)]);
        assert!(matches!(l.pack(&[16u32.into()]), Err(CryptoError::PackingOverflow(_))));
        assert!(l.unpack(&BigUint::from(16u32)).is_err());
        let p = layout().pack(&[1u32.into(), 2u32.into(), 3u32.into(), 4u32.into()]).unwrap();
        assert!(p.encode_below(&(BigUint::one() << 100u32)).is_err());
        assert!(p.encode_below(&(BigUint::one() << 160u32)).is_ok());
    }

    proptest! {
        #[test]
        fn unpack_inverts_pack(id in 0u32..=0xffff, h in any::<u32>(), r in any::<u32>(), sn in 0u32..=0xffff) {
            let vals: Vec<BigUint> = vec![id.into(), h.into(), r.into(), sn.into()];
            let packed = layout().pack(&vals).unwrap();
            let back = layout().unpack(&packed.encode()).unwrap();
            prop_assert_eq!(&back, &packed);
            prop_assert_eq!(PackedPlaintext::from_bytes(&packed.to_bytes()).unwrap(), packed);
        }
    }
}
