use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::crypto::{Digest, Point};
use crate::{Error, Result};

/// A protocol quantity: an integer, an octet string (digests, ciphertexts) or a
/// curve point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(BigUint),
    Bytes(Vec<u8>),
    Point(Point),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bytes(_) => "bytes",
            Value::Point(_) => "point",
        }
    }

    pub fn as_int(&self) -> Option<&BigUint> {
        match self {
            Value::Int(v) => Some(v),
            _ => None,
        }
    }
}

impl From<BigUint> for Value {
    fn from(v: BigUint) -> Self {
        Value::Int(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v.into())
    }
}

impl From<Digest> for Value {
    fn from(d: Digest) -> Self {
        Value::Bytes(d.into_bytes())
    }
}

impl From<Vec<u8>> for Value {
    fn from(b: Vec<u8>) -> Self {
        Value::Bytes(b)
    }
}

impl From<Point> for Value {
    fn from(p: Point) -> Self {
        Value::Point(p)
    }
}

// JSON form: {"int": "<decimal>"} | {"bytes": "<hex>"} | {"point": null | ["x", "y"]}
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ValueRepr {
    Int(String),
    Bytes(String),
    Point(Option<(String, String)>),
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            Value::Int(v) => ValueRepr::Int(v.to_str_radix(10)),
            Value::Bytes(b) => ValueRepr::Bytes(hex::encode(b)),
            Value::Point(Point::Identity) => ValueRepr::Point(None),
            Value::Point(Point::Affine { x, y }) => ValueRepr::Point(Some((x.to_string(), y.to_string()))),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let int = |s: &str| BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| D::Error::custom("bad integer"));
        Ok(match ValueRepr::deserialize(d)? {
            ValueRepr::Int(s) => Value::Int(int(&s)?),
            ValueRepr::Bytes(h) => Value::Bytes(hex::decode(h).map_err(D::Error::custom)?),
            ValueRepr::Point(None) => Value::Point(Point::Identity),
            ValueRepr::Point(Some((x, y))) => Value::Point(Point::Affine { x: int(&x)?, y: int(&y)? }),
        })
    }
}

/// Named value store: card slots, server secrets, per-session scratch.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Slots(BTreeMap<String, Value>);

impl Slots {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.set(name, v);
        self
    }

    pub fn set(&mut self, name: &str, v: impl Into<Value>) {
        self.0.insert(name.to_owned(), v.into());
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl Fields for Slots {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }
}

/// Typed read access to a set of named values.
pub trait Fields {
    fn lookup(&self, name: &str) -> Option<&Value>;

    fn value(&self, name: &str) -> Result<&Value> {
        self.lookup(name).ok_or_else(|| Error::MissingSlot(name.to_owned()))
    }

    fn int(&self, name: &str) -> Result<&BigUint> {
        match self.value(name)? {
            Value::Int(v) => Ok(v),
            _ => Err(Error::SlotKind(name.to_owned())),
        }
    }

    fn bytes(&self, name: &str) -> Result<&[u8]> {
        match self.value(name)? {
            Value::Bytes(v) => Ok(v),
            _ => Err(Error::SlotKind(name.to_owned())),
        }
    }

    fn digest(&self, name: &str) -> Result<Digest> {
        self.bytes(name).map(|b| Digest::from_bytes(b.to_vec()))
    }

    fn point(&self, name: &str) -> Result<&Point> {
        match self.value(name)? {
            Value::Point(v) => Ok(v),
            _ => Err(Error::SlotKind(name.to_owned())),
        }
    }

    fn u64(&self, name: &str) -> Result<u64> {
        u64::try_from(self.int(name)?).map_err(|_| Error::SlotKind(name.to_owned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let s = Slots::new()
            .with("N", 12u64)
            .with("B", vec![0xab, 0x01])
            .with("P", Point::new(5u32, 1u32))
            .with("O", Point::Identity);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"B":{"bytes":"ab01"},"N":{"int":"12"},"O":{"point":null},"P":{"point":["5","1"]}}"#);
        let back: Slots = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn typed_getters() {
        let s = Slots::new().with("N", 3u64);
        assert_eq!(s.u64("N").unwrap(), 3);
        assert_eq!(s.bytes("N"), Err(Error::SlotKind("N".into())));
        assert_eq!(s.int("x"), Err(Error::MissingSlot("x".into())));
    }
}
