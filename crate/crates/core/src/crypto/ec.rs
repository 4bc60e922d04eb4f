use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::modular::mod_inv;
use super::CryptoError;

/// Affine point or the point at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Point {
    Identity,
    Affine { x: BigUint, y: BigUint },
}

impl Point {
    pub fn new(x: impl Into<BigUint>, y: impl Into<BigUint>) -> Self {
        Point::Affine { x: x.into(), y: y.into() }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Point::Identity)
    }

    /// Tagged `x || y` encoding; the identity is the single byte `0x00`.
    pub fn to_bytes(&self, field_bytes: usize) -> Vec<u8> {
        match self {
            Point::Identity => vec![0x00],
            Point::Affine { x, y } => {
                let mut out = Vec::with_capacity(1 + 2 * field_bytes);
                out.push(0x04);
                out.extend(left_pad(&x.to_bytes_be(), field_bytes));
                out.extend(left_pad(&y.to_bytes_be(), field_bytes));
                out
            }
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Identity => f.write_str("O"),
            Point::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

fn left_pad(bytes: &[u8], width: usize) -> Vec<u8> {
    let mut out = vec![0u8; width.saturating_sub(bytes.len())];
    out.extend_from_slice(bytes);
    out
}

/// Short Weierstrass curve `y^2 = x^3 + ax + b` over `F_p` with a base point of
/// known prime order and the server's public point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EcParams {
    pub a: BigUint,
    pub b: BigUint,
    pub p: BigUint,
    pub base: Point,
    pub order: BigUint,
    pub public: Point,
}

impl EcParams {
    /// Curve without a server point yet; `public` is set to the identity.
    pub fn new(a: BigUint, b: BigUint, p: BigUint, base: Point, order: BigUint) -> Result<Self, CryptoError> {
        let params = EcParams { a, b, p, base, order, public: Point::Identity };
        params.check_curve()?;
        Ok(params)
    }

    /// `y^2 = x^3 + 2x + 2` over `F_17`, base `(5, 1)` of order 19.
    pub fn toy() -> Self {
        EcParams::new(2u32.into(), 2u32.into(), 17u32.into(), Point::new(5u32, 1u32), 19u32.into())
            .expect("toy curve is valid")
    }

    /// Sets `Y = s * P` for the server scalar `s`.
    pub fn with_server_scalar(mut self, s: &BigUint) -> Result<Self, CryptoError> {
        self.public = ec_mul(s, &self.base, &self)?;
        Ok(self)
    }

    pub fn field_bytes(&self) -> usize {
        self.p.bits().div_ceil(8) as usize
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match pt {
            Point::Identity => true,
            Point::Affine { x, y } => {
                if x >= &self.p || y >= &self.p {
                    return false;
                }
                let lhs = (y * y) % &self.p;
                let rhs = (x * x * x + &self.a * x + &self.b) % &self.p;
                lhs == rhs
            }
        }
    }

    fn check_curve(&self) -> Result<(), CryptoError> {
        let p = &self.p;
        let disc = (BigUint::from(4u32) * &self.a * &self.a * &self.a + BigUint::from(27u32) * &self.b * &self.b) % p;
        if disc.is_zero() {
            return Err(CryptoError::InvalidParams("singular curve".into()));
        }
        if !self.contains(&self.base) || self.base.is_identity() {
            return Err(CryptoError::InvalidParams("base point is not on the curve".into()));
        }
        if !ec_mul_unchecked(&self.order, &self.base, self).is_identity() {
            return Err(CryptoError::InvalidParams("order does not annihilate the base point".into()));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CryptoError> {
        self.check_curve()?;
        if !self.contains(&self.public) {
            return Err(CryptoError::PointNotOnCurve);
        }
        Ok(())
    }

    /// Every point of the group, identity first. Only sensible for toy curves.
    pub fn enumerate(&self) -> Vec<Point> {
        let p = u64::try_from(&self.p).expect("enumeration needs a small field");
        let mut pts = vec![Point::Identity];
        for x in 0..p {
            for y in 0..p {
                let pt = Point::new(x, y);
                if self.contains(&pt) {
                    pts.push(pt);
                }
            }
        }
        pts
    }
}

/// Affine group law.
pub fn ec_add(a: &Point, b: &Point, params: &EcParams) -> Result<Point, CryptoError> {
    if !params.contains(a) || !params.contains(b) {
        return Err(CryptoError::PointNotOnCurve);
    }
    Ok(add_unchecked(a, b, params))
}

/// Double-and-add scalar multiplication.
pub fn ec_mul(k: &BigUint, pt: &Point, params: &EcParams) -> Result<Point, CryptoError> {
    if !params.contains(pt) {
        return Err(CryptoError::PointNotOnCurve);
    }
    Ok(ec_mul_unchecked(k, pt, params))
}

fn ec_mul_unchecked(k: &BigUint, pt: &Point, params: &EcParams) -> Point {
    let mut acc = Point::Identity;
    for i in (0..k.bits()).rev() {
        acc = add_unchecked(&acc, &acc, params);
        if k.bit(i) {
            acc = add_unchecked(&acc, pt, params);
        }
    }
    acc
}

fn add_unchecked(a: &Point, b: &Point, params: &EcParams) -> Point {
    let p = &params.p;
    let (x1, y1, x2, y2) = match (a, b) {
        (Point::Identity, _) => return b.clone(),
        (_, Point::Identity) => return a.clone(),
        (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
    };
    if x1 == x2 && ((y1 + y2) % p).is_zero() {
        return Point::Identity;
    }
    let sub = |u: &BigUint, v: &BigUint| ((u + p) - (v % p)) % p;
    let slope = if x1 == x2 {
        let num = (BigUint::from(3u32) * x1 * x1 + &params.a) % p;
        let den = (BigUint::from(2u32) * y1) % p;
        num * mod_inv(&den, p).expect("2y is non-zero for a point of odd order") % p
    } else {
        let num = sub(y2, y1);
        let den = sub(x2, x1);
        num * mod_inv(&den, p).expect("field prime") % p
    };
    let x3 = sub(&sub(&(&slope * &slope % p), x1), x2);
    let y3 = sub(&(&slope * sub(x1, &x3) % p), y1);
    Point::Affine { x: x3, y: y3 }
}

impl EcParams {
    /// Additive inverse, handy for tests.
    pub fn negate(&self, pt: &Point) -> Point {
        match pt {
            Point::Identity => Point::Identity,
            Point::Affine { x, y } => {
                let ny = if y.is_zero() { y.clone() } else { &self.p - y };
                Point::Affine { x: x.clone(), y: ny }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn toy_curve_has_19_points() {
        assert_eq!(EcParams::toy().enumerate().len(), 19);
    }

    #[test]
    fn doubling_example() {
        let c = EcParams::toy();
        assert_eq!(ec_mul(&big(2), &Point::new(5u32, 1u32), &c).unwrap(), Point::new(6u32, 3u32));
    }

    #[test]
    fn order_annihilates_and_identity_is_neutral() {
        let c = EcParams::toy();
        assert!(ec_mul(&c.order, &c.base, &c).unwrap().is_identity());
        assert_eq!(ec_add(&c.base, &Point::Identity, &c).unwrap(), c.base);
        assert_eq!(ec_add(&c.base, &c.negate(&c.base), &c).unwrap(), Point::Identity);
    }

    #[test]
    fn off_curve_points_are_rejected() {
        let c = EcParams::toy();
        let bad = Point::new(1u32, 1u32);
        assert_eq!(ec_mul(&big(3), &bad, &c), Err(CryptoError::PointNotOnCurve));
        assert_eq!(ec_add(&bad, &c.base, &c), Err(CryptoError::PointNotOnCurve));
    }

    #[test]
    fn rejects_singular_curve() {
        // 4*0 + 27*0 = 0
        assert!(EcParams::new(big(0), big(0), big(17), Point::new(0u32, 0u32), big(1)).is_err());
    }

    #[test]
    fn server_point() {
        let c = EcParams::toy().with_server_scalar(&big(7)).unwrap();
        c.validate().unwrap();
        assert_eq!(c.public, ec_mul(&big(7), &c.base, &c).unwrap());
    }
}
