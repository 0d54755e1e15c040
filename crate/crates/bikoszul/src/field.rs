//! Ground field arithmetic: prime fields GF(p) and arbitrary-precision rationals.
//!
//! Every computation in this crate is exact. Prime-field elements are kept
//! reduced in `[0, p)`; rationals are kept in lowest terms with positive
//! denominator (both invariants maintained by `num-rational`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

/// Field descriptor. All scalar operations are methods on this type so that
/// prime-field elements do not have to carry their modulus around.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Field {
    /// GF(p), p prime, p < 2^31.
    Prime(u64),
    /// The field of rational numbers.
    Rational,
}

/// An exact scalar.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum FieldScalar {
    Fp(u64),
    Rat(BigRational),
}

impl Field {
    /// Validates a prime modulus. Trial division is fine at p < 2^31.
    pub fn prime(p: u64) -> Result<Field, String> {
        if p < 2 {
            return Err(format!("modulus {p} is not prime"));
        }
        if p >= 1 << 31 {
            return Err(format!("modulus {p} exceeds 2^31"));
        }
        let mut k = 2u64;
        while k * k <= p {
            if p % k == 0 {
                return Err(format!("modulus {p} is not prime"));
            }
            k += 1;
        }
        Ok(Field::Prime(p))
    }

    pub fn zero(&self) -> FieldScalar {
        match self {
            Field::Prime(_) => FieldScalar::Fp(0),
            Field::Rational => FieldScalar::Rat(BigRational::zero()),
        }
    }

    pub fn one(&self) -> FieldScalar {
        match self {
            Field::Prime(_) => FieldScalar::Fp(1),
            Field::Rational => FieldScalar::Rat(BigRational::one()),
        }
    }

    pub fn from_i64(&self, n: i64) -> FieldScalar {
        match self {
            Field::Prime(p) => {
                let m = n.rem_euclid(*p as i64) as u64;
                FieldScalar::Fp(m)
            }
            Field::Rational => FieldScalar::Rat(BigRational::from_integer(BigInt::from(n))),
        }
    }

    pub fn from_ratio(&self, num: i64, den: i64) -> FieldScalar {
        assert!(den != 0, "zero denominator");
        match self {
            Field::Prime(_) => {
                let d = self.from_i64(den);
                self.mul(&self.from_i64(num), &self.inv(&d).expect("denominator is 0 mod p"))
            }
            Field::Rational => {
                FieldScalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }
        }
    }

    pub fn add(&self, a: &FieldScalar, b: &FieldScalar) -> FieldScalar {
        match (self, a, b) {
            (Field::Prime(p), FieldScalar::Fp(x), FieldScalar::Fp(y)) => {
                FieldScalar::Fp((x + y) % p)
            }
            (Field::Rational, FieldScalar::Rat(x), FieldScalar::Rat(y)) => {
                FieldScalar::Rat(x + y)
            }
            _ => panic!("scalar does not belong to field {self:?}"),
        }
    }

    pub fn sub(&self, a: &FieldScalar, b: &FieldScalar) -> FieldScalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &FieldScalar) -> FieldScalar {
        match (self, a) {
            (Field::Prime(p), FieldScalar::Fp(x)) => FieldScalar::Fp(if *x == 0 { 0 } else { p - x }),
            (Field::Rational, FieldScalar::Rat(x)) => FieldScalar::Rat(-x),
            _ => panic!("scalar does not belong to field {self:?}"),
        }
    }

    pub fn mul(&self, a: &FieldScalar, b: &FieldScalar) -> FieldScalar {
        match (self, a, b) {
            (Field::Prime(p), FieldScalar::Fp(x), FieldScalar::Fp(y)) => {
                FieldScalar::Fp(x * y % p)
            }
            (Field::Rational, FieldScalar::Rat(x), FieldScalar::Rat(y)) => {
                FieldScalar::Rat(x * y)
            }
            _ => panic!("scalar does not belong to field {self:?}"),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: &FieldScalar) -> Option<FieldScalar> {
        match (self, a) {
            (Field::Prime(p), FieldScalar::Fp(x)) => {
                if *x == 0 {
                    None
                } else {
                    Some(FieldScalar::Fp(pow_mod(*x, p - 2, *p)))
                }
            }
            (Field::Rational, FieldScalar::Rat(x)) => {
                if x.is_zero() {
                    None
                } else {
                    Some(FieldScalar::Rat(x.recip()))
                }
            }
            _ => panic!("scalar does not belong to field {self:?}"),
        }
    }

    pub fn div(&self, a: &FieldScalar, b: &FieldScalar) -> FieldScalar {
        self.mul(a, &self.inv(b).expect("division by zero"))
    }

    /// (-1)^k as a scalar.
    pub fn sign(&self, k: i64) -> FieldScalar {
        if k.rem_euclid(2) == 0 {
            self.one()
        } else {
            self.from_i64(-1)
        }
    }

    pub fn is_zero(&self, a: &FieldScalar) -> bool {
        match a {
            FieldScalar::Fp(x) => *x == 0,
            FieldScalar::Rat(x) => x.is_zero(),
        }
    }

    pub fn is_one(&self, a: &FieldScalar) -> bool {
        match a {
            FieldScalar::Fp(x) => *x == 1,
            FieldScalar::Rat(x) => x.is_one(),
        }
    }

    /// Canonical text form, also used by the file formats.
    pub fn format_scalar(&self, a: &FieldScalar) -> String {
        match a {
            FieldScalar::Fp(x) => x.to_string(),
            FieldScalar::Rat(x) => {
                if x.denom().is_one() {
                    x.numer().to_string()
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            }
        }
    }

    /// Parses a scalar: an integer, or `num/den` over the rationals.
    pub fn parse_scalar(&self, text: &str) -> Result<FieldScalar, String> {
        match self {
            Field::Prime(_) => {
                if let Some((n, d)) = text.split_once('/') {
                    let n: i64 = n.trim().parse().map_err(|_| format!("bad coefficient `{text}`"))?;
                    let d: i64 = d.trim().parse().map_err(|_| format!("bad coefficient `{text}`"))?;
                    if self.is_zero(&self.from_i64(d)) {
                        return Err(format!("coefficient `{text}` has denominator 0 mod p"));
                    }
                    Ok(self.from_ratio(n, d))
                } else {
                    let n: i64 = text.trim().parse().map_err(|_| format!("bad coefficient `{text}`"))?;
                    Ok(self.from_i64(n))
                }
            }
            Field::Rational => {
                if let Some((n, d)) = text.split_once('/') {
                    let n: BigInt = n.trim().parse().map_err(|_| format!("bad coefficient `{text}`"))?;
                    let d: BigInt = d.trim().parse().map_err(|_| format!("bad coefficient `{text}`"))?;
                    if d.is_zero() {
                        return Err(format!("coefficient `{text}` has zero denominator"));
                    }
                    Ok(FieldScalar::Rat(BigRational::new(n, d)))
                } else {
                    let n: BigInt = text.trim().parse().map_err(|_| format!("bad coefficient `{text}`"))?;
                    Ok(FieldScalar::Rat(BigRational::from_integer(n)))
                }
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Prime(p) => write!(f, "GF {p}"),
            Field::Rational => write!(f, "QQ"),
        }
    }
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_reduces() {
        let f = Field::prime(7).unwrap();
        assert_eq!(f.from_i64(-1), FieldScalar::Fp(6));
        assert_eq!(f.from_i64(14), FieldScalar::Fp(0));
    }

    #[test]
    fn prime_validation() {
        assert!(Field::prime(2).is_ok());
        assert!(Field::prime(101).is_ok());
        assert!(Field::prime(1).is_err());
        assert!(Field::prime(91).is_err());
        assert!(Field::prime(1 << 31).is_err());
    }

    #[test]
    fn inverses() {
        let f = Field::prime(101).unwrap();
        for n in 1..101 {
            let a = f.from_i64(n);
            let i = f.inv(&a).unwrap();
            assert!(f.is_one(&f.mul(&a, &i)));
        }
        let q = Field::Rational;
        let a = q.from_ratio(-3, 4);
        assert!(q.is_one(&q.mul(&a, &q.inv(&a).unwrap())));
        assert!(q.inv(&q.zero()).is_none());
    }

    #[test]
    fn rational_lowest_terms() {
        let q = Field::Rational;
        assert_eq!(q.from_ratio(2, 4), q.from_ratio(1, 2));
        assert_eq!(q.from_ratio(1, -2), q.from_ratio(-1, 2));
        assert_eq!(q.format_scalar(&q.from_ratio(-6, 4)), "-3/2");
    }

    #[test]
    fn scalar_round_trip() {
        let q = Field::Rational;
        for s in [q.from_i64(5), q.from_ratio(-3, 2), q.zero()] {
            assert_eq!(q.parse_scalar(&q.format_scalar(&s)).unwrap(), s);
        }
        let f = Field::prime(5).unwrap();
        assert_eq!(f.parse_scalar("7").unwrap(), FieldScalar::Fp(2));
    }
}
