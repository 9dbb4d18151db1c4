//! Arithmetic in the Mersenne prime field GF(2^31 - 1).
//!
//! All decodability decisions are made here, so rank checks are exact.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The field modulus, 2^31 - 1.
pub const MODULUS: u64 = (1 << 31) - 1;

/// An element of GF(2^31 - 1), always kept reduced.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fp(u32);

impl Fp {
    pub const ZERO: Fp = Fp(0);
    pub const ONE: Fp = Fp(1);

    pub fn new(v: u64) -> Self {
        Fp((v % MODULUS) as u32)
    }

    pub fn from_i64(v: i64) -> Self {
        Fp(v.rem_euclid(MODULUS as i64) as u32)
    }

    pub fn value(self) -> u64 {
        self.0 as u64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(self) -> Self {
        assert!(!self.is_zero(), "inverse of zero in GF(p)");
        self.pow(MODULUS - 2)
    }

    /// For an entry `(x_i - y_j)^-1` of [`crate::schemes::cauchy`], the
    /// integer gap `x_i - y_j`. Zero maps to zero.
    pub fn cauchy_gap(self) -> u64 {
        if self.is_zero() {
            0
        } else {
            self.inv().value()
        }
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Fp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: u64 = s
            .trim()
            .parse()
            .map_err(|e| format!("bad field element {s:?}: {e}"))?;
        if v >= MODULUS {
            return Err(format!("field element {v} not reduced modulo {MODULUS}"));
        }
        Ok(Fp(v as u32))
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let s = self.0 as u64 + rhs.0 as u64;
        Fp(if s >= MODULUS { s - MODULUS } else { s } as u32)
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        let s = self.0 as u64 + MODULUS - rhs.0 as u64;
        Fp(if s >= MODULUS { s - MODULUS } else { s } as u32)
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        let p = self.0 as u64 * rhs.0 as u64;
        // 2^31 = 1 (mod p)
        let r = (p & MODULUS) + (p >> 31);
        Fp(if r >= MODULUS { r - MODULUS } else { r } as u32)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp::ZERO - self
    }
}

impl AddAssign for Fp {
    fn add_assign(&mut self, rhs: Fp) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fp {
    fn sub_assign(&mut self, rhs: Fp) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fp {
    fn mul_assign(&mut self, rhs: Fp) {
        *self = *self * rhs;
    }
}

// Coefficients travel as decimal strings in the plan JSON.
impl Serialize for Fp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
