//! Scalar abstraction shared by the floating-point and exact code paths.
//!
//! Every formula in [`crate::geometry`] and [`crate::calculus`] is a
//! polynomial in the camera and fundamental-matrix entries, so it can be
//! evaluated over any commutative ring. `f64` is used for the numerical test;
//! [`Fp`] evaluates the very same formulas modulo a prime.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::{ClosedAddAssign, ClosedMulAssign, ClosedSubAssign, Scalar};
use num_traits::{One, Zero};

/// Commutative ring with unit, usable as a nalgebra scalar.
pub trait Ring:
    Scalar
    + Copy
    + Zero
    + One
    + ClosedAddAssign
    + ClosedSubAssign
    + ClosedMulAssign
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Scalar
        + Copy
        + Zero
        + One
        + ClosedAddAssign
        + ClosedSubAssign
        + ClosedMulAssign
        + Neg<Output = Self>
{
}

/// Element of the prime field GF(p).
///
/// The modulus travels with the value. Constants produced by `zero()` and
/// `one()` (and sums of them) carry modulus 0 and behave as plain integers
/// until they meet an element with a bound modulus, at which point they are
/// reduced. This lets generic code build 0/1 constant matrices without
/// knowing the prime.
#[derive(Clone, Copy)]
pub struct Fp {
    value: i64,
    modulus: u64,
}

impl Fp {
    pub fn new(value: u64, modulus: u64) -> Self {
        assert!(modulus > 1 && modulus < (1 << 62), "modulus out of range");
        Fp {
            value: (value % modulus) as i64,
            modulus,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Canonical representative in `0..p`. Unbound constants must be
    /// non-negative.
    pub fn value(&self) -> u64 {
        if self.modulus == 0 {
            assert!(self.value >= 0, "negative unbound constant");
            self.value as u64
        } else {
            self.value as u64
        }
    }

    /// Rebinds this element to `modulus`.
    pub fn bind(self, modulus: u64) -> Self {
        if self.modulus == modulus {
            return self;
        }
        debug_assert!(self.modulus == 0, "mixing two different moduli");
        Fp {
            value: self.value.rem_euclid(modulus as i64),
            modulus,
        }
    }

    pub fn is_zero_mod(&self) -> bool {
        self.value == 0
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = Fp {
            value: 1,
            modulus: self.modulus,
        };
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base *= base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inverse(self) -> Option<Self> {
        if self.modulus == 0 || self.value == 0 {
            return None;
        }
        Some(self.pow(self.modulus - 2))
    }

    fn unify(a: Self, b: Self) -> (i64, i64, u64) {
        let p = a.modulus.max(b.modulus);
        if p == 0 {
            (a.value, b.value, 0)
        } else {
            (a.bind(p).value, b.bind(p).value, p)
        }
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.modulus == 0 {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{} (mod {})", self.value, self.modulus)
        }
    }
}

impl PartialEq for Fp {
    fn eq(&self, other: &Self) -> bool {
        let (a, b, _) = Fp::unify(*self, *other);
        a == b
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::unify(self, rhs);
        if p == 0 {
            Fp {
                value: a.checked_add(b).expect("unbound constant overflow"),
                modulus: 0,
            }
        } else {
            Fp {
                value: ((a as i128 + b as i128) % p as i128) as i64,
                modulus: p,
            }
        }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::unify(self, rhs);
        if p == 0 {
            Fp {
                value: a.checked_sub(b).expect("unbound constant overflow"),
                modulus: 0,
            }
        } else {
            Fp {
                value: ((a as i128 - b as i128).rem_euclid(p as i128)) as i64,
                modulus: p,
            }
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::unify(self, rhs);
        if p == 0 {
            Fp {
                value: a.checked_mul(b).expect("unbound constant overflow"),
                modulus: 0,
            }
        } else {
            Fp {
                value: ((a as i128 * b as i128) % p as i128) as i64,
                modulus: p,
            }
        }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.modulus == 0 {
            Fp {
                value: -self.value,
                modulus: 0,
            }
        } else {
            Fp {
                value: (self.modulus as i64 - self.value) % self.modulus as i64,
                modulus: self.modulus,
            }
        }
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

impl Zero for Fp {
    fn zero() -> Self {
        Fp {
            value: 0,
            modulus: 0,
        }
    }

    fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp {
            value: 1,
            modulus: 0,
        }
    }
}
