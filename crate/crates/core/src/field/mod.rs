//! Prime-field arithmetic and the exact linear algebra used by the coders.
//!
//! The modulus is a runtime value so that tests can work over tiny fields
//! (`q = 7`, `q = 101`) while production runs use the Mersenne prime
//! `2^31 - 1`. Elements are plain canonical integers; every operation goes
//! through the owning [`PrimeField`].

mod linalg;
mod matrix;

pub use linalg::{rank, solve_vandermonde, EchelonSystem};
pub use matrix::FieldMatrix;
pub(crate) use matrix::parse_header as matrix_header;

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// `2^31 - 1`.
pub const MERSENNE_31: u64 = (1 << 31) - 1;

/// Canonical representative of an element of `F_q`, always in `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The prime field `F_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    modulus: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { modulus: MERSENNE_31 }
    }
}

impl PrimeField {
    /// Builds `F_q`, rejecting composite moduli.
    pub fn new(modulus: u64) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        Ok(Self { modulus })
    }

    /// The default field, `F_{2^31 - 1}`.
    pub fn mersenne31() -> Self {
        Self::default()
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(&self, value: u64) -> FieldElement {
        FieldElement(value % self.modulus)
    }

    /// Reduces a signed integer into the field.
    pub fn elem_i64(&self, value: i64) -> FieldElement {
        FieldElement((value as i128).rem_euclid(self.modulus as i128) as u64)
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        // a + b < 2q <= 2^65 would overflow for q near 2^64, so widen.
        let sum = a.0 as u128 + b.0 as u128;
        let q = self.modulus as u128;
        FieldElement(if sum >= q { sum - q } else { sum } as u64)
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 >= b.0 {
            FieldElement(a.0 - b.0)
        } else {
            FieldElement(self.modulus - (b.0 - a.0))
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a.0 == 0 {
            a
        } else {
            FieldElement(self.modulus - a.0)
        }
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let product = a.0 as u128 * b.0 as u128;
        if self.modulus == MERSENNE_31 {
            // 2^31 = 1 (mod q): fold the high bits twice.
            let folded = (product as u64 & MERSENNE_31) + (product >> 31) as u64;
            let folded = (folded & MERSENNE_31) + (folded >> 31);
            return FieldElement(if folded >= MERSENNE_31 { folded - MERSENNE_31 } else { folded });
        }
        FieldElement((product % self.modulus as u128) as u64)
    }

    pub fn pow(&self, base: FieldElement, mut exp: u64) -> FieldElement {
        let mut acc = FieldElement::ONE;
        let mut base = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.modulus - 2))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen_range(0..self.modulus))
    }

    /// Uniform over the nonzero elements.
    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen_range(1..self.modulus))
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for
/// every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
