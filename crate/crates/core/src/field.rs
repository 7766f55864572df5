//! Prime-field arithmetic over `Z_p` for word-sized primes (`p < 2^62`).
//!
//! Every coefficient, matrix entry and elimination step in the crate runs
//! through [`FieldElem`]. Elements remember their modulus so that mixing
//! fields is caught: the `checked_*` methods report it as an error and the
//! operator impls panic.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest modulus accepted by [`PrimeField::new`] (exclusive).
pub const MAX_MODULUS: u64 = 1 << 62;

/// Seeded generator used for every randomized choice in the crate.
pub type SeededRng = rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is out of range (need 2 <= p < 2^62)")]
    ModulusOutOfRange(u64),
    #[error("operands live in different fields (F_{left} vs F_{right})")]
    FieldMismatch { left: u64, right: u64 },
    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),
    #[error("no word-sized prime above {bound}: lower the degree cap (need bound < 2^61)")]
    Capacity { bound: BigUint },
}

/// The prime field `Z_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    p: u64,
}

impl TryFrom<u64> for PrimeField {
    type Error = FieldError;
    fn try_from(p: u64) -> Result<Self, FieldError> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.p
    }
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !(2..MAX_MODULUS).contains(&p) {
            return Err(FieldError::ModulusOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p })
    }

    /// Smallest prime strictly greater than `bound`.
    pub fn find_prime_above(bound: &BigUint) -> Result<Self, FieldError> {
        let capacity = || FieldError::Capacity {
            bound: bound.clone(),
        };
        let b = bound.to_u64().filter(|b| *b < (1 << 61)).ok_or_else(capacity)?;
        let mut candidate = b + 1;
        loop {
            if candidate >= 2 && is_prime(candidate) {
                return Ok(Self { p: candidate });
            }
            candidate += 1;
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces an unsigned integer into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> FieldElem {
        FieldElem {
            value: v % self.p,
            modulus: self.p,
        }
    }

    /// Reduces a signed integer into the field (`-1` maps to `p - 1`).
    pub fn from_i64(&self, v: i64) -> FieldElem {
        let r = (v as i128).rem_euclid(self.p as i128) as u64;
        FieldElem {
            value: r,
            modulus: self.p,
        }
    }

    #[inline]
    pub fn zero(&self) -> FieldElem {
        self.elem(0)
    }

    #[inline]
    pub fn one(&self) -> FieldElem {
        self.elem(1)
    }

    /// Uniform sample from `{0, ..., p-1}`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem {
            value: rng.gen_range(0..self.p),
            modulus: self.p,
        }
    }

    /// Uniform sample from the nonzero elements.
    pub fn sample_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem {
            value: rng.gen_range(1..self.p),
            modulus: self.p,
        }
    }

    pub fn contains(&self, e: &FieldElem) -> bool {
        e.modulus == self.p
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// An element of `Z_p`, always stored in canonical form `0 <= value < p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem {
    value: u64,
    modulus: u64,
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl FieldElem {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.modulus }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    #[inline]
    pub fn is_one(&self) -> bool {
        self.value == 1
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch {
                left: self.modulus,
                right: other.modulus,
            })
        }
    }

    pub fn checked_add(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(&other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_sub(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(&other)?;
        Ok(self.add_unchecked(other.neg_unchecked()))
    }

    pub fn checked_mul(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(&other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn checked_div(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(&other)?;
        Ok(self.mul_unchecked(other.inv()?))
    }

    #[inline]
    fn add_unchecked(self, other: Self) -> Self {
        // both < 2^62, so the sum cannot overflow
        let s = self.value + other.value;
        let value = if s >= self.modulus { s - self.modulus } else { s };
        Self { value, ..self }
    }

    #[inline]
    fn neg_unchecked(self) -> Self {
        let value = if self.value == 0 {
            0
        } else {
            self.modulus - self.value
        };
        Self { value, ..self }
    }

    #[inline]
    fn mul_unchecked(self, other: Self) -> Self {
        let value = ((self.value as u128 * other.value as u128) % self.modulus as u128) as u64;
        Self { value, ..self }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self) -> Result<Self, FieldError> {
        if self.value == 0 {
            return Err(FieldError::DivisionByZero(self.modulus));
        }
        let (mut r0, mut r1) = (self.modulus as i128, self.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Self {
            value: t0.rem_euclid(self.modulus as i128) as u64,
            ..self
        })
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(base);
            }
            base = base.mul_unchecked(base);
            e >>= 1;
        }
        acc
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign_method:ident, $checked:ident) => {
        impl $tr for FieldElem {
            type Output = FieldElem;
            #[inline]
            fn $method(self, rhs: FieldElem) -> FieldElem {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        impl $assign_tr for FieldElem {
            #[inline]
            fn $assign_method(&mut self, rhs: FieldElem) {
                *self = $tr::$method(*self, rhs);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign, checked_add);
forward_binop!(Sub, sub, SubAssign, sub_assign, checked_sub);
forward_binop!(Mul, mul, MulAssign, mul_assign, checked_mul);

impl Neg for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn neg(self) -> FieldElem {
        self.neg_unchecked()
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are a proven
/// witness set for every `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A reproducible generator for `seed`.
pub fn seeded_rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

/// Derives an independent child seed (splitmix64 finalizer over the pair).
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
