//! Arithmetic in GF(2^h), 1 <= h <= 8.
//!
//! A [`Field`] owns the reduction polynomial together with log/antilog and
//! full multiplication tables. Elements are plain bit patterns wrapped in
//! [`Fe`]; bit `i` is the coefficient of `x^i`. Fields built through
//! [`Field::standard`] use the lexicographically least irreducible polynomial
//! of each degree and are cached for the lifetime of the process.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of GF(2^h), encoded as its coefficient bit pattern.
///
/// The derived ordering (integer order on the encoding) is the total order
/// used by every canonical form in the crate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u8);

pub type FieldElement = Fe;

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Fe {
    type Output = Fe;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Fe) -> Fe {
        Fe(self.0 ^ rhs.0)
    }
}

impl AddAssign for Fe {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Fe) {
        self.0 ^= rhs.0;
    }
}

/// GF(2^h) with precomputed tables. Immutable once built.
pub struct Field {
    h: u32,
    q: usize,
    modulus: u32,
    generator: Fe,
    exp: Vec<u8>,
    log: Vec<u8>,
    mul: Vec<u8>,
    inv: Vec<u8>,
    sqrt: Vec<u8>,
    trace: Vec<u8>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field").field("h", &self.h).field("modulus", &format_args!("{:#x}", self.modulus)).finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h && self.modulus == other.modulus
    }
}
impl Eq for Field {}

/// Carry-less product of two GF(2) polynomials.
fn clmul(a: u32, b: u32) -> u32 {
    let mut r = 0;
    for i in 0..16 {
        if b >> i & 1 == 1 {
            r ^= a << i;
        }
    }
    r
}

fn degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b);
    while a != 0 && degree(a) >= db {
        a ^= b << (degree(a) - db);
    }
    a
}

/// Irreducibility by trial division with every polynomial of degree <= h/2.
pub fn is_irreducible(p: u32) -> bool {
    let d = degree(p);
    if d < 1 {
        return false;
    }
    for cand in 2u32..(1 << (d / 2 + 1)) {
        if degree(cand) >= 1 && degree(cand) <= d / 2 && poly_rem(p, cand) == 0 {
            return false;
        }
    }
    true
}

/// The least irreducible polynomial of degree `h` with nonzero constant
/// term (for `h = 1` this picks `x + 1` over `x`).
pub fn least_irreducible(h: u32) -> u32 {
    (1u32 << h..1u32 << (h + 1))
        .find(|&p| p & 1 == 1 && is_irreducible(p))
        .expect("irreducible polynomials exist in every degree")
}

static STANDARD: [OnceLock<Field>; 9] = [
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
];

impl Field {
    /// The cached field GF(2^h) under the least irreducible modulus.
    pub fn standard(h: u32) -> Result<&'static Field> {
        if !(1..=8).contains(&h) {
            return Err(Error::Unsupported(format!("extension degree {h} outside 1..=8")));
        }
        Ok(STANDARD[h as usize].get_or_init(|| Field::build(h, least_irreducible(h))))
    }

    /// The cached standard field of order `q`.
    pub fn of_order(q: usize) -> Result<&'static Field> {
        if !q.is_power_of_two() || q < 2 {
            return Err(Error::Unsupported(format!("q = {q} is not a power of two >= 2")));
        }
        Field::standard(q.trailing_zeros())
    }

    /// A field with an explicit modulus. The value is leaked so it can be
    /// shared as `&'static` like the standard fields.
    pub fn with_modulus(h: u32, modulus: u32) -> Result<&'static Field> {
        if !(1..=8).contains(&h) {
            return Err(Error::Unsupported(format!("extension degree {h} outside 1..=8")));
        }
        if degree(modulus) != h as i32 || !is_irreducible(modulus) {
            return Err(Error::Invalid(format!("modulus {modulus:#x} is not an irreducible polynomial of degree {h}")));
        }
        if modulus == least_irreducible(h) {
            return Field::standard(h);
        }
        Ok(Box::leak(Box::new(Field::build(h, modulus))))
    }

    fn build(h: u32, modulus: u32) -> Field {
        let q = 1usize << h;
        let slow_mul = |a: u32, b: u32| poly_rem(clmul(a, b), modulus);
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                mul[a * q + b] = slow_mul(a as u32, b as u32) as u8;
            }
        }
        // least element of multiplicative order q-1
        let generator = (1..q)
            .find(|&g| {
                let mut x = 1usize;
                for i in 1..q {
                    x = mul[x * q + g] as usize;
                    if x == 1 {
                        return i == q - 1;
                    }
                }
                false
            })
            .expect("multiplicative group is cyclic");
        let mut exp = vec![0u8; q - 1];
        let mut log = vec![0u8; q];
        let mut x = 1usize;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = x as u8;
            log[x] = i as u8;
            x = mul[x * q + generator] as usize;
        }
        let mut inv = vec![0u8; q];
        for a in 1..q {
            let l = log[a] as usize;
            inv[a] = exp[(q - 1 - l) % (q - 1)];
        }
        let mut sqrt = vec![0u8; q];
        for a in 0..q {
            sqrt[mul[a * q + a] as usize] = a as u8;
        }
        let mut trace = vec![0u8; q];
        for (a, t) in trace.iter_mut().enumerate() {
            let mut acc = 0usize;
            let mut p = a;
            for _ in 0..h {
                acc ^= p;
                p = mul[p * q + p] as usize;
            }
            debug_assert!(acc <= 1);
            *t = acc as u8;
        }
        Field { h, q, modulus, generator: Fe(generator as u8), exp, log, mul, inv, sqrt, trace }
    }

    #[inline]
    pub fn h(&self) -> u32 {
        self.h
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// The primitive element the log tables are built on.
    pub fn generator(&self) -> Fe {
        self.generator
    }

    /// All elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.q).map(|i| Fe(i as u8))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Fe> + Clone {
        (1..self.q).map(|i| Fe(i as u8))
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.idx() < self.q
    }

    /// Checked element constructor.
    pub fn elem(&self, bits: u32) -> Result<Fe> {
        if (bits as usize) < self.q {
            Ok(Fe(bits as u8))
        } else {
            Err(Error::Invalid(format!("{bits} is not an element of GF({})", self.q)))
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.mul[a.idx() * self.q + b.idx()])
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn try_inv(&self, a: Fe) -> Option<Fe> {
        if a.is_zero() {
            None
        } else {
            Some(Fe(self.inv[a.idx()]))
        }
    }

    pub fn checked_inv(&self, a: Fe) -> Result<Fe> {
        self.try_inv(a).ok_or_else(|| Error::Invalid("zero has no inverse".into()))
    }

    /// Inverse of a nonzero element. Panics on zero.
    #[inline]
    pub fn inv(&self, a: Fe) -> Fe {
        self.try_inv(a).expect("inverse of zero")
    }

    #[inline]
    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b))
    }

    #[inline]
    pub fn square(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    #[inline]
    pub fn sqrt(&self, a: Fe) -> Fe {
        Fe(self.sqrt[a.idx()])
    }

    #[inline]
    pub fn trace(&self, a: Fe) -> u8 {
        self.trace[a.idx()]
    }

    /// `a^e` for any integer exponent `e >= 0` (with `0^0 = 1`).
    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let l = self.log[a.idx()] as u64 * (e % (self.q as u64 - 1)) % (self.q as u64 - 1);
        Fe(self.exp[l as usize])
    }

    /// Signed exponent; negative powers of zero are an error.
    pub fn powi(&self, a: Fe, e: i64) -> Result<Fe> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            let inv = self.checked_inv(a)?;
            Ok(self.pow(inv, e.unsigned_abs()))
        }
    }

    /// Discrete log to the base [`Field::generator`].
    pub fn log(&self, a: Fe) -> Option<usize> {
        (!a.is_zero()).then(|| self.log[a.idx()] as usize)
    }

    pub fn antilog(&self, i: usize) -> Fe {
        Fe(self.exp[i % (self.q - 1)])
    }

    /// The automorphism `a -> a^(2^k)`.
    pub fn frobenius_pow(&self, a: Fe, k: u32) -> Result<Fe> {
        if k >= self.h {
            return Err(Error::Invalid(format!("Frobenius exponent {k} outside 0..{}", self.h)));
        }
        Ok(self.frob(a, k))
    }

    /// Unchecked Frobenius; `k` is reduced modulo `h`.
    #[inline]
    pub fn frob(&self, a: Fe, k: u32) -> Fe {
        let mut x = a;
        for _ in 0..k % self.h {
            x = self.square(x);
        }
        x
    }

    /// Inverse automorphism exponent: `(-k) mod h`.
    pub fn frob_inverse_exp(&self, k: u32) -> u32 {
        (self.h - k % self.h) % self.h
    }

    /// Frobenius exponent of the square-root automorphism, i.e. `h - 1`.
    pub fn sqrt_exp(&self) -> u32 {
        self.h - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_moduli() {
        let expected = [0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10000011, 0b100011011];
        for h in 1..=8 {
            assert_eq!(Field::standard(h).unwrap().modulus(), expected[h as usize - 1], "h = {h}");
        }
    }

    #[test]
    fn gf8_examples() {
        let f = Field::standard(3).unwrap();
        assert_eq!(f.mul(Fe(2), Fe(2)), Fe(4));
        assert_eq!(f.mul(Fe(4), Fe(2)), Fe(3));
        assert_eq!(f.inv(Fe(2)), Fe(5));
        assert_eq!(f.inv(Fe(1)), Fe(1));
        assert_eq!(f.sqrt(Fe(0)), Fe(0));
        assert_eq!(f.sqrt(Fe(1)), Fe(1));
        assert_eq!(f.sqrt(Fe(2)), Fe(6));
        assert_eq!(f.trace(Fe(1)), 1);
        assert_eq!(f.trace(Fe(2)), 0);
    }

    #[test]
    fn identity_and_zero_inverse() {
        let f = Field::standard(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = Fe(rng.gen_range(0..64));
            assert_eq!(f.mul(a, Fe::ONE), a);
        }
        assert!(f.try_inv(Fe::ZERO).is_none());
        assert!(f.checked_inv(Fe::ZERO).is_err());
    }

    #[test]
    fn inverse_is_involution_gf16() {
        let f = Field::standard(4).unwrap();
        for a in f.nonzero() {
            assert_eq!(f.inv(f.inv(a)), a);
            assert_eq!(f.mul(a, f.inv(a)), Fe::ONE);
        }
    }

    #[test]
    fn sqrt_of_square_gf64() {
        let f = Field::standard(6).unwrap();
        for a in f.elements() {
            assert_eq!(f.sqrt(f.square(a)), a);
            assert_eq!(f.square(f.sqrt(a)), a);
            assert_eq!(f.frobenius_pow(a, 5).unwrap(), f.sqrt(a));
            assert_eq!(f.frobenius_pow(a, 0).unwrap(), a);
        }
        assert!(f.frobenius_pow(Fe(3), 6).is_err());
    }

    #[test]
    fn trace_fibres_gf64() {
        let f = Field::standard(6).unwrap();
        // direct evaluation of a + a^2 + ... + a^(2^(h-1))
        let ones = f
            .elements()
            .filter(|&a| {
                let mut acc = Fe::ZERO;
                let mut p = a;
                for _ in 0..6 {
                    acc += p;
                    p = f.square(p);
                }
                assert!(acc.0 <= 1);
                assert_eq!(acc.0, f.trace(a));
                acc == Fe::ONE
            })
            .count();
        assert_eq!(ones, 32);
    }

    #[test]
    fn frobenius_additive_gf64() {
        let f = Field::standard(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (a, b) = (Fe(rng.gen_range(0..64)), Fe(rng.gen_range(0..64)));
            for k in 0..6 {
                assert_eq!(f.frob(a + b, k), f.frob(a, k) + f.frob(b, k));
                assert_eq!(f.frob(f.mul(a, b), k), f.mul(f.frob(a, k), f.frob(b, k)));
            }
        }
    }

    #[test]
    fn log_tables_round_trip() {
        for h in 1..=8 {
            let f = Field::standard(h).unwrap();
            let mut seen = std::collections::HashSet::new();
            for a in f.nonzero() {
                let l = f.log(a).unwrap();
                assert_eq!(f.antilog(l), a);
                seen.insert(l);
            }
            assert_eq!(seen.len(), f.q() - 1);
        }
    }

    #[test]
    fn field_axioms_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for h in 1..=8 {
            let f = Field::standard(h).unwrap();
            let q = f.q() as u32;
            for _ in 0..200 {
                let a = Fe(rng.gen_range(0..q) as u8);
                let b = Fe(rng.gen_range(0..q) as u8);
                let c = Fe(rng.gen_range(0..q) as u8);
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
                assert_eq!(f.trace(a + b), f.trace(a) ^ f.trace(b));
                assert_eq!(f.trace(f.square(a)), f.trace(a));
            }
        }
    }

    #[test]
    fn custom_modulus() {
        // x^3 + x^2 + 1
        let f = Field::with_modulus(3, 0b1101).unwrap();
        assert_eq!(f.mul(Fe(4), Fe(2)), Fe(0b101));
        assert!(Field::with_modulus(3, 0b1111).is_err());
        assert!(Field::with_modulus(9, 0b1011).is_err());
    }
}
