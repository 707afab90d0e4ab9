//! Quadratic extension GF(q^2) = GF(q)[w] / (w^2 + w + e) with Tr(e) = 1.

use crate::gfield::{Fe, Field};

/// `re + im * w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe2 {
    pub re: Fe,
    pub im: Fe,
}

impl Fe2 {
    pub const ONE: Fe2 = Fe2 { re: Fe::ONE, im: Fe::ZERO };

    pub fn from_base(a: Fe) -> Fe2 {
        Fe2 { re: a, im: Fe::ZERO }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Ext2 {
    pub base: &'static Field,
    /// Constant term of the defining polynomial `w^2 + w + eps`.
    pub eps: Fe,
}

impl Ext2 {
    /// Uses the least trace-one element as `eps`, which makes the defining
    /// polynomial irreducible over the base field.
    pub fn new(base: &'static Field) -> Ext2 {
        let eps = base.elements().find(|&e| base.trace(e) == 1).expect("trace is onto");
        Ext2 { base, eps }
    }

    pub fn add(&self, x: Fe2, y: Fe2) -> Fe2 {
        Fe2 { re: x.re + y.re, im: x.im + y.im }
    }

    pub fn mul(&self, x: Fe2, y: Fe2) -> Fe2 {
        let f = self.base;
        let bd = f.mul(x.im, y.im);
        Fe2 { re: f.mul(x.re, y.re) + f.mul(bd, self.eps), im: f.mul(x.re, y.im) + f.mul(x.im, y.re) + bd }
    }

    pub fn pow(&self, x: Fe2, mut e: u64) -> Fe2 {
        let mut acc = Fe2::ONE;
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// `x^q`: conjugation swaps the two roots `w` and `w + 1`.
    pub fn conj(&self, x: Fe2) -> Fe2 {
        Fe2 { re: x.re + x.im, im: x.im }
    }

    /// `T(x) = x + x^q`, which lands in the base field.
    pub fn trace_to_base(&self, x: Fe2) -> Fe {
        let t = self.add(x, self.conj(x));
        debug_assert!(t.im.is_zero());
        t.re
    }

    pub fn norm(&self, x: Fe2) -> Fe2 {
        self.mul(x, self.conj(x))
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe2> + '_ {
        self.base.elements().flat_map(move |im| self.base.elements().map(move |re| Fe2 { re, im }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_is_a_field_gf16() {
        let f = Field::standard(2).unwrap();
        let e = Ext2::new(f);
        let elems: Vec<_> = e.elements().collect();
        assert_eq!(elems.len(), 16);
        // every nonzero element has an inverse
        for &x in &elems {
            if x == (Fe2 { re: Fe::ZERO, im: Fe::ZERO }) {
                continue;
            }
            assert!(elems.iter().any(|&y| e.mul(x, y) == Fe2::ONE));
            assert_eq!(e.pow(x, 15), Fe2::ONE);
        }
    }

    #[test]
    fn conjugation_is_frobenius_q() {
        let f = Field::standard(3).unwrap();
        let e = Ext2::new(f);
        for x in e.elements() {
            assert_eq!(e.conj(x), e.pow(x, 8));
            assert!(e.norm(x).im.is_zero());
        }
    }

    #[test]
    fn unit_circle_size() {
        let f = Field::standard(6).unwrap();
        let e = Ext2::new(f);
        let n = e.elements().filter(|&x| e.pow(x, 65) == Fe2::ONE).count();
        assert_eq!(n, 65);
    }
}
