//! The magic action of PGammaL(2,q) on functions vanishing at 0, and
//! equivalence of o-permutations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collineation::{Coll2, Collineation, Group};
use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};
use crate::ovals::OPoly;
use crate::projspace::P2;

/// `psi = (A, gamma)` with `A = (a b; c d)` and `gamma: x -> x^(2^gamma)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MagicElement {
    pub a: Fe,
    pub b: Fe,
    pub c: Fe,
    pub d: Fe,
    pub gamma: u32,
}

impl MagicElement {
    pub fn identity() -> Self {
        MagicElement { a: Fe::ONE, b: Fe::ZERO, c: Fe::ZERO, d: Fe::ONE, gamma: 0 }
    }

    pub fn new(f: &Field, a: Fe, b: Fe, c: Fe, d: Fe, gamma: u32) -> Result<Self> {
        let m = MagicElement { a, b, c, d, gamma: gamma % f.h() };
        if m.det(f).is_zero() {
            return Err(Error::Invalid("singular matrix".into()));
        }
        Ok(m.normalized(f))
    }

    pub fn det(&self, f: &Field) -> Fe {
        f.mul(self.a, self.d) + f.mul(self.b, self.c)
    }

    /// Scales so that `b = 1`, or `a = 1` when `b = 0`.
    pub fn normalized(&self, f: &Field) -> Self {
        let s = if !self.b.is_zero() { f.inv(self.b) } else { f.inv(self.a) };
        MagicElement {
            a: f.mul(self.a, s),
            b: f.mul(self.b, s),
            c: f.mul(self.c, s),
            d: f.mul(self.d, s),
            gamma: self.gamma,
        }
    }

    /// `self o other` (apply `other` first): `(A2 A1^gamma2, gamma1 + gamma2)`.
    pub fn compose(&self, f: &Field, other: &Self) -> Self {
        let g = self.gamma;
        let (a1, b1, c1, d1) = (f.frob(other.a, g), f.frob(other.b, g), f.frob(other.c, g), f.frob(other.d, g));
        MagicElement {
            a: f.mul(self.a, a1) + f.mul(self.b, c1),
            b: f.mul(self.a, b1) + f.mul(self.b, d1),
            c: f.mul(self.c, a1) + f.mul(self.d, c1),
            d: f.mul(self.c, b1) + f.mul(self.d, d1),
            gamma: (self.gamma + other.gamma) % f.h(),
        }
        .normalized(f)
    }
}

/// All `q (q^2 - 1) h` elements of PGammaL(2,q) in a fixed order.
pub fn pgl2_elements(f: &Field) -> Vec<MagicElement> {
    let mut out = Vec::with_capacity((f.q().pow(3) - f.q()) * f.h() as usize);
    for gamma in 0..f.h() {
        for c in f.elements() {
            for d in f.nonzero() {
                out.push(MagicElement { a: Fe::ONE, b: Fe::ZERO, c, d, gamma });
            }
        }
        for a in f.elements() {
            for c in f.elements() {
                for d in f.elements() {
                    if !(f.mul(a, d) + c).is_zero() {
                        out.push(MagicElement { a, b: Fe::ONE, c, d, gamma });
                    }
                }
            }
        }
    }
    out
}

/// Value table of `psi f`. The value at the pole `x = d/b` is the one that
/// keeps the degree at most `q - 2`.
pub fn magic_values(psi: &MagicElement, fun: &OPoly) -> Vec<Fe> {
    let f = fun.field();
    let g = psi.gamma;
    let back = f.frob_inverse_exp(g);
    let fg = |y: Fe| f.frob(fun.eval(f.frob(y, back)), g);
    let MagicElement { a, b, c, d, .. } = *psi;
    let r_inv = f.sqrt(f.inv(psi.det(f)));
    let t1 = if b.is_zero() { Fe::ZERO } else { f.mul(b, fg(f.div(a, b))) };
    let t2 = if d.is_zero() { Fe::ZERO } else { f.mul(d, fg(f.div(c, d))) };
    let mut vals = vec![Fe::ZERO; f.q()];
    let mut pole = None;
    let mut sum = Fe::ZERO;
    for x in f.elements() {
        let den = f.mul(b, x) + d;
        if den.is_zero() {
            pole = Some(x);
            continue;
        }
        let y = f.div(f.mul(a, x) + c, den);
        let v = f.mul(r_inv, f.mul(den, fg(y)) + f.mul(t1, x) + t2);
        vals[x.idx()] = v;
        sum += v;
    }
    if let Some(p) = pole {
        vals[p.idx()] = sum;
    }
    vals
}

pub fn magic_apply(psi: &MagicElement, fun: &OPoly) -> Result<OPoly> {
    let f = fun.field();
    if psi.det(f).is_zero() {
        return Err(Error::Invalid("singular matrix".into()));
    }
    OPoly::from_values(f, magic_values(psi, fun))
}

/// Collineation carrying `O(f)` onto `O(psi f)`; it fixes the nucleus
/// (0,0,1) and acts on the first two coordinates through `A^T`.
pub fn induced_collineation(psi: &MagicElement, fun: &OPoly) -> Coll2 {
    let f = fun.field();
    let g = psi.gamma;
    let back = f.frob_inverse_exp(g);
    let fg = |y: Fe| f.frob(fun.eval(f.frob(y, back)), g);
    let MagicElement { a, b, c, d, .. } = *psi;
    let r = f.sqrt(psi.det(f));
    let f1 = if b.is_zero() { Fe::ZERO } else { fg(f.div(a, b)) };
    let f2 = if d.is_zero() { Fe::ZERO } else { fg(f.div(c, d)) };
    let m20 = f.div(f.mul(f.mul(b, c), f1) + f.mul(f.mul(a, d), f2), r);
    let m21 = f.div(f.mul(f.mul(b, d), f1 + f2), r);
    let m = [[a, c, m20], [b, d, m21], [Fe::ZERO, Fe::ZERO, r]];
    Collineation::new(f, m, g).expect("invertible")
}

/// `(psi, lambda)` with `psi f = lambda g`, first in the fixed element order.
pub fn magic_equivalent(f: &OPoly, g: &OPoly) -> Option<(MagicElement, Fe)> {
    magic_witnesses(f, g, true).into_iter().next()
}

/// Every `(psi, lambda)` with `psi f = lambda g` (or only the first).
pub fn magic_witnesses(f: &OPoly, g: &OPoly, first_only: bool) -> Vec<(MagicElement, Fe)> {
    let field = f.field();
    if field != g.field() {
        return Vec::new();
    }
    let g1 = g.eval(Fe::ONE);
    if g1.is_zero() {
        return Vec::new();
    }
    let test = |psi: &MagicElement| -> Option<(MagicElement, Fe)> {
        let vals = magic_values(psi, f);
        let lambda = field.div(vals[1], g1);
        let ok = field.elements().all(|x| vals[x.idx()] == field.mul(lambda, g.eval(x)));
        (ok && !lambda.is_zero()).then_some((*psi, lambda))
    };
    let elems = pgl2_elements(field);
    if first_only {
        elems.par_iter().find_map_first(test).into_iter().collect()
    } else {
        elems.par_iter().filter_map(test).collect()
    }
}

/// `(x0,x1,x2) -> (x0,x2,x1)`, carrying `O(f)` onto `D(f^-1)`.
pub fn tau() -> Coll2 {
    let z = Fe::ZERO;
    let o = Fe::ONE;
    Collineation { m: [[o, z, z], [z, z, o], [z, o, z]], k: 0 }
}

/// A witness for the orbit-constrained equivalence used in the spread
/// classification: `g` in the pool and `psi` with `psi(f^-1) = lambda g^-1`
/// such that the collineation `D(f) -> D(g)` induced by `psi` sends `p`
/// into the orbit of (0,0,1) under `stab_g` (the stabilizer of `D(g)`).
#[derive(Clone, Debug)]
pub struct OrbitWitness {
    pub pool_index: usize,
    pub psi: MagicElement,
    pub lambda: Fe,
    pub collineation: Coll2,
    pub image: P2,
}

/// `pool` holds `(g, stabilizer of D(g))` pairs; `stab` may be `None`, in
/// which case the image must be (0,0,1) itself.
pub fn find_equivalence_with_orbit_constraint(
    f: &OPoly,
    p: &P2,
    pool: &[(OPoly, Option<&Group<3>>)],
) -> Result<Option<OrbitWitness>> {
    let field = f.field();
    let finv = f.inverse()?;
    let target = P2::from_coords([Fe::ZERO, Fe::ZERO, Fe::ONE]);
    let t = tau();
    for (i, (g, stab)) in pool.iter().enumerate() {
        let ginv = g.inverse()?;
        let orbit: Vec<P2> = match stab {
            Some(s) => {
                let mut o: Vec<P2> = s.elements.iter().map(|x| x.apply(field, &target)).collect();
                o.sort();
                o.dedup();
                o
            }
            None => vec![target],
        };
        for (psi, lambda) in magic_witnesses(&finv, &ginv, false) {
            // O(f^-1) -> O(lambda g^-1) -> O(g^-1), then conjugate by tau
            let on_o = induced_collineation(&psi, &finv);
            let unscale = Collineation::new(
                field,
                [[Fe::ONE, Fe::ZERO, Fe::ZERO], [Fe::ZERO, Fe::ONE, Fe::ZERO], [Fe::ZERO, Fe::ZERO, field.inv(lambda)]],
                0,
            )?;
            let on_d = t.compose(field, &unscale.compose(field, &on_o.compose(field, &t)));
            let image = on_d.apply(field, p);
            if orbit.binary_search(&image).is_ok() {
                return Ok(Some(OrbitWitness { pool_index: i, psi, lambda, collineation: on_d, image }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collineation::{find_set_map, PointSet};
    use crate::ovals::{named_opoly, Family, Oval};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(h: u32) -> &'static Field {
        Field::standard(h).unwrap()
    }

    fn random_psi(f: &Field, rng: &mut ChaCha8Rng) -> MagicElement {
        loop {
            let e: [Fe; 4] = std::array::from_fn(|_| Fe(rng.gen_range(0..f.q()) as u8));
            if let Ok(m) = MagicElement::new(f, e[0], e[1], e[2], e[3], rng.gen_range(0..f.h())) {
                return m;
            }
        }
    }

    /// All o-permutations over GF(4) and GF(8) that are monomials or come
    /// from the named families.
    fn opermutations(f: &'static Field) -> Vec<OPoly> {
        (1..f.q() as u64).map(|e| OPoly::monomial(f, e)).filter(|p| p.is_opermutation()).collect()
    }

    #[test]
    fn group_order() {
        assert_eq!(pgl2_elements(gf(2)).len(), 60 * 2);
        assert_eq!(pgl2_elements(gf(3)).len(), 504 * 3);
    }

    #[test]
    fn frobenius_elements() {
        let f = gf(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut vals: Vec<Fe> = (0..16).map(|_| Fe(rng.gen_range(0..16))).collect();
        vals[0] = Fe::ZERO;
        let fun = OPoly::from_values(f, vals).unwrap();
        for g in 0..4 {
            let psi = MagicElement { gamma: g, ..MagicElement::identity() };
            assert_eq!(magic_apply(&psi, &fun).unwrap(), fun.frobenius(g));
        }
        // (I, sqrt) sends h to x -> h(x^2)^(1/2)
        let h = named_opoly(gf(6), Family::SubiacoI).unwrap();
        let f6 = gf(6);
        let psi = MagicElement { gamma: f6.sqrt_exp(), ..MagicElement::identity() };
        let expect = OPoly::from_fn(f6, |x| f6.sqrt(h.eval(f6.square(x))));
        assert_eq!(magic_apply(&psi, &h).unwrap(), expect);
    }

    #[test]
    fn sqrt_is_fixed_up_to_scalar() {
        let f = gf(4);
        let r = OPoly::monomial(f, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let psi = random_psi(f, &mut rng);
            let img = magic_apply(&psi, &r).unwrap();
            let l = img.eval(Fe::ONE);
            assert_eq!(img, r.scale(l));
        }
    }

    #[test]
    fn composition_law_and_preservation() {
        for h in [2u32, 3, 4] {
            let f = gf(h);
            let mut pool = opermutations(f);
            if h == 4 {
                pool.push(named_opoly(f, Family::SubiacoI).unwrap());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(h as u64);
            let elems = pgl2_elements(f);
            for fun in &pool {
                let sample: Vec<MagicElement> =
                    if h == 2 { elems.clone() } else { (0..40).map(|_| random_psi(f, &mut rng)).collect() };
                for psi in &sample {
                    let img = magic_apply(psi, fun).unwrap();
                    assert!(img.is_opermutation(), "{psi:?} on {fun:?}");
                    assert!(img.degree().is_none_or(|d| d <= f.q() - 2));
                    let other = sample[rng.gen_range(0..sample.len())];
                    let two = magic_apply(&other, &img).unwrap();
                    assert_eq!(two, magic_apply(&other.compose(f, psi), fun).unwrap());
                }
            }
        }
    }

    #[test]
    fn induced_collineation_maps_ovals() {
        let f = gf(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for fun in opermutations(f) {
            for _ in 0..30 {
                let psi = random_psi(f, &mut rng);
                let g = induced_collineation(&psi, &fun);
                let src = Oval::o_form(&fun).unwrap();
                let dst = Oval::o_form(&magic_apply(&psi, &fun).unwrap()).unwrap();
                assert_eq!(src.map_points(|p| g.apply(f, p)), dst);
            }
        }
    }

    #[test]
    fn equivalence_examples() {
        let f = gf(3);
        let sq = OPoly::monomial(f, 2);
        let rt = OPoly::monomial(f, 4);
        let (psi, l) = magic_equivalent(&sq, &sq).unwrap();
        assert_eq!(magic_apply(&psi, &sq).unwrap(), sq.scale(l));
        // O(x^2) is a pointed conic and O(x^(1/2)) a conic, so no element
        // of the group relates them
        assert!(magic_equivalent(&sq, &rt).is_none());
        assert!(magic_equivalent(&rt, &sq).is_none());
        let scaled = sq.scale(Fe(5));
        let (psi, l) = magic_equivalent(&scaled, &sq).unwrap();
        assert_eq!(magic_apply(&psi, &scaled).unwrap(), sq.scale(l));
    }

    #[test]
    fn magic_equivalence_matches_projective_equivalence_q8() {
        let f = gf(3);
        // every o-permutation of GF(8) with f(1) = 1 is a monomial or a
        // normalized image; take the whole magic orbit of the monomials
        let mut pool = opermutations(f);
        let extra: Vec<OPoly> = pool
            .iter()
            .flat_map(|p| pgl2_elements(f).into_iter().step_by(97).map(move |m| magic_apply(&m, p).unwrap()))
            .collect();
        pool.extend(extra);
        pool.sort_by_key(|p| p.values().to_vec());
        pool.dedup();
        for x in &pool {
            for y in &pool {
                let magic = magic_equivalent(x, y).is_some();
                let ox = Oval::o_form(x).unwrap();
                let oy = Oval::o_form(y).unwrap();
                let geo = find_set_map(f, ox.points(), oy.points(), Some((ox.nucleus(), oy.nucleus()))).unwrap();
                assert_eq!(magic, geo.is_some());
                if let Some(g) = geo {
                    let t = PointSet::new(8, oy.points());
                    assert!(ox.points().iter().all(|p| t.contains(&g.apply(f, p))));
                }
            }
        }
    }

    #[test]
    fn orbit_constraint() {
        let f = gf(3);
        let sq = OPoly::monomial(f, 2);
        let d = Oval::d_form(&sq).unwrap();
        for p in d.points() {
            let w = find_equivalence_with_orbit_constraint(&sq, p, &[(sq.clone(), None)]).unwrap();
            let w = w.expect("conic stabilizer is transitive");
            assert_eq!(w.image, P2::from_coords([Fe::ZERO, Fe::ZERO, Fe::ONE]));
            assert_eq!(d.map_points(|x| w.collineation.apply(f, x)), d);
        }
        assert!(find_equivalence_with_orbit_constraint(&sq, &d.points()[0], &[]).unwrap().is_none());
    }
}
