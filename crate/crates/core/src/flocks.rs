//! q-clans, flocks of the cones x1^a = x0 x2^(a-1), the a <-> 1/a
//! coefficient swap, normalization, and herds of ovals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext2::Ext2;
use crate::gfield::{Fe, Field};
use crate::ovals::{
    adelaide_g, clan_scalar, fe2_from_code, least_trace_one, named_opoly, subiaco_g, Family, OPoly, Oval,
};
use crate::projspace::{ProjPoint, P2, P3};

/// Whether the binary form `a u0^2 + b u0 u1 + c u1^2` has only the
/// trivial zero.
pub fn anisotropic(f: &Field, a: Fe, b: Fe, c: Fe) -> bool {
    if b.is_zero() {
        return false;
    }
    f.trace(f.div(f.mul(a, c), f.square(b))) == 1
}

/// Nonzero `u` with `a u0^2 + b u0 u1 + c u1^2 = 0`, by exhaustive search.
pub fn isotropic_vector(f: &Field, a: Fe, b: Fe, c: Fe) -> Option<(Fe, Fe)> {
    for u0 in f.elements() {
        for u1 in f.elements() {
            if u0.is_zero() && u1.is_zero() {
                continue;
            }
            let v = f.mul(a, f.square(u0)) + f.mul(b, f.mul(u0, u1)) + f.mul(c, f.square(u1));
            if v.is_zero() {
                return Some((u0, u1));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClanDefect {
    NonzeroAtZero,
    /// `u (A_s - A_t) u^T = 0`.
    Isotropic {
        s: u8,
        t: u8,
        u: (u8, u8),
    },
}

/// A normalized q-clan `A_t = (a_t, t^(1/2); 0, b_t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QClan {
    field: &'static Field,
    a: Vec<Fe>,
    b: Vec<Fe>,
}

impl QClan {
    pub fn new(field: &'static Field, a: Vec<Fe>, b: Vec<Fe>) -> Result<QClan> {
        let q = field.q();
        if a.len() != q || b.len() != q || a.iter().chain(&b).any(|&x| !field.contains(x)) {
            return Err(Error::Invalid("clan needs one entry per field element".into()));
        }
        Ok(QClan { field, a, b })
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    pub fn a(&self) -> &[Fe] {
        &self.a
    }

    pub fn b(&self) -> &[Fe] {
        &self.b
    }

    pub fn matrix(&self, t: Fe) -> [[Fe; 2]; 2] {
        [[self.a[t.idx()], self.field.sqrt(t)], [Fe::ZERO, self.b[t.idx()]]]
    }

    fn difference(&self, s: Fe, t: Fe) -> (Fe, Fe, Fe) {
        let f = self.field;
        (self.a[s.idx()] + self.a[t.idx()], f.sqrt(s) + f.sqrt(t), self.b[s.idx()] + self.b[t.idx()])
    }

    fn check_with(&self, sweep: bool) -> std::result::Result<(), ClanDefect> {
        let f = self.field;
        if !self.a[0].is_zero() || !self.b[0].is_zero() {
            return Err(ClanDefect::NonzeroAtZero);
        }
        let q = f.q();
        let bad = (0..q).into_par_iter().find_map_first(|s| {
            (s + 1..q).find_map(|t| {
                let (s, t) = (Fe(s as u8), Fe(t as u8));
                let (a, b, c) = self.difference(s, t);
                let iso = if sweep {
                    isotropic_vector(f, a, b, c)
                } else if anisotropic(f, a, b, c) {
                    None
                } else {
                    Some(isotropic_vector(f, a, b, c).expect("trace criterion is exact"))
                };
                iso.map(|u| ClanDefect::Isotropic { s: s.0, t: t.0, u: (u.0 .0, u.1 .0) })
            })
        });
        bad.map_or(Ok(()), Err)
    }

    /// Anisotropy of all differences by the trace criterion.
    pub fn check(&self) -> std::result::Result<(), ClanDefect> {
        self.check_with(false)
    }

    /// Same as [`QClan::check`] but by sweeping every `u`.
    pub fn check_by_sweep(&self) -> std::result::Result<(), ClanDefect> {
        self.check_with(true)
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    /// `b_1`, which is the herd parameter when `f_inf(1) = 1`.
    pub fn kappa(&self) -> Fe {
        self.b[1]
    }

    /// Planes `a_t x0 + t^(1/2) x1 + b_t x2 + x3 = 0` on the quadratic cone.
    pub fn to_flock(&self) -> AlphaFlock {
        let f = self.field;
        let planes = f.elements().map(|t| [self.a[t.idx()], f.sqrt(t), self.b[t.idx()]]).collect();
        AlphaFlock { field: f, alpha: 1 % f.h(), planes }
    }
}

/// `a_t = t^(1/2)`, `b_t = kappa t^(1/2)`.
pub fn classical_clan(field: &'static Field, kappa: Fe) -> QClan {
    let a: Vec<Fe> = field.elements().map(|t| field.sqrt(t)).collect();
    let b = a.iter().map(|&x| field.mul(kappa, x)).collect();
    QClan { field, a, b }
}

/// The Subiaco clan `a_t = f_SI(t)`, `b_t = k g(t)`, with the scalar `k`
/// that makes it a clan.
pub fn subiaco_clan(field: &'static Field) -> Result<QClan> {
    let f0 = named_opoly(field, Family::SubiacoI)?;
    let d = Fe(f0.params["delta"] as u8);
    let g = subiaco_g(field, d)?;
    clan_from_pair(&f0, &g)
}

/// The Adelaide clan `a_t = f_A(t)`, `b_t = k g_A(t)`.
pub fn adelaide_clan(field: &'static Field) -> Result<QClan> {
    let f0 = named_opoly(field, Family::Adelaide { minus: false })?;
    let e = Ext2::new(field);
    let beta = fe2_from_code(&e, f0.params["beta"]);
    let g = adelaide_g(field, beta, f0.params["m"])?;
    clan_from_pair(&f0, &g)
}

fn clan_from_pair(f0: &OPoly, g: &OPoly) -> Result<QClan> {
    let f = f0.field();
    let k = clan_scalar(f0, g)
        .ok_or_else(|| Error::Validation("no multiple of the partner polynomial completes a clan".into()))?;
    QClan::new(f, f0.values().to_vec(), g.values().iter().map(|&x| f.mul(k, x)).collect())
}

/// Named clan by family name: `classical`, `subiaco`, `adelaide`.
pub fn named_clan(field: &'static Field, name: &str) -> Result<QClan> {
    match name {
        "classical" | "linear" => Ok(classical_clan(field, least_trace_one(field))),
        "subiaco" => subiaco_clan(field),
        "adelaide" => adelaide_clan(field),
        _ => Err(Error::Parse(format!("unknown clan {name:?}"))),
    }
}

/// The `q + 1` points of the base curve `x1^a = x0 x2^(a-1)`, `a = 2^k`.
pub fn cone_base_points(f: &Field, k: u32) -> Vec<P2> {
    let e = (1u64 << k) - 1;
    P2::all(f.q())
        .filter(|p| {
            let [x0, x1, x2] = p.0;
            f.frob(x1, k) == f.mul(x0, f.pow(x2, e))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlockDefect {
    WrongSize {
        planes: usize,
    },
    DegenerateCone,
    RepeatedPlane {
        s: u8,
        t: u8,
    },
    /// Planes `s` and `t` meet on the cone at the generator through `point`.
    Overlap {
        s: u8,
        t: u8,
        point: P2,
    },
    SectionNotOval {
        t: u8,
    },
}

/// `q` planes `a_t x0 + b_t x1 + c_t x2 + x3 = 0` on the cone
/// `x1^a = x0 x2^(a-1)` with `a = 2^alpha`. Plane `t` is `planes[t]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaFlock {
    field: &'static Field,
    alpha: u32,
    planes: Vec<[Fe; 3]>,
}

impl AlphaFlock {
    pub fn new(field: &'static Field, alpha: u32, planes: Vec<[Fe; 3]>) -> Result<AlphaFlock> {
        if planes.len() != field.q() || planes.iter().flatten().any(|&x| !field.contains(x)) {
            return Err(Error::Invalid("flock needs one plane per field element".into()));
        }
        Ok(AlphaFlock { field, alpha: alpha % field.h(), planes })
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn planes(&self) -> &[[Fe; 3]] {
        &self.planes
    }

    pub fn plane(&self, t: Fe) -> P3 {
        let [a, b, c] = self.planes[t.idx()];
        P3::normalize(self.field, [a, b, c, Fe::ONE]).expect("x3 coefficient is 1")
    }

    /// `x3` of the cone point over `p` that lies on plane `t`.
    pub fn height(&self, t: usize, p: &P2) -> Fe {
        let f = self.field;
        let [a, b, c] = self.planes[t];
        f.mul(a, p.0[0]) + f.mul(b, p.0[1]) + f.mul(c, p.0[2])
    }

    /// The section of the cone by plane `t`, one point per generator.
    pub fn section(&self, t: Fe) -> Vec<P3> {
        cone_base_points(self.field, self.alpha)
            .iter()
            .map(|p| ProjPoint([p.0[0], p.0[1], p.0[2], self.height(t.idx(), p)]))
            .collect()
    }

    pub fn check(&self) -> std::result::Result<(), FlockDefect> {
        let f = self.field;
        let q = f.q();
        if self.planes.len() != q {
            return Err(FlockDefect::WrongSize { planes: self.planes.len() });
        }
        if self.alpha == 0 {
            return Err(FlockDefect::DegenerateCone);
        }
        for s in 0..q {
            for t in s + 1..q {
                if self.planes[s] == self.planes[t] {
                    return Err(FlockDefect::RepeatedPlane { s: s as u8, t: t as u8 });
                }
            }
        }
        let base = cone_base_points(f, self.alpha);
        let overlap = base.par_iter().find_map_first(|p| {
            let mut seen = vec![u8::MAX; q];
            for t in 0..q {
                let h = self.height(t, p).idx();
                if seen[h] != u8::MAX {
                    return Some(FlockDefect::Overlap { s: seen[h], t: t as u8, point: *p });
                }
                seen[h] = t as u8;
            }
            None
        });
        if let Some(d) = overlap {
            return Err(d);
        }
        // Projection from the vertex maps each section onto the base curve.
        if Oval::from_points(f, &base).is_err() {
            return Err(FlockDefect::SectionNotOval { t: 0 });
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    /// `b_t x0 + a_t x1 + c_t x2 + x3 = 0` on the cone of the inverse
    /// automorphism.
    pub fn swap(&self) -> AlphaFlock {
        let h = self.field.h();
        AlphaFlock {
            field: self.field,
            alpha: (h - self.alpha) % h,
            planes: self.planes.iter().map(|&[a, b, c]| [b, a, c]).collect(),
        }
    }

    /// Whether plane 0 is `x3 = 0` and the middle coefficient of plane `t`
    /// is `t^(1/a)`.
    pub fn is_normalized(&self) -> bool {
        let f = self.field;
        let inv = f.frob_inverse_exp(self.alpha);
        self.planes[0] == [Fe::ZERO; 3] && f.elements().all(|t| self.planes[t.idx()][1] == f.frob(t, inv))
    }

    /// Moves the plane with zero middle coefficient to `x3 = 0` and
    /// reindexes by `t' = b_t^a`.
    pub fn normalize(&self) -> Result<Normalized> {
        let f = self.field;
        let q = f.q();
        let mut reindex = vec![Fe::ZERO; q];
        let mut hit = vec![false; q];
        for t in f.elements() {
            let nt = f.frob(self.planes[t.idx()][1], self.alpha);
            if std::mem::replace(&mut hit[nt.idx()], true) {
                return Err(Error::Invalid("middle coefficients are not a permutation".into()));
            }
            reindex[t.idx()] = nt;
        }
        let zero = (0..q).find(|&t| self.planes[t][1].is_zero()).expect("permutation hits 0");
        let shift = self.planes[zero];
        let mut planes = vec![[Fe::ZERO; 3]; q];
        for t in 0..q {
            let [a, b, c] = self.planes[t];
            planes[reindex[t].idx()] = [a + shift[0], b + shift[1], c + shift[2]];
        }
        Ok(Normalized { flock: AlphaFlock { field: f, alpha: self.alpha, planes }, reindex, shift })
    }

    /// Outer coefficients as functions of the index.
    pub fn outer(&self) -> (OPoly, OPoly) {
        let f = self.field;
        let a = self.planes.iter().map(|p| p[0]).collect();
        let c = self.planes.iter().map(|p| p[2]).collect();
        (OPoly::from_values(f, a).expect("in field"), OPoly::from_values(f, c).expect("in field"))
    }

    /// The clan of a normalized flock of the quadratic cone.
    pub fn to_clan(&self) -> Result<QClan> {
        if self.alpha != 1 % self.field.h() || !self.is_normalized() {
            return Err(Error::Invalid("not a normalized flock of the quadratic cone".into()));
        }
        QClan::new(self.field, self.planes.iter().map(|p| p[0]).collect(), self.planes.iter().map(|p| p[2]).collect())
    }
}

/// Output of [`AlphaFlock::normalize`]: the new flock, the index map
/// `t -> t'` and the coefficients added to every plane.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub flock: AlphaFlock,
    pub reindex: Vec<Fe>,
    pub shift: [Fe; 3],
}

/// `(rho^-1 o f^-1 o rho, g o f^-1 o rho)` with `rho: x -> x^(1/2)`.
pub fn hat_pair(f: &OPoly, g: &OPoly) -> Result<(OPoly, OPoly)> {
    let field = f.field();
    let finv = f.inverse()?;
    let fh = OPoly::from_fn(field, |x| field.square(finv.eval(field.sqrt(x))));
    let gh = OPoly::from_fn(field, |x| g.eval(finv.eval(field.sqrt(x))));
    Ok((fh, gh))
}

/// `q + 1` ovals `f_s`, `s` in GF(q) then `infinity`.
#[derive(Clone, Debug)]
pub struct Herd {
    pub kappa: Fe,
    pub f0: OPoly,
    pub finf: OPoly,
    pub members: Vec<OPoly>,
}

impl Herd {
    pub fn new(f0: OPoly, finf: OPoly, kappa: Fe) -> Result<Herd> {
        let field = f0.field();
        if finf.field() != field {
            return Err(Error::FieldMismatch);
        }
        if field.trace(kappa) != 1 {
            return Err(Error::Invalid("kappa must have trace 1".into()));
        }
        let mut members = Vec::with_capacity(field.q() + 1);
        for s in field.elements() {
            members.push(herd_member(&f0, &finf, kappa, s));
        }
        members.push(finf.clone());
        Ok(Herd { kappa, f0, finf, members })
    }

    pub fn field(&self) -> &'static Field {
        self.f0.field()
    }

    /// `f_s` for `s` in GF(q), `None` for infinity.
    pub fn member(&self, s: Option<Fe>) -> &OPoly {
        match s {
            Some(s) => &self.members[s.idx()],
            None => &self.members[self.field().q()],
        }
    }

    /// Every member is an o-permutation with `f_s(1) = 1`.
    pub fn check(&self) -> Result<()> {
        for (i, m) in self.members.iter().enumerate() {
            m.check_opolynomial().map_err(|d| Error::Validation(format!("herd member {i}: {d}")))?;
        }
        Ok(())
    }

    pub fn to_clan(&self) -> QClan {
        let f = self.field();
        let b = self.finf.values().iter().map(|&x| f.mul(self.kappa, x)).collect();
        QClan::new(f, self.f0.values().to_vec(), b).expect("same field")
    }

    /// Distinct members and their inverses.
    pub fn polynomial_sets(&self) -> Result<(Vec<OPoly>, Vec<OPoly>)> {
        let mut seen = std::collections::HashSet::new();
        let mut hs = Vec::new();
        for m in &self.members {
            if seen.insert(m.values().to_vec()) {
                hs.push(m.clone());
            }
        }
        let inv = hs.iter().map(|m| m.inverse()).collect::<Result<Vec<_>>>()?;
        Ok((hs, inv))
    }
}

/// `f_s(t) = (f0(t) + k s finf(t) + s^(1/2) t^(1/2)) / (1 + k s + s^(1/2))`.
pub fn herd_member(f0: &OPoly, finf: &OPoly, kappa: Fe, s: Fe) -> OPoly {
    let f = f0.field();
    let ks = f.mul(kappa, s);
    let rs = f.sqrt(s);
    let den = Fe::ONE + ks + rs;
    OPoly::from_fn(f, |t| f.div(f0.eval(t) + f.mul(ks, finf.eval(t)) + f.mul(rs, f.sqrt(t)), den))
}

/// The herd of a clan of shape `a_t = f0(t)`, `b_t = kappa finf(t)`.
pub fn herd_from_clan(c: &QClan, kappa: Fe) -> Result<Herd> {
    let f = c.field;
    if f.trace(kappa) != 1 {
        return Err(Error::Invalid("kappa must have trace 1".into()));
    }
    if c.kappa() != kappa {
        return Err(Error::Invalid("clan is not of herd shape: b_1 differs from kappa".into()));
    }
    let f0 = OPoly::from_values(f, c.a.clone())?;
    let kinv = f.inv(kappa);
    let finf = OPoly::from_values(f, c.b.iter().map(|&b| f.mul(kinv, b)).collect())?;
    for (name, p) in [("f0", &f0), ("finf", &finf)] {
        p.check_opolynomial().map_err(|d| Error::Invalid(format!("clan is not of herd shape: {name}: {d}")))?;
    }
    Herd::new(f0, finf, kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projspace::rref;

    fn gf(h: u32) -> &'static Field {
        Field::standard(h).unwrap()
    }

    #[test]
    fn classical_clan_depends_on_trace() {
        let f = gf(3);
        for kappa in f.nonzero() {
            let c = classical_clan(f, kappa);
            assert_eq!(c.is_valid(), f.trace(kappa) == 1);
            assert_eq!(c.check().is_ok(), c.check_by_sweep().is_ok());
            if let Err(ClanDefect::Isotropic { s, t, u }) = c.check() {
                let (a, b, cc) = c.difference(Fe(s), Fe(t));
                let (u0, u1) = (Fe(u.0), Fe(u.1));
                let v = f.mul(a, f.square(u0)) + f.mul(b, f.mul(u0, u1)) + f.mul(cc, f.square(u1));
                assert!(v.is_zero());
            }
        }
    }

    #[test]
    fn zero_middle_entry_is_isotropic() {
        let f = gf(3);
        assert!(!anisotropic(f, Fe::ZERO, Fe::ZERO, Fe::ZERO));
        assert!(isotropic_vector(f, Fe::ZERO, Fe::ZERO, Fe::ZERO).is_some());
        assert!(isotropic_vector(f, Fe(3), Fe::ZERO, Fe(5)).is_some());
    }

    #[test]
    fn linear_flock_planes_share_a_line() {
        let f = gf(3);
        let c = classical_clan(f, least_trace_one(f));
        let fl = c.to_flock();
        assert!(fl.is_valid());
        let mut rows: Vec<[Fe; 4]> = f.elements().map(|t| fl.plane(t).0).collect();
        assert_eq!(rref(f, &mut rows), 2);
        // every cone point off the vertex is covered exactly once
        let mut covered = std::collections::HashSet::new();
        for t in f.elements() {
            for p in fl.section(t) {
                assert!(covered.insert(p));
            }
        }
        assert_eq!(covered.len(), f.q() * (f.q() + 1));
    }

    #[test]
    fn duplicated_plane_fails() {
        let f = gf(3);
        let fl = classical_clan(f, least_trace_one(f)).to_flock();
        let mut planes = fl.planes().to_vec();
        planes[2] = planes[1];
        let bad = AlphaFlock::new(f, 1, planes).unwrap();
        assert!(matches!(bad.check(), Err(FlockDefect::RepeatedPlane { .. })));
    }

    #[test]
    fn swap_is_an_involution_and_preserves_validity() {
        for h in [3, 4] {
            let f = gf(h);
            let fl = classical_clan(f, least_trace_one(f)).to_flock();
            let sw = fl.swap();
            assert_eq!(sw.alpha(), h - 1);
            assert!(sw.is_valid());
            assert_eq!(sw.swap(), fl);
        }
    }

    #[test]
    fn normalization_matches_hat_recipe() {
        let f = gf(4);
        let fl = subiaco_clan(f).unwrap().to_flock();
        assert!(fl.is_valid());
        assert!(fl.is_normalized());
        let same = fl.normalize().unwrap();
        assert_eq!(same.flock, fl);
        assert!(same.reindex.iter().enumerate().all(|(i, t)| t.idx() == i));

        let half = fl.swap().normalize().unwrap().flock;
        assert!(half.is_normalized() && half.is_valid());
        let (fh, gh) = half.outer();
        let back = half.swap().normalize().unwrap().flock;
        assert_eq!(back, fl);
        let (ef, eg) = hat_pair(&fh, &gh).unwrap();
        let (bf, bg) = back.outer();
        assert_eq!((bf, bg), (ef, eg));
    }

    #[test]
    fn classical_herd_is_constant() {
        let f = gf(3);
        let kappa = least_trace_one(f);
        let herd = herd_from_clan(&classical_clan(f, kappa), kappa).unwrap();
        herd.check().unwrap();
        let sqrt = OPoly::monomial(f, 4);
        assert!(herd.members.iter().all(|m| *m == sqrt));
        let (hs, inv) = herd.polynomial_sets().unwrap();
        assert_eq!(hs, vec![sqrt]);
        assert_eq!(inv, vec![OPoly::monomial(f, 2)]);
        assert_eq!(herd.to_clan(), classical_clan(f, kappa));
        assert_eq!(herd.member(Some(Fe::ZERO)), &herd.f0);
        assert_eq!(herd.member(None), &herd.finf);
    }

    #[test]
    fn named_clans_at_64() {
        let f = gf(6);
        for c in [subiaco_clan(f).unwrap(), adelaide_clan(f).unwrap()] {
            assert!(c.is_valid());
            assert!(c.to_flock().is_valid());
            assert_eq!(f.trace(c.kappa()), 1);
            let herd = herd_from_clan(&c, c.kappa()).unwrap();
            herd.check().unwrap();
        }
    }
}
