//! Compatibility of ovals at a point, local parameter sets and matching,
//! generalized fans and posies.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collineation::{agl_image, least_param_set, set_maps, Coll3, Collineation, ParamSet};
use crate::error::{Error, Result};
use crate::flocks::AlphaFlock;
use crate::gfield::{Fe, Field};
use crate::ovals::{OPoly, Oval};
use crate::projspace::{dot, join2, line_points, meet2, pencil_lines, ProjPoint, P2, P3};

/// Secant and external label sets of the lines through `p`. Lines are
/// labelled by where they cross a reference line: the first coordinate
/// line missing `p`, with the tangent through `p` sent to infinity.
pub fn parameterize_pencil(oval: &Oval, p: &P2) -> Result<(ParamSet, ParamSet)> {
    let f = oval.field();
    if oval.contains(p) || *p == oval.nucleus() {
        return Err(Error::Invalid(format!("{p:?} is on the oval or is its nucleus")));
    }
    let labels = PencilLabels::new(f, oval, p);
    let tangent = join2(f, p, &oval.nucleus()).expect("distinct points");
    let mut s = 0;
    for x in oval.points() {
        if dot(f, &tangent.0, &x.0).is_zero() {
            continue;
        }
        let line = join2(f, p, x).expect("distinct points");
        s |= 1 << labels.label(&line).0;
    }
    let full = if f.q() == 64 { u64::MAX } else { (1u64 << f.q()) - 1 };
    Ok((s, full & !s))
}

struct PencilLabels<'a> {
    field: &'a Field,
    reference: P2,
    by_point: HashMap<P2, Fe>,
}

impl<'a> PencilLabels<'a> {
    fn new(f: &'a Field, oval: &Oval, p: &P2) -> Self {
        let i = p.0.iter().position(|x| !x.is_zero()).expect("nonzero point");
        let mut r = [Fe::ZERO; 3];
        r[i] = Fe::ONE;
        let reference = ProjPoint(r);
        let tangent = join2(f, p, &oval.nucleus()).expect("distinct points");
        let q_inf = meet2(f, &tangent, &reference).expect("p is off the reference line");
        let q0 = line_points(f, &reference).into_iter().find(|x| *x != q_inf).expect("q+1 points");
        let by_point = f
            .elements()
            .map(|l| {
                let v = [0, 1, 2].map(|j| q0.0[j] + f.mul(l, q_inf.0[j]));
                (P2::normalize(f, v).expect("distinct points"), l)
            })
            .collect();
        PencilLabels { field: f, reference, by_point }
    }

    fn label(&self, line: &P2) -> Fe {
        let r = meet2(self.field, line, &self.reference).expect("line differs from the reference");
        self.by_point[&r]
    }
}

/// An oval and a point off it (not its nucleus) with the parameter sets
/// of the pencil and their canonical forms under AGammaL(1,q).
#[derive(Clone, Debug)]
pub struct OvalPointPair {
    pub oval: Oval,
    pub point: P2,
    pub s: ParamSet,
    pub e: ParamSet,
    pub s_least: ParamSet,
    pub e_least: ParamSet,
}

impl OvalPointPair {
    pub fn new(oval: &Oval, point: P2) -> Result<OvalPointPair> {
        let f = oval.field();
        let (s, e) = parameterize_pencil(oval, &point)?;
        Ok(OvalPointPair {
            oval: oval.clone(),
            point,
            s,
            e,
            s_least: least_param_set(f, s),
            e_least: least_param_set(f, e),
        })
    }
}

/// Whether some `g` in AGammaL(1,q) maps `E` of `p2` onto `S` of `p1`,
/// decided by canonical forms.
pub fn pairs_match(p1: &OvalPointPair, p2: &OvalPointPair) -> bool {
    p1.oval.field() == p2.oval.field() && p1.s_least == p2.e_least
}

/// Same as [`pairs_match`] by trying every element of AGammaL(1,q).
pub fn pairs_match_brute(p1: &OvalPointPair, p2: &OvalPointPair) -> bool {
    let f = p1.oval.field();
    if p2.oval.field() != f {
        return false;
    }
    (0..f.h()).any(|k| f.nonzero().any(|a| f.elements().any(|b| agl_image(f, p2.e, a, b, k) == p1.s)))
}

/// Same nucleus `N`, the line `PN` touching both ovals at one common
/// point, and every secant of `o1` through `p` external to `o2`.
pub fn compatible_at(o1: &Oval, o2: &Oval, p: &P2) -> bool {
    let f = o1.field();
    if o2.field() != f || o1.nucleus() != o2.nucleus() {
        return false;
    }
    let n = o1.nucleus();
    if *p == n || o1.contains(p) || o2.contains(p) {
        return false;
    }
    let tangent = join2(f, p, &n).expect("distinct points");
    let touch = |o: &Oval| o.points().iter().find(|x| dot(f, &tangent.0, &x.0).is_zero()).copied();
    if touch(o1).is_none() || touch(o1) != touch(o2) {
        return false;
    }
    pencil_lines(f, p).iter().all(|l| o1.meet_count(l) != 2 || o2.meet_count(l) == 0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum FanDefect {
    WrongNucleus {
        s: u8,
    },
    /// `O_s` and `O_t` share a point other than `(0,0,1)`, or miss it.
    Intersection {
        s: u8,
        t: u8,
    },
    Incompatible {
        s: u8,
        t: u8,
    },
}

/// Ovals `O_s`, `s` in GF(q), indexed by field element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedFan {
    pub f: OPoly,
    pub ovals: Vec<Oval>,
}

impl GeneralizedFan {
    pub fn new(f: OPoly, ovals: Vec<Oval>) -> Result<GeneralizedFan> {
        let field = f.field();
        if ovals.len() != field.q() || ovals.iter().any(|o| o.field() != field) {
            return Err(Error::Invalid("a fan needs one oval per field element".into()));
        }
        Ok(GeneralizedFan { f, ovals })
    }

    /// From `(index, oval)` pairs in any order; each index exactly once.
    pub fn from_indexed(f: OPoly, ovals: Vec<(Fe, Oval)>) -> Result<GeneralizedFan> {
        let q = f.field().q();
        let mut slots: Vec<Option<Oval>> = vec![None; q];
        for (s, o) in ovals {
            let slot = slots.get_mut(s.idx()).ok_or_else(|| Error::Invalid("index outside the field".into()))?;
            if slot.replace(o).is_some() {
                return Err(Error::Invalid(format!("index {s} used twice")));
            }
        }
        let ovals =
            slots.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| Error::Invalid("missing index".into()))?;
        Self::new(f, ovals)
    }

    pub fn field(&self) -> &'static Field {
        self.f.field()
    }

    pub fn oval(&self, s: Fe) -> &Oval {
        &self.ovals[s.idx()]
    }

    /// `P_st = (0, 1, (f(s)+f(t))/(s+t))`.
    pub fn p_st(&self, s: Fe, t: Fe) -> P2 {
        let f = self.field();
        ProjPoint([Fe::ZERO, Fe::ONE, f.div(self.f.eval(s) + self.f.eval(t), s + t)])
    }

    pub fn check(&self) -> std::result::Result<(), FanDefect> {
        let f = self.field();
        let n = ProjPoint([Fe::ZERO, Fe::ONE, Fe::ZERO]);
        let common = ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE]);
        if let Some(s) = self.ovals.iter().position(|o| o.nucleus() != n) {
            return Err(FanDefect::WrongNucleus { s: s as u8 });
        }
        let q = f.q();
        let pairs: Vec<(usize, usize)> = (0..q).flat_map(|s| (s + 1..q).map(move |t| (s, t))).collect();
        let bad = pairs.par_iter().find_map_first(|&(s, t)| {
            let (a, b) = (&self.ovals[s], &self.ovals[t]);
            let shared: Vec<&P2> = a.points().iter().filter(|p| b.contains(p)).collect();
            if shared != [&common] {
                return Some(FanDefect::Intersection { s: s as u8, t: t as u8 });
            }
            let p = self.p_st(Fe(s as u8), Fe(t as u8));
            if !compatible_at(a, b, &p) {
                return Some(FanDefect::Incompatible { s: s as u8, t: t as u8 });
            }
            None
        });
        bad.map_or(Ok(()), Err)
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }
}

/// `O_s = {(1, t, t^a + g(s))} U {(0,0,1)}` with `a = 2^alpha`, after
/// checking that `f(t) x0 + t^a x1 + g(t) x2 + x3 = 0` is a `1/a`-flock.
pub fn fan_from_flock(f: &OPoly, g: &OPoly, alpha: u32) -> Result<GeneralizedFan> {
    let field = f.field();
    if g.field() != field {
        return Err(Error::FieldMismatch);
    }
    let h = field.h();
    let planes = field.elements().map(|t| [f.eval(t), field.frob(t, alpha), g.eval(t)]).collect();
    let flock = AlphaFlock::new(field, (h - alpha % h) % h, planes)?;
    if let Err(d) = flock.check() {
        return Err(Error::Validation(format!("plane family is not a flock: {d:?}")));
    }
    let ovals = field
        .elements()
        .map(|s| {
            let c = g.eval(s);
            let mut pts: Vec<P2> =
                field.elements().map(|t| ProjPoint([Fe::ONE, t, field.frob(t, alpha) + c])).collect();
            pts.push(ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE]));
            Oval::from_points(field, &pts)
        })
        .collect::<Result<Vec<_>>>()?;
    GeneralizedFan::new(f.clone(), ovals)
}

/// `(y0, y1, y2) -> (y0, 0, y1, y2)`, the plane `x1 = 0`.
pub fn embed_pi(p: &P2) -> P3 {
    ProjPoint([p.0[0], Fe::ZERO, p.0[1], p.0[2]])
}

/// `(y0, y1, y2) -> (0, y0, y1, y2)`, the plane `x0 = 0`.
pub fn embed_pi_inf(p: &P2) -> P3 {
    ProjPoint([Fe::ZERO, p.0[0], p.0[1], p.0[2]])
}

pub fn project_pi(p: &P3) -> Option<P2> {
    p.0[1].is_zero().then(|| ProjPoint([p.0[0], p.0[2], p.0[3]]))
}

pub fn project_pi_inf(p: &P3) -> Option<P2> {
    p.0[0].is_zero().then(|| ProjPoint([p.0[1], p.0[2], p.0[3]]))
}

/// A director oval in `x0 = 0` and a fan of ovals in `x1 = 0`, as point
/// sets of PG(3,q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Posy {
    pub f: OPoly,
    pub director: Vec<P3>,
    pub fan: Vec<Vec<P3>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PosyDefect {
    DirectorOffPlane,
    DirectorMismatch,
    FanOffPlane { s: u8 },
    BadOval { s: u8 },
    Fan(FanDefect),
}

impl Posy {
    pub fn from_fan(fan: &GeneralizedFan) -> Result<Posy> {
        let d = Oval::d_form(&fan.f)?;
        let mut director: Vec<P3> = d.points().iter().map(embed_pi_inf).collect();
        director.sort();
        let fan_pts = fan
            .ovals
            .iter()
            .map(|o| {
                let mut v: Vec<P3> = o.points().iter().map(embed_pi).collect();
                v.sort();
                v
            })
            .collect();
        Ok(Posy { f: fan.f.clone(), director, fan: fan_pts })
    }

    pub fn field(&self) -> &'static Field {
        self.f.field()
    }

    /// The fan read back in the coordinates of `x1 = 0`.
    pub fn to_fan(&self) -> Result<GeneralizedFan> {
        let field = self.field();
        let ovals = self
            .fan
            .iter()
            .map(|o| {
                let pts = o
                    .iter()
                    .map(|p| project_pi(p).ok_or_else(|| Error::Validation("fan point off x1 = 0".into())))
                    .collect::<Result<Vec<_>>>()?;
                Oval::from_points(field, &pts)
            })
            .collect::<Result<Vec<_>>>()?;
        GeneralizedFan::new(self.f.clone(), ovals)
    }

    pub fn check(&self) -> std::result::Result<(), PosyDefect> {
        let field = self.field();
        if self.director.iter().any(|p| !p.0[0].is_zero()) {
            return Err(PosyDefect::DirectorOffPlane);
        }
        let want = Oval::d_form(&self.f).map_err(|_| PosyDefect::DirectorMismatch)?;
        let mut got: Vec<P2> = self.director.iter().filter_map(project_pi_inf).collect();
        got.sort();
        if got != want.points() {
            return Err(PosyDefect::DirectorMismatch);
        }
        let mut ovals = Vec::with_capacity(self.fan.len());
        for (s, o) in self.fan.iter().enumerate() {
            let pts: Option<Vec<P2>> = o.iter().map(project_pi).collect();
            let pts = pts.ok_or(PosyDefect::FanOffPlane { s: s as u8 })?;
            ovals.push(Oval::from_points(field, &pts).map_err(|_| PosyDefect::BadOval { s: s as u8 })?);
        }
        let fan = GeneralizedFan::new(self.f.clone(), ovals).map_err(|_| PosyDefect::BadOval { s: 0 })?;
        fan.check().map_err(PosyDefect::Fan)
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    /// Image under a collineation of PG(3,q). The index polynomial is kept;
    /// the result is a posy only when `g` fixes both planes and the
    /// director.
    pub fn map(&self, g: &Coll3) -> Posy {
        let field = self.field();
        let img = |v: &Vec<P3>| {
            let mut w: Vec<P3> = v.iter().map(|p| g.apply(field, p)).collect();
            w.sort();
            w
        };
        Posy { f: self.f.clone(), director: img(&self.director), fan: self.fan.iter().map(img).collect() }
    }
}

/// A collineation of PG(3,q) taking the director of `p1` onto that of
/// `p2` and each fan oval of `p1` onto a fan oval of `p2`.
///
/// Such a map fixes `x0 = 0`, `x1 = 0` and `(0,0,0,1)`. Its restriction
/// to `x0 = 0` is enumerated first; each one extends through a scalar and
/// a translation part fixed by where one affine fan point goes.
pub fn posies_equivalent(p1: &Posy, p2: &Posy) -> Result<Option<Coll3>> {
    let field = p1.field();
    if p2.field() != field || p1.fan.len() != p2.fan.len() {
        return Ok(None);
    }
    let d1: Vec<P2> = p1.director.iter().filter_map(project_pi_inf).collect();
    let d2: Vec<P2> = p2.director.iter().filter_map(project_pi_inf).collect();
    let top = ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE]);
    let restrictions = set_maps(field, &d1, &d2, Some((top, top)), false)?;

    let mut oval_of: HashMap<P3, usize> = HashMap::new();
    for (s, o) in p2.fan.iter().enumerate() {
        for p in o {
            if !p.0[0].is_zero() {
                oval_of.insert(*p, s);
            }
        }
    }
    let x = *p1.fan[0].iter().find(|p| !p.0[0].is_zero()).ok_or_else(|| Error::Invalid("empty fan".into()))?;
    let mut targets: Vec<P3> = oval_of.keys().copied().collect();
    targets.sort();

    let found = restrictions.par_iter().find_map_first(|phi| {
        let k = phi.k;
        let b = phi.m;
        let xs = x.0.map(|c| field.frob(c, k));
        for lambda in field.nonzero() {
            for y in &targets {
                let u = field.mul(lambda, y.0[2]) + field.mul(xs[2], b[1][1]) + field.mul(xs[3], b[2][1]);
                let v = field.mul(lambda, y.0[3]) + field.mul(xs[2], b[1][2]) + field.mul(xs[3], b[2][2]);
                let m = [
                    [lambda, Fe::ZERO, u, v],
                    [Fe::ZERO, b[0][0], b[0][1], b[0][2]],
                    [Fe::ZERO, b[1][0], b[1][1], b[1][2]],
                    [Fe::ZERO, b[2][0], b[2][1], b[2][2]],
                ];
                let Ok(g) = Collineation::new(field, m, k) else { continue };
                if maps_fan(field, &g, &p1.fan, &oval_of) {
                    return Some(g);
                }
            }
        }
        None
    });
    Ok(found)
}

fn maps_fan(field: &Field, g: &Coll3, fan: &[Vec<P3>], oval_of: &HashMap<P3, usize>) -> bool {
    let mut used = vec![false; fan.len()];
    for o in fan {
        let mut target = None;
        for p in o.iter().filter(|p| !p.0[0].is_zero()) {
            let Some(&s) = oval_of.get(&g.apply(field, p)) else { return false };
            match target {
                None => target = Some(s),
                Some(t) if t != s => return false,
                _ => {}
            }
        }
        let t = target.expect("ovals have affine points");
        if std::mem::replace(&mut used[t], true) {
            return false;
        }
    }
    true
}

/// Every oval-point pair of an oval with its canonical forms, one per
/// given point.
pub fn pairs_for_points(oval: &Oval, points: &[P2]) -> Result<Vec<OvalPointPair>> {
    points.par_iter().map(|p| OvalPointPair::new(oval, *p)).collect()
}

/// All points of the plane that are neither on the oval nor its nucleus.
pub fn off_points(oval: &Oval) -> Vec<P2> {
    P2::all(oval.q()).filter(|p| !oval.contains(p) && *p != oval.nucleus()).collect()
}
