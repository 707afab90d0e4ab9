//! O-permutations, the ovals D(f) and O(f), hyperovals, and the named
//! families of o-polynomials.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext2::{Ext2, Fe2};
use crate::flocks::anisotropic;
use crate::gfield::{Fe, Field};
use crate::poly;
use crate::projspace::{dot, join2, pencil_lines, Line2, P2};

/// A function on GF(q), kept both as reduced coefficients and as a value
/// table. Named constructions record the parameters they were built from.
#[derive(Clone)]
pub struct OPoly {
    field: &'static Field,
    coeffs: Vec<Fe>,
    vals: Vec<Fe>,
    pub family: Option<String>,
    pub params: BTreeMap<String, u64>,
}

impl PartialEq for OPoly {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.vals == other.vals
    }
}

impl Eq for OPoly {}

impl Hash for OPoly {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.vals.hash(state);
    }
}

impl fmt::Debug for OPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OPoly[q={}]({})", self.field.q(), poly::format_expr(&self.coeffs))
    }
}

/// Why a function fails to be an o-permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Defect {
    NonzeroAtZero {
        value: u8,
    },
    NotPermutation {
        x: u8,
        y: u8,
    },
    /// `f_s(x) = f_s(y)` for distinct nonzero `x`, `y`.
    Slope {
        s: u8,
        x: u8,
        y: u8,
    },
    NotNormalized {
        value: u8,
    },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::NonzeroAtZero { value } => write!(f, "f(0) = {value}, expected 0"),
            Defect::NotPermutation { x, y } => write!(f, "f({x}) = f({y})"),
            Defect::Slope { s, x, y } => write!(f, "slope map f_{s} takes equal values at {x} and {y}"),
            Defect::NotNormalized { value } => write!(f, "f(1) = {value}, expected 1"),
        }
    }
}

impl OPoly {
    pub fn from_coeffs(field: &'static Field, coeffs: &[Fe]) -> Result<OPoly> {
        if coeffs.iter().any(|&c| !field.contains(c)) {
            return Err(Error::Invalid("coefficient outside the field".into()));
        }
        let coeffs = poly::reduce(field, coeffs);
        let vals = poly::values(field, &coeffs);
        Ok(OPoly { field, coeffs, vals, family: None, params: BTreeMap::new() })
    }

    pub fn from_values(field: &'static Field, vals: Vec<Fe>) -> Result<OPoly> {
        if vals.len() != field.q() || vals.iter().any(|&c| !field.contains(c)) {
            return Err(Error::Invalid("value table does not match the field".into()));
        }
        let coeffs = poly::interpolate(field, &vals);
        Ok(OPoly { field, coeffs, vals, family: None, params: BTreeMap::new() })
    }

    pub fn from_fn(field: &'static Field, f: impl Fn(Fe) -> Fe) -> OPoly {
        let vals: Vec<Fe> = field.elements().map(f).collect();
        Self::from_values(field, vals).expect("closure stays in the field")
    }

    pub fn parse(field: &'static Field, expr: &str) -> Result<OPoly> {
        let c = poly::parse_expr(field, expr)?;
        Self::from_coeffs(field, &c)
    }

    /// `x^e`.
    pub fn monomial(field: &'static Field, e: u64) -> OPoly {
        Self::from_fn(field, |x| field.pow(x, e))
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn values(&self) -> &[Fe] {
        &self.vals
    }

    #[inline]
    pub fn eval(&self, x: Fe) -> Fe {
        self.vals[x.idx()]
    }

    pub fn degree(&self) -> Option<usize> {
        poly::degree(&self.coeffs)
    }

    pub fn with_family(mut self, name: &str, params: &[(&str, u64)]) -> OPoly {
        self.family = Some(name.to_string());
        self.params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self
    }

    /// Checks `f(0) = 0`, bijectivity and that every slope map is a
    /// permutation of the nonzero elements.
    pub fn check_opermutation(&self) -> std::result::Result<(), Defect> {
        let f = self.field;
        let q = f.q();
        if !self.vals[0].is_zero() {
            return Err(Defect::NonzeroAtZero { value: self.vals[0].0 });
        }
        let mut seen = vec![u8::MAX; q];
        for x in 0..q {
            let y = self.vals[x].idx();
            if seen[y] != u8::MAX {
                return Err(Defect::NotPermutation { x: seen[y], y: x as u8 });
            }
            seen[y] = x as u8;
        }
        for s in f.elements() {
            let fs = self.eval(s);
            seen.iter_mut().for_each(|v| *v = u8::MAX);
            for x in f.nonzero() {
                let v = f.div(self.eval(x + s) + fs, x).idx();
                if seen[v] != u8::MAX {
                    return Err(Defect::Slope { s: s.0, x: seen[v], y: x.0 });
                }
                seen[v] = x.0;
            }
        }
        Ok(())
    }

    pub fn is_opermutation(&self) -> bool {
        self.check_opermutation().is_ok()
    }

    /// O-permutation with `f(1) = 1`.
    pub fn check_opolynomial(&self) -> std::result::Result<(), Defect> {
        self.check_opermutation()?;
        if self.eval(Fe::ONE) != Fe::ONE {
            return Err(Defect::NotNormalized { value: self.eval(Fe::ONE).0 });
        }
        Ok(())
    }

    /// Compositional inverse; requires a permutation.
    pub fn inverse(&self) -> Result<OPoly> {
        let mut inv = vec![Fe::ZERO; self.field.q()];
        let mut hit = vec![false; self.field.q()];
        for x in self.field.elements() {
            let y = self.eval(x);
            if hit[y.idx()] {
                return Err(Error::Invalid("not a permutation".into()));
            }
            hit[y.idx()] = true;
            inv[y.idx()] = x;
        }
        Self::from_values(self.field, inv)
    }

    /// `x -> f(x)^(2^k)` composed with `x^(2^-k)` inside: the conjugate
    /// `f^gamma(y) = gamma(f(gamma^-1 y))`, i.e. coefficientwise Frobenius.
    pub fn frobenius(&self, k: u32) -> OPoly {
        let f = self.field;
        let back = f.frob_inverse_exp(k % f.h());
        Self::from_fn(f, |y| f.frob(self.eval(f.frob(y, back)), k % f.h()))
    }

    pub fn scale(&self, lambda: Fe) -> OPoly {
        let f = self.field;
        Self::from_fn(f, |x| f.mul(lambda, self.eval(x)))
    }

    /// Divides by `f(1)` so the result passes through (1,1,1).
    pub fn normalized(&self) -> Result<OPoly> {
        let one = self.eval(Fe::ONE);
        let inv = self.field.checked_inv(one)?;
        Ok(self.scale(inv))
    }

    pub fn expr(&self) -> String {
        poly::format_expr(&self.coeffs)
    }
}

/// Placement of `{(1, t, f(t))}` in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// `D(f)`: the extra point is (0,0,1), nucleus (0,1,0).
    D,
    /// `O(f)`: the extra point is (0,1,0), nucleus (0,0,1).
    O,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    External,
    Tangent,
    Secant,
}

/// A set of q+1 points of PG(2,q), no three collinear.
#[derive(Clone)]
pub struct Oval {
    field: &'static Field,
    points: Vec<P2>,
    nucleus: P2,
    source: Option<(OPoly, Convention)>,
}

impl PartialEq for Oval {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.points == other.points
    }
}

impl Eq for Oval {}

impl Hash for Oval {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.points.hash(state);
    }
}

impl fmt::Debug for Oval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oval")
            .field("q", &self.field.q())
            .field("nucleus", &self.nucleus)
            .field("points", &self.points)
            .finish()
    }
}

/// Three collinear points among `pts`, if any.
pub fn collinear_triple(field: &Field, pts: &[P2]) -> Option<[P2; 3]> {
    let mut lines: HashMap<Line2, usize> = HashMap::with_capacity(pts.len() * pts.len() / 2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let l = join2(field, &pts[i], &pts[j])?;
            if let Some(&k) = lines.get(&l) {
                if k != i {
                    return Some([pts[k], pts[i], pts[j]]);
                }
            }
            lines.entry(l).or_insert(i);
        }
    }
    None
}

impl Oval {
    pub fn from_opoly(f: &OPoly, convention: Convention) -> Result<Oval> {
        if let Err(d) = f.check_opermutation() {
            return Err(Error::Validation(format!("not an o-permutation: {d}")));
        }
        let field = f.field;
        let (extra, nucleus) = match convention {
            Convention::D => ([0, 0, 1], [0, 1, 0]),
            Convention::O => ([0, 1, 0], [0, 0, 1]),
        };
        let mut points: Vec<P2> = field.elements().map(|t| P2::from_coords([Fe::ONE, t, f.eval(t)])).collect();
        points.push(P2::from_coords(extra.map(Fe)));
        points.sort();
        Ok(Oval { field, points, nucleus: P2::from_coords(nucleus.map(Fe)), source: Some((f.clone(), convention)) })
    }

    /// `D(f) = {(1,t,f(t))} U {(0,0,1)}`.
    pub fn d_form(f: &OPoly) -> Result<Oval> {
        Self::from_opoly(f, Convention::D)
    }

    /// `O(f) = {(1,t,f(t))} U {(0,1,0)}`.
    pub fn o_form(f: &OPoly) -> Result<Oval> {
        Self::from_opoly(f, Convention::O)
    }

    /// Validates an arbitrary point set and computes its nucleus.
    pub fn from_points(field: &'static Field, pts: &[P2]) -> Result<Oval> {
        let q = field.q();
        let mut points = pts.to_vec();
        points.sort();
        points.dedup();
        if points.len() != q + 1 {
            return Err(Error::Validation(format!("{} points, expected {}", points.len(), q + 1)));
        }
        if let Some(t) = collinear_triple(field, &points) {
            return Err(Error::Validation(format!("collinear points {t:?}")));
        }
        let nucleus = nucleus_of(field, &points)?;
        Ok(Oval { field, points, nucleus, source: None })
    }

    pub(crate) fn from_parts_unchecked(field: &'static Field, mut points: Vec<P2>, nucleus: P2) -> Oval {
        points.sort();
        Oval { field, points, nucleus, source: None }
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    pub fn q(&self) -> usize {
        self.field.q()
    }

    /// Sorted points.
    pub fn points(&self) -> &[P2] {
        &self.points
    }

    pub fn nucleus(&self) -> P2 {
        self.nucleus
    }

    pub fn source(&self) -> Option<&(OPoly, Convention)> {
        self.source.as_ref()
    }

    pub fn contains(&self, p: &P2) -> bool {
        self.points.binary_search(p).is_ok()
    }

    /// The tangent line at a point of the oval.
    pub fn tangent_at(&self, p: &P2) -> Result<Line2> {
        if !self.contains(p) {
            return Err(Error::Invalid(format!("{p:?} is not on the oval")));
        }
        Ok(join2(self.field, p, &self.nucleus).expect("nucleus is off the oval"))
    }

    pub fn tangents(&self) -> Vec<Line2> {
        self.points.iter().map(|p| self.tangent_at(p).unwrap()).collect()
    }

    pub fn meet_count(&self, l: &Line2) -> usize {
        self.points.iter().filter(|p| dot(self.field, &l.0, &p.0).is_zero()).count()
    }

    pub fn classify_line(&self, l: &Line2) -> Result<LineKind> {
        match self.meet_count(l) {
            0 => Ok(LineKind::External),
            1 => Ok(LineKind::Tangent),
            2 => Ok(LineKind::Secant),
            n => Err(Error::Validation(format!("line meets the set in {n} points"))),
        }
    }

    pub fn hyperoval(&self) -> Hyperoval {
        let mut points = self.points.clone();
        points.push(self.nucleus);
        points.sort();
        Hyperoval { field: self.field, points }
    }

    /// Whether all points lie on one conic.
    pub fn is_conic(&self) -> bool {
        let f = self.field;
        let mut rows: Vec<[Fe; 6]> = self
            .points
            .iter()
            .map(|p| {
                let [a, b, c] = p.0;
                [f.square(a), f.square(b), f.square(c), f.mul(a, b), f.mul(a, c), f.mul(b, c)]
            })
            .collect();
        crate::projspace::rref(f, &mut rows) < 6
    }

    /// `(O U {N}) \ {P}`, an oval with nucleus `P`.
    pub fn swap_nucleus(&self, p: &P2) -> Result<Oval> {
        if !self.contains(p) {
            return Err(Error::Invalid(format!("{p:?} is not on the oval")));
        }
        let mut points: Vec<P2> = self.points.iter().copied().filter(|x| x != p).collect();
        points.push(self.nucleus);
        Ok(Oval::from_parts_unchecked(self.field, points, *p))
    }

    /// An o-permutation `f` and a collineation carrying the oval onto
    /// `D(f)` with `p` going to (0,0,1). The two least other points go to
    /// (1,0,0) and (1,1,1).
    pub fn d_form_at(&self, p: &P2) -> Result<(OPoly, crate::collineation::Coll2)> {
        if !self.contains(p) {
            return Err(Error::Invalid(format!("{p:?} is not on the oval")));
        }
        let f = self.field;
        let others: Vec<P2> = self.points.iter().filter(|x| *x != p).take(2).copied().collect();
        let z = Fe::ZERO;
        let o = Fe::ONE;
        let src = [others[0], self.nucleus, *p, others[1]];
        let dst = [[o, z, z], [z, o, z], [z, z, o], [o, o, o]].map(P2::from_coords);
        let g = crate::collineation::Coll2::from_frames(f, &src, &dst, 0)?;
        let mut vals = vec![Fe::ZERO; f.q()];
        for x in &self.points {
            let y = g.apply(f, x);
            if y.0[0] == Fe::ONE {
                vals[y.0[1].idx()] = y.0[2];
            }
        }
        let poly = OPoly::from_values(f, vals)?;
        if poly.check_opermutation().is_err() {
            return Err(Error::Validation("image is not of the form D(f)".into()));
        }
        Ok((poly, g))
    }

    /// Image under a point map that is known to be a collineation.
    pub fn map_points(&self, g: impl Fn(&P2) -> P2) -> Oval {
        let points = self.points.iter().map(&g).collect();
        Oval::from_parts_unchecked(self.field, points, g(&self.nucleus))
    }
}

fn nucleus_of(field: &'static Field, points: &[P2]) -> Result<P2> {
    let tangent = |i: usize| -> Line2 {
        let p = points[i];
        let secants: Vec<Line2> =
            points.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| join2(field, &p, x).unwrap()).collect();
        pencil_lines(field, &p).into_iter().find(|l| !secants.contains(l)).expect("q+1 lines, q secants")
    };
    let t0 = tangent(0);
    let t1 = tangent(1);
    let n = join2(field, &t0, &t1).expect("distinct tangents");
    for i in 2..points.len() {
        if !dot(field, &tangent(i).0, &n.0).is_zero() {
            return Err(Error::Validation("tangents are not concurrent".into()));
        }
    }
    Ok(n)
}

/// A set of q+2 points of PG(2,q), no three collinear.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Hyperoval {
    field: &'static Field,
    points: Vec<P2>,
}

impl Hyperoval {
    pub fn from_points(field: &'static Field, pts: &[P2]) -> Result<Hyperoval> {
        let mut points = pts.to_vec();
        points.sort();
        points.dedup();
        if points.len() != field.q() + 2 {
            return Err(Error::Validation(format!("{} points, expected {}", points.len(), field.q() + 2)));
        }
        if let Some(t) = collinear_triple(field, &points) {
            return Err(Error::Validation(format!("collinear points {t:?}")));
        }
        Ok(Hyperoval { field, points })
    }

    pub fn points(&self) -> &[P2] {
        &self.points
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    /// The oval left after deleting `p`; `p` becomes its nucleus.
    pub fn remove(&self, p: &P2) -> Result<Oval> {
        if self.points.binary_search(p).is_err() {
            return Err(Error::Invalid(format!("{p:?} is not on the hyperoval")));
        }
        let points = self.points.iter().copied().filter(|x| x != p).collect();
        Ok(Oval::from_parts_unchecked(self.field, points, *p))
    }
}

impl P2 {
    /// Wraps coordinates that are already canonical.
    pub fn from_coords(c: [Fe; 3]) -> P2 {
        debug_assert_eq!(c.iter().find(|x| !x.is_zero()), Some(&Fe::ONE));
        crate::projspace::ProjPoint(c)
    }
}

/// Named o-polynomial families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `x^(1/2)`, the regular hyperoval's o-polynomial (D-form: pointed conic).
    Regular,
    /// `x^2` (D-form: conic).
    Conic,
    /// `x^(1/2)`; same polynomial as `Regular`.
    Pointed,
    /// `x^(2^k)`.
    Translation(u32),
    SubiacoI,
    SubiacoII,
    /// Adelaide with `m = (q-1)/3` or, when `minus`, `m = -(q-1)/3 mod q+1`.
    Adelaide {
        minus: bool,
    },
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Ok(match s {
            "regular" => Family::Regular,
            "conic" => Family::Conic,
            "pointed" => Family::Pointed,
            "subiaco1" => Family::SubiacoI,
            "subiaco2" => Family::SubiacoII,
            "adelaide" => Family::Adelaide { minus: false },
            "adelaide-" | "adelaide-minus" => Family::Adelaide { minus: true },
            _ => {
                let k = s
                    .strip_prefix("translation(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| s.strip_prefix("translation:"))
                    .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))?;
                Family::Translation(k.parse().map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?)
            }
        })
    }
}

/// Builds a validated o-polynomial of the named family, choosing the least
/// admissible parameters.
pub fn named_opoly(field: &'static Field, family: Family) -> Result<OPoly> {
    let h = field.h();
    let f = match family {
        Family::Regular => OPoly::monomial(field, field.q() as u64 / 2).with_family("regular", &[]),
        Family::Pointed => OPoly::monomial(field, field.q() as u64 / 2).with_family("pointed", &[]),
        Family::Conic => OPoly::monomial(field, 2).with_family("conic", &[]),
        Family::Translation(k) => {
            if k == 0 || k >= h {
                return Err(Error::Invalid(format!("exponent 2^{k} is not a nontrivial automorphism")));
            }
            OPoly::monomial(field, 1 << k).with_family("translation", &[("k", k as u64)])
        }
        Family::SubiacoI => subiaco_deltas(field)
            .into_iter()
            .map(|d| subiaco1_with(field, d))
            .find(|f| f.is_opermutation())
            .ok_or_else(|| Error::Unsupported(format!("no Subiaco I parameter over GF({})", field.q())))?,
        Family::SubiacoII => {
            let a = field
                .elements()
                .find(|&a| field.square(a) + a + Fe::ONE == Fe::ZERO)
                .ok_or_else(|| Error::Unsupported("a^2 + a + 1 = 0 needs h even".into()))?;
            subiaco_deltas(field)
                .into_iter()
                .filter(|&d| subiaco1_with(field, d).is_opermutation())
                .filter_map(|d| {
                    let g = subiaco_g(field, d).ok()?;
                    let kappa = clan_scalar(&subiaco1_with(field, d), &g)?;
                    subiaco2_with(field, d, kappa, a).ok()
                })
                .find(|f| f.is_opermutation())
                .ok_or_else(|| Error::Unsupported(format!("no Subiaco II parameter over GF({})", field.q())))?
        }
        Family::Adelaide { minus } => {
            let m = adelaide_m(field, minus)?;
            let e = Ext2::new(field);
            unit_circle(&e)
                .into_iter()
                .filter(|&b| b != Fe2::ONE)
                .map(|b| adelaide_with(field, b, m))
                .find(|f| f.is_opermutation())
                .ok_or_else(|| Error::Unsupported(format!("no Adelaide parameter over GF({})", field.q())))?
        }
    };
    if let Err(d) = f.check_opermutation() {
        return Err(Error::Unsupported(format!("{family:?} over GF({}) is not an o-permutation: {d}", field.q())));
    }
    Ok(f)
}

/// Least nonzero `k` such that `(f0(t), t^(1/2); 0, k g(t))` is a q-clan.
pub fn clan_scalar(f0: &OPoly, g: &OPoly) -> Option<Fe> {
    let f = f0.field();
    if g.field() != f {
        return None;
    }
    f.nonzero().find(|&k| {
        f.elements().all(|s| {
            f.elements().filter(|&t| t > s).all(|t| {
                let a = f0.eval(s) + f0.eval(t);
                let c = f.mul(k, g.eval(s) + g.eval(t));
                anisotropic(f, a, f.sqrt(s) + f.sqrt(t), c)
            })
        })
    })
}

pub fn least_trace_one(field: &Field) -> Fe {
    field.elements().find(|&e| field.trace(e) == 1).expect("trace is onto")
}

/// Admissible Subiaco parameters in increasing order.
pub fn subiaco_deltas(field: &Field) -> Vec<Fe> {
    field.nonzero().filter(|&d| field.square(d) + d + Fe::ONE != Fe::ZERO && field.trace(field.inv(d)) == 1).collect()
}

/// `f_SI(t) = (d^2 (t^4 + t) + d^2 (1 + d + d^2)(t^3 + t^2)) / (t^2 + d t + 1)^2 + t^(1/2)`.
pub fn subiaco1_with(field: &'static Field, d: Fe) -> OPoly {
    let f = field;
    let d2 = f.square(d);
    let k = f.mul(d2, Fe::ONE + d + d2);
    OPoly::from_fn(f, |t| {
        let num = f.mul(d2, f.pow(t, 4) + t) + f.mul(k, f.pow(t, 3) + f.square(t));
        let den = f.square(f.square(t) + f.mul(d, t) + Fe::ONE);
        f.div(num, den) + f.sqrt(t)
    })
    .with_family("subiaco1", &[("delta", d.0 as u64)])
}

/// The partner `g` of `f_SI` in the Subiaco herd.
pub fn subiaco_g(field: &'static Field, d: Fe) -> Result<OPoly> {
    let f = field;
    let d2 = f.square(d);
    let d3 = f.mul(d2, d);
    let d4 = f.square(d2);
    let d5 = f.mul(d4, d);
    let rd = f.sqrt(d);
    let big = d2 + d5 + rd;
    if big.is_zero() {
        return Err(Error::Invalid("d^2 + d^5 + d^(1/2) vanishes".into()));
    }
    let c3 = f.mul(d3, Fe::ONE + d2 + d4);
    let c1 = f.mul(d3, Fe::ONE + d2);
    let tail = f.div(rd, big);
    Ok(OPoly::from_fn(f, |t| {
        let num = f.mul(d4, f.pow(t, 4)) + f.mul(c3, f.pow(t, 3)) + f.mul(c1, t);
        let den = f.mul(big, f.square(f.square(t) + f.mul(d, t) + Fe::ONE));
        f.div(num, den) + f.mul(tail, f.sqrt(t))
    })
    .with_family("subiaco_g", &[("delta", d.0 as u64)]))
}

/// `f_SII = (f_SI + k a g + a^(1/2) t^(1/2)) / (1 + k a + a^(1/2))`.
pub fn subiaco2_with(field: &'static Field, d: Fe, kappa: Fe, a: Fe) -> Result<OPoly> {
    let f = field;
    let f1 = subiaco1_with(f, d);
    let g = subiaco_g(f, d)?;
    let ka = f.mul(kappa, a);
    let ra = f.sqrt(a);
    let den = Fe::ONE + ka + ra;
    if den.is_zero() {
        return Err(Error::Invalid("vanishing denominator".into()));
    }
    Ok(OPoly::from_fn(f, |t| f.div(f1.eval(t) + f.mul(ka, g.eval(t)) + f.mul(ra, f.sqrt(t)), den))
        .with_family("subiaco2", &[("delta", d.0 as u64), ("kappa", kappa.0 as u64), ("a", a.0 as u64)]))
}

/// Elements of norm one in GF(q^2), ordered by `re + q * im`.
pub fn unit_circle(e: &Ext2) -> Vec<Fe2> {
    let q = e.base.q() as u64;
    let mut v: Vec<Fe2> = e.elements().filter(|&x| e.pow(x, q + 1) == Fe2::ONE).collect();
    v.sort_by_key(|x| fe2_code(e, *x));
    v
}

pub fn fe2_code(e: &Ext2, x: Fe2) -> u64 {
    x.re.0 as u64 + e.base.q() as u64 * x.im.0 as u64
}

pub fn adelaide_m(field: &Field, minus: bool) -> Result<u64> {
    let q = field.q() as u64;
    if !field.h().is_multiple_of(2) {
        return Err(Error::Unsupported(format!("(q-1)/3 is not an integer for q = {q}")));
    }
    let m = (q - 1) / 3;
    Ok(if minus { q + 1 - m } else { m })
}

/// `f_A(t) = T(b^m)(t+1)/T(b) + T((b t + b^q)^m) / (T(b) (t + T(b) t^(1/2) + 1)^(m-1)) + t^(1/2)`.
pub fn adelaide_with(field: &'static Field, beta: Fe2, m: u64) -> OPoly {
    let f = field;
    let e = Ext2::new(f);
    let q = f.q() as u64;
    let tb = e.trace_to_base(beta);
    let tbm = e.trace_to_base(e.pow(beta, m));
    let bq = e.pow(beta, q);
    let code = fe2_code(&e, beta);
    OPoly::from_fn(f, |t| {
        if tb.is_zero() {
            return Fe::ZERO;
        }
        let first = f.div(f.mul(tbm, t + Fe::ONE), tb);
        let inner = e.add(e.mul(beta, Fe2::from_base(t)), bq);
        let num = e.trace_to_base(e.pow(inner, m));
        let base = t + f.mul(tb, f.sqrt(t)) + Fe::ONE;
        let den = f.mul(tb, f.pow(base, m - 1));
        first + f.div(num, den) + f.sqrt(t)
    })
    .with_family("adelaide", &[("beta", code), ("m", m)])
}

/// The partner of `f_A` in the Adelaide herd:
/// `T(b^m)/T(b) t + T((b^2 t + 1)^m) / (T(b) T(b^m) (t + T(b) t^(1/2) + 1)^(m-1)) + t^(1/2)/T(b^m)`.
pub fn adelaide_g(field: &'static Field, beta: Fe2, m: u64) -> Result<OPoly> {
    let f = field;
    let e = Ext2::new(f);
    let tb = e.trace_to_base(beta);
    let tbm = e.trace_to_base(e.pow(beta, m));
    if tb.is_zero() || tbm.is_zero() {
        return Err(Error::Invalid("degenerate Adelaide parameter".into()));
    }
    let b2 = e.mul(beta, beta);
    let code = fe2_code(&e, beta);
    Ok(OPoly::from_fn(f, |t| {
        let first = f.mul(f.div(tbm, tb), t);
        let inner = e.add(e.mul(b2, Fe2::from_base(t)), Fe2::ONE);
        let num = e.trace_to_base(e.pow(inner, m));
        let base = t + f.mul(tb, f.sqrt(t)) + Fe::ONE;
        let den = f.mul(f.mul(tb, tbm), f.pow(base, m - 1));
        first + f.div(num, den) + f.div(f.sqrt(t), tbm)
    })
    .with_family("adelaide_g", &[("beta", code), ("m", m)]))
}

/// Recovers the Adelaide parameter recorded on a named polynomial.
pub fn fe2_from_code(e: &Ext2, code: u64) -> Fe2 {
    let q = e.base.q() as u64;
    Fe2 { re: Fe((code % q) as u8), im: Fe((code / q) as u8) }
}
