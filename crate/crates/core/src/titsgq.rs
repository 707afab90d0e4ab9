//! The Tits quadrangle T2(O) of an oval in the plane `x0 = 0` of PG(3,q),
//! its spreads and planar ovoids, and the passage between spreads through
//! `(0,0,0,1)` and generalized fans.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collineation::{set_maps, Coll3, Collineation};
use crate::error::{Error, Result};
use crate::exact_cover::ExactCover;
use crate::fans::{embed_pi, embed_pi_inf, posies_equivalent, project_pi, GeneralizedFan, Posy};
use crate::gfield::{Fe, Field};
use crate::ovals::{OPoly, Oval};
use crate::projspace::{dot, span, ProjPoint, P2, P3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", content = "coords", rename_all = "snake_case")]
pub enum T2Point {
    /// A point of PG(3,q) off `x0 = 0`.
    Affine(P3),
    /// A plane other than `x0 = 0` meeting it in a tangent line, by dual
    /// coordinates.
    Plane(P3),
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum T2Line {
    /// The line through the oval point `q` (coordinates of `x0 = 0`) and
    /// the affine point `x`, where `x` is the point of the line with a zero
    /// in the leading position of `q`.
    Affine { q: P2, x: P3 },
    /// A point of the oval.
    Oval { q: P2 },
}

impl T2Line {
    pub fn oval_point(&self) -> P2 {
        match self {
            T2Line::Affine { q, .. } | T2Line::Oval { q } => *q,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TitsGQ {
    oval: Oval,
}

impl TitsGQ {
    pub fn new(oval: Oval) -> TitsGQ {
        TitsGQ { oval }
    }

    pub fn oval(&self) -> &Oval {
        &self.oval
    }

    pub fn field(&self) -> &'static Field {
        self.oval.field()
    }

    pub fn q(&self) -> usize {
        self.oval.q()
    }

    /// `f` when the oval is `D(f)`.
    pub fn director_poly(&self) -> Result<OPoly> {
        let f = self.field();
        let top = ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE]);
        if !self.oval.contains(&top) || self.oval.nucleus() != ProjPoint([Fe::ZERO, Fe::ONE, Fe::ZERO]) {
            return Err(Error::Invalid("oval is not of the form D(f)".into()));
        }
        let mut vals = vec![Fe::ZERO; f.q()];
        for p in self.oval.points().iter().filter(|p| p.0[0] == Fe::ONE) {
            vals[p.0[1].idx()] = p.0[2];
        }
        OPoly::from_values(f, vals)
    }

    /// Canonical type (a) line through oval point `q` and affine point `x`.
    pub fn affine_line(&self, q: &P2, x: &P3) -> Result<T2Line> {
        let f = self.field();
        if !self.oval.contains(q) || x.0[0].is_zero() {
            return Err(Error::Invalid("need an oval point and an affine point".into()));
        }
        let q3 = embed_pi_inf(q);
        let x = P3::normalize(f, x.0)?;
        let j = q3.0.iter().position(|c| !c.is_zero()).expect("nonzero");
        let c = x.0[j];
        let v = [0, 1, 2, 3].map(|i| x.0[i] + f.mul(c, q3.0[i]));
        Ok(T2Line::Affine { q: *q, x: ProjPoint(v) })
    }

    fn tangent(&self, q: &P2) -> P2 {
        self.oval.tangent_at(q).expect("oval point")
    }

    /// Dual coordinates of the plane spanned by a type (a) line and the
    /// tangent at its oval point.
    fn plane_of(&self, q: &P2, x: &P3) -> P3 {
        let f = self.field();
        let s = span(f, &[*x, embed_pi_inf(q), embed_pi_inf(&self.oval.nucleus())]);
        P3::normalize(f, s.dual()[0]).expect("plane")
    }

    pub fn points_on(&self, l: &T2Line) -> Vec<T2Point> {
        let f = self.field();
        match l {
            T2Line::Affine { q, x } => {
                let q3 = embed_pi_inf(q);
                let mut v: Vec<T2Point> = f
                    .elements()
                    .map(|m| T2Point::Affine(ProjPoint([0, 1, 2, 3].map(|i| x.0[i] + f.mul(m, q3.0[i])))))
                    .collect();
                v.push(T2Point::Plane(self.plane_of(q, x)));
                v
            }
            T2Line::Oval { q } => {
                let t = self.tangent(q);
                let mut v: Vec<T2Point> = f
                    .elements()
                    .map(|c| T2Point::Plane(P3::normalize(f, [c, t.0[0], t.0[1], t.0[2]]).expect("nonzero")))
                    .collect();
                v.push(T2Point::Infinity);
                v
            }
        }
    }

    pub fn lines_through(&self, p: &T2Point) -> Vec<T2Line> {
        let f = self.field();
        match p {
            T2Point::Infinity => self.oval.points().iter().map(|q| T2Line::Oval { q: *q }).collect(),
            T2Point::Affine(x) => self.oval.points().iter().map(|q| self.affine_line(q, x).expect("valid")).collect(),
            T2Point::Plane(d) => {
                let trace = ProjPoint([d.0[1], d.0[2], d.0[3]]);
                let Some(q) = self.oval.points().iter().find(|q| dot(f, &trace.0, &q.0).is_zero()).copied() else {
                    return Vec::new();
                };
                let mut v = vec![T2Line::Oval { q }];
                // affine points of the plane with x0 = 1, one per line
                let mut seen = std::collections::HashSet::new();
                for a in f.elements() {
                    for b in f.elements() {
                        for c in f.elements() {
                            let x = ProjPoint([Fe::ONE, a, b, c]);
                            if dot(f, &d.0, &x.0).is_zero() {
                                let l = self.affine_line(&q, &x).expect("valid");
                                if seen.insert(l) {
                                    v.push(l);
                                }
                            }
                        }
                    }
                }
                v
            }
        }
    }

    pub fn incident(&self, p: &T2Point, l: &T2Line) -> bool {
        let f = self.field();
        match (p, l) {
            (T2Point::Infinity, T2Line::Oval { .. }) => true,
            (T2Point::Infinity, _) | (T2Point::Affine(_), T2Line::Oval { .. }) => false,
            (T2Point::Affine(x), T2Line::Affine { q, .. }) => self.affine_line(q, x).ok().as_ref() == Some(l),
            (T2Point::Plane(d), T2Line::Oval { q }) => {
                let t = self.tangent(q);
                P3::normalize(f, [Fe::ZERO, t.0[0], t.0[1], t.0[2]]).ok()
                    == P3::normalize(f, [Fe::ZERO, d.0[1], d.0[2], d.0[3]]).ok()
            }
            (T2Point::Plane(d), T2Line::Affine { q, x }) => self.plane_of(q, x) == *d,
        }
    }

    pub fn is_point(&self, p: &T2Point) -> bool {
        let f = self.field();
        match p {
            T2Point::Infinity => true,
            T2Point::Affine(x) => !x.0[0].is_zero(),
            T2Point::Plane(d) => {
                let trace = [d.0[1], d.0[2], d.0[3]];
                trace.iter().any(|c| !c.is_zero())
                    && self.oval.tangents().iter().any(|t| {
                        P3::normalize(f, [Fe::ZERO, t.0[0], t.0[1], t.0[2]]).ok()
                            == P3::normalize(f, [Fe::ZERO, trace[0], trace[1], trace[2]]).ok()
                    })
            }
        }
    }

    pub fn is_line(&self, l: &T2Line) -> bool {
        match l {
            T2Line::Oval { q } => self.oval.contains(q),
            T2Line::Affine { q, x } => self.affine_line(q, x).ok().as_ref() == Some(l),
        }
    }

    pub fn points(&self) -> Vec<T2Point> {
        let f = self.field();
        let q = f.q();
        let mut v: Vec<T2Point> = Vec::with_capacity((q + 1) * (q * q + 1));
        for a in f.elements() {
            for b in f.elements() {
                for c in f.elements() {
                    v.push(T2Point::Affine(ProjPoint([Fe::ONE, a, b, c])));
                }
            }
        }
        for t in self.oval.tangents() {
            for c in f.elements() {
                v.push(T2Point::Plane(P3::normalize(f, [c, t.0[0], t.0[1], t.0[2]]).expect("nonzero")));
            }
        }
        v.push(T2Point::Infinity);
        v
    }

    pub fn lines(&self) -> Vec<T2Line> {
        let f = self.field();
        let mut v = Vec::new();
        for q in self.oval.points() {
            v.push(T2Line::Oval { q: *q });
            let q3 = embed_pi_inf(q);
            let j = q3.0.iter().position(|c| !c.is_zero()).expect("nonzero");
            let free: Vec<usize> = (1..4).filter(|&i| i != j).collect();
            for a in f.elements() {
                for b in f.elements() {
                    let mut x = [Fe::ONE, Fe::ZERO, Fe::ZERO, Fe::ZERO];
                    x[free[0]] = a;
                    x[free[1]] = b;
                    v.push(T2Line::Affine { q: *q, x: ProjPoint(x) });
                }
            }
        }
        v
    }

    /// Checks order `(q,q)` and that every non-incident point-line pair
    /// has exactly one connecting line. `sample` limits the points tried.
    pub fn check_axioms(&self, sample: Option<usize>) -> Result<()> {
        let q = self.q();
        let points = self.points();
        let lines = self.lines();
        let n = (q + 1) * (q * q + 1);
        if points.len() != n || lines.len() != n {
            return Err(Error::Validation(format!("{} points and {} lines", points.len(), lines.len())));
        }
        let on: HashMap<T2Line, Vec<T2Point>> = lines.iter().map(|l| (*l, self.points_on(l))).collect();
        for (l, pts) in &on {
            if pts.len() != q + 1 || pts.iter().any(|p| !self.incident(p, l)) {
                return Err(Error::Validation(format!("line {l:?} has a bad point row")));
            }
        }
        let step = sample.map_or(1, |s| (points.len() / s.max(1)).max(1));
        for p in points.iter().step_by(step) {
            let through = self.lines_through(p);
            if through.len() != q + 1 || through.iter().any(|l| !self.incident(p, l)) {
                return Err(Error::Validation(format!("point {p:?} is on {} lines", through.len())));
            }
            for l in &lines {
                if on[l].contains(p) {
                    continue;
                }
                let meets = through.iter().filter(|m| on[m].iter().any(|y| on[l].contains(y))).count();
                if meets != 1 {
                    return Err(Error::Validation(format!("{p:?} and {l:?} are joined by {meets} lines")));
                }
            }
        }
        Ok(())
    }
}

/// A set of lines of a Tits quadrangle, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Spread {
    pub lines: Vec<T2Line>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpreadDefect {
    ForeignLine { line: T2Line },
    DoublyCovered { point: T2Point },
    Uncovered { count: usize, example: T2Point },
}

impl Spread {
    pub fn new(mut lines: Vec<T2Line>) -> Spread {
        lines.sort();
        lines.dedup();
        Spread { lines }
    }

    pub fn type_b(&self) -> Vec<P2> {
        self.lines.iter().filter_map(|l| if let T2Line::Oval { q } = l { Some(*q) } else { None }).collect()
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// Exact-cover check: every point of `t` on exactly one line of `lines`.
pub fn check_spread(t: &TitsGQ, lines: &[T2Line]) -> std::result::Result<(), SpreadDefect> {
    let mut covered: HashMap<T2Point, ()> = HashMap::new();
    for l in lines {
        if !t.is_line(l) {
            return Err(SpreadDefect::ForeignLine { line: *l });
        }
        for p in t.points_on(l) {
            if covered.insert(p, ()).is_some() {
                return Err(SpreadDefect::DoublyCovered { point: p });
            }
        }
    }
    let all = t.points();
    if covered.len() != all.len() {
        let missing: Vec<&T2Point> = all.iter().filter(|p| !covered.contains_key(p)).collect();
        return Err(SpreadDefect::Uncovered { count: missing.len(), example: *missing[0] });
    }
    Ok(())
}

pub fn is_spread(t: &TitsGQ, lines: &[T2Line]) -> bool {
    check_spread(t, lines).is_ok()
}

fn top() -> P2 {
    ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE])
}

/// The spread of `T2(D(f))` made of `(0,0,0,1)` and the lines joining
/// `(0,1,s,f(s))` to the affine points of `O_s`.
pub fn spread_from_fan(fan: &GeneralizedFan) -> Result<(TitsGQ, Spread)> {
    if let Err(d) = fan.check() {
        return Err(Error::Validation(format!("not a generalized fan: {d:?}")));
    }
    let field = fan.field();
    let t = TitsGQ::new(Oval::d_form(&fan.f)?);
    let mut lines = vec![T2Line::Oval { q: top() }];
    for s in field.elements() {
        let q = ProjPoint([Fe::ONE, s, fan.f.eval(s)]);
        for x in fan.oval(s).points().iter().filter(|x| **x != top()) {
            lines.push(t.affine_line(&q, &embed_pi(x))?);
        }
    }
    Ok((t, Spread::new(lines)))
}

/// Slices the lines through each `(0,1,s,f(s))` by the plane `x1 = 0`.
pub fn fan_from_spread(t: &TitsGQ, spread: &Spread) -> Result<GeneralizedFan> {
    let f = t.director_poly()?;
    if !spread.lines.contains(&T2Line::Oval { q: top() }) {
        return Err(Error::Invalid("the spread does not contain (0,0,0,1)".into()));
    }
    let field = t.field();
    let mut slices: Vec<Vec<P2>> = vec![vec![top()]; field.q()];
    for l in &spread.lines {
        if let T2Line::Affine { q, x } = l {
            // leading coordinate of q is its x1, so x already has x1 = 0
            let p = project_pi(x).ok_or_else(|| Error::Invalid("oval point off the graph of f".into()))?;
            slices[q.0[1].idx()].push(p);
        }
    }
    let ovals = slices.iter().map(|pts| Oval::from_points(field, pts)).collect::<Result<Vec<_>>>()?;
    let fan = GeneralizedFan::new(f, ovals)?;
    if let Err(d) = fan.check() {
        return Err(Error::Validation(format!("slices are not a generalized fan: {d:?}")));
    }
    Ok(fan)
}

/// Replaces the type (b) member `p` by the nucleus, giving a spread of
/// the quadrangle of the swapped oval.
pub fn nucleus_swap_spread(t: &TitsGQ, spread: &Spread, p: &P2) -> Result<(TitsGQ, Spread)> {
    if spread.type_b() != [*p] {
        return Err(Error::Invalid(format!("{p:?} is not the type (b) member")));
    }
    let swapped = TitsGQ::new(t.oval.swap_nucleus(p)?);
    let n = t.oval.nucleus();
    let lines = spread
        .lines
        .iter()
        .map(|l| if matches!(l, T2Line::Oval { .. }) { T2Line::Oval { q: n } } else { *l })
        .collect();
    Ok((swapped, Spread::new(lines)))
}

/// `(plane \ x0 = 0) U {(inf)}` for a plane whose trace on `x0 = 0` is
/// external to the oval.
pub fn planar_ovoid(t: &TitsGQ, plane: &P3) -> Result<Vec<T2Point>> {
    let f = t.field();
    let trace = ProjPoint([plane.0[1], plane.0[2], plane.0[3]]);
    if trace.0.iter().all(|c| c.is_zero()) || t.oval.meet_count(&P2::normalize(f, trace.0)?) != 0 {
        return Err(Error::Invalid("the plane does not meet x0 = 0 in an external line".into()));
    }
    let mut pts = vec![T2Point::Infinity];
    for a in f.elements() {
        for b in f.elements() {
            for c in f.elements() {
                let x = ProjPoint([Fe::ONE, a, b, c]);
                if dot(f, &plane.0, &x.0).is_zero() {
                    pts.push(T2Point::Affine(x));
                }
            }
        }
    }
    Ok(pts)
}

/// Every line meets the point set exactly once.
pub fn is_ovoid(t: &TitsGQ, pts: &[T2Point]) -> bool {
    let set: std::collections::HashSet<&T2Point> = pts.iter().collect();
    let q = t.q();
    pts.len() == q * q + 1 && t.lines().iter().all(|l| t.points_on(l).iter().filter(|p| set.contains(p)).count() == 1)
}

/// Every spread whose type (b) member is `anchor`, by exact cover over the
/// type (a) lines missing `anchor`. Only for `q <= 8`.
pub fn enumerate_spreads(t: &TitsGQ, anchor: &P2, limit: Option<usize>) -> Result<Vec<Spread>> {
    let f = t.field();
    let q = f.q();
    if q > 8 {
        return Err(Error::Unsupported(format!("exhaustive spread search needs q <= 8, got {q}")));
    }
    if !t.oval.contains(anchor) {
        return Err(Error::Invalid("anchor is not on the oval".into()));
    }
    let candidates: Vec<T2Line> =
        t.lines().into_iter().filter(|l| matches!(l, T2Line::Affine { q, .. } if q != anchor)).collect();
    let mut col_of: HashMap<T2Point, usize> = HashMap::new();
    let rows: Vec<Vec<usize>> = candidates
        .iter()
        .map(|l| {
            t.points_on(l)
                .into_iter()
                .map(|p| {
                    let n = col_of.len();
                    *col_of.entry(p).or_insert(n)
                })
                .collect()
        })
        .collect();
    let dl = ExactCover::new(col_of.len(), &rows);
    let sols = dl.solutions_par(limit);
    Ok(sols
        .into_iter()
        .map(|rows| {
            let mut lines: Vec<T2Line> = rows.iter().map(|&r| candidates[r]).collect();
            lines.push(T2Line::Oval { q: *anchor });
            Spread::new(lines)
        })
        .collect())
}

/// A collineation of PG(3,q) carrying `(t1, s1)` to `(t2, s2)`, decided on
/// the posies of the two spreads. Both spreads must contain `(0,0,0,1)`
/// and both ovals must be of the form `D(f)`.
pub fn spread_pairs_equivalent(t1: &TitsGQ, s1: &Spread, t2: &TitsGQ, s2: &Spread) -> Result<Option<Coll3>> {
    let p1 = Posy::from_fan(&fan_from_spread(t1, s1)?)?;
    let p2 = Posy::from_fan(&fan_from_spread(t2, s2)?)?;
    posies_equivalent(&p1, &p2)
}

/// Collineations of PG(3,q) fixing `x0 = 0`, `x1 = 0`, the director
/// `D(f)` and `(0,0,0,1)`, enough to generate a large subgroup of the maps
/// between posies on `D(f)`: a sample of the director stabilizer, one
/// scalar and the translations along a basis.
pub fn posy_generators(f: &OPoly) -> Result<Vec<Coll3>> {
    let field = f.field();
    let d: Vec<P2> = Oval::d_form(f)?.points().to_vec();
    let stab = set_maps(field, &d, &d, Some((top(), top())), false)?;
    let extend = |lambda: Fe, u: Fe, v: Fe, b: &[[Fe; 3]; 3], k: u32| {
        let m = [
            [lambda, Fe::ZERO, u, v],
            [Fe::ZERO, b[0][0], b[0][1], b[0][2]],
            [Fe::ZERO, b[1][0], b[1][1], b[1][2]],
            [Fe::ZERO, b[2][0], b[2][1], b[2][2]],
        ];
        Collineation::new(field, m, k)
    };
    let id = crate::collineation::identity_matrix::<3>();
    let mut gens = Vec::new();
    let step = (stab.len() / 8).max(1);
    for phi in stab.iter().filter(|g| !g.is_identity()).step_by(step) {
        gens.push(extend(Fe::ONE, Fe::ZERO, Fe::ZERO, &phi.m, phi.k)?);
    }
    if field.q() > 2 {
        gens.push(extend(field.generator(), Fe::ZERO, Fe::ZERO, &id, 0)?);
    }
    for i in 0..field.h() {
        let e = Fe(1 << i);
        gens.push(extend(Fe::ONE, e, Fe::ZERO, &id, 0)?);
        gens.push(extend(Fe::ONE, Fe::ZERO, e, &id, 0)?);
    }
    Ok(gens)
}

impl Spread {
    /// Image under a collineation fixing `x0 = 0` and the oval of `t`.
    pub fn map(&self, t: &TitsGQ, g: &Coll3) -> Result<Spread> {
        let field = t.field();
        let lines = self
            .lines
            .iter()
            .map(|l| match l {
                T2Line::Oval { q } => {
                    let img = crate::fans::project_pi_inf(&g.apply(field, &embed_pi_inf(q)))
                        .ok_or_else(|| Error::Invalid("map moves x0 = 0".into()))?;
                    Ok(T2Line::Oval { q: img })
                }
                T2Line::Affine { q, x } => {
                    let img = crate::fans::project_pi_inf(&g.apply(field, &embed_pi_inf(q)))
                        .ok_or_else(|| Error::Invalid("map moves x0 = 0".into()))?;
                    t.affine_line(&img, &g.apply(field, x))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Spread::new(lines))
    }
}

/// Groups spreads of `t` containing `(0,0,0,1)` into equivalence classes.
/// Orbits under [`posy_generators`] are merged first; the remaining orbit
/// representatives are compared with [`posies_equivalent`]. Returns class
/// member indices, classes ordered by least member.
pub fn spread_classes(t: &TitsGQ, spreads: &[Spread]) -> Result<Vec<Vec<usize>>> {
    let f = t.director_poly()?;
    let gens = posy_generators(&f)?;
    let index: HashMap<&Spread, usize> = spreads.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut orbit = vec![usize::MAX; spreads.len()];
    let mut reps = Vec::new();
    for start in 0..spreads.len() {
        if orbit[start] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(start);
        orbit[start] = id;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let images = gens.par_iter().map(|g| spreads[i].map(t, g)).collect::<Result<Vec<_>>>()?;
            for img in images {
                let j = *index
                    .get(&img)
                    .ok_or_else(|| Error::Invalid("spread list is not closed under the posy group".into()))?;
                if orbit[j] == usize::MAX {
                    orbit[j] = id;
                    stack.push(j);
                }
            }
        }
    }
    let posies = reps.iter().map(|&i| Posy::from_fan(&fan_from_spread(t, &spreads[i])?)).collect::<Result<Vec<_>>>()?;
    let mut class_of_orbit: Vec<usize> = Vec::with_capacity(reps.len());
    let mut class_reps: Vec<usize> = Vec::new();
    for (o, p) in posies.iter().enumerate() {
        let mut found = None;
        for (c, &r) in class_reps.iter().enumerate() {
            if posies_equivalent(&posies[r], p)?.is_some() {
                found = Some(c);
                break;
            }
        }
        let c = found.unwrap_or_else(|| {
            class_reps.push(o);
            class_reps.len() - 1
        });
        class_of_orbit.push(c);
    }
    let mut classes = vec![Vec::new(); class_reps.len()];
    for (i, &o) in orbit.iter().enumerate() {
        classes[class_of_orbit[o]].push(i);
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fans::fan_from_flock;
    use crate::ovals::least_trace_one;

    fn gf(h: u32) -> &'static Field {
        Field::standard(h).unwrap()
    }

    fn conic(f: &'static Field) -> TitsGQ {
        TitsGQ::new(Oval::d_form(&OPoly::monomial(f, 2)).unwrap())
    }

    #[test]
    fn q4_counts_and_axioms() {
        let t = conic(gf(2));
        assert_eq!(t.points().len(), 85);
        assert_eq!(t.lines().len(), 85);
        for q in t.oval().points() {
            assert!(t.incident(&T2Point::Infinity, &T2Line::Oval { q: *q }));
        }
        t.check_axioms(None).unwrap();
    }

    #[test]
    fn q8_axioms_sampled() {
        conic(gf(3)).check_axioms(Some(40)).unwrap();
    }

    #[test]
    fn lines_through_infinity_are_not_a_spread() {
        let t = conic(gf(2));
        let lines = t.lines_through(&T2Point::Infinity);
        assert!(matches!(check_spread(&t, &lines), Err(SpreadDefect::DoublyCovered { .. })));
    }

    #[test]
    fn fan_spread_round_trip_q8() {
        let f = gf(3);
        let k = least_trace_one(f);
        let x = OPoly::monomial(f, 4);
        let g = OPoly::from_fn(f, |t| f.mul(k, f.sqrt(t)));
        let fan = fan_from_flock(&x, &g, 2).unwrap();
        let (t, s) = spread_from_fan(&fan).unwrap();
        assert_eq!(s.len(), 65);
        assert_eq!(s.type_b(), vec![top()]);
        check_spread(&t, &s.lines).unwrap();
        assert_eq!(fan_from_spread(&t, &s).unwrap(), fan);

        let mut short = s.lines.clone();
        short.pop();
        match check_spread(&t, &short) {
            Err(SpreadDefect::Uncovered { count, .. }) => assert_eq!(count, 9),
            other => panic!("{other:?}"),
        }

        let (t2, s2) = nucleus_swap_spread(&t, &s, &top()).unwrap();
        check_spread(&t2, &s2.lines).unwrap();
        let n = t.oval().nucleus();
        let (t3, s3) = nucleus_swap_spread(&t2, &s2, &n).unwrap();
        assert_eq!(s3, s);
        assert_eq!(t3.oval(), t.oval());
    }

    #[test]
    fn planar_ovoid_q4() {
        let f = gf(2);
        let t = conic(f);
        let plane = P3::all(4)
            .find(|d| {
                let tr = [d.0[1], d.0[2], d.0[3]];
                tr.iter().any(|c| !c.is_zero()) && t.oval().meet_count(&P2::normalize(f, tr).unwrap()) == 0
            })
            .unwrap();
        let o = planar_ovoid(&t, &plane).unwrap();
        assert_eq!(o.len(), 17);
        assert!(is_ovoid(&t, &o));
        let secant = P3::all(4)
            .find(|d| {
                let tr = [d.0[1], d.0[2], d.0[3]];
                tr.iter().any(|c| !c.is_zero()) && t.oval().meet_count(&P2::normalize(f, tr).unwrap()) == 2
            })
            .unwrap();
        assert!(planar_ovoid(&t, &secant).is_err());
    }

    #[test]
    fn q4_spreads_form_one_class() {
        let t = conic(gf(2));
        let spreads = enumerate_spreads(&t, &top(), None).unwrap();
        assert!(!spreads.is_empty());
        for s in &spreads {
            check_spread(&t, &s.lines).unwrap();
            let fan = fan_from_spread(&t, s).unwrap();
            let (_, back) = spread_from_fan(&fan).unwrap();
            assert_eq!(&back, s);
        }
        assert_eq!(spread_classes(&t, &spreads).unwrap().len(), 1);
    }

    #[test]
    fn q8_conic_spread_classes() {
        let f = gf(3);
        let t = conic(f);
        let spreads = enumerate_spreads(&t, &top(), None).unwrap();
        assert!(spreads.iter().all(|s| s.len() == 65 && s.type_b() == [top()]));
        let classes = spread_classes(&t, &spreads).unwrap();
        assert!(classes.len() >= 2);
        assert_eq!(classes.iter().map(Vec::len).sum::<usize>(), spreads.len());
        // a fan of conics and a fan of pointed conics cannot be equivalent
        let conics = |s: &Spread| fan_from_spread(&t, s).unwrap().ovals.iter().filter(|o| o.is_conic()).count();
        for c in &classes {
            let n = conics(&spreads[c[0]]);
            assert!(c.iter().all(|&i| conics(&spreads[i]) == n));
        }
    }

    #[test]
    fn spread_map_by_generators_stays_a_spread() {
        let f = gf(3);
        let k = least_trace_one(f);
        let x = OPoly::monomial(f, 4);
        let g = OPoly::from_fn(f, |t| f.mul(k, f.sqrt(t)));
        let (t, s) = spread_from_fan(&fan_from_flock(&x, &g, 2).unwrap()).unwrap();
        for gen in posy_generators(&x).unwrap() {
            let img = s.map(&t, &gen).unwrap();
            check_spread(&t, &img.lines).unwrap();
            assert!(spread_pairs_equivalent(&t, &s, &t, &img).unwrap().is_some());
        }
    }
}
