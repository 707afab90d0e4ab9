//! Oval census from seeded hyperovals, screening of fan candidates by
//! matching oval-point pairs, the orbit-constrained equivalence check,
//! generator orbits of flocks and the spread classification report.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collineation::{mat_inv, set_maps, Coll2, Collineation, Group, Mat, Orbits};
use crate::error::{Error, Result};
use crate::fans::{off_points, OvalPointPair};
use crate::flocks::{cone_base_points, herd_from_clan, named_clan, AlphaFlock, Herd};
use crate::gfield::{Fe, Field};
use crate::magic::{find_equivalence_with_orbit_constraint, pgl2_elements, MagicElement};
use crate::ovals::{named_opoly, Family, Hyperoval, OPoly, Oval};
use crate::projspace::{line_points, ProjPoint, P2};
use crate::titsgq::{enumerate_spreads, fan_from_spread, spread_classes, TitsGQ};

/// Hyperovals known to represent every class for the given order.
pub fn seeded_hyperovals(field: &'static Field) -> Result<Vec<(String, Hyperoval)>> {
    let families: Vec<(&str, Family)> = match field.q() {
        2 | 4 | 8 => vec![("regular", Family::Regular)],
        64 => vec![
            ("regular", Family::Regular),
            ("subiaco1", Family::SubiacoI),
            ("subiaco2", Family::SubiacoII),
            ("adelaide", Family::Adelaide { minus: false }),
        ],
        q => return Err(Error::Unsupported(format!("no seeded hyperoval list for q = {q}"))),
    };
    families
        .into_iter()
        .map(|(name, fam)| Ok((name.to_string(), Oval::d_form(&named_opoly(field, fam)?)?.hyperoval())))
        .collect()
}

/// Orbits of the setwise stabilizer of `set` on its points, and the
/// stabilizer order. Built from the stabilizer of one point together with
/// transporters, so the full group is never listed.
pub fn set_point_orbits(field: &Field, set: &[P2]) -> Result<(Vec<Vec<P2>>, u64)> {
    let mut pts = set.to_vec();
    pts.sort();
    let index: HashMap<P2, usize> = pts.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let p0 = pts[0];
    let stab0 = set_maps(field, &pts, &pts, Some((p0, p0)), false)?;
    let mut parent: Vec<usize> = (0..pts.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let absorb = |parent: &mut Vec<usize>, g: &Coll2| {
        for (i, p) in pts.iter().enumerate() {
            let j = index[&g.apply(field, p)];
            let (a, b) = (find(parent, i), find(parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    };
    // one generator per distinct permutation is enough
    let mut perms: HashSet<Vec<usize>> = HashSet::new();
    for g in &stab0 {
        let perm: Vec<usize> = pts.iter().map(|p| index[&g.apply(field, p)]).collect();
        if perms.insert(perm) {
            absorb(&mut parent, g);
        }
    }
    let mut refused: HashSet<usize> = HashSet::new();
    loop {
        let root0 = find(&mut parent, 0);
        let next = (0..pts.len()).find(|&i| {
            let r = find(&mut parent, i);
            r == i && r != root0 && !refused.contains(&r)
        });
        let Some(r) = next else { break };
        match set_maps(field, &pts, &pts, Some((p0, pts[r])), true)?.into_iter().next() {
            Some(g) => absorb(&mut parent, &g),
            None => {
                refused.insert(r);
            }
        }
        // roots only move down, so refused roots stay roots
    }
    let mut groups: BTreeMap<usize, Vec<P2>> = BTreeMap::new();
    for (i, p) in pts.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(*p);
    }
    let orbits: Vec<Vec<P2>> = groups.into_values().collect();
    let order = stab0.len() as u64 * orbits[0].len() as u64;
    Ok((orbits, order))
}

/// One oval class of a census.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OvalClass {
    pub id: usize,
    /// Hyperoval family the oval comes from.
    pub hyperoval: String,
    /// Index of the removed point's orbit on the hyperoval.
    pub removed_orbit: usize,
    /// `f` with the representative `D(f)`.
    pub representative: String,
    pub coeffs: Vec<u8>,
    pub stabilizer_order: u64,
    /// Orbit lengths of the stabilizer on the points of `D(f)`.
    pub point_orbits: Vec<usize>,
    /// Least point of each orbit, in `D(f)` coordinates.
    pub anchors: Vec<P2>,
    pub is_conic: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusReport {
    pub q: usize,
    pub hyperovals: Vec<HyperovalOrbits>,
    pub classes: Vec<OvalClass>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HyperovalOrbits {
    pub family: String,
    pub stabilizer_order: u64,
    pub orbit_lengths: Vec<usize>,
}

/// A census with the data needed by later stages.
#[derive(Clone, Debug)]
pub struct Census {
    pub report: CensusReport,
    pub polys: Vec<OPoly>,
    pub ovals: Vec<Oval>,
    pub groups: Vec<Group<3>>,
    pub orbits: Vec<Orbits<3>>,
}

fn top() -> P2 {
    ProjPoint([Fe::ZERO, Fe::ZERO, Fe::ONE])
}

/// Stabilizer of an oval (it fixes the nucleus) and its orbits on the oval.
pub fn oval_stabilizer(oval: &Oval) -> Result<(Group<3>, Orbits<3>)> {
    let f = oval.field();
    let n = oval.nucleus();
    let mut pts = oval.points().to_vec();
    pts.push(n);
    let g = Group { elements: set_maps(f, &pts, &pts, Some((n, n)), false)? };
    let o = g.orbits(f, oval.points());
    Ok((g, o))
}

/// One oval per point orbit of each seeded hyperoval's stabilizer.
pub fn oval_census(q: usize) -> Result<Census> {
    let field = Field::of_order(q)?;
    let hyps = seeded_hyperovals(field)?;
    let mut report = CensusReport { q, hyperovals: Vec::new(), classes: Vec::new() };
    let mut polys = Vec::new();
    let mut ovals = Vec::new();
    let mut groups = Vec::new();
    let mut orbits_all = Vec::new();
    for (name, hyp) in &hyps {
        let (orbits, order) = set_point_orbits(field, hyp.points())?;
        report.hyperovals.push(HyperovalOrbits {
            family: name.clone(),
            stabilizer_order: order,
            orbit_lengths: orbits.iter().map(Vec::len).collect(),
        });
        for (k, orbit) in orbits.iter().enumerate() {
            let raw = hyp.remove(&orbit[0])?;
            let (f, _) = raw.d_form_at(&raw.points()[0])?;
            let d = Oval::d_form(&f)?;
            let (g, o) = oval_stabilizer(&d)?;
            report.classes.push(OvalClass {
                id: report.classes.len(),
                hyperoval: name.clone(),
                removed_orbit: k,
                representative: f.expr(),
                coeffs: f.coeffs().iter().map(|c| c.0).collect(),
                stabilizer_order: g.order() as u64,
                point_orbits: o.lengths(),
                anchors: o.representatives(),
                is_conic: d.is_conic(),
            });
            polys.push(f);
            ovals.push(d);
            groups.push(g);
            orbits_all.push(o);
        }
    }
    Ok(Census { report, polys, ovals, groups, orbits: orbits_all })
}

/// Whether two ovals are projectively equivalent, optionally with a point
/// of each required to correspond.
pub fn ovals_equivalent(a: &Oval, b: &Oval, points: Option<(P2, P2)>) -> Result<Option<Coll2>> {
    let f = a.field();
    let mut pa = a.points().to_vec();
    pa.push(a.nucleus());
    let mut pb = b.points().to_vec();
    pb.push(b.nucleus());
    let fixed = match points {
        Some((x, y)) => Some((x, y)),
        None => Some((a.nucleus(), b.nucleus())),
    };
    let maps = set_maps(f, &pa, &pb, fixed, true)?;
    Ok(maps.into_iter().find(|g| g.apply(f, &a.nucleus()) == b.nucleus()))
}

/// No two census representatives are equivalent. Classes with different
/// stabilizer orders or orbit lengths are separated without a search.
pub fn census_classes_distinct(census: &Census) -> Result<bool> {
    let n = census.ovals.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&census.report.classes[i], &census.report.classes[j]);
            let mut la = a.point_orbits.clone();
            let mut lb = b.point_orbits.clone();
            la.sort();
            lb.sort();
            if a.stabilizer_order != b.stabilizer_order || la != lb {
                continue;
            }
            if ovals_equivalent(&census.ovals[i], &census.ovals[j], None)?.is_some() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnchorScreen {
    pub anchor: P2,
    pub orbit_length: usize,
    /// Points of the tangent at the anchor (other than the anchor and the
    /// nucleus) without a matching stored pair.
    pub unmatched: usize,
    pub passes: bool,
    /// The oval with this point replaced by its nucleus is a conic.
    pub conic_but_anchor: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassScreen {
    pub class: usize,
    pub stored_pairs: usize,
    pub anchors: Vec<AnchorScreen>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScreenReport {
    pub q: usize,
    pub stored_pairs: usize,
    pub classes: Vec<ClassScreen>,
    /// `(class, anchor)` for every passing anchor orbit.
    pub survivors: Vec<(usize, P2)>,
}

/// For each class and anchor orbit, whether every point of the tangent at
/// the anchor (not the anchor, not the nucleus) has a matching pair among
/// the stored oval-point pairs (one per orbit on points off oval and
/// nucleus, for every class).
pub fn screen_fan_candidates(census: &Census) -> Result<ScreenReport> {
    let q = census.report.q;
    let mut e_forms: HashSet<u64> = HashSet::new();
    let mut stored = Vec::new();
    for (oval, g) in census.ovals.iter().zip(&census.groups) {
        let reps = g.orbits(oval.field(), &off_points(oval)).representatives();
        let pairs: Vec<OvalPointPair> = reps.par_iter().map(|p| OvalPointPair::new(oval, *p)).collect::<Result<_>>()?;
        e_forms.extend(pairs.iter().map(|p| p.e_least));
        stored.push(pairs.len());
    }
    let mut classes = Vec::new();
    let mut survivors = Vec::new();
    for (c, oval) in census.ovals.iter().enumerate() {
        let f = oval.field();
        let n = oval.nucleus();
        let mut anchors = Vec::new();
        for orbit in &census.orbits[c].orbits {
            let r = orbit[0];
            let t = oval.tangent_at(&r)?;
            let pts: Vec<P2> = line_points(f, &t).into_iter().filter(|p| *p != r && *p != n).collect();
            let unmatched = pts
                .par_iter()
                .map(|p| OvalPointPair::new(oval, *p).map(|pair| usize::from(!e_forms.contains(&pair.s_least))))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .sum::<usize>();
            if unmatched == 0 {
                survivors.push((c, r));
            }
            anchors.push(AnchorScreen {
                anchor: r,
                orbit_length: orbit.len(),
                unmatched,
                passes: unmatched == 0,
                conic_but_anchor: is_conic_but(oval, &r),
            });
        }
        classes.push(ClassScreen { class: c, stored_pairs: stored[c], anchors });
    }
    Ok(ScreenReport { q, stored_pairs: stored.iter().sum(), classes, survivors })
}

/// Whether `oval` minus `p` lies on a conic.
pub fn is_conic_but(oval: &Oval, p: &P2) -> bool {
    let pts: Vec<P2> = oval.points().iter().filter(|x| *x != p).copied().chain([oval.nucleus()]).collect();
    Oval::from_points(oval.field(), &pts).is_ok_and(|o| o.is_conic())
}

/// The cone collineation `x -> x^s M` with `M = (B v; 0 lambda)`, where
/// `B` is induced on the base conic by `psi`.
pub fn cone_collineation(field: &Field, psi: &MagicElement, lambda: Fe, v: [Fe; 3]) -> Result<Collineation<4>> {
    let b = conic_matrix(field, psi);
    let z = Fe::ZERO;
    let m = [
        [b[0][0], b[0][1], b[0][2], v[0]],
        [b[1][0], b[1][1], b[1][2], v[1]],
        [b[2][0], b[2][1], b[2][2], v[2]],
        [z, z, z, lambda],
    ];
    Collineation::new(field, m, psi.gamma)
}

/// Action of `psi` on `(x^2, xy, y^2)`.
fn conic_matrix(f: &Field, psi: &MagicElement) -> Mat<3> {
    let (a, b, c, d) = (psi.a, psi.b, psi.c, psi.d);
    [
        [f.square(a), f.mul(a, b), f.square(b)],
        [Fe::ZERO, f.mul(a, d) + f.mul(b, c), Fe::ZERO],
        [f.square(c), f.mul(c, d), f.square(d)],
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorOrbits {
    /// Order of the flock stabilizer in the collineation group of the cone.
    pub stabilizer_order: u64,
    /// Generators as base points of the cone, grouped by orbit.
    pub orbits: Vec<Vec<P2>>,
}

impl GeneratorOrbits {
    pub fn lengths(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.orbits.iter().map(Vec::len).collect();
        l.sort();
        l
    }
}

/// A collineation of the quadratic cone fixing its vertex, acting on the
/// base conic by `psi` and on plane coordinates `(a,b,c)` by
/// `L -> lambda L^s B^-T + w`.
#[derive(Clone, Debug)]
pub struct ConeMap {
    pub psi: MagicElement,
    pub lambda: Fe,
    pub w: [Fe; 3],
}

impl ConeMap {
    /// As a collineation of PG(3,q) (`v = w B^T`).
    pub fn collineation(&self, field: &Field) -> Result<Collineation<4>> {
        let b = conic_matrix(field, &self.psi);
        let v = [0, 1, 2].map(|i| (0..3).fold(Fe::ZERO, |acc, k| acc + field.mul(self.w[k], b[i][k])));
        cone_collineation(field, &self.psi, self.lambda, v)
    }
}

/// Stabilizer of a flock of the quadratic cone among the collineations
/// fixing the vertex. For each `psi` in PGammaL(2,q) the pairs
/// `(lambda, w)` keeping the plane set are found from one difference vector.
pub fn flock_stabilizer(flock: &AlphaFlock) -> Result<Vec<ConeMap>> {
    let field = flock.field();
    if flock.alpha() != 1 % field.h() {
        return Err(Error::Unsupported("generator orbits are computed on the quadratic cone only".into()));
    }
    if let Err(d) = flock.check() {
        return Err(Error::Validation(format!("not a flock: {d:?}")));
    }
    let planes: Vec<[Fe; 3]> = flock.planes().to_vec();
    let set: HashSet<[Fe; 3]> = planes.iter().copied().collect();
    let diff = |x: &[Fe; 3], y: &[Fe; 3]| [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
    let mut by_dir: HashMap<P2, Vec<(usize, usize)>> = HashMap::new();
    for i in 0..planes.len() {
        for j in 0..planes.len() {
            if i != j {
                let d = P2::normalize(field, diff(&planes[j], &planes[i]))?;
                by_dir.entry(d).or_default().push((i, j));
            }
        }
    }
    let solutions = |psi: &MagicElement| -> Vec<(Fe, [Fe; 3])> {
        let b = conic_matrix(field, psi);
        let Some(binv) = mat_inv(field, &b) else { return Vec::new() };
        let img: Vec<[Fe; 3]> = planes
            .iter()
            .map(|x| {
                let xs = x.map(|c| field.frob(c, psi.gamma));
                // row vector times B^-T
                [0, 1, 2].map(|j| (0..3).fold(Fe::ZERO, |acc, i| acc + field.mul(xs[i], binv[j][i])))
            })
            .collect();
        let delta = diff(&img[1], &img[0]);
        let Ok(key) = P2::normalize(field, delta) else { return Vec::new() };
        let Some(cands) = by_dir.get(&key) else { return Vec::new() };
        let lead = delta.iter().position(|c| !c.is_zero()).expect("nonzero");
        let mut out = Vec::new();
        for &(i, j) in cands {
            let lambda = field.div(diff(&planes[j], &planes[i])[lead], delta[lead]);
            let w = diff(&planes[i], &img[0].map(|c| field.mul(lambda, c)));
            let ok = img.iter().all(|x| {
                let y = [0, 1, 2].map(|k| field.mul(lambda, x[k]) + w[k]);
                set.contains(&y)
            });
            if ok {
                out.push((lambda, w));
            }
        }
        out
    };
    Ok(pgl2_elements(field)
        .into_par_iter()
        .flat_map_iter(|psi| solutions(&psi).into_iter().map(move |(lambda, w)| ConeMap { psi, lambda, w }))
        .collect())
}

/// Orbits of the stabilizer of a flock of the quadratic cone on the
/// generators.
pub fn generator_orbits(flock: &AlphaFlock) -> Result<GeneratorOrbits> {
    let field = flock.field();
    let found = flock_stabilizer(flock)?;
    let base = cone_base_points(field, 1);
    let index: HashMap<P2, usize> = base.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let mut parent: Vec<usize> = (0..base.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut seen = HashSet::new();
    for m in &found {
        if !seen.insert(m.psi) {
            continue;
        }
        let g = Coll2::new(field, conic_matrix(field, &m.psi), m.psi.gamma)?;
        for (i, p) in base.iter().enumerate() {
            let j = *index.get(&g.apply(field, p)).ok_or_else(|| Error::Invalid("base conic not preserved".into()))?;
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<P2>> = BTreeMap::new();
    for (i, p) in base.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(*p);
    }
    let mut orbits: Vec<Vec<P2>> = groups.into_values().collect();
    for o in &mut orbits {
        o.sort();
    }
    orbits.sort();
    Ok(GeneratorOrbits { stabilizer_order: found.len() as u64, orbits })
}

/// The flock inventory used for q = 64, by herd name.
pub fn seeded_herds(field: &'static Field) -> Result<Vec<(String, Herd, AlphaFlock)>> {
    ["linear", "subiaco", "adelaide"]
        .into_iter()
        .map(|name| {
            let clan = named_clan(field, if name == "linear" { "classical" } else { name })?;
            let herd = herd_from_clan(&clan, clan.kappa())?;
            Ok((name.to_string(), herd, clan.to_flock()))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransportCase {
    pub herd: String,
    pub f: String,
    pub anchor: P2,
    pub orbit_length: usize,
    /// Index into the pool of the o-polynomial reached, if any.
    pub pool_index: Option<usize>,
    pub image: Option<P2>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransportReport {
    pub cases: Vec<TransportCase>,
    pub holds: bool,
}

/// For each listed `f` of an inverse herd and each point orbit of the
/// stabilizer of `D(f)` other than that of (0,0,1), looks for `psi` with
/// `psi f` a multiple of a pool member and the induced map sending the
/// orbit representative into the orbit of (0,0,1). The pool is the listed
/// `f` with their stabilizers, then every inverse herd member with (0,0,1)
/// itself as target.
pub fn verify_orbit_transport_with(
    herd_name: &str,
    herd: &Herd,
    listed: &[(String, OPoly)],
) -> Result<Vec<TransportCase>> {
    let mut stabs = Vec::new();
    for (_, f) in listed {
        stabs.push(oval_stabilizer(&Oval::d_form(f)?)?);
    }
    let mut extra: Vec<OPoly> = Vec::new();
    for m in &herd.members {
        let inv = m.inverse()?;
        if !extra.contains(&inv) && !listed.iter().any(|(_, f)| *f == inv) {
            extra.push(inv);
        }
    }
    let mut pool: Vec<(OPoly, Option<&Group<3>>)> =
        listed.iter().zip(&stabs).map(|((_, f), (g, _))| (f.clone(), Some(g))).collect();
    pool.extend(extra.into_iter().map(|f| (f, None)));
    let mut cases = Vec::new();
    for ((label, f), (_, orbits)) in listed.iter().zip(&stabs) {
        for orbit in &orbits.orbits {
            if orbit.binary_search(&top()).is_ok() {
                continue;
            }
            let w = find_equivalence_with_orbit_constraint(f, &orbit[0], &pool)?;
            cases.push(TransportCase {
                herd: herd_name.to_string(),
                f: label.clone(),
                anchor: orbit[0],
                orbit_length: orbit.len(),
                pool_index: w.as_ref().map(|w| w.pool_index),
                image: w.map(|w| w.image),
            });
        }
    }
    Ok(cases)
}

/// The check on the Subiaco and Adelaide inverse herds at q = 64.
pub fn verify_orbit_transport() -> Result<TransportReport> {
    let field = Field::of_order(64)?;
    let herds = seeded_herds(field)?;
    let mut cases = Vec::new();
    for (name, herd, _) in herds.iter().filter(|(n, _, _)| n != "linear") {
        let listed: Vec<(String, OPoly)> = match name.as_str() {
            "subiaco" => vec![
                ("subiaco1^-1".to_string(), named_opoly(field, Family::SubiacoI)?.inverse()?),
                ("subiaco2^-1".to_string(), named_opoly(field, Family::SubiacoII)?.inverse()?),
            ],
            _ => vec![("adelaide^-1".to_string(), named_opoly(field, Family::Adelaide { minus: false })?.inverse()?)],
        };
        cases.extend(verify_orbit_transport_with(name, herd, &listed)?);
    }
    let holds = cases.iter().all(|c| c.pool_index.is_some());
    Ok(TransportReport { cases, holds })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadClassInfo {
    pub size: usize,
    pub fan_of_conics: bool,
    pub fan_of_pointed_conics: bool,
    /// Set for fans of conics.
    pub subtended: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorSpreads {
    pub anchor: P2,
    pub orbit_length: usize,
    /// Number of spreads through the anchor; only known when enumerated.
    pub spreads: Option<usize>,
    pub classes: usize,
    pub class_info: Vec<SpreadClassInfo>,
    /// How the count was obtained.
    pub provenance: String,
    /// Count at a second point of the orbit agrees (enumeration only).
    pub orbit_consistent: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvalSpreads {
    pub class: usize,
    pub representative: String,
    pub is_conic: bool,
    pub anchors: Vec<AnchorSpreads>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub q: usize,
    pub method: String,
    pub census: CensusReport,
    /// Generator orbit lengths of each seeded flock (q = 64).
    pub generator_orbits: BTreeMap<String, Vec<usize>>,
    /// Herd o-polynomials matched to census classes (q = 64).
    pub herd_matches: Vec<HerdMatch>,
    pub ovals: Vec<OvalSpreads>,
    /// Inconsistencies met while assembling the report.
    pub conflicts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HerdMatch {
    pub herd: String,
    /// `herd` for `D(g)` with `g` a herd member, `inverse` for `D(g^-1)`.
    pub kind: String,
    pub member: String,
    pub class: usize,
    /// Anchor orbit of the image of (0,0,1).
    pub anchor_orbit: usize,
}

/// Resumable progress: finished units by key.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Checkpoint {
    pub q: usize,
    pub units: BTreeMap<String, serde_json::Value>,
}

impl Checkpoint {
    pub fn load(path: &Path, q: usize) -> Result<Checkpoint> {
        if !path.exists() {
            return Ok(Checkpoint { q, units: BTreeMap::new() });
        }
        let text = std::fs::read_to_string(path)?;
        let c: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("checkpoint: {e}")))?;
        if c.q != q {
            return Err(Error::Invalid(format!("checkpoint is for q = {}, not {q}", c.q)));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self).expect("serializable"))?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    fn get<T: for<'de> Deserialize<'de>>(&self, key: &str) -> Option<T> {
        self.units.get(key).and_then(|v| serde_json::from_value(v.clone()).ok())
    }
}

struct Progress<'a> {
    state: Checkpoint,
    path: Option<&'a Path>,
}

impl Progress<'_> {
    fn unit<T, F>(&mut self, key: &str, run: F) -> Result<T>
    where
        T: Serialize + for<'de> Deserialize<'de>,
        F: FnOnce() -> Result<T>,
    {
        if let Some(v) = self.state.get(key) {
            return Ok(v);
        }
        let v = run()?;
        self.state.units.insert(key.to_string(), serde_json::to_value(&v).expect("serializable"));
        if let Some(p) = self.path {
            self.state.save(p)?;
        }
        Ok(v)
    }
}

fn enumerate_anchor(oval: &Oval, p: &P2) -> Result<(usize, Vec<SpreadClassInfo>)> {
    let (f, _) = oval.d_form_at(p)?;
    let t = TitsGQ::new(Oval::d_form(&f)?);
    let spreads = enumerate_spreads(&t, &top(), None)?;
    let classes = spread_classes(&t, &spreads)?;
    let info = classes
        .iter()
        .map(|c| {
            let fan = fan_from_spread(&t, &spreads[c[0]])?;
            let conics = fan.ovals.iter().filter(|o| o.is_conic()).count();
            let pointed =
                fan.ovals.iter().filter(|o| !o.is_conic() && o.points().iter().any(|x| is_conic_but(o, x))).count();
            let q = fan.ovals.len();
            Ok(SpreadClassInfo {
                size: c.len(),
                fan_of_conics: conics == q,
                fan_of_pointed_conics: pointed == q,
                subtended: conics == q,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((spreads.len(), info))
}

/// Spread classification of `T2(O)` for every census oval `O` and every
/// anchor orbit. For q <= 8 by exhaustive enumeration; for q = 64 from the
/// seeded flocks, their generator orbits and the identification of herd
/// ovals with census classes. `checkpoint` makes the run resumable.
pub fn classify_spreads(q: usize, checkpoint: Option<&Path>) -> Result<ClassificationReport> {
    if ![4, 8, 64].contains(&q) {
        return Err(Error::Unsupported(format!("spread classification is seeded for q = 4, 8, 64, not {q}")));
    }
    let state = match checkpoint {
        Some(p) => Checkpoint::load(p, q)?,
        None => Checkpoint { q, units: BTreeMap::new() },
    };
    let mut progress = Progress { state, path: checkpoint };
    let census = oval_census(q)?;
    if q <= 8 {
        let mut ovals = Vec::new();
        for (c, oval) in census.ovals.iter().enumerate() {
            let mut anchors = Vec::new();
            for (k, orbit) in census.orbits[c].orbits.iter().enumerate() {
                let key = format!("class{c}/orbit{k}");
                let a: AnchorSpreads = progress.unit(&key, || {
                    let (n, info) = enumerate_anchor(oval, &orbit[0])?;
                    let consistent = match orbit.get(1) {
                        Some(p) => Some(enumerate_anchor(oval, p)?.0 == n),
                        None => None,
                    };
                    Ok(AnchorSpreads {
                        anchor: orbit[0],
                        orbit_length: orbit.len(),
                        spreads: Some(n),
                        classes: info.len(),
                        class_info: info,
                        provenance: "exhaustive enumeration".into(),
                        orbit_consistent: consistent,
                    })
                })?;
                anchors.push(a);
            }
            let cl = &census.report.classes[c];
            ovals.push(OvalSpreads {
                class: c,
                representative: cl.representative.clone(),
                is_conic: cl.is_conic,
                anchors,
            });
        }
        return Ok(ClassificationReport {
            q,
            method: "enumeration".into(),
            census: census.report,
            generator_orbits: BTreeMap::new(),
            herd_matches: Vec::new(),
            ovals,
            conflicts: Vec::new(),
        });
    }
    classify_from_flocks(&census, &mut progress)
}

fn classify_from_flocks(census: &Census, progress: &mut Progress) -> Result<ClassificationReport> {
    let q = census.report.q;
    let field = Field::of_order(q)?;
    let herds = seeded_herds(field)?;
    let mut gen_orbits = BTreeMap::new();
    for (name, _, flock) in &herds {
        let lengths: Vec<usize> =
            progress.unit(&format!("generators/{name}"), || Ok(generator_orbits(flock)?.lengths()))?;
        gen_orbits.insert(name.clone(), lengths);
    }
    let keys: Vec<(u64, Vec<usize>)> = census
        .report
        .classes
        .iter()
        .map(|c| {
            let mut l = c.point_orbits.clone();
            l.sort();
            (c.stabilizer_order, l)
        })
        .collect();
    let mut matches = Vec::new();
    for (name, herd, _) in &herds {
        let mut seen: Vec<OPoly> = Vec::new();
        for (s, m) in herd.members.iter().enumerate() {
            for (kind, g) in [("herd", m.clone()), ("inverse", m.inverse()?)] {
                if seen.contains(&g) {
                    continue;
                }
                seen.push(g.clone());
                let key = format!("match/{name}/{kind}/{s}");
                let found: Option<HerdMatch> = progress.unit(&key, || {
                    let d = Oval::d_form(&g)?;
                    let (grp, orb) = oval_stabilizer(&d)?;
                    let mut l = orb.lengths();
                    l.sort();
                    let k = (grp.order() as u64, l);
                    for (c, ck) in keys.iter().enumerate() {
                        if *ck != k {
                            continue;
                        }
                        if let Some(phi) = ovals_equivalent(&d, &census.ovals[c], None)? {
                            let image = phi.apply(field, &top());
                            let orbit = census.orbits[c].orbit_of(&image).expect("image on the oval");
                            return Ok(Some(HerdMatch {
                                herd: name.clone(),
                                kind: kind.to_string(),
                                member: if s == q { "inf".into() } else { s.to_string() },
                                class: c,
                                anchor_orbit: orbit,
                            }));
                        }
                    }
                    Ok(None)
                })?;
                matches.extend(found);
            }
        }
    }
    let mut conflicts = Vec::new();
    let mut ovals = Vec::new();
    for (c, cl) in census.report.classes.iter().enumerate() {
        let inv: Vec<&HerdMatch> = matches.iter().filter(|m| m.class == c && m.kind == "inverse").collect();
        let her: Vec<&HerdMatch> = matches.iter().filter(|m| m.class == c && m.kind == "herd").collect();
        if !inv.is_empty() && !her.is_empty() {
            conflicts.push(format!("class {c} matches both a herd and an inverse herd o-polynomial"));
        }
        let mut inv_herds: Vec<&str> = inv.iter().map(|m| m.herd.as_str()).collect();
        inv_herds.sort();
        inv_herds.dedup();
        if inv_herds.len() > 1 {
            conflicts.push(format!("class {c} lies in inverse herds {inv_herds:?}"));
        }
        if inv.is_empty() && her.is_empty() {
            conflicts.push(format!("class {c} matches no herd o-polynomial"));
        }
        let anchors = census.orbits[c]
            .orbits
            .iter()
            .enumerate()
            .map(|(k, orbit)| {
                let (classes, provenance, conics) = if let Some(m) = inv.first() {
                    let n = gen_orbits[&m.herd].len();
                    (n, format!("fans of conics from the {} flock, one class per generator orbit", m.herd), true)
                } else if let Some(m) = her.iter().find(|m| m.anchor_orbit == k) {
                    (1, format!("fan of pointed conics, {} herd", m.herd), false)
                } else {
                    (0, "none".to_string(), false)
                };
                let info = vec![
                    SpreadClassInfo {
                        size: 1,
                        fan_of_conics: conics,
                        fan_of_pointed_conics: !conics,
                        subtended: conics
                    };
                    classes
                ];
                AnchorSpreads {
                    anchor: orbit[0],
                    orbit_length: orbit.len(),
                    spreads: None,
                    classes,
                    class_info: info,
                    provenance,
                    orbit_consistent: None,
                }
            })
            .collect();
        ovals.push(OvalSpreads { class: c, representative: cl.representative.clone(), is_conic: cl.is_conic, anchors });
    }
    Ok(ClassificationReport {
        q,
        method: "flocks".into(),
        census: census.report.clone(),
        generator_orbits: gen_orbits,
        herd_matches: matches,
        ovals,
        conflicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flocks::classical_clan;
    use crate::ovals::least_trace_one;

    #[test]
    fn census_small_orders() {
        assert_eq!(oval_census(2).unwrap().report.classes.len(), 1);
        let c4 = oval_census(4).unwrap();
        assert_eq!(c4.report.classes.len(), 1);
        assert!(c4.report.classes[0].is_conic);
        let c8 = oval_census(8).unwrap();
        assert_eq!(c8.report.classes.len(), 2);
        assert_eq!(c8.report.hyperovals[0].orbit_lengths, vec![1, 9]);
        assert_eq!(c8.report.classes.iter().filter(|c| c.is_conic).count(), 1);
        assert!(census_classes_distinct(&c8).unwrap());
        assert!(oval_census(16).is_err());
    }

    #[test]
    fn d_form_at_moves_the_point() {
        let c8 = oval_census(8).unwrap();
        for oval in &c8.ovals {
            for p in oval.points() {
                let (f, g) = oval.d_form_at(p).unwrap();
                let d = Oval::d_form(&f).unwrap();
                assert_eq!(g.apply(d.field(), p), top());
                assert_eq!(oval.map_points(|x| g.apply(d.field(), x)), d);
            }
        }
    }

    #[test]
    fn screening_q8_keeps_both_classes() {
        let c8 = oval_census(8).unwrap();
        let s = screen_fan_candidates(&c8).unwrap();
        let classes: HashSet<usize> = s.survivors.iter().map(|x| x.0).collect();
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn classical_flock_generators_form_one_orbit() {
        for h in [2, 3, 4] {
            let f = Field::standard(h).unwrap();
            let flock = classical_clan(f, least_trace_one(f)).to_flock();
            let g = generator_orbits(&flock).unwrap();
            assert_eq!(g.lengths(), vec![f.q() + 1]);
        }
    }

    #[test]
    fn flock_stabilizer_matches_brute_force() {
        for h in [2, 3] {
            let f = Field::standard(h).unwrap();
            for flock in [classical_clan(f, least_trace_one(f)).to_flock(), named_clan(f, "linear").unwrap().to_flock()]
            {
                let planes: HashSet<_> = f.elements().map(|t| flock.plane(t)).collect();
                let keeps = |g: &Collineation<4>| planes.iter().all(|p| planes.contains(&g.apply_dual(f, p)));
                let stab = flock_stabilizer(&flock).unwrap();
                assert!(stab.iter().all(|m| keeps(&m.collineation(f).unwrap())));
                if h == 2 {
                    let mut brute = 0;
                    for psi in pgl2_elements(f) {
                        for lambda in f.nonzero() {
                            for v0 in f.elements() {
                                for v1 in f.elements() {
                                    for v2 in f.elements() {
                                        if keeps(&cone_collineation(f, &psi, lambda, [v0, v1, v2]).unwrap()) {
                                            brute += 1;
                                        }
                                    }
                                }
                            }
                        }
                    }
                    assert_eq!(stab.len(), brute);
                }
            }
        }
    }

    #[test]
    fn classify_q4_single_class() {
        let r = classify_spreads(4, None).unwrap();
        assert_eq!(r.ovals.len(), 1);
        let a = &r.ovals[0].anchors;
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].classes, 1);
        assert!(classify_spreads(16, None).is_err());
    }
}
