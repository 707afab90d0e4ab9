//! Semilinear collineations of PG(2,q) and PG(3,q), set stabilizers found by
//! frame mapping, point orbits, and canonical forms under AGammaL(1,q).

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};
use crate::projspace::ProjPoint;

pub type Mat<const N: usize> = [[Fe; N]; N];

/// `P -> normalize(P^(2^k) M)` with `P` a row vector.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Collineation<const N: usize> {
    pub m: Mat<N>,
    pub k: u32,
}

pub type Coll2 = Collineation<3>;
pub type Coll3 = Collineation<4>;

pub fn identity_matrix<const N: usize>() -> Mat<N> {
    let mut m = [[Fe::ZERO; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Fe::ONE;
    }
    m
}

pub fn mat_mul<const N: usize>(f: &Field, a: &Mat<N>, b: &Mat<N>) -> Mat<N> {
    let mut c = [[Fe::ZERO; N]; N];
    for i in 0..N {
        for l in 0..N {
            let x = a[i][l];
            if x.is_zero() {
                continue;
            }
            for j in 0..N {
                c[i][j] += f.mul(x, b[l][j]);
            }
        }
    }
    c
}

pub fn mat_inv<const N: usize>(f: &Field, a: &Mat<N>) -> Option<Mat<N>> {
    let mut m = *a;
    let mut inv = identity_matrix::<N>();
    for col in 0..N {
        let piv = (col..N).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let s = f.inv(m[col][col]);
        for j in 0..N {
            m[col][j] = f.mul(m[col][j], s);
            inv[col][j] = f.mul(inv[col][j], s);
        }
        for r in 0..N {
            if r != col && !m[r][col].is_zero() {
                let c = m[r][col];
                for j in 0..N {
                    let (a1, b1) = (m[col][j], inv[col][j]);
                    m[r][j] += f.mul(c, a1);
                    inv[r][j] += f.mul(c, b1);
                }
            }
        }
    }
    Some(inv)
}

pub fn mat_frob<const N: usize>(f: &Field, a: &Mat<N>, k: u32) -> Mat<N> {
    a.map(|row| row.map(|x| f.frob(x, k)))
}

/// Row vector times matrix.
#[inline]
pub fn vec_mat<const N: usize>(f: &Field, v: &[Fe; N], m: &Mat<N>) -> [Fe; N] {
    let mut out = [Fe::ZERO; N];
    for i in 0..N {
        let x = v[i];
        if x.is_zero() {
            continue;
        }
        for j in 0..N {
            out[j] += f.mul(x, m[i][j]);
        }
    }
    out
}

/// Scales so the first nonzero entry is 1; equal collineations then have
/// equal representations.
fn normalize_matrix<const N: usize>(f: &Field, m: &Mat<N>) -> Mat<N> {
    let lead = m.iter().flatten().find(|x| !x.is_zero()).copied().expect("nonzero matrix");
    let s = f.inv(lead);
    m.map(|row| row.map(|x| f.mul(x, s)))
}

impl<const N: usize> Collineation<N> {
    pub fn identity() -> Self {
        Collineation { m: identity_matrix(), k: 0 }
    }

    /// Builds from a matrix, rejecting singular ones.
    pub fn new(f: &Field, m: Mat<N>, k: u32) -> Result<Self> {
        if mat_inv(f, &m).is_none() {
            return Err(Error::Invalid("singular matrix".into()));
        }
        Ok(Collineation { m: normalize_matrix(f, &m), k: k % f.h() })
    }

    #[inline]
    pub fn apply_raw(&self, f: &Field, p: &[Fe; N]) -> [Fe; N] {
        let v = if self.k == 0 { *p } else { p.map(|x| f.frob(x, self.k)) };
        vec_mat(f, &v, &self.m)
    }

    #[inline]
    pub fn apply(&self, f: &Field, p: &ProjPoint<N>) -> ProjPoint<N> {
        ProjPoint::try_normalize(f, self.apply_raw(f, &p.0)).expect("invertible")
    }

    /// Image of a hyperplane given by dual coordinates.
    pub fn apply_dual(&self, f: &Field, d: &ProjPoint<N>) -> ProjPoint<N> {
        // x in H iff x . d = 0; image points y = x^s M, so y M^-1 = x^s
        // and the image hyperplane has dual (M^-1) d^s as a column.
        let inv = mat_inv(f, &self.m).expect("invertible");
        let ds = d.0.map(|x| f.frob(x, self.k));
        let mut out = [Fe::ZERO; N];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..N {
                *o += f.mul(inv[i][j], ds[j]);
            }
        }
        ProjPoint::try_normalize(f, out).expect("invertible")
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, f: &Field, other: &Self) -> Self {
        let m = mat_mul(f, &mat_frob(f, &other.m, self.k), &self.m);
        Collineation { m: normalize_matrix(f, &m), k: (self.k + other.k) % f.h() }
    }

    pub fn inverse(&self, f: &Field) -> Self {
        let back = f.frob_inverse_exp(self.k);
        let inv = mat_inv(f, &self.m).expect("invertible");
        Collineation { m: normalize_matrix(f, &mat_frob(f, &inv, back)), k: back }
    }

    pub fn is_identity(&self) -> bool {
        self.k == 0 && self.m == identity_matrix()
    }

    /// Unique collineation with Frobenius part `k` sending the frame `src`
    /// to the frame `dst` pointwise. Frames are `N + 1` points, any `N` of
    /// them independent.
    pub fn from_frames(f: &Field, src: &[ProjPoint<N>], dst: &[ProjPoint<N>], k: u32) -> Result<Self> {
        if src.len() != N + 1 || dst.len() != N + 1 {
            return Err(Error::Invalid(format!("frames need {} points", N + 1)));
        }
        let k = k % f.h();
        let s: Vec<[Fe; N]> = src.iter().map(|p| p.0.map(|x| f.frob(x, k))).collect();
        let d: Vec<[Fe; N]> = dst.iter().map(|p| p.0).collect();
        let a_src =
            frame_matrix(f, &s).ok_or_else(|| Error::Invalid("source points not in general position".into()))?;
        let a_dst =
            frame_matrix(f, &d).ok_or_else(|| Error::Invalid("target points not in general position".into()))?;
        let m = mat_mul(f, &mat_inv(f, &a_src).expect("frame matrix invertible"), &a_dst);
        Ok(Collineation { m: normalize_matrix(f, &m), k })
    }
}

/// Matrix sending the standard frame (unit vectors and all-ones) to the
/// given frame, or `None` when the points are not in general position.
pub fn frame_matrix<const N: usize>(f: &Field, frame: &[[Fe; N]]) -> Option<Mat<N>> {
    let mut b = [[Fe::ZERO; N]; N];
    b.copy_from_slice(&frame[..N]);
    let binv = mat_inv(f, &b)?;
    let lambda = vec_mat(f, &frame[N], &binv);
    if lambda.iter().any(|x| x.is_zero()) {
        return None;
    }
    let mut a = b;
    for i in 0..N {
        a[i] = a[i].map(|x| f.mul(x, lambda[i]));
    }
    Some(a)
}

pub fn in_general_position<const N: usize>(f: &Field, pts: &[ProjPoint<N>]) -> bool {
    let raw: Vec<[Fe; N]> = pts.iter().map(|p| p.0).collect();
    pts.len() == N + 1 && frame_matrix(f, &raw).is_some()
}

/// Fast membership for point sets of one projective space.
#[derive(Clone)]
pub struct PointSet {
    q: usize,
    bits: Vec<u64>,
}

impl PointSet {
    pub fn new<const N: usize>(q: usize, pts: &[ProjPoint<N>]) -> PointSet {
        let n = ProjPoint::<N>::count(q);
        let mut bits = vec![0u64; n.div_ceil(64)];
        for p in pts {
            let i = p.index(q);
            bits[i / 64] |= 1 << (i % 64);
        }
        PointSet { q, bits }
    }

    #[inline]
    pub fn contains<const N: usize>(&self, p: &ProjPoint<N>) -> bool {
        let i = p.index(self.q);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }
}

/// Whether `g` maps every point of `set` into `target`.
#[inline]
pub fn maps_into<const N: usize>(f: &Field, g: &Collineation<N>, set: &[ProjPoint<N>], target: &PointSet) -> bool {
    set.iter().all(|p| target.contains(&g.apply(f, p)))
}

/// First `N + 1` points of `set` (in order) forming a frame.
fn find_frame<const N: usize>(
    f: &Field,
    set: &[ProjPoint<N>],
    first: Option<ProjPoint<N>>,
) -> Option<Vec<ProjPoint<N>>> {
    fn rec<const N: usize>(f: &Field, set: &[ProjPoint<N>], chosen: &mut Vec<ProjPoint<N>>, from: usize) -> bool {
        if chosen.len() == N + 1 {
            return in_general_position(f, chosen);
        }
        for i in from..set.len() {
            if chosen.contains(&set[i]) {
                continue;
            }
            chosen.push(set[i]);
            if partial_ok(f, chosen) && rec(f, set, chosen, i + 1) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let mut chosen: Vec<ProjPoint<N>> = first.into_iter().collect();
    rec(f, set, &mut chosen, 0).then_some(chosen)
}

/// Any `min(len, N)` of the chosen points are independent.
fn partial_ok<const N: usize>(f: &Field, pts: &[ProjPoint<N>]) -> bool {
    let r = pts.len().min(N);
    // check every r-subset that contains the newest point
    let last = pts.len() - 1;
    let others: Vec<usize> = (0..last).collect();
    let mut ok = true;
    subsets(&others, r - 1, &mut |sub| {
        let mut rows: Vec<[Fe; N]> = sub.iter().map(|&i| pts[i].0).collect();
        rows.push(pts[last].0);
        if crate::projspace::rref(f, &mut rows) < r {
            ok = false;
        }
    });
    ok
}

fn subsets(items: &[usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, visit);
            cur.pop();
        }
    }
    go(items, k, 0, &mut Vec::new(), visit)
}

/// Ordered tuples of distinct indices below `n`, of length `len`, whose
/// first entry is `head`.
fn for_each_tuple(n: usize, len: usize, head: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(n: usize, len: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == len {
            visit(cur);
            return;
        }
        for i in 0..n {
            if cur.contains(&i) {
                continue;
            }
            cur.push(i);
            go(n, len, cur, visit);
            cur.pop();
        }
    }
    let mut cur = vec![head];
    go(n, len, &mut cur, visit)
}

/// Every collineation mapping `a` onto `b` (equal sizes), optionally also
/// sending the point `fixed.0` to `fixed.1`. Candidates come from mapping a
/// frame inside `a` (containing `fixed.0` if given) to ordered tuples of
/// `b` and are filtered by membership. Sorted, deduplicated.
pub fn set_maps<const N: usize>(
    f: &Field,
    a: &[ProjPoint<N>],
    b: &[ProjPoint<N>],
    fixed: Option<(ProjPoint<N>, ProjPoint<N>)>,
    first_only: bool,
) -> Result<Vec<Collineation<N>>> {
    if a.len() != b.len() {
        return Ok(Vec::new());
    }
    let q = f.q();
    let src = find_frame(f, a, fixed.map(|x| x.0)).ok_or_else(|| Error::Invalid("no frame inside the set".into()))?;
    let target = PointSet::new(q, b);
    let h = f.h();
    let per_head = |head: usize, fixed_img: Option<ProjPoint<N>>| -> Vec<Collineation<N>> {
        let mut out = Vec::new();
        let pool: Vec<ProjPoint<N>> = b.to_vec();
        let free = if fixed_img.is_some() { N } else { N + 1 };
        let mut visit = |t: &[usize]| {
            if first_only && !out.is_empty() {
                return;
            }
            let mut dst: Vec<ProjPoint<N>> = fixed_img.into_iter().collect();
            dst.extend(t.iter().map(|&i| pool[i]));
            let raw: Vec<[Fe; N]> = dst.iter().map(|p| p.0).collect();
            if frame_matrix(f, &raw).is_none() {
                return;
            }
            for k in 0..h {
                if let Ok(g) = Collineation::from_frames(f, &src, &dst, k) {
                    if maps_into(f, &g, a, &target) {
                        out.push(g);
                        if first_only {
                            return;
                        }
                    }
                }
            }
        };
        for_each_tuple(pool.len(), free, head, &mut visit);
        out
    };
    let mut all: Vec<Collineation<N>> = if first_only {
        let mut found = Vec::new();
        for head in 0..b.len() {
            found = per_head(head, fixed.map(|x| x.1));
            if !found.is_empty() {
                break;
            }
        }
        found
    } else {
        (0..b.len()).into_par_iter().flat_map_iter(|head| per_head(head, fixed.map(|x| x.1))).collect()
    };
    all.sort();
    all.dedup();
    Ok(all)
}

/// All collineations `g` with `g(S) = S` (and `g(p) = p` when a point is
/// given).
pub fn setwise_stabilizer<const N: usize>(
    f: &Field,
    set: &[ProjPoint<N>],
    fixing: Option<ProjPoint<N>>,
) -> Result<Group<N>> {
    let elements = set_maps(f, set, set, fixing.map(|p| (p, p)), false)?;
    Ok(Group { elements })
}

/// A collineation mapping `a` onto `b`, if any (deterministic choice).
pub fn find_set_map<const N: usize>(
    f: &Field,
    a: &[ProjPoint<N>],
    b: &[ProjPoint<N>],
    fixed: Option<(ProjPoint<N>, ProjPoint<N>)>,
) -> Result<Option<Collineation<N>>> {
    Ok(set_maps(f, a, b, fixed, true)?.into_iter().next())
}

/// A finite collineation group stored as its full element list.
#[derive(Clone, Debug)]
pub struct Group<const N: usize> {
    pub elements: Vec<Collineation<N>>,
}

/// Orbit partition of a point domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orbits<const N: usize> {
    /// Each orbit sorted; orbits ordered by least element.
    pub orbits: Vec<Vec<ProjPoint<N>>>,
}

impl<const N: usize> Orbits<N> {
    pub fn lengths(&self) -> Vec<usize> {
        self.orbits.iter().map(|o| o.len()).collect()
    }

    pub fn representatives(&self) -> Vec<ProjPoint<N>> {
        self.orbits.iter().map(|o| o[0]).collect()
    }

    pub fn orbit_of(&self, p: &ProjPoint<N>) -> Option<usize> {
        self.orbits.iter().position(|o| o.binary_search(p).is_ok())
    }
}

impl<const N: usize> Group<N> {
    pub fn trivial() -> Self {
        Group { elements: vec![Collineation::identity()] }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Orbits on `domain`, which must be invariant.
    pub fn orbits(&self, f: &Field, domain: &[ProjPoint<N>]) -> Orbits<N> {
        let mut sorted = domain.to_vec();
        sorted.sort();
        sorted.dedup();
        let mut done: HashSet<ProjPoint<N>> = HashSet::with_capacity(sorted.len());
        let mut orbits = Vec::new();
        for p in &sorted {
            if done.contains(p) {
                continue;
            }
            let mut orbit: Vec<ProjPoint<N>> =
                self.elements.par_iter().map(|g| g.apply(f, p)).collect::<HashSet<_>>().into_iter().collect();
            orbit.sort();
            done.extend(orbit.iter().copied());
            orbits.push(orbit);
        }
        Orbits { orbits }
    }

    /// Elements fixing `p`.
    pub fn point_stabilizer(&self, f: &Field, p: &ProjPoint<N>) -> Group<N> {
        Group { elements: self.elements.iter().filter(|g| g.apply(f, p) == *p).copied().collect() }
    }

    /// Some element sending `a` to `b`.
    pub fn transporter(&self, f: &Field, a: &ProjPoint<N>, b: &ProjPoint<N>) -> Option<Collineation<N>> {
        self.elements.iter().find(|g| g.apply(f, a) == *b).copied()
    }

    pub fn conjugate(&self, f: &Field, g: &Collineation<N>) -> Group<N> {
        let gi = g.inverse(f);
        let mut elements: Vec<_> = self.elements.iter().map(|x| g.compose(f, &x.compose(f, &gi))).collect();
        elements.sort();
        Group { elements }
    }
}

/// A subset of GF(q), q <= 64, as a bitmask over element encodings.
pub type ParamSet = u64;

pub fn param_set(elems: impl IntoIterator<Item = Fe>) -> ParamSet {
    elems.into_iter().fold(0, |acc, x| acc | 1 << x.0)
}

pub fn param_elems(s: ParamSet) -> Vec<Fe> {
    (0..64).filter(|i| s >> i & 1 == 1).map(|i| Fe(i as u8)).collect()
}

/// Lexicographic comparison of equal-size sets by sorted element sequence.
#[inline]
pub fn lex_less(a: ParamSet, b: ParamSet) -> bool {
    let d = a ^ b;
    d != 0 && a & (d & d.wrapping_neg()) != 0
}

/// Image of a set under `x -> a x^(2^k) + b`.
pub fn agl_image(f: &Field, s: ParamSet, a: Fe, b: Fe, k: u32) -> ParamSet {
    param_elems(s).into_iter().fold(0, |acc, x| acc | 1 << (f.mul(a, f.frob(x, k)) + b).0)
}

/// Least image of `s` under AGammaL(1,q).
pub fn least_param_set(f: &Field, s: ParamSet) -> ParamSet {
    assert!(f.q() <= 64, "parameter sets need q <= 64");
    let elems = param_elems(s);
    let full = if f.q() == 64 { u64::MAX } else { (1u64 << f.q()) - 1 };
    if elems.len() <= 1 {
        return elems.len() as u64;
    }
    if s == full {
        return s;
    }
    let mut best = u64::MAX;
    let mut best_set = false;
    let mut img = vec![Fe::ZERO; elems.len()];
    for k in 0..f.h() {
        for (i, x) in elems.iter().enumerate() {
            img[i] = f.frob(*x, k);
        }
        for &c in &img {
            for &y in &img {
                if y == c {
                    continue;
                }
                let a = f.inv(y + c);
                let set = img.iter().fold(0u64, |acc, &x| acc | 1 << f.mul(a, x + c).0);
                if !best_set || lex_less(set, best) {
                    best = set;
                    best_set = true;
                }
            }
        }
    }
    best
}

/// Plane-pair subgroup of PGammaL(4,q): matrices whose first column is
/// `(l,0,0,0)^T` and second column `(0,m,0,0)^T`, i.e. collineations
/// fixing both planes `x0 = 0` and `x1 = 0`.
pub fn is_plane_pair_shape(m: &Mat<4>) -> bool {
    (1..4).all(|i| m[i][0].is_zero()) && [0, 2, 3].iter().all(|&i| m[i][1].is_zero())
}

/// Order of the plane-pair subgroup.
pub fn plane_pair_order(q: usize, h: u32) -> u128 {
    let q = q as u128;
    let gl2 = (q * q - 1) * (q * q - q);
    // (q-1)^2 diagonal scalars, q^4 free entries, GL(2) block, mod scalars
    (q - 1) * (q - 1) * q.pow(4) * gl2 / (q - 1) * h as u128
}

/// Iterates the plane-pair subgroup with normalized matrices (`l = 1`).
pub fn plane_pair_collineations(f: &'static Field) -> impl Iterator<Item = Coll3> {
    let q = f.q();
    let elems: Vec<Fe> = f.elements().collect();
    let h = f.h();
    let blocks: Vec<[[Fe; 2]; 2]> = (0..q.pow(4))
        .map(|c| [[elems[c % q], elems[c / q % q]], [elems[c / q / q % q], elems[c / q / q / q]]])
        .filter(|b| !(f.mul(b[0][0], b[1][1]) + f.mul(b[0][1], b[1][0])).is_zero())
        .collect();
    (1..q).flat_map(move |mu| {
        let blocks = blocks.clone();
        (0..q.pow(4)).flat_map(move |top| {
            let blocks = blocks.clone();
            (0..blocks.len()).flat_map(move |bi| {
                let b = blocks[bi];
                (0..h).map(move |k| {
                    let t = [top % q, top / q % q, top / q / q % q, top / q / q / q].map(|x| Fe(x as u8));
                    let m = [
                        [Fe::ONE, Fe::ZERO, t[0], t[1]],
                        [Fe::ZERO, Fe(mu as u8), t[2], t[3]],
                        [Fe::ZERO, Fe::ZERO, b[0][0], b[0][1]],
                        [Fe::ZERO, Fe::ZERO, b[1][0], b[1][1]],
                    ];
                    Collineation { m, k }
                })
            })
        })
    })
}
