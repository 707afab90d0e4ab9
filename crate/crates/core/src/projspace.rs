//! Points, lines and planes of PG(2,q) and PG(3,q).
//!
//! Points are stored in canonical form (first nonzero coordinate equal to 1)
//! so that set membership is plain equality. Subspaces keep a reduced row
//! echelon basis and a reduced row echelon basis of their annihilator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};

/// A point of PG(N-1, q) in canonical homogeneous coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint<const N: usize>(pub [Fe; N]);

/// Point of the projective plane.
pub type P2 = ProjPoint<3>;
/// Point of projective 3-space.
pub type P3 = ProjPoint<4>;
/// A line of PG(2,q), identified with its canonical dual coordinates.
pub type Line2 = ProjPoint<3>;
/// A plane of PG(3,q), identified with its canonical dual coordinates.
pub type Plane3 = ProjPoint<4>;

impl<const N: usize> Serialize for ProjPoint<N> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|c| c.0))
    }
}

impl<'de, const N: usize> Deserialize<'de> for ProjPoint<N> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<u8> = Vec::deserialize(d)?;
        let arr: [u8; N] = v.try_into().map_err(|_| serde::de::Error::custom(format!("expected {N} coordinates")))?;
        Ok(ProjPoint(arr.map(Fe)))
    }
}

impl<const N: usize> fmt::Debug for ProjPoint<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c.0)?;
        }
        write!(f, ")")
    }
}

impl<const N: usize> ProjPoint<N> {
    /// Canonical representative of a nonzero vector.
    pub fn normalize(field: &Field, raw: [Fe; N]) -> Result<Self> {
        Self::try_normalize(field, raw).ok_or_else(|| Error::Invalid("zero vector is not a point".into()))
    }

    #[inline]
    pub fn try_normalize(field: &Field, mut raw: [Fe; N]) -> Option<Self> {
        let lead = raw.iter().position(|c| !c.is_zero())?;
        if raw[lead] != Fe::ONE {
            let s = field.inv(raw[lead]);
            for c in raw.iter_mut().skip(lead) {
                *c = field.mul(*c, s);
            }
        }
        Some(ProjPoint(raw))
    }

    /// Builds from small integers; panics on the zero vector. Test helper.
    pub fn from_ints(field: &Field, raw: [u8; N]) -> Self {
        Self::normalize(field, raw.map(Fe)).expect("nonzero vector")
    }

    pub fn coords(&self) -> &[Fe; N] {
        &self.0
    }

    /// Rank of the point in the lexicographic order of canonical coordinates.
    #[inline]
    pub fn index(&self, q: usize) -> usize {
        let lead = self.0.iter().position(|c| !c.is_zero()).expect("canonical point");
        let tail = N - 1 - lead;
        let offset = (q.pow(tail as u32) - 1) / (q - 1);
        let mut code = 0usize;
        for c in &self.0[lead + 1..] {
            code = code * q + c.idx();
        }
        offset + code
    }

    /// Inverse of [`ProjPoint::index`].
    pub fn from_index(q: usize, mut idx: usize) -> Self {
        let mut tail = 0usize;
        loop {
            let block = q.pow(tail as u32);
            if idx < block {
                break;
            }
            idx -= block;
            tail += 1;
        }
        let mut c = [Fe::ZERO; N];
        let lead = N - 1 - tail;
        c[lead] = Fe::ONE;
        for i in (lead + 1..N).rev() {
            c[i] = Fe((idx % q) as u8);
            idx /= q;
        }
        ProjPoint(c)
    }

    /// Number of points of PG(N-1, q).
    pub fn count(q: usize) -> usize {
        (q.pow(N as u32) - 1) / (q - 1)
    }

    /// All points in index order.
    pub fn all(q: usize) -> impl Iterator<Item = Self> {
        (0..Self::count(q)).map(move |i| Self::from_index(q, i))
    }
}

/// Bilinear pairing of a dual vector with a point.
#[inline]
pub fn dot<const N: usize>(field: &Field, a: &[Fe; N], b: &[Fe; N]) -> Fe {
    let mut acc = Fe::ZERO;
    for i in 0..N {
        acc += field.mul(a[i], b[i]);
    }
    acc
}

#[inline]
pub fn incident_dual<const N: usize>(field: &Field, dual: &ProjPoint<N>, p: &ProjPoint<N>) -> bool {
    dot(field, &dual.0, &p.0).is_zero()
}

/// Reduced row echelon form in place; returns the rank.
pub fn rref<const N: usize>(field: &Field, rows: &mut Vec<[Fe; N]>) -> usize {
    let mut r = 0;
    for col in 0..N {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        let s = field.inv(rows[r][col]);
        for c in rows[r].iter_mut() {
            *c = field.mul(*c, s);
        }
        let pivot = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let m = row[col];
                for c in 0..N {
                    row[c] += field.mul(m, pivot[c]);
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    r
}

/// Basis of the annihilator of the row space of an RREF matrix.
pub fn null_space<const N: usize>(field: &Field, rref_rows: &[[Fe; N]]) -> Vec<[Fe; N]> {
    let pivots: Vec<usize> =
        rref_rows.iter().map(|r| r.iter().position(|c| !c.is_zero()).expect("nonzero row")).collect();
    let mut out = Vec::new();
    for free in (0..N).filter(|c| !pivots.contains(c)) {
        let mut v = [Fe::ZERO; N];
        v[free] = Fe::ONE;
        for (row, &p) in rref_rows.iter().zip(&pivots) {
            v[p] = row[free];
        }
        debug_assert!(rref_rows.iter().all(|r| dot(field, r, &v).is_zero()));
        out.push(v);
    }
    rref(field, &mut out);
    out
}

/// A projective subspace spanned by canonical points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProjSubspace<const N: usize> {
    basis: Vec<[Fe; N]>,
    dual: Vec<[Fe; N]>,
}

impl<const N: usize> ProjSubspace<N> {
    /// Projective dimension: 0 for a point, 1 for a line, 2 for a plane.
    /// The empty span has dimension -1.
    pub fn dim(&self) -> isize {
        self.basis.len() as isize - 1
    }

    pub fn basis(&self) -> &[[Fe; N]] {
        &self.basis
    }

    /// Defining linear forms (reduced row echelon).
    pub fn dual(&self) -> &[[Fe; N]] {
        &self.dual
    }

    pub fn contains(&self, field: &Field, p: &ProjPoint<N>) -> bool {
        self.dual.iter().all(|d| dot(field, d, &p.0).is_zero())
    }

    /// Subspace cut out by the given linear forms.
    pub fn from_forms(field: &Field, forms: &[[Fe; N]]) -> Self {
        let mut dual = forms.to_vec();
        rref(field, &mut dual);
        let basis = null_space(field, &dual);
        ProjSubspace { basis, dual }
    }

    /// Every point of the subspace, sorted.
    pub fn points(&self, field: &Field) -> Vec<ProjPoint<N>> {
        let q = field.q();
        let k = self.basis.len();
        let mut out = Vec::new();
        let total = q.pow(k as u32);
        for code in 1..total {
            let mut v = [Fe::ZERO; N];
            let mut c = code;
            for b in &self.basis {
                let s = Fe((c % q) as u8);
                c /= q;
                for i in 0..N {
                    v[i] += field.mul(s, b[i]);
                }
            }
            let p = ProjPoint::try_normalize(field, v).expect("independent basis");
            out.push(p);
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Smallest subspace containing all the points.
pub fn span<const N: usize>(field: &Field, points: &[ProjPoint<N>]) -> ProjSubspace<N> {
    let mut rows: Vec<[Fe; N]> = points.iter().map(|p| p.0).collect();
    rref(field, &mut rows);
    let dual = null_space(field, &rows);
    ProjSubspace { basis: rows, dual }
}

pub fn incident<const N: usize>(field: &Field, p: &ProjPoint<N>, s: &ProjSubspace<N>) -> bool {
    s.contains(field, p)
}

/// Line of PG(2,q) through two distinct points, as canonical dual coordinates.
pub fn join2(field: &Field, a: &P2, b: &P2) -> Option<Line2> {
    let [a0, a1, a2] = a.0;
    let [b0, b1, b2] = b.0;
    let cross = [
        field.mul(a1, b2) + field.mul(a2, b1),
        field.mul(a2, b0) + field.mul(a0, b2),
        field.mul(a0, b1) + field.mul(a1, b0),
    ];
    ProjPoint::try_normalize(field, cross)
}

/// Intersection point of two distinct lines of PG(2,q).
pub fn meet2(field: &Field, l: &Line2, m: &Line2) -> Option<P2> {
    join2(field, l, m)
}

/// The q+1 points of a line of PG(2,q), sorted.
pub fn line_points(field: &Field, l: &Line2) -> Vec<P2> {
    ProjSubspace::from_forms(field, &[l.0]).points(field)
}

/// The q+1 lines through a point of PG(2,q), sorted by dual coordinates.
pub fn pencil_lines(field: &Field, p: &P2) -> Vec<Line2> {
    // lines through p are the points of the dual line p
    line_points(field, p)
}

/// Lookup tables for PG(2,q): lines through every point and points on
/// every line, by index.
pub struct PlaneTables {
    pub q: usize,
    pub line_points: Vec<Vec<u32>>,
    pub point_lines: Vec<Vec<u32>>,
}

impl PlaneTables {
    pub fn new(field: &Field) -> PlaneTables {
        let q = field.q();
        let n = P2::count(q);
        let mut line_points = vec![Vec::with_capacity(q + 1); n];
        let mut point_lines = vec![Vec::with_capacity(q + 1); n];
        for (li, lp) in line_points.iter_mut().enumerate() {
            let l = Line2::from_index(q, li);
            for p in line_points_fast(field, &l) {
                let pi = p.index(q);
                lp.push(pi as u32);
                point_lines[pi].push(li as u32);
            }
        }
        PlaneTables { q, line_points, point_lines }
    }
}

/// Points on a line without going through generic elimination.
fn line_points_fast(field: &Field, l: &Line2) -> Vec<P2> {
    let q = field.q();
    P2::all(q).filter(|p| incident_dual(field, l, p)).collect()
}
