//! JSON records for the objects that cross the command line: o-polynomials,
//! ovals, fans, spreads, clans, flocks, herds and orbit reports. Field
//! elements are written as integers in the polynomial basis of the field's
//! modulus.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::collineation::{Group, Orbits};
use crate::error::{Error, Result};
use crate::fans::{embed_pi_inf, project_pi_inf, GeneralizedFan};
use crate::flocks::{AlphaFlock, Herd, QClan};
use crate::gfield::{Fe, Field};
use crate::ovals::{Convention, OPoly, Oval};
use crate::projspace::{P2, P3};
use crate::titsgq::{Spread, T2Line, TitsGQ};

/// The field of order `q` with the given modulus, or the standard one.
pub fn field_for(q: usize, modulus: Option<u32>) -> Result<&'static Field> {
    match modulus {
        None => Field::of_order(q),
        Some(m) => {
            if !q.is_power_of_two() || q < 2 {
                return Err(Error::Unsupported(format!("q = {q} is not a power of two >= 2")));
            }
            Field::with_modulus(q.trailing_zeros(), m)
        }
    }
}

fn ints(v: &[Fe]) -> Vec<u8> {
    v.iter().map(|c| c.0).collect()
}

fn elems(field: &Field, v: &[u8]) -> Result<Vec<Fe>> {
    v.iter()
        .map(|&c| {
            let e = Fe(c);
            if field.contains(e) {
                Ok(e)
            } else {
                Err(Error::Parse(format!("{c} is not an element of GF({})", field.q())))
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OPolyRecord {
    pub q: usize,
    pub modulus: u32,
    pub convention: Convention,
    /// Coefficient of `x^i` at index `i`.
    pub coeffs: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, u64>,
}

impl OPolyRecord {
    pub fn new(f: &OPoly, convention: Convention) -> OPolyRecord {
        let field = f.field();
        OPolyRecord {
            q: field.q(),
            modulus: field.modulus(),
            convention,
            coeffs: ints(f.coeffs()),
            family: f.family.clone(),
            params: f.params.clone(),
        }
    }

    pub fn to_opoly(&self) -> Result<OPoly> {
        let field = field_for(self.q, Some(self.modulus))?;
        let mut f = OPoly::from_coeffs(field, &elems(field, &self.coeffs)?)?;
        f.family = self.family.clone();
        f.params = self.params.clone();
        Ok(f)
    }

    pub fn to_oval(&self) -> Result<Oval> {
        Oval::from_opoly(&self.to_opoly()?, self.convention)
    }
}

/// An oval as a point set; ovals built from an o-polynomial also carry it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvalRecord {
    pub q: usize,
    pub modulus: u32,
    pub points: Vec<P2>,
    pub nucleus: P2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<OPolyRecord>,
}

impl OvalRecord {
    pub fn new(oval: &Oval) -> OvalRecord {
        let field = oval.field();
        OvalRecord {
            q: field.q(),
            modulus: field.modulus(),
            points: oval.points().to_vec(),
            nucleus: oval.nucleus(),
            source: oval.source().map(|(f, c)| OPolyRecord::new(f, *c)),
        }
    }

    pub fn to_oval(&self) -> Result<Oval> {
        let field = field_for(self.q, Some(self.modulus))?;
        let oval = match &self.source {
            Some(s) => s.to_oval()?,
            None => Oval::from_points(field, &self.points)?,
        };
        let mut pts = self.points.clone();
        pts.sort();
        if oval.points() != pts.as_slice() || oval.nucleus() != self.nucleus {
            return Err(Error::Validation("recorded points or nucleus disagree with the oval".into()));
        }
        Ok(oval)
    }
}

/// A generalized fan: the director o-polynomial and one oval per field
/// element; `index[i]` is the element labelling `ovals[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanRecord {
    pub q: usize,
    pub modulus: u32,
    pub f: OPolyRecord,
    pub ovals: Vec<OvalRecord>,
    pub index: Vec<u8>,
}

impl FanRecord {
    pub fn new(fan: &GeneralizedFan) -> FanRecord {
        let field = fan.field();
        FanRecord {
            q: field.q(),
            modulus: field.modulus(),
            f: OPolyRecord::new(&fan.f, Convention::D),
            ovals: fan.ovals.iter().map(OvalRecord::new).collect(),
            index: field.elements().map(|s| s.0).collect(),
        }
    }

    pub fn to_fan(&self) -> Result<GeneralizedFan> {
        let field = field_for(self.q, Some(self.modulus))?;
        if self.index.len() != self.ovals.len() {
            return Err(Error::Parse("index and ovals differ in length".into()));
        }
        let labels = elems(field, &self.index)?;
        let ovals =
            labels.into_iter().zip(&self.ovals).map(|(s, o)| Ok((s, o.to_oval()?))).collect::<Result<Vec<_>>>()?;
        GeneralizedFan::from_indexed(self.f.to_opoly()?, ovals)
    }
}

/// A spread of `T2(D(f))`: the type (b) line by its oval point, the type
/// (a) lines by two points of PG(3,q) each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadRecord {
    pub q: usize,
    pub modulus: u32,
    pub f_coeffs: Vec<u8>,
    pub type_b_point: Option<P2>,
    pub lines: Vec<[P3; 2]>,
}

impl SpreadRecord {
    pub fn new(t: &TitsGQ, s: &Spread) -> Result<SpreadRecord> {
        let field = t.field();
        let f = t.director_poly()?;
        let mut type_b = None;
        let mut lines = Vec::new();
        for l in &s.lines {
            match l {
                T2Line::Oval { q } => {
                    if type_b.replace(*q).is_some() {
                        return Err(Error::Validation("more than one type (b) line".into()));
                    }
                }
                T2Line::Affine { q, x } => lines.push([*x, embed_pi_inf(q)]),
            }
        }
        Ok(SpreadRecord {
            q: field.q(),
            modulus: field.modulus(),
            f_coeffs: ints(f.coeffs()),
            type_b_point: type_b,
            lines,
        })
    }

    /// The quadrangle and the line set; the lines are not checked to form
    /// a spread.
    pub fn decode(&self) -> Result<(TitsGQ, Spread)> {
        let field = field_for(self.q, Some(self.modulus))?;
        let f = OPoly::from_coeffs(field, &elems(field, &self.f_coeffs)?)?;
        let t = TitsGQ::new(Oval::d_form(&f)?);
        let mut lines: Vec<T2Line> = self.type_b_point.iter().map(|q| T2Line::Oval { q: *q }).collect();
        for [a, b] in &self.lines {
            let (x, inf) = if a.0[0].is_zero() { (b, a) } else { (a, b) };
            let q = project_pi_inf(inf).ok_or_else(|| Error::Parse(format!("{inf:?} is not a point of x0 = 0")))?;
            lines.push(t.affine_line(&q, x)?);
        }
        Ok((t, Spread::new(lines)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClanRecord {
    pub q: usize,
    pub modulus: u32,
    /// The matrix at `t` is `(a[t] t^(1/2); 0 b[t])`.
    pub a: Vec<u8>,
    pub b: Vec<u8>,
}

impl ClanRecord {
    pub fn new(c: &QClan) -> ClanRecord {
        let field = c.field();
        ClanRecord { q: field.q(), modulus: field.modulus(), a: ints(c.a()), b: ints(c.b()) }
    }

    pub fn to_clan(&self) -> Result<QClan> {
        let field = field_for(self.q, Some(self.modulus))?;
        QClan::new(field, elems(field, &self.a)?, elems(field, &self.b)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlockRecord {
    pub q: usize,
    pub modulus: u32,
    pub alpha: u32,
    /// Plane `t` is `a x0 + b x1 + c x2 + x3 = 0`, written `[a, b, c]`.
    pub planes: Vec<[u8; 3]>,
}

impl FlockRecord {
    pub fn new(fl: &AlphaFlock) -> FlockRecord {
        let field = fl.field();
        FlockRecord {
            q: field.q(),
            modulus: field.modulus(),
            alpha: fl.alpha(),
            planes: fl.planes().iter().map(|p| p.map(|c| c.0)).collect(),
        }
    }

    pub fn to_flock(&self) -> Result<AlphaFlock> {
        let field = field_for(self.q, Some(self.modulus))?;
        let planes = self
            .planes
            .iter()
            .map(|p| Ok(elems(field, p)?.try_into().expect("three entries")))
            .collect::<Result<Vec<[Fe; 3]>>>()?;
        AlphaFlock::new(field, self.alpha, planes)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HerdRecord {
    pub q: usize,
    pub modulus: u32,
    pub kappa: u8,
    /// Coefficients of `f_0`, `f_inf` and of every member `f_s`.
    pub f0: Vec<u8>,
    pub finf: Vec<u8>,
    pub members: Vec<Vec<u8>>,
}

impl HerdRecord {
    pub fn new(h: &Herd) -> HerdRecord {
        let field = h.field();
        HerdRecord {
            q: field.q(),
            modulus: field.modulus(),
            kappa: h.kappa.0,
            f0: ints(h.f0.coeffs()),
            finf: ints(h.finf.coeffs()),
            members: h.members.iter().map(|m| ints(m.coeffs())).collect(),
        }
    }

    pub fn to_herd(&self) -> Result<Herd> {
        let field = field_for(self.q, Some(self.modulus))?;
        let poly = |c: &[u8]| OPoly::from_coeffs(field, &elems(field, c)?);
        let h = Herd::new(poly(&self.f0)?, poly(&self.finf)?, elems(field, &[self.kappa])?[0])?;
        if h.members.len() != self.members.len()
            || h.members.iter().zip(&self.members).any(|(m, c)| poly(c).map_or(true, |p| p != *m))
        {
            return Err(Error::Validation("recorded members disagree with f0, finf and kappa".into()));
        }
        Ok(h)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerRecord {
    pub set_id: String,
    pub group_order: u64,
    pub orbit_lengths: Vec<usize>,
    pub representatives: Vec<P2>,
}

impl StabilizerRecord {
    pub fn new(set_id: &str, g: &Group<3>, orbits: &Orbits<3>) -> StabilizerRecord {
        StabilizerRecord {
            set_id: set_id.to_string(),
            group_order: g.order() as u64,
            orbit_lengths: orbits.lengths(),
            representatives: orbits.representatives(),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("records serialize");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}
