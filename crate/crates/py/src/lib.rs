//! Python bindings. Geometric objects are exposed as classes; reports and
//! records cross the boundary as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ovalforge::classify::{classify_spreads as classify_spreads_rs, oval_census as oval_census_rs, oval_stabilizer};
use ovalforge::fans::fan_from_flock;
use ovalforge::flocks::{herd_from_clan, named_clan, QClan};
use ovalforge::magic::{magic_apply, magic_equivalent, MagicElement};
use ovalforge::ovals::{named_opoly, Convention, Family};
use ovalforge::projspace::P2;
use ovalforge::serial::{self, field_for, ClanRecord, FlockRecord, HerdRecord, OPolyRecord, OvalRecord, SpreadRecord};
use ovalforge::titsgq::{check_spread, enumerate_spreads, spread_classes, spread_from_fan, TitsGQ};
use ovalforge::{Fe, Field as CoreField};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn elem(field: &CoreField, x: u32) -> PyResult<Fe> {
    field.elem(x).map_err(err)
}

fn point(field: &CoreField, p: (u32, u32, u32)) -> PyResult<P2> {
    P2::normalize(field, [elem(field, p.0)?, elem(field, p.1)?, elem(field, p.2)?]).map_err(err)
}

fn tuple(p: &P2) -> (u8, u8, u8) {
    let c = p.coords();
    (c[0].0, c[1].0, c[2].0)
}

fn convention(s: &str) -> PyResult<Convention> {
    match s {
        "d" | "D" => Ok(Convention::D),
        "o" | "O" => Ok(Convention::O),
        _ => Err(PyValueError::new_err(format!("unknown convention {s:?} (d or o)"))),
    }
}

/// GF(q) for q a power of two up to 256. Elements are integers whose bits
/// are polynomial coefficients.
#[pyclass(module = "ovalforge_py", frozen)]
struct Field {
    inner: &'static CoreField,
}

#[pymethods]
impl Field {
    #[new]
    #[pyo3(signature = (q, modulus=None))]
    fn new(q: usize, modulus: Option<u32>) -> PyResult<Self> {
        Ok(Field { inner: field_for(q, modulus).map_err(err)? })
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }

    #[getter]
    fn h(&self) -> u32 {
        self.inner.h()
    }

    #[getter]
    fn modulus(&self) -> u32 {
        self.inner.modulus()
    }

    fn generator(&self) -> u8 {
        self.inner.generator().0
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u8> {
        Ok((elem(self.inner, a)? + elem(self.inner, b)?).0)
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u8> {
        Ok(self.inner.mul(elem(self.inner, a)?, elem(self.inner, b)?).0)
    }

    fn inv(&self, a: u32) -> PyResult<u8> {
        Ok(self.inner.checked_inv(elem(self.inner, a)?).map_err(err)?.0)
    }

    fn div(&self, a: u32, b: u32) -> PyResult<u8> {
        let b = self.inner.checked_inv(elem(self.inner, b)?).map_err(err)?;
        Ok(self.inner.mul(elem(self.inner, a)?, b).0)
    }

    fn pow(&self, a: u32, e: i64) -> PyResult<u8> {
        Ok(self.inner.powi(elem(self.inner, a)?, e).map_err(err)?.0)
    }

    fn sqrt(&self, a: u32) -> PyResult<u8> {
        Ok(self.inner.sqrt(elem(self.inner, a)?).0)
    }

    fn trace(&self, a: u32) -> PyResult<u8> {
        Ok(self.inner.trace(elem(self.inner, a)?))
    }

    fn __repr__(&self) -> String {
        format!("Field(q={}, modulus={:#x})", self.inner.q(), self.inner.modulus())
    }
}

/// A polynomial over GF(q) of degree at most q-1.
#[pyclass(module = "ovalforge_py", frozen)]
struct OPoly {
    inner: ovalforge::ovals::OPoly,
}

#[pymethods]
impl OPoly {
    #[new]
    #[pyo3(signature = (q, expr, modulus=None))]
    fn new(q: usize, expr: &str, modulus: Option<u32>) -> PyResult<Self> {
        let field = field_for(q, modulus).map_err(err)?;
        Ok(OPoly { inner: ovalforge::ovals::OPoly::parse(field, expr).map_err(err)? })
    }

    /// Named family: conic, regular, pointed, subiaco1, subiaco2, adelaide,
    /// adelaide-, translation(k).
    #[staticmethod]
    #[pyo3(signature = (q, name, modulus=None))]
    fn family(q: usize, name: &str, modulus: Option<u32>) -> PyResult<Self> {
        let field = field_for(q, modulus).map_err(err)?;
        let fam: Family = name.parse().map_err(err)?;
        Ok(OPoly { inner: named_opoly(field, fam).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (q, coeffs, modulus=None))]
    fn from_coeffs(q: usize, coeffs: Vec<u32>, modulus: Option<u32>) -> PyResult<Self> {
        let field = field_for(q, modulus).map_err(err)?;
        let c = coeffs.into_iter().map(|x| elem(field, x)).collect::<PyResult<Vec<_>>>()?;
        Ok(OPoly { inner: ovalforge::ovals::OPoly::from_coeffs(field, &c).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        let rec: OPolyRecord = serial::from_json(s).map_err(err)?;
        Ok(OPoly { inner: rec.to_opoly().map_err(err)? })
    }

    #[pyo3(signature = (convention="d"))]
    fn to_json(&self, convention: &str) -> PyResult<String> {
        Ok(serial::to_json(&OPolyRecord::new(&self.inner, self::convention(convention)?)))
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.field().q()
    }

    fn coeffs(&self) -> Vec<u8> {
        self.inner.coeffs().iter().map(|c| c.0).collect()
    }

    fn values(&self) -> Vec<u8> {
        self.inner.values().iter().map(|c| c.0).collect()
    }

    fn eval(&self, x: u32) -> PyResult<u8> {
        Ok(self.inner.eval(elem(self.inner.field(), x)?).0)
    }

    fn expr(&self) -> String {
        self.inner.expr()
    }

    fn is_opermutation(&self) -> bool {
        self.inner.is_opermutation()
    }

    /// None for an o-polynomial, otherwise the first defect found.
    fn defect(&self) -> Option<String> {
        self.inner.check_opolynomial().err().map(|d| d.to_string())
    }

    fn inverse(&self) -> PyResult<OPoly> {
        Ok(OPoly { inner: self.inner.inverse().map_err(err)? })
    }

    #[pyo3(signature = (convention="d"))]
    fn oval(&self, convention: &str) -> PyResult<Oval> {
        let c = self::convention(convention)?;
        Ok(Oval { inner: ovalforge::ovals::Oval::from_opoly(&self.inner, c).map_err(err)? })
    }

    /// Image under `psi = ((a b; c d), gamma)`.
    #[pyo3(signature = (a, b, c, d, gamma=0))]
    fn magic(&self, a: u32, b: u32, c: u32, d: u32, gamma: u32) -> PyResult<OPoly> {
        let f = self.inner.field();
        let psi = MagicElement::new(f, elem(f, a)?, elem(f, b)?, elem(f, c)?, elem(f, d)?, gamma).map_err(err)?;
        Ok(OPoly { inner: magic_apply(&psi, &self.inner).map_err(err)? })
    }

    /// `(a, b, c, d, gamma, lambda)` with `psi f = lambda g`, or None.
    fn magic_equivalent(&self, other: &OPoly) -> Option<(u8, u8, u8, u8, u32, u8)> {
        magic_equivalent(&self.inner, &other.inner).map(|(m, l)| (m.a.0, m.b.0, m.c.0, m.d.0, m.gamma, l.0))
    }

    /// Number of spreads of T2(D(f)) through (0,0,0,1) and their classes.
    /// Exhaustive; practical for q <= 8.
    fn spread_census(&self) -> PyResult<(usize, Vec<usize>)> {
        let t = TitsGQ::new(ovalforge::ovals::Oval::d_form(&self.inner).map_err(err)?);
        let top = P2::from_coords([Fe::ZERO, Fe::ZERO, Fe::ONE]);
        let spreads = enumerate_spreads(&t, &top, None).map_err(err)?;
        let classes = spread_classes(&t, &spreads).map_err(err)?;
        Ok((spreads.len(), classes.iter().map(Vec::len).collect()))
    }

    fn __eq__(&self, other: &OPoly) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("OPoly(q={}, {:?})", self.inner.field().q(), self.inner.expr())
    }
}

/// An oval of PG(2,q); points are coordinate triples.
#[pyclass(module = "ovalforge_py", frozen)]
struct Oval {
    inner: ovalforge::ovals::Oval,
}

#[pymethods]
impl Oval {
    #[staticmethod]
    #[pyo3(signature = (q, points, modulus=None))]
    fn from_points(q: usize, points: Vec<(u32, u32, u32)>, modulus: Option<u32>) -> PyResult<Self> {
        let field = field_for(q, modulus).map_err(err)?;
        let pts = points.into_iter().map(|p| point(field, p)).collect::<PyResult<Vec<_>>>()?;
        Ok(Oval { inner: ovalforge::ovals::Oval::from_points(field, &pts).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        let rec: OvalRecord = serial::from_json(s).map_err(err)?;
        Ok(Oval { inner: rec.to_oval().map_err(err)? })
    }

    fn to_json(&self) -> String {
        serial::to_json(&OvalRecord::new(&self.inner))
    }

    fn points(&self) -> Vec<(u8, u8, u8)> {
        self.inner.points().iter().map(tuple).collect()
    }

    fn nucleus(&self) -> (u8, u8, u8) {
        tuple(&self.inner.nucleus())
    }

    fn contains(&self, p: (u32, u32, u32)) -> PyResult<bool> {
        Ok(self.inner.contains(&point(self.inner.field(), p)?))
    }

    fn is_conic(&self) -> bool {
        self.inner.is_conic()
    }

    /// The oval obtained by exchanging the point `p` and the nucleus.
    fn swap_nucleus(&self, p: (u32, u32, u32)) -> PyResult<Oval> {
        let p = point(self.inner.field(), p)?;
        Ok(Oval { inner: self.inner.swap_nucleus(&p).map_err(err)? })
    }

    /// `f` such that `D(f)` is the oval in coordinates sending `p` to (0,0,1).
    fn d_form_at(&self, p: (u32, u32, u32)) -> PyResult<OPoly> {
        let p = point(self.inner.field(), p)?;
        Ok(OPoly { inner: self.inner.d_form_at(&p).map_err(err)?.0 })
    }

    /// `(order, orbit lengths on the points)` of the stabilizer in PΓL(3,q).
    fn stabilizer(&self) -> PyResult<(usize, Vec<usize>)> {
        let (g, orbits) = oval_stabilizer(&self.inner).map_err(err)?;
        Ok((g.order(), orbits.lengths()))
    }

    fn __len__(&self) -> usize {
        self.inner.points().len()
    }

    fn __repr__(&self) -> String {
        format!("Oval(q={}, nucleus={:?})", self.inner.q(), tuple(&self.inner.nucleus()))
    }
}

/// A normalized q-clan `A_t = (a_t, t^(1/2); 0, b_t)`.
#[pyclass(module = "ovalforge_py", frozen)]
struct Clan {
    inner: QClan,
}

#[pymethods]
impl Clan {
    #[new]
    #[pyo3(signature = (q, a, b, modulus=None))]
    fn new(q: usize, a: Vec<u8>, b: Vec<u8>, modulus: Option<u32>) -> PyResult<Self> {
        let field = field_for(q, modulus).map_err(err)?;
        let rec = ClanRecord { q, modulus: field.modulus(), a, b };
        Ok(Clan { inner: rec.to_clan().map_err(err)? })
    }

    /// classical (or linear), subiaco, adelaide.
    #[staticmethod]
    #[pyo3(signature = (q, name, modulus=None))]
    fn named(q: usize, name: &str, modulus: Option<u32>) -> PyResult<Self> {
        let field = field_for(q, modulus).map_err(err)?;
        Ok(Clan { inner: named_clan(field, name).map_err(err)? })
    }

    fn a(&self) -> Vec<u8> {
        self.inner.a().iter().map(|x| x.0).collect()
    }

    fn b(&self) -> Vec<u8> {
        self.inner.b().iter().map(|x| x.0).collect()
    }

    fn kappa(&self) -> u8 {
        self.inner.kappa().0
    }

    fn is_valid(&self) -> bool {
        self.inner.is_valid()
    }

    /// None for a q-clan, otherwise the defect as JSON.
    fn defect(&self) -> Option<String> {
        self.inner.check().err().map(|d| serde_json::to_string(&d).unwrap_or_default())
    }

    fn to_json(&self) -> String {
        serial::to_json(&ClanRecord::new(&self.inner))
    }

    fn flock_json(&self) -> String {
        serial::to_json(&FlockRecord::new(&self.inner.to_flock()))
    }

    fn herd_json(&self) -> PyResult<String> {
        let h = herd_from_clan(&self.inner, self.inner.kappa()).map_err(err)?;
        Ok(serial::to_json(&HerdRecord::new(&h)))
    }

    /// The spread of T2(O) built from the clan's flock, as a spread record.
    fn spread_json(&self) -> PyResult<String> {
        let fl = self.inner.to_flock();
        let (f, g) = fl.outer();
        let fan = fan_from_flock(&f, &g, self.inner.field().h() - 1).map_err(err)?;
        let (t, s) = spread_from_fan(&fan).map_err(err)?;
        Ok(serial::to_json(&SpreadRecord::new(&t, &s).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Clan(q={}, kappa={})", self.inner.field().q(), self.inner.kappa().0)
    }
}

/// Checks a spread record. Returns None when it is a spread, otherwise the
/// defect as JSON.
#[pyfunction]
fn verify_spread(record: &str) -> PyResult<Option<String>> {
    let rec: SpreadRecord = serial::from_json(record).map_err(err)?;
    let (t, s) = rec.decode().map_err(err)?;
    Ok(check_spread(&t, &s.lines).err().map(|d| serde_json::to_string(&d).unwrap_or_default()))
}

/// Oval census report for q in {2, 4, 8, 64}, as JSON.
#[pyfunction]
fn oval_census(py: Python<'_>, q: usize) -> PyResult<String> {
    let c = py.detach(|| oval_census_rs(q)).map_err(err)?;
    Ok(serial::to_json(&c.report))
}

/// Spread classification report for q in {4, 8, 64}, as JSON.
#[pyfunction]
#[pyo3(signature = (q, checkpoint=None))]
fn classify_spreads(py: Python<'_>, q: usize, checkpoint: Option<std::path::PathBuf>) -> PyResult<String> {
    let r = py.detach(|| classify_spreads_rs(q, checkpoint.as_deref())).map_err(err)?;
    Ok(serial::to_json(&r))
}

#[pymodule]
pub fn ovalforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Field>()?;
    m.add_class::<OPoly>()?;
    m.add_class::<Oval>()?;
    m.add_class::<Clan>()?;
    m.add_function(wrap_pyfunction!(verify_spread, m)?)?;
    m.add_function(wrap_pyfunction!(oval_census, m)?)?;
    m.add_function(wrap_pyfunction!(classify_spreads, m)?)?;
    Ok(())
}
