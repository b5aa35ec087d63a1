//! Python bindings: `import octahedra`.
//!
//! Developments cross the boundary as `{"01": 1.0, ...}` dicts, geometry as a
//! list of six `[x, y, z]` points, and reports as plain dicts with the same
//! layout as the CLI's JSON.

use std::collections::BTreeMap;

use octa_core::io::{decision_to_json, reconstruction_to_json};
use octa_core::{Error, GenConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::TooManyRejections(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

/// Solver and decision tolerances; every field is dimensionless.
#[pyclass(module = "octahedra", get_all, set_all)]
struct Tolerances {
    eps_rel: f64,
    eps_geom: f64,
    alpha_yes: f64,
    alpha_no: f64,
    eps_embed: f64,
}

#[pymethods]
impl Tolerances {
    #[new]
    #[pyo3(signature = (eps_rel=None, eps_geom=None, alpha_yes=None, alpha_no=None))]
    fn new(eps_rel: Option<f64>, eps_geom: Option<f64>, alpha_yes: Option<f64>, alpha_no: Option<f64>) -> PyResult<Self> {
        let d = octa_core::Tolerances::default();
        let t = Self {
            eps_rel: eps_rel.unwrap_or(d.eps_rel),
            eps_geom: eps_geom.unwrap_or(d.eps_geom),
            alpha_yes: alpha_yes.unwrap_or(d.alpha_yes),
            alpha_no: alpha_no.unwrap_or(d.alpha_no),
            eps_embed: d.eps_embed,
        };
        t.core()?;
        Ok(t)
    }

    fn __repr__(&self) -> String {
        format!(
            "Tolerances(eps_rel={:e}, eps_geom={:e}, alpha_yes={:e}, alpha_no={:e})",
            self.eps_rel, self.eps_geom, self.alpha_yes, self.alpha_no
        )
    }
}

impl Tolerances {
    fn core(&self) -> PyResult<octa_core::Tolerances> {
        let t = octa_core::Tolerances {
            eps_rel: self.eps_rel,
            eps_geom: self.eps_geom,
            alpha_yes: self.alpha_yes,
            alpha_no: self.alpha_no,
            eps_embed: self.eps_embed,
            ..Default::default()
        };
        t.validate().map_err(to_py)?;
        Ok(t)
    }
}

fn tol_or_default(tol: Option<&Tolerances>) -> PyResult<octa_core::Tolerances> {
    tol.map_or_else(|| Ok(octa_core::Tolerances::default()), Tolerances::core)
}

/// The twelve edge lengths of an octahedron's natural development.
#[pyclass(module = "octahedra", frozen)]
struct Development {
    inner: octa_core::NaturalDevelopment,
}

#[pymethods]
impl Development {
    #[new]
    fn new(edges: BTreeMap<String, f64>) -> PyResult<Self> {
        let inner = octa_core::NaturalDevelopment::validate(edges.iter().map(|(k, v)| (k.as_str(), *v))).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn edges(&self) -> BTreeMap<String, f64> {
        self.inner.to_map()
    }

    fn length(&self, i: usize, j: usize) -> Option<f64> {
        self.inner.length(i, j)
    }

    fn scaled(&self, k: f64) -> Self {
        Self { inner: self.inner.scaled(k) }
    }

    fn perturbed(&self, edge: &str, factor: f64) -> PyResult<Self> {
        let inner = octa_core::perturb_development(&self.inner, edge, factor).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!("Development({:?})", self.inner.to_map())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Development of the octahedron with the given six vertices.
#[pyfunction]
fn develop(vertices: [[f64; 3]; 6]) -> PyResult<Development> {
    let oct = octa_core::Octahedron3::new(vertices).map_err(to_py)?;
    Ok(Development { inner: octa_core::develop(&oct) })
}

/// Whether the six vertices form a strictly convex octahedron:
/// `"convex"`, `"nonconvex"` or `"marginal"`.
#[pyfunction]
#[pyo3(signature = (vertices, tol=None))]
fn convexity(vertices: [[f64; 3]; 6], tol: Option<&Tolerances>) -> PyResult<&'static str> {
    let oct = octa_core::Octahedron3::new(vertices).map_err(to_py)?;
    Ok(match octa_core::is_convex(&oct, &tol_or_default(tol)?).map_err(to_py)? {
        octa_core::Convexity::Convex => "convex",
        octa_core::Convexity::Nonconvex { .. } => "nonconvex",
        octa_core::Convexity::Marginal { .. } => "marginal",
    })
}

/// Reconstructs the convex octahedron; returns the reconstruction report.
#[pyfunction]
#[pyo3(signature = (dev, tol=None))]
fn reconstruct<'py>(py: Python<'py>, dev: &Development, tol: Option<&Tolerances>) -> PyResult<Bound<'py, PyAny>> {
    let tol = tol_or_default(tol)?;
    let r = py.detach(|| octa_core::reconstruct(&dev.inner, &tol)).map_err(to_py)?;
    json_to_py(py, &reconstruction_to_json(&r))
}

/// Decides affine equivalence; returns the `decision/1` report.
#[pyfunction]
#[pyo3(signature = (a, b, tol=None))]
fn decide<'py>(py: Python<'py>, a: &Development, b: &Development, tol: Option<&Tolerances>) -> PyResult<Bound<'py, PyAny>> {
    let tol = tol_or_default(tol)?;
    let d = py.detach(|| octa_core::decide(&a.inner, &b.inner, &tol)).map_err(to_py)?;
    json_to_py(py, &decision_to_json(&d))
}

/// Random convex octahedron number `index` of stream `seed`.
#[pyfunction]
#[pyo3(signature = (seed, noise=0.25, index=0))]
fn generate(seed: u64, noise: f64, index: u64) -> PyResult<[[f64; 3]; 6]> {
    let cfg = GenConfig { noise, ..GenConfig::with_seed(seed) };
    let oct = octa_core::genkit::random_convex_octahedron_at(&cfg, index).map_err(to_py)?;
    Ok(*oct.vertices())
}

/// Cayley–Menger determinant of `subset` for a squared distance matrix;
/// returns `(value, normalized)`.
#[pyfunction]
fn cm_determinant(squared: Vec<Vec<f64>>, subset: Vec<usize>) -> PyResult<(f64, f64)> {
    let m = octa_core::SquaredDistanceMatrix::new(&squared).map_err(to_py)?;
    let v = octa_core::cm_determinant(&subset, &m).map_err(to_py)?;
    Ok((v.value, v.normalized))
}

#[pymodule]
pub fn octahedra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Tolerances>()?;
    m.add_class::<Development>()?;
    m.add_function(wrap_pyfunction!(develop, m)?)?;
    m.add_function(wrap_pyfunction!(convexity, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(cm_determinant, m)?)?;
    Ok(())
}
