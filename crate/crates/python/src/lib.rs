//! Python bindings: meshes, the certificate pipeline, bounds and the
//! lattice-loop filling.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use exsys::certify::{self, PipelineConfig};
use exsys::curves::{word, LatticeLoop};
use exsys::geometry::Rat;
use exsys::mesh::{parse_rational, TorusMesh};
use exsys::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Mesh(_) => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rational(s: &str) -> PyResult<Rat> {
    parse_rational(s).map_err(err)
}

/// A closed triangulated torus with marked `u`, `v` classes.
#[pyclass(name = "Mesh", module = "exsys_py", from_py_object)]
#[derive(Clone)]
struct PyMesh {
    inner: TorusMesh,
}

#[pymethods]
impl PyMesh {
    /// Generate a family member from `key=value` style parameters.
    #[staticmethod]
    #[pyo3(signature = (family, **params))]
    fn generate(family: &str, params: Option<std::collections::HashMap<String, String>>) -> PyResult<Self> {
        let mut kv: Vec<(String, String)> = params.unwrap_or_default().into_iter().collect();
        kv.sort();
        Ok(PyMesh { inner: exsys::generators::generate(family, &kv).map_err(err)? })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = TorusMesh::parse(text).map_err(err)?;
        inner.validate().map_err(err)?;
        Ok(PyMesh { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| err(Error::Io(e)))?;
        Self::parse(&text)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn area(&self) -> PyResult<f64> {
        self.inner.area().map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertices.len()
    }

    #[getter]
    fn triangle_count(&self) -> usize {
        self.inner.triangles.len()
    }

    fn vertices(&self) -> Vec<[f64; 3]> {
        self.inner.vertices_f64()
    }

    fn triangles(&self) -> Vec<[usize; 3]> {
        self.inner.triangles.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh({}, vertices={}, triangles={})",
            self.inner.name,
            self.inner.vertices.len(),
            self.inner.triangles.len()
        )
    }
}

#[pyclass(name = "Certificate", module = "exsys_py", from_py_object)]
#[derive(Clone)]
struct PyCertificate {
    inner: certify::Certificate,
}

#[pymethods]
impl PyCertificate {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyCertificate { inner: certify::Certificate::from_text(text).map_err(err)? })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Re-check against the mesh; raises on any failed identity.
    fn verify(&self, mesh: &PyMesh) -> PyResult<()> {
        certify::verify_certificate(&mesh.inner, &self.inner).map_err(err)
    }

    /// Diameter of the `v` loop for a v-in-cube certificate.
    #[getter]
    fn witness_diameter(&self) -> Option<f64> {
        match &self.inner.body {
            certify::CertificateBody::VInCube(w) => Some(w.diameter),
            certify::CertificateBody::ShortU(_) => None,
        }
    }
}

#[pyclass(name = "BoundReport", module = "exsys_py", get_all, from_py_object)]
#[derive(Clone)]
struct PyBoundReport {
    sys_u_est: f64,
    sys_v_est: f64,
    area: f64,
    extrinsic_upper: f64,
    thm13_bound: f64,
    thm_a2_bound: f64,
    loewner_bound: f64,
    text: String,
}

impl From<&certify::BoundReport> for PyBoundReport {
    fn from(r: &certify::BoundReport) -> Self {
        PyBoundReport {
            sys_u_est: r.sys_u_est,
            sys_v_est: r.sys_v_est,
            area: r.area,
            extrinsic_upper: r.extrinsic_upper,
            thm13_bound: r.thm13_bound,
            thm_a2_bound: r.thm_a2_bound,
            loewner_bound: r.loewner_bound,
            text: r.to_text(),
        }
    }
}

#[pyclass(name = "PipelineResult", module = "exsys_py", get_all)]
struct PyPipelineResult {
    certificate: PyCertificate,
    report: PyBoundReport,
    summary: String,
    hypothesis: bool,
    m: f64,
}

/// Run the dichotomy on the unit-area rescaled mesh. `spacing` and `offset`
/// are exact decimals or `p/q` strings; both are chosen automatically when
/// omitted.
#[pyfunction]
#[pyo3(signature = (mesh, spacing=None, offset=None, samples=1000, seed=0))]
fn run_pipeline(
    py: Python<'_>,
    mesh: &PyMesh,
    spacing: Option<&str>,
    offset: Option<[String; 3]>,
    samples: usize,
    seed: u64,
) -> PyResult<PyPipelineResult> {
    let cfg = PipelineConfig {
        spacing: spacing.map(rational).transpose()?,
        offset: match offset {
            Some([x, y, z]) => Some([rational(&x)?, rational(&y)?, rational(&z)?]),
            None => None,
        },
        samples,
        seed,
    };
    let m = mesh.inner.clone();
    let r = py.detach(move || certify::run_main_theorem(&m, &cfg)).map_err(err)?;
    Ok(PyPipelineResult {
        certificate: PyCertificate { inner: r.certificate.clone() },
        report: (&r.report).into(),
        summary: r.summary(),
        hypothesis: r.hypothesis,
        m: r.m,
    })
}

#[pyfunction]
#[pyo3(signature = (mesh, fstar=None))]
fn evaluate_bounds(py: Python<'_>, mesh: &PyMesh, fstar: Option<[i64; 4]>) -> PyResult<PyBoundReport> {
    let m = mesh.inner.clone();
    let r = py.detach(move || certify::evaluate_bounds(&m, fstar)).map_err(err)?;
    Ok((&r).into())
}

/// Flat-torus predictions for the marking `[[a, b], [c, d]]`:
/// `(sys_u, sys_v, thm13, thmA2, nash, winner)`.
#[pyfunction]
fn a3_prediction(a: i64, b: i64, c: i64, d: i64) -> PyResult<(f64, f64, f64, f64, f64, &'static str)> {
    let p = certify::a3_prediction([a, b, c, d]).map_err(err)?;
    Ok((p.sys_u, p.sys_v, p.thm13, p.thm_a2, p.nash, p.winner.name()))
}

/// `(linking, area, sys_u, sys_v, sys_w, extrinsic_upper, ratio)` for the
/// knot tube of `T_{n, n-1}`.
#[pyfunction]
#[pyo3(signature = (n, radius=None, res=None))]
fn knot_tube_sharpness(
    py: Python<'_>,
    n: u32,
    radius: Option<f64>,
    res: Option<usize>,
) -> PyResult<(i64, f64, f64, f64, f64, f64, f64)> {
    let k = py.detach(move || certify::knot_tube_sharpness(n, radius, res)).map_err(err)?;
    Ok((k.linking, k.area, k.sys_u_est, k.sys_v_est, k.sys_w_est, k.extrinsic_upper, k.ratio))
}

/// Fill a closed lattice word such as `"XYxy"` based at `base`; returns the
/// multiplicity and the 2-chain as `(dim x y z axes coeff)` lines.
#[pyfunction]
#[pyo3(signature = (letters, base=[0, 0, 0]))]
fn fill_lattice_loop(letters: &str, base: [i64; 3]) -> PyResult<(u64, String)> {
    let lp = LatticeLoop::new(base, word(letters)).map_err(err)?;
    let f = exsys::filling::fill_x1(&lp).map_err(err)?;
    Ok((f.multiplicity, exsys::lattice::write_chain(&f.chain)))
}

#[pyfunction]
fn linking_number(a: Vec<[f64; 3]>, b: Vec<[f64; 3]>) -> PyResult<i64> {
    exsys::linking::linking_number(&a, &b).map_err(err)
}

/// Run one property suite; returns `(passed, report_line)`.
#[pyfunction]
#[pyo3(signature = (name, seed=0, cases=200, max_len=10, oracle=false))]
fn verify_lemma(py: Python<'_>, name: &str, seed: u64, cases: usize, max_len: usize, oracle: bool) -> PyResult<(bool, String)> {
    let cfg = exsys::lemmas::LemmaConfig { seed, max_len, cases, oracle };
    let name = name.to_string();
    let r = py.detach(move || exsys::lemmas::run_lemma(&name, &cfg)).map_err(err)?;
    Ok((r.passed(), r.line()))
}

#[pymodule]
fn exsys_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyBoundReport>()?;
    m.add_class::<PyPipelineResult>()?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(a3_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(knot_tube_sharpness, m)?)?;
    m.add_function(wrap_pyfunction!(fill_lattice_loop, m)?)?;
    m.add_function(wrap_pyfunction!(linking_number, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lemma, m)?)?;
    Ok(())
}
