//! Python bindings: models, particle and field simulators, the large-μ sweep.

use std::collections::BTreeMap;
use std::fmt::Display;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pltd_core::duality::Splitting;
use pltd_core::field::{Boundary, Field as CoreField, LoopState as CoreLoop};
use pltd_core::group::{id2, Mat2};
use pltd_core::lie::{CVec, C64};
use pltd_core::particle::{Particle as CoreParticle, ParticleState};
use pltd_core::zoo::{algebra_by_name, ModelPreset, Mu};

type PyMat = [[C64; 2]; 2];

fn bad(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn numerical(e: impl Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_py(m: &Mat2) -> PyMat {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn from_py(m: &PyMat) -> Mat2 {
    Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

/// A splitting of the double: a preset name or a custom `(λ, μ)`.
#[pyclass(module = "pltd", frozen)]
struct Model {
    preset: ModelPreset,
    algebra: String,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (preset = "modified-principal", algebra = "su2"))]
    fn new(preset: &str, algebra: &str) -> PyResult<Self> {
        let b = algebra_by_name(algebra).map_err(bad)?;
        Ok(Model { preset: ModelPreset::parse(preset, b).map_err(bad)?, algebra: algebra.into() })
    }

    #[staticmethod]
    #[pyo3(signature = (lam, mu, algebra = "su2"))]
    fn custom(lam: C64, mu: C64, algebra: &str) -> PyResult<Self> {
        let b = algebra_by_name(algebra).map_err(bad)?;
        Ok(Model { preset: ModelPreset::custom(b, lam, mu).map_err(bad)?, algebra: algebra.into() })
    }

    #[getter]
    fn name(&self) -> String {
        self.preset.name.clone()
    }

    #[getter]
    fn algebra(&self) -> String {
        self.algebra.clone()
    }

    #[getter]
    fn lam(&self) -> C64 {
        self.preset.lambda
    }

    /// `None` for the principal model (μ = ∞).
    #[getter]
    fn mu(&self) -> Option<C64> {
        match self.preset.mu {
            Mu::Finite(m) => Some(m),
            Mu::Infinite => None,
        }
    }

    /// Structural residuals of the bialgebra, double and splitting.
    fn validate(&self) -> PyResult<BTreeMap<String, f64>> {
        let r = self.preset.bialgebra.report().map_err(bad)?;
        let s = Splitting::new(&self.preset).map_err(bad)?;
        Ok(BTreeMap::from([
            ("cybe".into(), r.cybe),
            ("r_plus_invariance".into(), r.r_plus_invariance),
            ("factorisability".into(), r.factorisability),
            ("double_jacobi".into(), r.double_jacobi),
            ("double_invariance".into(), r.double_invariance),
            ("isotropy".into(), r.isotropy),
            ("iso_homomorphism".into(), r.iso_homomorphism),
            ("iso_pairing".into(), r.iso_pairing),
            ("orthogonality".into(), s.orthogonality_residual()),
            ("projector".into(), s.projector_residual()),
        ]))
    }

    fn __repr__(&self) -> String {
        format!("Model('{}', algebra='{}')", self.preset.name, self.algebra)
    }
}

#[pyclass(module = "pltd", frozen, get_all)]
struct Trajectory {
    t: Vec<f64>,
    u: Vec<PyMat>,
    p: Vec<Vec<C64>>,
    hamiltonian: Vec<C64>,
    truncated: Option<String>,
}

/// Point particle on `G` with momentum in the dual algebra.
#[pyclass(module = "pltd", frozen)]
struct Particle {
    inner: CoreParticle,
}

#[pymethods]
impl Particle {
    #[new]
    fn new(model: &Model) -> PyResult<Self> {
        let split = Splitting::new(&model.preset).map_err(bad)?;
        Ok(Particle { inner: CoreParticle::new(split).map_err(bad)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn hamiltonian(&self, u: PyMat, p: Vec<C64>) -> PyResult<C64> {
        self.inner.hamiltonian(&from_py(&u), &CVec::from_vec(p)).map_err(numerical)
    }

    /// `(I_δ on the basis of d, Q_G, Q_M)`.
    fn charges(&self, u: PyMat, p: Vec<C64>) -> (Vec<C64>, Vec<C64>, Vec<C64>) {
        let c = self.inner.charges(&from_py(&u), &CVec::from_vec(p));
        (c.i_delta, c.q_g, c.q_m)
    }

    #[pyo3(signature = (p0, dt, t_end, u0 = None))]
    fn integrate(&self, p0: Vec<C64>, dt: f64, t_end: f64, u0: Option<PyMat>) -> PyResult<Trajectory> {
        if p0.len() != self.inner.dim() {
            return Err(bad(format!("p0 needs {} components", self.inner.dim())));
        }
        let u0 = u0.map(|m| from_py(&m)).unwrap_or_else(id2);
        let tr = self.inner.integrate(&ParticleState::new(u0, CVec::from_vec(p0)), dt, t_end).map_err(bad)?;
        Ok(Trajectory {
            t: tr.states.iter().map(|s| s.time).collect(),
            u: tr.states.iter().map(|s| to_py(&s.u)).collect(),
            p: tr.states.iter().map(|s| s.p.iter().copied().collect()).collect(),
            hamiltonian: tr.hamiltonian,
            truncated: tr.truncated,
        })
    }
}

/// A loop `k(x)` in SL(2, ℂ) sampled on the grid.
#[pyclass(module = "pltd", frozen)]
struct LoopState {
    inner: CoreLoop,
}

#[pymethods]
impl LoopState {
    #[getter]
    fn time(&self) -> f64 {
        self.inner.time
    }

    fn matrices(&self) -> Vec<PyMat> {
        self.inner.k.iter().map(to_py).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.k.len()
    }
}

#[pyclass(module = "pltd", frozen, get_all)]
struct FieldRun {
    t: Vec<f64>,
    hamiltonian: Vec<f64>,
    eom_res_g: Vec<f64>,
    eom_res_dual: Vec<f64>,
    duality_gap: Vec<f64>,
    i_delta: Vec<Vec<f64>>,
    f_d: Vec<f64>,
    warnings: Vec<String>,
    truncated: Option<String>,
}

/// Method-of-lines field simulator on `[0, π]` for the su2 double.
#[pyclass(module = "pltd", frozen)]
struct Field {
    inner: CoreField,
}

#[pymethods]
impl Field {
    #[new]
    #[pyo3(signature = (model, n = 64, bc = "double-neumann"))]
    fn new(model: &Model, n: usize, bc: &str) -> PyResult<Self> {
        let bc: Boundary = bc.parse().map_err(bad)?;
        Ok(Field { inner: CoreField::from_preset(&model.preset, n, bc).map_err(bad)? })
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.inner.nodes()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx()
    }

    fn grid(&self) -> Vec<f64> {
        self.inner.grid()
    }

    fn two_wave(&self, amp: f64, cp: [f64; 3], cm: [f64; 3]) -> LoopState {
        LoopState { inner: self.inner.two_wave(amp, cp, cm) }
    }

    fn random_periodic(&self, amp: f64, seed: u64) -> LoopState {
        LoopState { inner: self.inner.random_periodic(amp, seed) }
    }

    fn pointlike(&self, u0: PyMat, p: Vec<C64>) -> PyResult<LoopState> {
        Ok(LoopState { inner: self.inner.init_pointlike(&from_py(&u0), &CVec::from_vec(p)).map_err(bad)? })
    }

    fn step(&self, state: &LoopState, dt: f64) -> PyResult<LoopState> {
        Ok(LoopState { inner: self.inner.step(&state.inner, dt).map_err(numerical)? })
    }

    fn hamiltonian(&self, state: &LoopState) -> f64 {
        self.inner.hamiltonian(&state.inner)
    }

    fn duality_check(&self, state: &LoopState) -> PyResult<f64> {
        self.inner.duality_check(&state.inner).map_err(numerical)
    }

    fn moment_map(&self, state: &LoopState, delta: Vec<C64>) -> PyResult<f64> {
        if delta.len() != 6 {
            return Err(bad("delta needs 6 components"));
        }
        Ok(self.inner.moment_map(&state.inner, &CVec::from_vec(delta)))
    }

    fn f_d(&self, state: &LoopState) -> f64 {
        self.inner.f_d(&state.inner)
    }

    /// Diagnostics every `every` steps; `I_δ` over the basis of the double.
    #[pyo3(signature = (state, dt, t_end, every = 10))]
    fn run(&self, state: &LoopState, dt: f64, t_end: f64, every: usize) -> PyResult<FieldRun> {
        let deltas: Vec<CVec> = (0..6).map(|i| self.inner.split.double.d.basis(i)).collect();
        let (run, _) = self.inner.run(&state.inner, dt, t_end, &deltas, every).map_err(bad)?;
        let col = |f: fn(&pltd_core::field::FieldDiagnostics) -> f64| run.rows.iter().map(f).collect::<Vec<_>>();
        Ok(FieldRun {
            t: col(|r| r.time),
            hamiltonian: col(|r| r.hamiltonian),
            eom_res_g: col(|r| r.eom_residual_g),
            eom_res_dual: col(|r| r.eom_residual_dual),
            duality_gap: col(|r| r.duality_gap),
            i_delta: run.rows.iter().map(|r| r.i_delta.clone()).collect(),
            f_d: col(|r| r.f_d),
            warnings: run.warnings,
            truncated: run.truncated,
        })
    }
}

/// `(μ, primal deviation, dual deviation)` rows, then the two slopes.
type Sweep = (Vec<(f64, f64, f64)>, f64, f64);

#[pyfunction]
#[pyo3(signature = (mus, samples = 20, seed = 0))]
fn limit_sweep(mus: Vec<f64>, samples: usize, seed: u64) -> PyResult<Sweep> {
    let s = pltd_core::limits::limit_sweep(&mus, samples, seed).map_err(bad)?;
    Ok((s.rows.iter().map(|r| (r.mu, r.primal_deviation, r.dual_deviation)).collect(), s.primal_slope, s.dual_slope))
}

#[pymodule]
fn pltd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<Particle>()?;
    m.add_class::<Trajectory>()?;
    m.add_class::<Field>()?;
    m.add_class::<LoopState>()?;
    m.add_class::<FieldRun>()?;
    m.add_function(wrap_pyfunction!(limit_sweep, m)?)?;
    Ok(())
}
