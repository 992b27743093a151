//! Point-particle reduction: `u ∈ G` independent of `x`, momentum
//! `p = s_x s⁻¹ ∈ m`.
//!
//! Integration is a 4th-order Munthe-Kaas scheme: `u = u₀ exp(v)` with
//! `v̇ = dexp⁻¹_{−v}(u⁻¹u̇)`, classical RK4 for `p`. The auxiliary `a ∈ M`
//! is carried along when a matrix realization of `m` is supplied.

use serde::Serialize;
use thiserror::Error;

use crate::bialgebra::QuasiBialgebra;
use crate::duality::{GraphCoordinate, Splitting, GRAPH_COND};
use crate::group::{det_normalize, exp2, inv2, Mat2, MatrixRep};
use crate::lie::{checked_inverse, condition_number, max_abs_vec, CMat, CVec, LieAlgebra, C64, ZERO};

#[derive(Debug, Error)]
pub enum ParticleError {
    #[error("E_u⁻¹ − T_u⁻¹ is singular (condition number {0:.3e})")]
    Singular(f64),
    #[error("splitting has no matrix realization of G")]
    NoRep,
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleState {
    pub u: Mat2,
    pub p: CVec,
    /// `a ∈ M` in the supplied realization of `m`, if any.
    pub a: Option<Mat2>,
    pub time: f64,
}

impl ParticleState {
    pub fn new(u: Mat2, p: CVec) -> Self {
        ParticleState { u, p, a: None, time: 0.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Charges {
    /// `I_δ` for the basis of `d`, g part first.
    pub i_delta: Vec<C64>,
    pub q_g: Vec<C64>,
    pub q_m: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<ParticleState>,
    pub hamiltonian: Vec<C64>,
    /// Why the run stopped early, if it did.
    pub truncated: Option<String>,
}

/// A particle system: a splitting with a realization of `G` (and optionally of `M`).
#[derive(Clone, Debug)]
pub struct Particle {
    pub split: Splitting,
    pub rep: MatrixRep,
    /// Real matrix realization of the basis of `m`, used to carry `a`.
    pub m_basis: Option<Vec<Mat2>>,
}

impl Particle {
    pub fn new(split: Splitting) -> Result<Self, ParticleError> {
        let rep = split.bialgebra().rep.clone().ok_or(ParticleError::NoRep)?;
        Ok(Particle { split, rep, m_basis: None })
    }

    pub fn with_m_basis(mut self, basis: Vec<Mat2>) -> Self {
        self.m_basis = Some(basis);
        self
    }

    fn m_matrix(&self, w: &CVec) -> Option<Mat2> {
        let b = self.m_basis.as_ref()?;
        Some(b.iter().zip(w.iter()).fold(Mat2::zeros(), |acc, (m, c)| acc + m * *c))
    }

    pub fn dim(&self) -> usize {
        self.split.dim()
    }

    pub fn graph(&self, u: &Mat2) -> GraphCoordinate {
        self.split.graph_at(&self.rep.ad(u))
    }

    fn check(&self, p: &CVec) -> Result<(), ParticleError> {
        if p.len() != self.dim() {
            return Err(ParticleError::Dim { expected: self.dim(), got: p.len() });
        }
        Ok(())
    }

    /// `(u⁻¹u̇, ṗ)` in inverse coordinates:
    /// `u⁻¹u̇ = 2T⁻¹(E⁻¹−T⁻¹)⁻¹E⁻¹p`, `ṗ = [(E⁻¹−T⁻¹)⁻¹(E⁻¹+T⁻¹)p, p]`.
    pub fn rhs(&self, u: &Mat2, p: &CVec) -> Result<(CVec, CVec), ParticleError> {
        self.check(p)?;
        let gc = self.graph(u);
        self.rhs_at(&gc, p)
    }

    fn rhs_at(&self, gc: &GraphCoordinate, p: &CVec) -> Result<(CVec, CVec), ParticleError> {
        let d = &gc.e_inv - &gc.t_inv;
        let di = checked_inverse(&d, GRAPH_COND).ok_or_else(|| ParticleError::Singular(condition_number(&d)))?;
        let ep = &gc.e_inv * p;
        let omega = &gc.t_inv * (&di * &ep) * C64::new(2.0, 0.0);
        let w = &di * (&ep + &gc.t_inv * p);
        Ok((omega, self.split.m.bracket(&w, p)))
    }

    /// The forward-coordinate form `u⁻¹u̇ = −2(E−T)⁻¹p`,
    /// `ṗ = −[(E+T)(E−T)⁻¹p, p]`; `None` on graph blowup.
    pub fn rhs_graph(&self, u: &Mat2, p: &CVec) -> Option<(CVec, CVec)> {
        let gc = self.graph(u);
        let (e, t) = (gc.e.as_ref()?, gc.t.as_ref()?);
        let di = checked_inverse(&(e - t), GRAPH_COND)?;
        let x = &di * p;
        let omega = &x * C64::new(-2.0, 0.0);
        let w = -((e + t) * &x);
        Some((omega, self.split.m.bracket(&w, p)))
    }

    /// Projector form: with `Z = (π_{u−} − π_{u+})p`, returns
    /// `(π_g Z, [π_m Z, p], π_m Z)`; the last entry is `ȧa⁻¹`.
    pub fn rhs_projector(&self, u: &Mat2, p: &CVec) -> (CVec, CVec, CVec) {
        let gc = self.graph(u);
        let (pp, pm) = self.split.projectors_at(&gc);
        let z = (pm - pp) * self.split.double.embed_m(p);
        let (omega, w) = self.split.double.split(&z);
        let pdot = self.split.m.bracket(&w, p);
        (omega, pdot, w)
    }

    /// `ȧa⁻¹ = −(E_u+T_u)(E_u−T_u)⁻¹p` in inverse coordinates.
    pub fn a_rate(&self, u: &Mat2, p: &CVec) -> Result<CVec, ParticleError> {
        let gc = self.graph(u);
        let d = &gc.e_inv - &gc.t_inv;
        let di = checked_inverse(&d, GRAPH_COND).ok_or_else(|| ParticleError::Singular(condition_number(&d)))?;
        Ok(&di * (&gc.e_inv * p + &gc.t_inv * p))
    }

    /// G-invariant form `u⁻¹u̇ = Up`, `ṗ = [VUp, p]`, `U = 2(T_e−E_e)⁻¹`, `V = ½(E_e+T_e)`.
    pub fn rhs_invariant(&self, p: &CVec) -> Option<(CVec, CVec)> {
        let e = checked_inverse(&self.split.e_inv_e, GRAPH_COND)?;
        let t = checked_inverse(&self.split.t_inv_e, GRAPH_COND)?;
        let u_op = checked_inverse(&(&t - &e), GRAPH_COND)? * C64::new(2.0, 0.0);
        let v_op = (&e + &t) * C64::new(0.5, 0.0);
        let up = &u_op * p;
        let pdot = self.split.m.bracket(&(&v_op * &up), p);
        Some((up, pdot))
    }

    /// `𝓗` with `4𝓗 = 2⟨(E⁻¹−T⁻¹)⁻¹E⁻¹p, E⁻¹p⟩`.
    pub fn hamiltonian(&self, u: &Mat2, p: &CVec) -> Result<C64, ParticleError> {
        let gc = self.graph(u);
        let d = &gc.e_inv - &gc.t_inv;
        let di = checked_inverse(&d, GRAPH_COND).ok_or_else(|| ParticleError::Singular(condition_number(&d)))?;
        let ep = &gc.e_inv * p;
        Ok((&di * &ep).dot(&ep) * 0.5)
    }

    /// `𝓗` with `4𝓗 = ⟨(π_{u+} − π_{u−})p, p⟩`.
    pub fn hamiltonian_projector(&self, u: &Mat2, p: &CVec) -> C64 {
        let gc = self.graph(u);
        let (pp, pm) = self.split.projectors_at(&gc);
        let w = self.split.double.embed_m(p);
        self.split.double.pair(&((pp - pm) * &w), &w) * 0.25
    }

    /// `Ad_u(p)` in the double, i.e. `upu⁻¹`.
    pub fn conjugated_momentum(&self, u: &Mat2, p: &CVec) -> CVec {
        self.split.ad_double_g(&self.rep.ad(u)) * self.split.double.embed_m(p)
    }

    /// `I_δ = −½⟨upu⁻¹, δ⟩` on the basis of `d`, `Q_G = π_m(upu⁻¹) = p◁u⁻¹`
    /// and `Q_M = π_g(upu⁻¹)`.
    pub fn charges(&self, u: &Mat2, p: &CVec) -> Charges {
        let w = self.conjugated_momentum(u, p);
        let n2 = w.len();
        let i_delta = (0..n2)
            .map(|j| {
                let mut d = CVec::zeros(n2);
                d[j] = C64::new(1.0, 0.0);
                self.split.double.pair(&w, &d) * -0.5
            })
            .collect();
        let (g, m) = self.split.double.split(&w);
        Charges { i_delta, q_g: m.iter().copied().collect(), q_m: g.iter().copied().collect() }
    }

    fn vdot(&self, v: &CVec, omega: &CVec) -> CVec {
        let g = &self.split.g;
        let b1 = g.bracket(v, omega);
        let b2 = g.bracket(v, &b1);
        omega + b1 * C64::new(0.5, 0.0) + b2 * C64::new(1.0 / 12.0, 0.0)
    }

    fn wdot(&self, w: &CVec, rate: &CVec) -> CVec {
        let m = &self.split.m;
        let b1 = m.bracket(w, rate);
        let b2 = m.bracket(w, &b1);
        rate - b1 * C64::new(0.5, 0.0) + b2 * C64::new(1.0 / 12.0, 0.0)
    }

    /// One RKMK4 step.
    pub fn step(&self, s: &ParticleState, dt: f64) -> Result<ParticleState, ParticleError> {
        let n = self.dim();
        let h = C64::new(dt, 0.0);
        let track_a = s.a.is_some() && self.m_basis.is_some();
        let eval = |v: &CVec, p: &CVec, w: &CVec| -> Result<(CVec, CVec, CVec), ParticleError> {
            let u = s.u * self.rep.exp(v);
            let gc = self.graph(&u);
            let (omega, pdot) = self.rhs_at(&gc, p)?;
            let wd = if track_a {
                let d = &gc.e_inv - &gc.t_inv;
                let di = checked_inverse(&d, GRAPH_COND).ok_or_else(|| ParticleError::Singular(condition_number(&d)))?;
                self.wdot(w, &(&di * (&gc.e_inv * p + &gc.t_inv * p)))
            } else {
                CVec::zeros(n)
            };
            Ok((self.vdot(v, &omega), pdot, wd))
        };
        let z = CVec::zeros(n);
        let half = h * 0.5;
        let (v1, p1, w1) = eval(&z, &s.p, &z)?;
        let (v2, p2, w2) = eval(&(&v1 * half), &(&s.p + &p1 * half), &(&w1 * half))?;
        let (v3, p3, w3) = eval(&(&v2 * half), &(&s.p + &p2 * half), &(&w2 * half))?;
        let (v4, p4, w4) = eval(&(&v3 * h), &(&s.p + &p3 * h), &(&w3 * h))?;
        let sixth = h / 6.0;
        let v = (v1 + (v2 + v3) * C64::new(2.0, 0.0) + v4) * sixth;
        let p = &s.p + (p1 + (p2 + p3) * C64::new(2.0, 0.0) + p4) * sixth;
        let u = det_normalize(&(s.u * self.rep.exp(&v)));
        let a = match (&s.a, track_a) {
            (Some(a0), true) => {
                let w = (w1 + (w2 + w3) * C64::new(2.0, 0.0) + w4) * sixth;
                self.m_matrix(&w).map(|m| det_normalize(&(exp2(&m) * a0)))
            }
            (a0, _) => *a0,
        };
        Ok(ParticleState { u, p, a, time: s.time + dt })
    }

    /// Integrate to `t_end`; a singularity truncates the trajectory.
    pub fn integrate(&self, s0: &ParticleState, dt: f64, t_end: f64) -> Result<Trajectory, ParticleError> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(ParticleError::BadStep(dt));
        }
        self.check(&s0.p)?;
        let steps = (t_end / dt).round() as usize;
        let mut states = vec![s0.clone()];
        let mut hamiltonian = vec![self.hamiltonian(&s0.u, &s0.p)?];
        let mut truncated = None;
        let mut s = s0.clone();
        for _ in 0..steps {
            match self.step(&s, dt).and_then(|n| Ok((self.hamiltonian(&n.u, &n.p)?, n))) {
                Ok((hn, n)) => {
                    hamiltonian.push(hn);
                    states.push(n.clone());
                    s = n;
                }
                Err(e) => {
                    truncated = Some(format!("t = {:.6}: {e}", s.time));
                    break;
                }
            }
        }
        Ok(Trajectory { states, hamiltonian, truncated })
    }

    /// Residual of the conjugate `(p, a)` system along a stored run: composite
    /// Simpson over consecutive step pairs, `‖y_{n+2} − y_n − ∫ẏ‖ / (2dt)`,
    /// with `ṗ = [ȧa⁻¹, p]` and `ȧ = (ȧa⁻¹)a`. Requires uniform steps.
    pub fn conjugate_description_residual(&self, traj: &Trajectory) -> Result<f64, ParticleError> {
        let st = &traj.states;
        if st.len() < 3 {
            return Ok(0.0);
        }
        let dt = st[1].time - st[0].time;
        let mut rates = Vec::with_capacity(st.len());
        for s in st {
            let w = self.a_rate(&s.u, &s.p)?;
            let pdot = self.split.m.bracket(&w, &s.p);
            let adot = s.a.as_ref().and_then(|a| Some(self.m_matrix(&w)? * a));
            rates.push((pdot, adot));
        }
        let c = C64::new(2.0 * dt / 6.0, 0.0);
        let mut worst = 0.0f64;
        for n in 0..st.len() - 2 {
            let f = |k: usize| &rates[n + k].0;
            let rp = &st[n + 2].p - &st[n].p - (f(0) + f(1) * C64::new(4.0, 0.0) + f(2)) * c;
            worst = worst.max(max_abs_vec(&rp));
            if let (Some(a0), Some(a2), Some(d0), Some(d1), Some(d2)) =
                (&st[n].a, &st[n + 2].a, &rates[n].1, &rates[n + 1].1, &rates[n + 2].1)
            {
                let ra = a2 - a0 - (d0 + d1 * C64::new(4.0, 0.0) + d2) * c;
                worst = worst.max(ra.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        Ok(worst / (2.0 * dt))
    }
}

/// Right coadjoint action at the Lie level, `φ◁ξ = π_m[ξ, φ]`.
pub fn coadjoint_right(split: &Splitting, phi: &CVec, xi: &CVec) -> CVec {
    let d = &split.double;
    d.split(&d.bracket(&d.embed_g(xi), &d.embed_m(phi))).1
}

/// `(2ω₀, (2ω₀)⁻¹)` in the basis `(m, g)`: `[[0, I], [−I, A]]` and
/// `[[A, −I], [I, 0]]`, `A_ij = ⟨p, [e_i, e_j]⟩`.
pub fn point_phase_matrices(g: &LieAlgebra, p: &CVec) -> (CMat, CMat) {
    let n = g.dim();
    let a = CMat::from_fn(n, n, |i, j| (0..n).map(|k| p[k] * g.sc(i, j, k)).sum());
    let id = CMat::identity(n, n);
    let mut w = CMat::zeros(2 * n, 2 * n);
    w.view_mut((0, n), (n, n)).copy_from(&id);
    w.view_mut((n, 0), (n, n)).copy_from(&(-&id));
    w.view_mut((n, n), (n, n)).copy_from(&a);
    let mut pm = CMat::zeros(2 * n, 2 * n);
    pm.view_mut((0, 0), (n, n)).copy_from(&a);
    pm.view_mut((0, n), (n, n)).copy_from(&(-&id));
    pm.view_mut((n, 0), (n, n)).copy_from(&id);
    (w, pm)
}

/// The form `2ω(Z, Y) = ⟨p_Y, ξ_Z⟩ − ⟨p_Z, ξ_Y⟩ + ⟨p, [ξ_Z, ξ_Y]⟩` on
/// tangent vectors `(p_Z, u⁻¹u_Z)` in the basis `(m, g)`, and its inverse.
/// Equals [`point_phase_matrices`] after `eⁱ ↦ −eⁱ` on the m directions.
pub fn point_symplectic_tangent(g: &LieAlgebra, p: &CVec) -> (CMat, CMat) {
    let n = g.dim();
    let (w, pm) = point_phase_matrices(g, p);
    let mut f = CMat::identity(2 * n, 2 * n);
    for j in 0..n {
        f[(j, j)] = C64::new(-1.0, 0.0);
    }
    (&f * w * &f, &f * pm * &f)
}

/// Hamiltonian vector field `X = 2(2ω)⁻¹ dF` with `ω(·, X) = dF`, where `dF`
/// holds `∂F/∂p` then the left-invariant derivatives along `g`.
pub fn hamiltonian_vector_field(g: &LieAlgebra, p: &CVec, df: &CVec) -> CVec {
    point_symplectic_tangent(g, p).1 * df * C64::new(2.0, 0.0)
}

/// The reduced system on `G × g`: `u⁻¹u̇ = 2(r₂K − 1)ξ`, `ξ̇ = 2[r₂Kξ, ξ]`.
pub fn xi_rhs(b: &QuasiBialgebra, xi: &CVec) -> (CVec, CVec) {
    let r2k = b.r2() * &b.k;
    let y = &r2k * xi;
    let omega = (&y - xi) * C64::new(2.0, 0.0);
    let xidot = b.g.bracket(&y, xi) * C64::new(2.0, 0.0);
    (omega, xidot)
}

/// RKMK4 for the reduced system. Returns `(t, u, ξ)` samples.
pub fn integrate_xi(
    b: &QuasiBialgebra,
    rep: &MatrixRep,
    u0: &Mat2,
    xi0: &CVec,
    dt: f64,
    t_end: f64,
) -> Vec<(f64, Mat2, CVec)> {
    let steps = (t_end / dt).round() as usize;
    let h = C64::new(dt, 0.0);
    let vdot = |v: &CVec, om: &CVec| {
        let b1 = b.g.bracket(v, om);
        let b2 = b.g.bracket(v, &b1);
        om + b1 * C64::new(0.5, 0.0) + b2 * C64::new(1.0 / 12.0, 0.0)
    };
    let mut out = vec![(0.0, *u0, xi0.clone())];
    let (mut u, mut xi) = (*u0, xi0.clone());
    for k in 0..steps {
        let z = CVec::zeros(xi.len());
        let ev = |v: &CVec, x: &CVec| {
            let (om, xd) = xi_rhs(b, x);
            (vdot(v, &om), xd)
        };
        let half = h * 0.5;
        let (v1, x1) = ev(&z, &xi);
        let (v2, x2) = ev(&(&v1 * half), &(&xi + &x1 * half));
        let (v3, x3) = ev(&(&v2 * half), &(&xi + &x2 * half));
        let (v4, x4) = ev(&(&v3 * h), &(&xi + &x3 * h));
        let sixth = h / 6.0;
        let v = (v1 + (v2 + v3) * C64::new(2.0, 0.0) + v4) * sixth;
        xi += (x1 + (x2 + x3) * C64::new(2.0, 0.0) + x4) * sixth;
        u = det_normalize(&(u * rep.exp(&v)));
        out.push(((k + 1) as f64 * dt, u, xi.clone()));
    }
    out
}

/// `h(t) = ½ω (sinh ωt + (2h₀/ω) cosh ωt)/(cosh ωt + (2h₀/ω) sinh ωt)`; complex
/// `ω` covers the oscillating branch.
pub fn riccati_h(h0: C64, omega: C64, t: f64) -> C64 {
    if omega.norm() < 1e-12 {
        return h0 / (h0 * 2.0 * t + 1.0);
    }
    let wt = omega * t;
    let c = h0 * 2.0 / omega;
    omega * 0.5 * (wt.sinh() + c * wt.cosh()) / (wt.cosh() + c * wt.sinh())
}

/// `ω` from `ω² = 4(h² + xy)`.
pub fn riccati_omega(h: C64, x: C64, y: C64) -> C64 {
    ((h * h + x * y) * 4.0).sqrt()
}

/// Closed-form pure-quasitriangular `sl₂(ℝ)` particle in the basis
/// `(φ, ψ₊, ψ₋)` of `m` and `(H, X₊, X₋)` of `g`. With `p(0) = 2ωφ + x ψ₋ + x̄ ψ₊`:
/// `p(t) = 2ωφ + e^{σωt} x ψ₋ + e^{−σωt} x̄ ψ₊`, `u(t) = u(0) e^{−½ωtH}`.
/// `sigma = +1` solves the flow as implemented; `sigma = −1` is the
/// alternative sign.
pub fn pure_qt_sl2_solution(u0: &Mat2, omega: f64, x0: f64, xbar0: f64, t: f64, sigma: f64) -> (Mat2, CVec) {
    let p = CVec::from_column_slice(&[
        C64::new(2.0 * omega, 0.0),
        C64::new((-sigma * omega * t).exp() * xbar0, 0.0),
        C64::new((sigma * omega * t).exp() * x0, 0.0),
    ]);
    let hgen = Mat2::new(C64::new(-0.5 * omega * t, 0.0), ZERO, ZERO, C64::new(0.5 * omega * t, 0.0));
    (u0 * exp2(&hgen), p)
}

/// `u(t) = u(0) exp(−t K⁻¹ p̄)` for the principal limit.
pub fn principal_solution(b: &QuasiBialgebra, rep: &MatrixRep, u0: &Mat2, pbar: &CVec, t: f64) -> Mat2 {
    u0 * rep.exp(&(&b.kinv * pbar * C64::new(-t, 0.0)))
}

/// `k = u e^{px} a` at a point `x`, in a realization of the double.
pub fn rebuild_k(u: &Mat2, p_mat: &Mat2, a: &Mat2, x: f64) -> Mat2 {
    u * exp2(&(p_mat * C64::new(x, 0.0))) * a
}

/// `s_x s⁻¹` at `x = 0` from `s(x)` samples by central differences.
pub fn momentum_from_s(s_plus: &Mat2, s_minus: &Mat2, s0: &Mat2, h: f64) -> Option<Mat2> {
    Some((s_plus - s_minus) / C64::new(2.0 * h, 0.0) * inv2(s0)?)
}
