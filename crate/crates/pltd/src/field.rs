//! Method-of-lines evolution of loops `k: [0, π] → SL(2, ℂ)` under the
//! first-order flow `k̇k⁻¹ = (π₋ − π₊)(k_x k⁻¹)`, with the two factorized
//! descriptions `k = us` and `k = tv` used as diagnostics.
//!
//! The double is realized as `sl₂(ℂ)` over the reals (see [`Sl2cDouble`]);
//! splittings must be real in that basis, which is why presets are taken
//! in their real normalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::duality::{pairv, DualityError, GraphCoordinate, Splitting, GRAPH_COND};
use crate::group::{det_normalize, exp2, factorize_gm, factorize_mg, inv2, max_abs2, GroupElement, GroupError, GroupTag, Mat2, Sl2cDouble};
use crate::lie::{checked_inverse, max_abs_vec, max_imag, CMat, CVec, C64};
use crate::zoo::{ModelPreset, ZooError};

pub const DEFAULT_CFL: f64 = 0.5;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Zoo(#[from] ZooError),
    #[error("splitting is not real in the sl2(C) realization (imaginary part {0:.3e})")]
    NotReal(f64),
    #[error("double does not match the sl2(C) realization (residual {0:.3e})")]
    Realization(f64),
    #[error("grid size {0} not allowed: need N >= 8, and N even unless periodic")]
    Grid(usize),
    #[error("expected {expected} grid values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("boundary data incompatible: {0}")]
    Boundary(String),
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `k_x = 0` and `k̇ = 0` at both ends: end values are frozen.
    DoubleNeumann,
    Periodic,
    /// One-sided stencils at the ends and no boundary condition; meant for
    /// data that is an exact global solution (pointlike runs).
    Free,
}

impl std::str::FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "double-neumann" => Ok(Boundary::DoubleNeumann),
            "periodic" => Ok(Boundary::Periodic),
            "free" => Ok(Boundary::Free),
            _ => Err(format!("unknown boundary condition '{s}'")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoopState {
    pub k: Vec<Mat2>,
    pub time: f64,
}

/// Factorized data at one node.
#[derive(Clone, Debug)]
pub struct NodeData {
    pub u: Mat2,
    pub s: Mat2,
    /// `u⁻¹u_x` in g.
    pub xi: CVec,
    /// `s_x s⁻¹` in m.
    pub phi: CVec,
    pub gc: GraphCoordinate,
    /// `u⁻¹u̇` from the constant-time-line reconstruction.
    pub u_dot: Option<CVec>,
}

/// Dual factorized data at one node.
#[derive(Clone, Debug)]
pub struct DualNodeData {
    pub t: Mat2,
    pub v: Mat2,
    /// `t⁻¹t_x` in m.
    pub eta: CVec,
    /// `v_x v⁻¹` in g.
    pub chi: CVec,
    pub gc: GraphCoordinate,
    pub t_dot: Option<CVec>,
}

/// Values that can be differentiated on the grid.
pub trait GridValue: Clone + std::ops::Add<Output = Self> {
    fn scaled(&self, c: f64) -> Self;
}

impl GridValue for Mat2 {
    fn scaled(&self, c: f64) -> Self {
        self * C64::new(c, 0.0)
    }
}

impl GridValue for CVec {
    fn scaled(&self, c: f64) -> Self {
        self * C64::new(c, 0.0)
    }
}

/// `W₊, W₋` at each node of one time level, `None` where graphs blow up.
type Currents = Vec<Option<(CVec, CVec)>>;

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    /// Max over applicable nodes; NaN if no node applies.
    pub value: f64,
    pub not_applicable: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldDiagnostics {
    pub time: f64,
    pub hamiltonian: f64,
    pub eom_residual_g: f64,
    pub eom_residual_dual: f64,
    pub duality_gap: f64,
    pub i_delta: Vec<f64>,
    pub f_d: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldRun {
    pub rows: Vec<FieldDiagnostics>,
    pub warnings: Vec<String>,
    /// Why the run stopped early, if it did.
    pub truncated: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Field {
    pub split: Splitting,
    pub dbl: Sl2cDouble,
    pub boundary: Boundary,
    /// Number of intervals; the grid spacing is `π/N`.
    pub n: usize,
    /// `π₋ − π₊` with real entries.
    evol: CMat,
}

impl Field {
    /// Checks that `split` is the double realized by [`Sl2cDouble`] and real there.
    pub fn new(split: Splitting, n: usize, boundary: Boundary) -> Result<Self, FieldError> {
        if n < 8 || (boundary != Boundary::Periodic && n % 2 == 1) {
            return Err(FieldError::Grid(n));
        }
        let dbl = Sl2cDouble::new();
        let im = max_imag(&split.pi_plus);
        if im > 1e-12 {
            return Err(FieldError::NotReal(im));
        }
        let res = realization_residual(&split, &dbl);
        if res > 1e-12 {
            return Err(FieldError::Realization(res));
        }
        let evol = (&split.pi_minus - &split.pi_plus).map(|z| C64::new(z.re, 0.0));
        Ok(Field { split, dbl, boundary, n, evol })
    }

    /// Builds the field for the real normalization of `preset`.
    pub fn from_preset(preset: &ModelPreset, n: usize, boundary: Boundary) -> Result<Self, FieldError> {
        Self::new(Splitting::new(&preset.real_variant()?)?, n, boundary)
    }

    pub fn dx(&self) -> f64 {
        std::f64::consts::PI / self.n as f64
    }

    pub fn nodes(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n,
            _ => self.n + 1,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.nodes()).map(|j| j as f64 * self.dx()).collect()
    }

    pub fn cfl_ok(&self, dt: f64) -> bool {
        dt <= DEFAULT_CFL * self.dx() * (1.0 + 1e-12)
    }

    fn check_len(&self, len: usize) -> Result<(), FieldError> {
        if len != self.nodes() {
            return Err(FieldError::Length { expected: self.nodes(), got: len });
        }
        Ok(())
    }

    /// `k = u s` at each node.
    pub fn init_from_us(&self, u: &[Mat2], s: &[Mat2]) -> Result<LoopState, FieldError> {
        self.check_len(u.len())?;
        self.check_len(s.len())?;
        let mut k = Vec::with_capacity(u.len());
        for (uj, sj) in u.iter().zip(s) {
            GroupElement::new(GroupTag::Su2, *uj)?;
            GroupElement::new(GroupTag::Su2Star, *sj)?;
            k.push(det_normalize(&(uj * sj)));
        }
        Ok(LoopState { k, time: 0.0 })
    }

    /// `k(x) = u₀ exp(p x)`: constant `u`, constant `s_x s⁻¹ = p`.
    pub fn init_pointlike(&self, u0: &Mat2, p: &CVec) -> Result<LoopState, FieldError> {
        if self.boundary == Boundary::DoubleNeumann && max_abs_vec(p) > 0.0 {
            return Err(FieldError::Boundary("pointlike data has k_x ≠ 0 at the ends".into()));
        }
        let pm = self.dbl.to_matrix(&self.split.double.embed_m(p));
        let k = self.grid().iter().map(|x| det_normalize(&(u0 * exp2(&(pm * C64::new(*x, 0.0)))))).collect();
        Ok(LoopState { k, time: 0.0 })
    }

    /// `k(x) = exp(a(x))` with `a` in double coordinates.
    pub fn init_from_algebra(&self, a: impl Fn(f64) -> CVec) -> LoopState {
        let k = self.grid().iter().map(|&x| det_normalize(&exp2(&self.dbl.to_matrix(&a(x))))).collect();
        LoopState { k, time: 0.0 }
    }

    /// Solves `k_x = W(x) k`, `k(0) = e`, with `substeps` Lie RK4 steps per cell.
    pub fn init_from_current(&self, w: impl Fn(f64) -> CVec, substeps: usize) -> LoopState {
        let m = substeps.max(1);
        let h = self.dx() / m as f64;
        let wm = |x: f64| self.dbl.to_matrix(&w(x));
        let mut k = Mat2::identity();
        let mut out = Vec::with_capacity(self.nodes());
        out.push(k);
        for j in 0..self.nodes() - 1 {
            for i in 0..m {
                let x = j as f64 * self.dx() + i as f64 * h;
                k = lie_rk4(&k, h, |y| wm(x + y));
            }
            out.push(det_normalize(&k));
        }
        LoopState { k: out, time: 0.0 }
    }

    /// Two smooth simple waves: a right-moving pulse in `ℰ₊` on
    /// `[0.05, π − 1.05]` and a left-moving pulse in `ℰ₋` on `[1.05, π − 0.05]`,
    /// so no outgoing wave reaches a frozen end before `t = 1`.
    /// `cp`, `cm` weight the basis of `ℰ₊` and `ℰ₋`.
    pub fn two_wave(&self, amp: f64, cp: [f64; 3], cm: [f64; 3]) -> LoopState {
        let pi = std::f64::consts::PI;
        let vp = combine(&self.split.basis_plus, &cp);
        let vm = combine(&self.split.basis_minus, &cm);
        self.init_from_current(
            |x| &vp * C64::new(amp * pulse(x, 0.05, pi - 1.05), 0.0) + &vm * C64::new(amp * pulse(x, 1.05, pi - 0.05), 0.0),
            16,
        )
    }

    /// `k = exp(Σ (a_i sin 2x + b_i cos 2x) B_i)` over the basis of the double,
    /// coefficients uniform in `[−amp, amp]` from ChaCha8 seeded with `seed`.
    /// Smooth and π-periodic.
    pub fn random_periodic(&self, amp: f64, seed: u64) -> LoopState {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..6).map(|_| r.random_range(-amp..=amp)).collect();
        let b: Vec<f64> = (0..6).map(|_| r.random_range(-amp..=amp)).collect();
        self.init_from_algebra(|x| {
            CVec::from_iterator(6, (0..6).map(|i| C64::new(a[i] * (2.0 * x).sin() + b[i] * (2.0 * x).cos(), 0.0)))
        })
    }

    /// 4th-order first derivative of grid data.
    pub fn derivative<T>(&self, f: &[T]) -> Vec<T>
    where
        T: GridValue,
    {
        let n = f.len();
        let h = 1.0 / (12.0 * self.dx());
        let comb = |terms: &[(usize, f64)]| -> T {
            let mut acc = f[terms[0].0].scaled(terms[0].1 * h);
            for &(i, c) in &terms[1..] {
                acc = acc + f[i].scaled(c * h);
            }
            acc
        };
        (0..n)
            .map(|j| {
                if self.boundary == Boundary::Periodic {
                    let w = |o: isize| ((j as isize + o).rem_euclid(n as isize)) as usize;
                    comb(&[(w(-2), 1.0), (w(-1), -8.0), (w(1), 8.0), (w(2), -1.0)])
                } else if j == 0 {
                    comb(&[(0, -25.0), (1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)])
                } else if j == 1 {
                    comb(&[(0, -3.0), (1, -10.0), (2, 18.0), (3, -6.0), (4, 1.0)])
                } else if j == n - 1 {
                    comb(&[(n - 1, 25.0), (n - 2, -48.0), (n - 3, 36.0), (n - 4, -16.0), (n - 5, 3.0)])
                } else if j == n - 2 {
                    comb(&[(n - 1, 3.0), (n - 2, 10.0), (n - 3, -18.0), (n - 4, 6.0), (n - 5, -1.0)])
                } else {
                    comb(&[(j - 2, 1.0), (j - 1, -8.0), (j + 1, 8.0), (j + 2, -1.0)])
                }
            })
            .collect()
    }

    /// 2nd-order central differences, one-sided 2nd order at open ends.
    fn derivative2<T>(&self, f: &[T]) -> Vec<T>
    where
        T: GridValue,
    {
        let n = f.len();
        let h = 1.0 / (2.0 * self.dx());
        (0..n)
            .map(|j| {
                if self.boundary == Boundary::Periodic {
                    f[(j + 1) % n].scaled(h) + f[(j + n - 1) % n].scaled(-h)
                } else if j == 0 {
                    f[0].scaled(-3.0 * h) + f[1].scaled(4.0 * h) + f[2].scaled(-h)
                } else if j == n - 1 {
                    f[n - 1].scaled(3.0 * h) + f[n - 2].scaled(-4.0 * h) + f[n - 3].scaled(h)
                } else {
                    f[j + 1].scaled(h) + f[j - 1].scaled(-h)
                }
            })
            .collect()
    }

    /// Composite Simpson (open ends) or the trapezoid sum (periodic).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let h = self.dx();
        match self.boundary {
            Boundary::Periodic => f.iter().sum::<f64>() * h,
            _ => {
                let n = f.len() - 1;
                let mut s = f[0] + f[n];
                for (j, v) in f.iter().enumerate().take(n).skip(1) {
                    s += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                s * h / 3.0
            }
        }
    }

    /// Coordinates of `k_x k⁻¹` in the double at each node.
    pub fn right_currents(&self, state: &LoopState) -> Vec<CVec> {
        let kx = self.derivative(&state.k);
        kx.iter()
            .zip(&state.k)
            .map(|(d, k)| self.dbl.coords(&(d * inv2(k).expect("SL(2,C) element"))))
            .collect()
    }

    /// `k̇k⁻¹ = (π₋ − π₊)(k_x k⁻¹)` as matrices, zero at frozen ends.
    pub fn velocity(&self, k: &[Mat2]) -> Vec<Mat2> {
        let state = LoopState { k: k.to_vec(), time: 0.0 };
        let mut a: Vec<Mat2> = self
            .right_currents(&state)
            .iter()
            .map(|w| self.dbl.to_matrix(&(&self.evol * w)))
            .collect();
        if self.boundary == Boundary::DoubleNeumann {
            let last = a.len() - 1;
            a[0] = Mat2::zeros();
            a[last] = Mat2::zeros();
        }
        a
    }

    /// One right-trivialized Munthe-Kaas RK4 step, `k ← exp(Ω)k`, followed by
    /// det-normalization.
    pub fn step(&self, state: &LoopState, dt: f64) -> Result<LoopState, FieldError> {
        if dt.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(FieldError::BadStep(dt));
        }
        let k0 = &state.k;
        let c = |x: f64| C64::new(x, 0.0);
        let shifted = |om: &[Mat2]| -> Vec<Mat2> { om.iter().zip(k0).map(|(o, k)| exp2(o) * k).collect() };
        let k1 = self.velocity(k0);
        let om2: Vec<Mat2> = k1.iter().map(|a| a * c(0.5 * dt)).collect();
        let k2: Vec<Mat2> =
            self.velocity(&shifted(&om2)).iter().zip(&om2).map(|(a, o)| dexpinv(o, a)).collect();
        let om3: Vec<Mat2> = k2.iter().map(|a| a * c(0.5 * dt)).collect();
        let k3: Vec<Mat2> =
            self.velocity(&shifted(&om3)).iter().zip(&om3).map(|(a, o)| dexpinv(o, a)).collect();
        let om4: Vec<Mat2> = k3.iter().map(|a| a * c(dt)).collect();
        let k4: Vec<Mat2> =
            self.velocity(&shifted(&om4)).iter().zip(&om4).map(|(a, o)| dexpinv(o, a)).collect();
        let mut k = Vec::with_capacity(k0.len());
        for j in 0..k0.len() {
            let om = (k1[j] + (k2[j] + k3[j]) * c(2.0) + k4[j]) * c(dt / 6.0);
            k.push(det_normalize(&(exp2(&om) * k0[j])));
        }
        let time = state.time + dt;
        if k.iter().any(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(FieldError::NonFinite(time));
        }
        Ok(LoopState { k, time })
    }

    /// Right multiplication by `s(0)⁻¹`, so that `s(0) = e`.
    pub fn gauge_fixed(&self, state: &LoopState) -> Result<LoopState, FieldError> {
        let (_, s0) = factorize_gm(&state.k[0])?;
        let si = inv2(&s0).ok_or(GroupError::Singular)?;
        Ok(LoopState { k: state.k.iter().map(|k| k * si).collect(), time: state.time })
    }

    fn ad_g(&self, u: &Mat2) -> CMat {
        self.dbl.ad(u).view((0, 0), (3, 3)).into_owned()
    }

    /// Factorization `k = us` at each node with the reconstructed `u⁻¹u̇`.
    /// `u⁻¹u_x ⊕ s_x s⁻¹ = Ad_{u⁻¹}(k_x k⁻¹)`, so both pieces come from the
    /// one discrete current.
    pub fn factorized(&self, state: &LoopState) -> Result<Vec<NodeData>, FieldError> {
        let w = self.right_currents(state);
        let mut out = Vec::with_capacity(w.len());
        for (k, wj) in state.k.iter().zip(&w) {
            let (u, s) = factorize_gm(k)?;
            let (xi, phi) = self.split.double.split(&(self.dbl.ad(&u.adjoint()) * wj));
            let gc = self.split.graph_at(&self.ad_g(&u));
            let u_dot = self.split.reconstruct_u_dot(&gc, &xi, &phi);
            out.push(NodeData { u, s, xi, phi, gc, u_dot });
        }
        Ok(out)
    }

    /// Factorization `k = tv` at each node with the reconstructed `t⁻¹ṫ`,
    /// from `t⁻¹t_x ⊕ v_x v⁻¹ = Ad_{t⁻¹}(k_x k⁻¹)`.
    pub fn dual_factorized(&self, state: &LoopState) -> Result<Vec<DualNodeData>, FieldError> {
        let w = self.right_currents(state);
        let mut out = Vec::with_capacity(w.len());
        for (k, wj) in state.k.iter().zip(&w) {
            let (t, v) = factorize_mg(k)?;
            let ti = inv2(&t).ok_or(GroupError::Singular)?;
            let ad_ti = self.dbl.ad(&ti);
            let (chi, eta) = self.split.double.split(&(&ad_ti * wj));
            let gc = self.split.dual_graph_at(&ad_ti)?;
            let t_dot = reconstruct_dual(&gc, &eta, &chi);
            out.push(DualNodeData { t, v, eta, chi, gc, t_dot });
        }
        Ok(out)
    }

    /// `𝓗 = ¼⟨(π₊ − π₋)W, W⟩` with `W = k_x k⁻¹` at each node.
    pub fn hamiltonian_density(&self, state: &LoopState) -> Vec<f64> {
        self.right_currents(state).iter().map(|w| self.split.hamiltonian_density(w).re).collect()
    }

    pub fn hamiltonian(&self, state: &LoopState) -> f64 {
        self.integrate(&self.hamiltonian_density(state))
    }

    /// Max over nodes of `|𝓗(u, s) − 𝓗(t, v)|` plus `‖us − tv‖`.
    pub fn duality_check(&self, state: &LoopState) -> Result<f64, FieldError> {
        let prim = self.factorized(state)?;
        let dual = self.dual_factorized(state)?;
        let mut dh: f64 = 0.0;
        let mut dk: f64 = 0.0;
        for (p, d) in prim.iter().zip(&dual) {
            let hp = self.split.hamiltonian_density_us(&p.gc, &p.xi, &p.phi);
            let hd = self.dual_hamiltonian_density(d);
            dh = dh.max((hp - hd).norm());
            dk = dk.max(max_abs2(&(p.u * p.s - d.t * d.v)));
        }
        Ok(dh + dk)
    }

    /// `4𝓗 = ⟨(π̂₊ − π̂₋)(t⁻¹t_x + v_x v⁻¹), ·⟩` with the dual projectors at `t`.
    pub fn dual_hamiltonian_density(&self, d: &DualNodeData) -> C64 {
        let w = self.split.double.embed_g(&d.chi) + self.split.double.embed_m(&d.eta);
        let (p, q) = self.split.dual_projectors_at(&d.gc);
        self.split.double.pair(&((p - q) * &w), &w) * 0.25
    }

    /// `(W₊, W₋) = (T_u(u⁻¹u₊), E_u(u⁻¹u₋))` with `u± = ½(u̇ ± u_x)`.
    pub fn currents_g(&self, nodes: &[NodeData]) -> Currents {
        nodes
            .iter()
            .map(|nd| {
                let (e, t) = (nd.gc.e.as_ref()?, nd.gc.t.as_ref()?);
                let ud = nd.u_dot.as_ref()?;
                let plus = (ud + &nd.xi) * C64::new(0.5, 0.0);
                let minus = (ud - &nd.xi) * C64::new(0.5, 0.0);
                Some((t * plus, e * minus))
            })
            .collect()
    }

    /// `(Ŵ₊, Ŵ₋) = (T̂_t(t⁻¹t₊), Ê_t(t⁻¹t₋))`.
    pub fn currents_dual(&self, nodes: &[DualNodeData]) -> Currents {
        nodes
            .iter()
            .map(|nd| {
                let (e, t) = (nd.gc.e.as_ref()?, nd.gc.t.as_ref()?);
                let td = nd.t_dot.as_ref()?;
                let plus = (td + &nd.eta) * C64::new(0.5, 0.0);
                let minus = (td - &nd.eta) * C64::new(0.5, 0.0);
                Some((t * plus, e * minus))
            })
            .collect()
    }

    /// Residual of `∂₋W₊ − ∂₊W₋ = [W₋, W₊]`, i.e.
    /// `½∂_t(W₊ − W₋) − ½∂_x(W₊ + W₋) − [W₋, W₊]`, centred between two time
    /// levels. `in_m` selects whether the currents live in m or in g.
    pub fn zero_curvature_residual(&self, c0: &Currents, c1: &Currents, dt: f64, in_m: bool) -> Residual {
        let embed = |x: &CVec| {
            if in_m {
                self.split.double.embed_m(x)
            } else {
                self.split.double.embed_g(x)
            }
        };
        let mat = |x: &CVec| self.dbl.to_matrix(&embed(x));
        let sum_x = |c: &Currents| -> Option<Vec<Mat2>> {
            let v: Option<Vec<Mat2>> = c.iter().map(|w| w.as_ref().map(|(p, m)| mat(&(p + m)))).collect();
            v.map(|v| self.derivative2(&v))
        };
        // spatial derivative only where the whole level is defined
        let (dx0, dx1) = (sum_x(c0), sum_x(c1));
        let n = c0.len();
        let (lo, hi) = match self.boundary {
            Boundary::Periodic => (0, n),
            _ => (1, n - 1),
        };
        let mut worst: f64 = f64::NAN;
        let mut na = 0;
        for j in lo..hi {
            let (Some((p0, m0)), Some((p1, m1)), Some(d0), Some(d1)) = (&c0[j], &c1[j], &dx0, &dx1) else {
                na += 1;
                continue;
            };
            let (p0, m0, p1, m1) = (mat(p0), mat(m0), mat(p1), mat(m1));
            let dt_term = ((p1 - m1) - (p0 - m0)) * C64::new(0.5 / dt, 0.0);
            let dx_term = (d0[j] + d1[j]) * C64::new(0.25, 0.0);
            let br = ((m0 * p0 - p0 * m0) + (m1 * p1 - p1 * m1)) * C64::new(0.5, 0.0);
            let r = max_abs2(&(dt_term - dx_term - br));
            worst = if worst.is_nan() { r } else { worst.max(r) };
        }
        Residual { value: worst, not_applicable: na }
    }

    /// Residuals of the G-model and dual-model equations between two levels.
    pub fn eom_residuals(&self, s0: &LoopState, s1: &LoopState) -> Result<(Residual, Residual), FieldError> {
        let dt = s1.time - s0.time;
        let g0 = self.currents_g(&self.factorized(s0)?);
        let g1 = self.currents_g(&self.factorized(s1)?);
        let d0 = self.currents_dual(&self.dual_factorized(s0)?);
        let d1 = self.currents_dual(&self.dual_factorized(s1)?);
        Ok((self.zero_curvature_residual(&g0, &g1, dt, true), self.zero_curvature_residual(&d0, &d1, dt, false)))
    }

    /// `I_δ = −½∫⟨k_x k⁻¹, δ⟩`.
    pub fn moment_map(&self, state: &LoopState, delta: &CVec) -> f64 {
        let f: Vec<f64> =
            self.right_currents(state).iter().map(|w| -0.5 * self.split.double.pair(w, delta).re).collect();
        self.integrate(&f)
    }

    /// `f_v = −½∫⟨k_x k⁻¹, v⟩` and `f_d = −¼∫⟨k_x k⁻¹, k_x k⁻¹⟩`.
    pub fn loop_functions(&self, state: &LoopState, v: &[CVec]) -> Result<(f64, f64), FieldError> {
        self.check_len(v.len())?;
        if self.boundary != Boundary::Periodic {
            let edge = max_abs_vec(&v[0]).max(max_abs_vec(&v[v.len() - 1]));
            if edge > 1e-12 {
                return Err(FieldError::Boundary(format!("v must vanish at the end points (|v| = {edge:.3e})")));
            }
        }
        let w = self.right_currents(state);
        let fv: Vec<f64> = w.iter().zip(v).map(|(w, v)| -0.5 * self.split.double.pair(w, v).re).collect();
        Ok((self.integrate(&fv), self.f_d(state)))
    }

    pub fn f_d(&self, state: &LoopState) -> f64 {
        let f: Vec<f64> =
            self.right_currents(state).iter().map(|w| -0.25 * self.split.double.pair(w, w).re).collect();
        self.integrate(&f)
    }

    /// `2ω(k; k_z, k_y) = ∫⟨(k⁻¹k_y)_x, k⁻¹k_z⟩ − [⟨s_z s⁻¹, u⁻¹u_y⟩]₀^π`
    /// for left-trivialized variations `η = k⁻¹δk`, skew-symmetrized.
    /// Returns `ω(k; k_z, k_y)`.
    pub fn symplectic_form(&self, state: &LoopState, eta_z: &[CVec], eta_y: &[CVec]) -> Result<f64, FieldError> {
        self.check_len(eta_z.len())?;
        self.check_len(eta_y.len())?;
        let ss: Vec<Mat2> = if self.boundary == Boundary::Periodic {
            Vec::new()
        } else {
            let first = factorize_gm(&state.k[0])?.1;
            let last = factorize_gm(&state.k[state.k.len() - 1])?.1;
            vec![first, last]
        };
        let raw = |z: &[CVec], y: &[CVec]| -> f64 {
            let yx = self.derivative(y);
            let f: Vec<f64> = yx.iter().zip(z).map(|(a, b)| self.split.double.pair(a, b).re).collect();
            let mut v = self.integrate(&f);
            if !ss.is_empty() {
                let end = |s: &Mat2, zj: &CVec, yj: &CVec| -> f64 {
                    let ad = self.dbl.ad(s);
                    let (_, mz) = self.split.double.split(&(&ad * zj));
                    let (gy, _) = self.split.double.split(&(&ad * yj));
                    pairv(&mz, &gy).re
                };
                let last = z.len() - 1;
                v -= end(&ss[1], &z[last], &y[last]) - end(&ss[0], &z[0], &y[0]);
            }
            v
        };
        Ok(0.25 * (raw(eta_z, eta_y) - raw(eta_y, eta_z)))
    }

    /// `k⁻¹k̇` in double coordinates at each node.
    pub fn velocity_left(&self, state: &LoopState) -> Vec<CVec> {
        self.velocity(&state.k)
            .iter()
            .zip(&state.k)
            .map(|(a, k)| self.dbl.coords(&(inv2(k).expect("SL(2,C) element") * a * k)))
            .collect()
    }

    /// Evolves to `t_end`, recording diagnostics each `sample_every` steps.
    /// The EOM residual in a row uses the step ending at that row (the first
    /// row reuses the first step).
    pub fn run(
        &self,
        state0: &LoopState,
        dt: f64,
        t_end: f64,
        deltas: &[CVec],
        sample_every: usize,
    ) -> Result<(FieldRun, LoopState), FieldError> {
        if dt.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(FieldError::BadStep(dt));
        }
        let mut warnings = Vec::new();
        if !self.cfl_ok(dt) {
            warnings.push(format!("dt = {dt} exceeds CFL {DEFAULT_CFL} · dx = {}", DEFAULT_CFL * self.dx()));
        }
        let steps = (t_end / dt).round() as usize;
        let every = sample_every.max(1);
        let mut rows = Vec::new();
        let mut truncated = None;
        let mut prev = state0.clone();
        let diag = |s: &LoopState, res: (f64, f64)| -> Result<FieldDiagnostics, FieldError> {
            Ok(FieldDiagnostics {
                time: s.time,
                hamiltonian: self.hamiltonian(s),
                eom_residual_g: res.0,
                eom_residual_dual: res.1,
                duality_gap: self.duality_check(s)?,
                i_delta: deltas.iter().map(|d| self.moment_map(s, d)).collect(),
                f_d: self.f_d(s),
            })
        };
        for i in 1..=steps {
            let next = match self.step(&prev, dt) {
                Ok(s) => s,
                Err(e) => {
                    truncated = Some(e.to_string());
                    break;
                }
            };
            let res = match self.eom_residuals(&prev, &next) {
                Ok((g, d)) => (g.value, d.value),
                Err(e) => {
                    truncated = Some(e.to_string());
                    break;
                }
            };
            if i == 1 {
                rows.push(diag(&prev, res)?);
            }
            if i % every == 0 || i == steps {
                rows.push(diag(&next, res)?);
            }
            prev = next;
        }
        Ok((FieldRun { rows, warnings, truncated }, prev))
    }
}

/// `cos⁶` pulse supported on `[a, b]`, peak 1 at the midpoint.
pub fn pulse(x: f64, a: f64, b: f64) -> f64 {
    let y = (2.0 * x - a - b) / (b - a);
    if y.abs() >= 1.0 {
        0.0
    } else {
        (std::f64::consts::FRAC_PI_2 * y).cos().powi(6)
    }
}

fn combine(basis: &CMat, c: &[f64; 3]) -> CVec {
    basis.column(0) * C64::new(c[0], 0.0) + basis.column(1) * C64::new(c[1], 0.0) + basis.column(2) * C64::new(c[2], 0.0)
}

/// `A − ½[Ω, A] + 1/12[Ω, [Ω, A]]`.
fn dexpinv(om: &Mat2, a: &Mat2) -> Mat2 {
    let b = om * a - a * om;
    a - b * C64::new(0.5, 0.0) + (om * b - b * om) * C64::new(1.0 / 12.0, 0.0)
}

/// One Lie RK4 step of `k' = A(y) k` for an explicit generator `A`.
fn lie_rk4(k: &Mat2, h: f64, a: impl Fn(f64) -> Mat2) -> Mat2 {
    let c = |x: f64| C64::new(x, 0.0);
    let k1 = a(0.0);
    let o2 = k1 * c(0.5 * h);
    let k2 = dexpinv(&o2, &a(0.5 * h));
    let o3 = k2 * c(0.5 * h);
    let k3 = dexpinv(&o3, &a(0.5 * h));
    let o4 = k3 * c(h);
    let k4 = dexpinv(&o4, &a(h));
    exp2(&((k1 + (k2 + k3) * c(2.0) + k4) * c(h / 6.0))) * k
}

/// `t⁻¹ṫ = (T̂ − Ê)⁻¹(2 v_x v⁻¹ − (T̂ + Ê) t⁻¹t_x)`.
fn reconstruct_dual(gc: &GraphCoordinate, eta: &CVec, chi: &CVec) -> Option<CVec> {
    let (e, t) = (gc.e.as_ref()?, gc.t.as_ref()?);
    let tm = checked_inverse(&(t - e), GRAPH_COND)?;
    Some(tm * (chi * C64::new(2.0, 0.0) - (t + e) * eta))
}

/// Max over basis pairs of the mismatch between the double's brackets and
/// pairing and the matrix commutator and pairing of [`Sl2cDouble`].
pub fn realization_residual(split: &Splitting, dbl: &Sl2cDouble) -> f64 {
    let d = &split.double;
    if d.n != 3 {
        return f64::INFINITY;
    }
    let mut r: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let (a, b) = (&dbl.basis[i], &dbl.basis[j]);
            let comm = dbl.coords(&(a * b - b * a));
            let mut ei = CVec::zeros(6);
            ei[i] = C64::new(1.0, 0.0);
            let mut ej = CVec::zeros(6);
            ej[j] = C64::new(1.0, 0.0);
            r = r.max(max_abs_vec(&(d.bracket(&ei, &ej) - comm)));
            r = r.max((d.pair(&ei, &ej) - C64::new(Sl2cDouble::pairing(a, b), 0.0)).norm());
        }
    }
    r
}

/// Max deviation over nodes of `t ▷ v` and of `t_x t⁻¹ + t v_x v⁻¹ t⁻¹`
/// from their values at the first node.
pub fn dual_constancy(field: &Field, nodes: &[DualNodeData]) -> Result<(f64, f64), FieldError> {
    let mut act = Vec::with_capacity(nodes.len());
    let mut cur = Vec::with_capacity(nodes.len());
    for nd in nodes {
        act.push(crate::group::act_m_on_g(&nd.t, &nd.v)?);
        let t_mat = |x: &CVec| field.dbl.to_matrix(&field.split.double.embed_m(x));
        let v_mat = field.dbl.to_matrix(&field.split.double.embed_g(&nd.chi));
        let ti = inv2(&nd.t).ok_or(GroupError::Singular)?;
        cur.push(nd.t * t_mat(&nd.eta) * ti + nd.t * v_mat * ti);
    }
    let da = act.iter().map(|a| max_abs2(&(a - act[0]))).fold(0.0, f64::max);
    let dc = cur.iter().map(|c| max_abs2(&(c - cur[0]))).fold(0.0, f64::max);
    Ok((da, dc))
}

/// Sup-norm distance between two loops.
pub fn loop_distance(a: &LoopState, b: &LoopState) -> f64 {
    a.k.iter().zip(&b.k).map(|(x, y)| max_abs2(&(x - y))).fold(0.0, f64::max)
}
