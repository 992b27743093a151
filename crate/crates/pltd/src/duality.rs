//! The `(λ, μ)` splittings `d = ℰ₊ ⊕ ℰ₋`, graph coordinates at `u ∈ G`
//! and `t ∈ M`, and the Lagrangian and Hamiltonian densities of the two
//! mutually dual sigma models.
//!
//! Operators `m → g` such as `E_u⁻¹` are stored as their tensor matrices;
//! `E_u: g → m` is the matrix inverse.

use thiserror::Error;

use crate::bialgebra::{BialgebraError, DoubleAlgebra, QuasiBialgebra};
use crate::lie::{
    checked_inverse, condition_number, eps, max_abs, smallest_singular_value, CMat, CVec, LieAlgebra, C64,
    ZERO,
};
use crate::zoo::{ModelPreset, Mu};

/// Condition number above which a graph coordinate counts as blown up.
pub const GRAPH_COND: f64 = 1e8;

#[derive(Debug, Error)]
pub enum DualityError {
    #[error(transparent)]
    Bialgebra(#[from] BialgebraError),
    #[error("subspaces do not span the double (smallest singular value {0:.3e})")]
    RankDrop(f64),
    #[error("graph coordinate not invertible (condition number {0:.3e})")]
    GraphBlowup(f64),
    #[error("matrix with π² = 1 has no inverse")]
    EpsSingular,
    #[error("E_e does not exist for this splitting")]
    NoBaseMetric,
}

#[derive(Clone, Debug)]
pub struct Splitting {
    pub preset: ModelPreset,
    /// `E_e⁻¹ = α R₀ + β K₀⁻¹`.
    pub alpha: C64,
    pub beta: C64,
    /// Factor multiplying the unscaled r.
    pub scale: C64,
    /// `λ·s`, the coefficient of `Ad_{u⁻¹}(R₀)` in `E_u⁻¹`.
    pub lambda_s: C64,
    pub r0: CMat,
    pub kinv0: CMat,
    /// Scaled `r = s R₀`.
    pub r: CMat,
    /// Scaled dual algebra `s·m₀`.
    pub m: LieAlgebra,
    pub g: LieAlgebra,
    pub double: DoubleAlgebra,
    pub e_inv_e: CMat,
    pub t_inv_e: CMat,
    /// Columns `E_e⁻¹φ ⊕ φ` for the basis φ.
    pub basis_plus: CMat,
    pub basis_minus: CMat,
    pub pi_plus: CMat,
    pub pi_minus: CMat,
    /// Set when `ℰ₊` and `ℰ₋` have been exchanged.
    pub flipped: bool,
}

impl Splitting {
    pub fn new(preset: &ModelPreset) -> Result<Self, DualityError> {
        let b = &preset.bialgebra;
        let (alpha, beta, scale) = preset.coefficients();
        let lambda_s = match preset.mu {
            Mu::Finite(_) => preset.lambda * scale,
            Mu::Infinite => ZERO,
        };
        let r0 = b.r.clone();
        let kinv0 = b.kinv.clone();
        let e_inv_e = &r0 * alpha + &kinv0 * beta;
        let t_inv_e = -(r0.transpose() * alpha) - &kinv0 * beta;
        let m = b.m.scaled(scale);
        let double = DoubleAlgebra::build(&b.g, &m)?;
        Self::assemble(preset.clone(), alpha, beta, scale, lambda_s, r0, kinv0, b.g.clone(), m, double, e_inv_e, t_inv_e)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        preset: ModelPreset,
        alpha: C64,
        beta: C64,
        scale: C64,
        lambda_s: C64,
        r0: CMat,
        kinv0: CMat,
        g: LieAlgebra,
        m: LieAlgebra,
        double: DoubleAlgebra,
        e_inv_e: CMat,
        t_inv_e: CMat,
    ) -> Result<Self, DualityError> {
        let n = g.dim();
        let basis_plus = graph_basis(&e_inv_e);
        let basis_minus = graph_basis(&t_inv_e);
        let mut full = CMat::zeros(2 * n, 2 * n);
        full.view_mut((0, 0), (2 * n, n)).copy_from(&basis_plus);
        full.view_mut((0, n), (2 * n, n)).copy_from(&basis_minus);
        let smin = smallest_singular_value(&full);
        let smax = full.clone().singular_values().max();
        if smin <= 1e-8 * smax.max(1.0) {
            return Err(DualityError::RankDrop(smin));
        }
        let inv = full.clone().try_inverse().ok_or(DualityError::RankDrop(smin))?;
        let mut sel = CMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            sel[(i, i)] = C64::new(1.0, 0.0);
        }
        let pi_plus = &full * sel * &inv;
        let pi_minus = CMat::identity(2 * n, 2 * n) - &pi_plus;
        let r = &r0 * scale;
        Ok(Splitting {
            preset,
            alpha,
            beta,
            scale,
            lambda_s,
            r0,
            kinv0,
            r,
            m,
            g,
            double,
            e_inv_e,
            t_inv_e,
            basis_plus,
            basis_minus,
            pi_plus,
            pi_minus,
            flipped: false,
        })
    }

    /// The same splitting with `ℰ₊` and `ℰ₋` exchanged (reverses the flow).
    pub fn flipped(&self) -> Self {
        let mut s = self.clone();
        std::mem::swap(&mut s.e_inv_e, &mut s.t_inv_e);
        std::mem::swap(&mut s.basis_plus, &mut s.basis_minus);
        std::mem::swap(&mut s.pi_plus, &mut s.pi_minus);
        s.flipped = !self.flipped;
        s
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn bialgebra(&self) -> &QuasiBialgebra {
        &self.preset.bialgebra
    }

    /// `π₊ − π₋`.
    pub fn reflection(&self) -> CMat {
        &self.pi_plus - &self.pi_minus
    }

    /// `(α + 2β)`, so that `E_e⁻¹ − T_e⁻¹ = (α + 2β) K₀⁻¹`.
    pub fn diff_coefficient(&self) -> C64 {
        let c = self.alpha + self.beta * 2.0;
        if self.flipped {
            -c
        } else {
            c
        }
    }

    /// `⟨x, y⟩` for `x ∈ ℰ₊`, `y ∈ ℰ₋`, maximized over basis pairs.
    pub fn orthogonality_residual(&self) -> f64 {
        max_abs(&(self.basis_plus.transpose() * &self.double.pairing * &self.basis_minus))
    }

    /// Idempotence, completeness, annihilation and self-adjointness of `π±`.
    pub fn projector_residual(&self) -> f64 {
        let p = &self.pi_plus;
        let q = &self.pi_minus;
        let id = CMat::identity(p.nrows(), p.ncols());
        let refl = self.reflection();
        let sa = refl.transpose() * &self.double.pairing - &self.double.pairing * &refl;
        max_abs(&(p * p - p))
            .max(max_abs(&(q * q - q)))
            .max(max_abs(&(p + q - id)))
            .max(max_abs(&(p * q)))
            .max(max_abs(&sa))
    }

    /// Matrix of `Ad_u` on the double, given `A = Ad_u` on g:
    /// `[[A, A Rᵀ − Rᵀ A⁻ᵀ], [0, A⁻ᵀ]]` with the scaled r.
    pub fn ad_double_g(&self, a: &CMat) -> CMat {
        let n = self.dim();
        let ait = a.clone().try_inverse().expect("Ad is invertible").transpose();
        let rt = self.r.transpose();
        let mut m = CMat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.view_mut((0, n), (n, n)).copy_from(&(a * &rt - &rt * &ait));
        m.view_mut((n, n), (n, n)).copy_from(&ait);
        m
    }

    /// Graph coordinates at `u`, given `A = Ad_u` on g, by the direct form
    /// `E_u⁻¹ = λs Ad_{u⁻¹}(R₀) + sR₀ + βK₀⁻¹`.
    pub fn graph_at(&self, ad_u: &CMat) -> GraphCoordinate {
        let ai = ad_u.clone().try_inverse().expect("Ad is invertible");
        let adr = &ai * &self.r0 * ai.transpose();
        let e_inv = &adr * self.lambda_s + &self.r + &self.kinv0 * self.beta;
        let t_inv = &adr * self.lambda_s + &self.r - &self.kinv0 * (self.alpha + self.beta);
        if self.flipped {
            GraphCoordinate::new(t_inv, e_inv)
        } else {
            GraphCoordinate::new(e_inv, t_inv)
        }
    }

    /// `E_u⁻¹ = Ad_{u⁻¹}(E_e⁻¹ − r) + r`.
    pub fn graph_at_general(&self, ad_u: &CMat) -> GraphCoordinate {
        let ai = ad_u.clone().try_inverse().expect("Ad is invertible");
        let tr = |x: &CMat| &ai * x * ai.transpose();
        let e_inv = tr(&(&self.e_inv_e - &self.r)) + &self.r;
        let t_inv = tr(&(&self.t_inv_e - &self.r)) + &self.r;
        GraphCoordinate::new(e_inv, t_inv)
    }

    /// `E_u⁻¹ = Ad_{u⁻¹}(E_e⁻¹) + Π^R(u)`.
    pub fn graph_at_pi(&self, ad_u: &CMat) -> GraphCoordinate {
        let ai = ad_u.clone().try_inverse().expect("Ad is invertible");
        let tr = |x: &CMat| &ai * x * ai.transpose();
        let pi_r = &self.r - tr(&self.r);
        GraphCoordinate::new(tr(&self.e_inv_e) + &pi_r, tr(&self.t_inv_e) + &pi_r)
    }

    /// Graph over m of `Ad_{u⁻¹}ℰ±`, from the double matrix `Ad_{u⁻¹}`.
    pub fn graph_from_subspaces(&self, ad_d_uinv: &CMat) -> GraphCoordinate {
        let n = self.dim();
        let over_m = |b: &CMat| {
            let v = ad_d_uinv * b;
            let x = v.view((0, 0), (n, n)).into_owned();
            let y = v.view((n, 0), (n, n)).into_owned();
            x * y.try_inverse().expect("graph over m")
        };
        GraphCoordinate::new(over_m(&self.basis_plus), over_m(&self.basis_minus))
    }

    /// `π_{u±}` from inverse graph coordinates; always defined.
    pub fn projectors_at(&self, gc: &GraphCoordinate) -> (CMat, CMat) {
        let p = graph_projector_over_m(&gc.e_inv, &gc.t_inv);
        let q = CMat::identity(p.nrows(), p.ncols()) - &p;
        (p, q)
    }

    /// `(π_{u+} − π_{u−})` on `g` and on `m`, by the closed formulas in
    /// terms of `E_u`, `T_u`. Returns `(on ξ, on φ)` as `2n × n` blocks.
    pub fn reflection_blocks_et(&self, gc: &GraphCoordinate) -> Option<(CMat, CMat)> {
        let n = self.dim();
        let (e, t) = (gc.e.as_ref()?, gc.t.as_ref()?);
        let dinv = checked_inverse(&(e - t), GRAPH_COND)?;
        let two = C64::new(2.0, 0.0);
        // (π₊−π₋)ξ = −2E(E−T)⁻¹Tξ − (E−T)⁻¹(T+E)ξ
        let xi_m = -(e * &dinv * t) * two;
        let xi_g = -(&dinv * (t + e));
        // (π₊−π₋)φ = 2(E−T)⁻¹φ + (T+E)(E−T)⁻¹φ
        let phi_g = &dinv * two;
        let phi_m = (t + e) * &dinv;
        let mut on_xi = CMat::zeros(2 * n, n);
        on_xi.view_mut((0, 0), (n, n)).copy_from(&xi_g);
        on_xi.view_mut((n, 0), (n, n)).copy_from(&xi_m);
        let mut on_phi = CMat::zeros(2 * n, n);
        on_phi.view_mut((0, 0), (n, n)).copy_from(&phi_g);
        on_phi.view_mut((n, 0), (n, n)).copy_from(&phi_m);
        Some((on_xi, on_phi))
    }

    /// `4𝓗 = ⟨(π₊ − π₋)w, w⟩`; returns `𝓗`.
    pub fn hamiltonian_density(&self, w: &CVec) -> C64 {
        self.double.pair(&(self.reflection() * w), w) * 0.25
    }

    /// `𝓗` from factorized data `ξ = u⁻¹u_x`, `φ = s_x s⁻¹` using `π_{u±}`.
    pub fn hamiltonian_density_us(&self, gc: &GraphCoordinate, xi: &CVec, phi: &CVec) -> C64 {
        let w = self.double.embed_g(xi) + self.double.embed_m(phi);
        let (p, q) = self.projectors_at(gc);
        self.double.pair(&((p - q) * &w), &w) * 0.25
    }

    /// `u⁻¹u̇` recovered from spatial data on a constant time line:
    /// `(T_u − E_u)(u⁻¹u̇) = 2 s_x s⁻¹ − (T_u + E_u)(u⁻¹u_x)`.
    pub fn reconstruct_u_dot(&self, gc: &GraphCoordinate, xi: &CVec, phi: &CVec) -> Option<CVec> {
        let (e, t) = (gc.e.as_ref()?, gc.t.as_ref()?);
        let tm = checked_inverse(&(t - e), GRAPH_COND)?;
        Some(tm * (phi * C64::new(2.0, 0.0) - (t + e) * xi))
    }

    /// `8𝓗 = ⟨(E_u−T_u)(u⁻¹u_x), u⁻¹u_x⟩ + ⟨(E_u−T_u)(u⁻¹u̇), u⁻¹u̇⟩`; returns `𝓗`.
    pub fn hamiltonian_density_et(&self, gc: &GraphCoordinate, xi: &CVec, phi: &CVec) -> Option<C64> {
        let (e, t) = (gc.e.as_ref()?, gc.t.as_ref()?);
        let xit = self.reconstruct_u_dot(gc, xi, phi)?;
        let d = e - t;
        let v = pairv(&(&d * xi), xi) + pairv(&(&d * &xit), &xit);
        Some(v / 8.0)
    }

    /// The expanded form in terms of `E_u`, `T_u` and `s_x s⁻¹` only; returns `𝓗`.
    pub fn hamiltonian_density_ets(&self, gc: &GraphCoordinate, xi: &CVec, phi: &CVec) -> Option<C64> {
        let (e, t) = (gc.e.as_ref()?, gc.t.as_ref()?);
        let di = checked_inverse(&(e - t), GRAPH_COND)?;
        let v = -pairv(&(t * &di * e * xi), xi) - pairv(&(e * &di * t * xi), xi)
            - pairv(phi, &(&di * (t + e) * xi)) * 2.0
            + pairv(phi, &(&di * phi)) * 2.0;
        Some(v / 4.0)
    }

    /// Lagrangian density `⟨E_u(u⁻¹u₋), u⁻¹u₊⟩` and the right-invariant form
    /// `⟨Ē_u(u₋u⁻¹), u₊u⁻¹⟩` with `Ē_u⁻¹ = E_e⁻¹ + Π(u)`.
    pub fn lagrangian_g(
        &self,
        ad_u: &CMat,
        xi_plus: &CVec,
        xi_minus: &CVec,
    ) -> Result<(C64, C64), DualityError> {
        let gc = self.graph_at(ad_u);
        let e = gc.e.as_ref().ok_or(DualityError::GraphBlowup(gc.cond_e))?;
        let left = pairv(&(e * xi_minus), xi_plus);
        let pi = ad_u * &self.r * ad_u.transpose() - &self.r;
        let ebar_inv = &self.e_inv_e + pi;
        let ebar = checked_inverse(&ebar_inv, GRAPH_COND)
            .ok_or_else(|| DualityError::GraphBlowup(condition_number(&ebar_inv)))?;
        let right = pairv(&(ebar * (ad_u * xi_minus)), &(ad_u * xi_plus));
        Ok((left, right))
    }

    /// `E_e`, when the base graph is invertible.
    pub fn e_e(&self) -> Result<CMat, DualityError> {
        checked_inverse(&self.e_inv_e, GRAPH_COND).ok_or(DualityError::NoBaseMetric)
    }

    pub fn t_e(&self) -> Result<CMat, DualityError> {
        checked_inverse(&self.t_inv_e, GRAPH_COND).ok_or(DualityError::NoBaseMetric)
    }

    /// Dual graph coordinates `Ê_t⁻¹, T̂_t⁻¹: g → m` at `t ∈ M`, given the
    /// double matrix of `Ad_{t⁻¹}`:
    /// `Ê_t⁻¹ = Ad_{t⁻¹}(E_e) + Π̂^R(t)`.
    pub fn dual_graph_at(&self, ad_d_tinv: &CMat) -> Result<GraphCoordinate, DualityError> {
        let n = self.dim();
        let mt = ad_d_tinv.view((n, n), (n, n)).into_owned();
        let pir = crate::group::hat_pi_r_from_ad(ad_d_tinv);
        let e_inv = &mt * self.e_e()? * mt.transpose() + &pir;
        let t_inv = &mt * self.t_e()? * mt.transpose() + &pir;
        Ok(GraphCoordinate::new(e_inv, t_inv))
    }

    /// Dual projectors `π̂_{t±}` onto `Ad_{t⁻¹}ℰ±`, graphs over g.
    pub fn dual_projectors_at(&self, gc: &GraphCoordinate) -> (CMat, CMat) {
        let n = self.dim();
        // swap the roles of g and m, build over-g projector, swap back
        let swap = swap_matrix(n);
        let p_swapped = graph_projector_over_m(&gc.e_inv, &gc.t_inv);
        let p = &swap * p_swapped * &swap;
        let q = CMat::identity(2 * n, 2 * n) - &p;
        (p, q)
    }

    /// Dual Lagrangian in two forms: `⟨Ê_t(t⁻¹t₋), t⁻¹t₊⟩` and
    /// `⟨(E_e + Π̂(t))⁻¹ t₋t⁻¹, t₊t⁻¹⟩`. Inputs `φ± = t⁻¹t±` in m.
    pub fn lagrangian_dual(
        &self,
        ad_d_t: &CMat,
        ad_d_tinv: &CMat,
        phi_plus: &CVec,
        phi_minus: &CVec,
    ) -> Result<(C64, C64), DualityError> {
        let n = self.dim();
        let gc = self.dual_graph_at(ad_d_tinv)?;
        let ehat = gc.e.as_ref().ok_or(DualityError::GraphBlowup(gc.cond_e))?;
        let left = pairv(&(ehat * phi_minus), phi_plus);
        let at = ad_d_t.view((n, n), (n, n)).into_owned();
        let pihat = crate::group::hat_pi_from_ad(ad_d_t, ad_d_tinv);
        let inv = self.e_e()? + pihat;
        let ebar = checked_inverse(&inv, GRAPH_COND).ok_or_else(|| DualityError::GraphBlowup(condition_number(&inv)))?;
        let right = pairv(&(ebar * (&at * phi_minus)), &(&at * phi_plus));
        Ok((left, right))
    }
}

/// `⟨a, b⟩ = aᵀb` between an element and its dual.
pub fn pairv(a: &CVec, b: &CVec) -> C64 {
    a.dot(b)
}

fn swap_matrix(n: usize) -> CMat {
    let mut s = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        s[(i, n + i)] = C64::new(1.0, 0.0);
        s[(n + i, i)] = C64::new(1.0, 0.0);
    }
    s
}

/// Columns `E⁻¹φ ⊕ φ`.
fn graph_basis(e_inv: &CMat) -> CMat {
    let n = e_inv.nrows();
    let mut b = CMat::zeros(2 * n, n);
    b.view_mut((0, 0), (n, n)).copy_from(e_inv);
    b.view_mut((n, 0), (n, n)).copy_from(&CMat::identity(n, n));
    b
}

/// Projector onto `{E⁻¹a ⊕ a}` along `{T⁻¹b ⊕ b}`:
/// `a = (E⁻¹ − T⁻¹)⁻¹(ξ − T⁻¹φ)`.
fn graph_projector_over_m(e_inv: &CMat, t_inv: &CMat) -> CMat {
    let n = e_inv.nrows();
    let di = (e_inv - t_inv).try_inverse().expect("E⁻¹ − T⁻¹ invertible for a splitting");
    let mut p = CMat::zeros(2 * n, 2 * n);
    p.view_mut((0, 0), (n, n)).copy_from(&(e_inv * &di));
    p.view_mut((0, n), (n, n)).copy_from(&(-(e_inv * &di * t_inv)));
    p.view_mut((n, 0), (n, n)).copy_from(&di);
    p.view_mut((n, n), (n, n)).copy_from(&(-(&di * t_inv)));
    p
}

/// Inverse and forward graph coordinates at a group element.
#[derive(Clone, Debug)]
pub struct GraphCoordinate {
    pub e_inv: CMat,
    pub t_inv: CMat,
    pub e: Option<CMat>,
    pub t: Option<CMat>,
    pub cond_e: f64,
    pub cond_t: f64,
}

impl GraphCoordinate {
    pub fn new(e_inv: CMat, t_inv: CMat) -> Self {
        let cond_e = condition_number(&e_inv);
        let cond_t = condition_number(&t_inv);
        let e = if cond_e < GRAPH_COND { e_inv.clone().try_inverse() } else { None };
        let t = if cond_t < GRAPH_COND { t_inv.clone().try_inverse() } else { None };
        GraphCoordinate { e_inv, t_inv, e, t, cond_e, cond_t }
    }

    pub fn is_blowup(&self) -> bool {
        self.e.is_none() || self.t.is_none()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        max_abs(&(&self.e_inv - &other.e_inv)).max(max_abs(&(&self.t_inv - &other.t_inv)))
    }
}

/// `c(δ_{ij} + iε_{ijk}π_k)`.
pub fn eps_matrix(c: C64, pi: &[C64; 3]) -> CMat {
    CMat::from_fn(3, 3, |i, j| {
        let mut v = if i == j { C64::new(1.0, 0.0) } else { ZERO };
        for (k, p) in pi.iter().enumerate() {
            v += C64::new(0.0, eps(i, j, k)) * p;
        }
        v * c
    })
}

/// Closed-form inverse of [`eps_matrix`]:
/// `c⁻¹(δ_{ij} − iε_{ijk}π_k − π_iπ_j)/(1 − π²)`.
pub fn invert_eps_matrix(c: C64, pi: &[C64; 3]) -> Result<CMat, DualityError> {
    let p2: C64 = pi.iter().map(|x| x * x).sum();
    let den = (C64::new(1.0, 0.0) - p2) * c;
    if den.norm() < 1e-14 {
        return Err(DualityError::EpsSingular);
    }
    Ok(CMat::from_fn(3, 3, |i, j| {
        let mut v = if i == j { C64::new(1.0, 0.0) } else { ZERO };
        for (k, p) in pi.iter().enumerate() {
            v -= C64::new(0.0, eps(i, j, k)) * p;
        }
        (v - pi[i] * pi[j]) / den
    }))
}
