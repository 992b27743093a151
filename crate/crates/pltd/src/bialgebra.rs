//! Quasitriangular Lie bialgebras and their Drinfeld doubles.
//!
//! A two-tensor `T` is stored as the matrix `T[i][j]`, the coefficient of
//! `e_i ⊗ e_j`. Viewed as an operator `m → g` it acts by evaluation against
//! the second slot, so `r₂ = R` and `r₁ = Rᵀ` as matrices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::MatrixRep;
use crate::lie::{
    checked_inverse, condition_number, max_abs, max_abs_vec, AlgebraJson, CMat, CVec, LieAlgebra,
    LieError, C64, ZERO,
};

/// Condition number above which `2r₊` counts as singular.
pub const FACTORISABLE_COND: f64 = 1e8;

#[derive(Debug, Error)]
pub enum BialgebraError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("r has shape {0}x{1}, expected {2}x{2}")]
    Shape(usize, usize, usize),
    #[error("classical Yang-Baxter residual {0:.3e} above tolerance")]
    Cybe(f64),
    #[error("r + r21 is not ad-invariant (defect {0:.3e})")]
    NotInvariant(f64),
    #[error("not factorisable: r + r21 has condition number {0:.3e}")]
    NotFactorisable(f64),
    #[error("co-Jacobi residual {0:.3e} above tolerance")]
    CoJacobi(f64),
    #[error("double fails Jacobi (residual {0:.3e})")]
    DoubleJacobi(f64),
}

/// Residual tensor of the classical Yang-Baxter equation, flattened `(i*n + j)*n + k`.
pub fn cybe_tensor(g: &LieAlgebra, r: &CMat) -> Vec<C64> {
    let n = g.dim();
    let mut t = vec![ZERO; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = ZERO;
                for a in 0..n {
                    for b in 0..n {
                        // [r12, r13]
                        acc += r[(a, j)] * r[(b, k)] * g.sc(a, b, i);
                        // [r12, r23]
                        acc += r[(i, a)] * r[(b, k)] * g.sc(a, b, j);
                        // [r13, r23]
                        acc += r[(i, a)] * r[(j, b)] * g.sc(a, b, k);
                    }
                }
                t[(i * n + j) * n + k] = acc;
            }
        }
    }
    t
}

pub fn cybe_residual(g: &LieAlgebra, r: &CMat) -> f64 {
    cybe_tensor(g, r).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `ad_ξ` acting on both slots of a tensor: `A T + T Aᵀ`.
pub fn ad_tensor(g: &LieAlgebra, xi: &CVec, t: &CMat) -> CMat {
    let a = g.ad(xi);
    &a * t + t * a.transpose()
}

/// Brackets of `m` read off from `δ(e_k) = ad_{e_k}(r)`: `[f_a, f_b] = Σ_k δ(e_k)[a][b] f_k`.
pub fn dual_structure(g: &LieAlgebra, r: &CMat) -> Result<LieAlgebra, LieError> {
    let n = g.dim();
    let deltas: Vec<CMat> = (0..n).map(|k| ad_tensor(g, &g.basis(k), r)).collect();
    let labels = g.labels().iter().map(|l| format!("{l}*")).collect();
    LieAlgebra::from_fn(n, labels, g.real, |a, b, k| deltas[k][(a, b)])
}

#[derive(Clone, Debug)]
pub struct QuasiBialgebra {
    pub g: LieAlgebra,
    /// Coefficients of r in `g ⊗ g`.
    pub r: CMat,
    pub m: LieAlgebra,
    /// `K: g → m`, inverse of `2r₊ = r + r₂₁` viewed `m → g`.
    pub k: CMat,
    /// `K⁻¹ = R + Rᵀ`.
    pub kinv: CMat,
    /// Matrix realization of the group G, when known.
    pub rep: Option<MatrixRep>,
}

impl QuasiBialgebra {
    pub fn new(g: LieAlgebra, r: CMat) -> Result<Self, BialgebraError> {
        let n = g.dim();
        if r.nrows() != n || r.ncols() != n {
            return Err(BialgebraError::Shape(r.nrows(), r.ncols(), n));
        }
        let cy = cybe_residual(&g, &r);
        let scale = 1.0 + max_abs(&r).powi(2);
        if cy > 1e-10 * scale {
            return Err(BialgebraError::Cybe(cy));
        }
        let kinv = &r + r.transpose();
        let inv = (0..n)
            .map(|i| max_abs(&ad_tensor(&g, &g.basis(i), &kinv)))
            .fold(0.0, f64::max);
        if inv > 1e-10 * scale {
            return Err(BialgebraError::NotInvariant(inv));
        }
        let k = checked_inverse(&kinv, FACTORISABLE_COND)
            .ok_or_else(|| BialgebraError::NotFactorisable(condition_number(&kinv)))?;
        let m = dual_structure(&g, &r)?;
        let cj = m.jacobi_residual();
        if cj > 1e-10 * scale {
            return Err(BialgebraError::CoJacobi(cj));
        }
        Ok(QuasiBialgebra { g, r, m, k, kinv, rep: None })
    }

    pub fn with_rep(mut self, rep: MatrixRep) -> Self {
        self.rep = Some(rep);
        self
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// `δξ = ad_ξ(r)`.
    pub fn cobracket(&self, xi: &CVec) -> CMat {
        ad_tensor(&self.g, xi, &self.r)
    }

    /// `r₁: m → g`, evaluation against the first slot.
    pub fn r1(&self) -> CMat {
        self.r.transpose()
    }

    /// `r₂: m → g`, evaluation against the second slot.
    pub fn r2(&self) -> CMat {
        self.r.clone()
    }

    /// Same algebra with `r ↦ s·r`.
    pub fn rescaled(&self, s: C64) -> Result<Self, BialgebraError> {
        let mut b = QuasiBialgebra::new(self.g.clone(), &self.r * s)?;
        b.rep = self.rep.clone();
        Ok(b)
    }

    pub fn cybe_residual(&self) -> f64 {
        cybe_residual(&self.g, &self.r)
    }

    /// Max over basis ξ of `‖ad_ξ(r₊)‖`.
    pub fn invariance_residual(&self) -> f64 {
        let rp = &self.kinv * C64::new(0.5, 0.0);
        (0..self.dim())
            .map(|i| max_abs(&ad_tensor(&self.g, &self.g.basis(i), &rp)))
            .fold(0.0, f64::max)
    }

    pub fn factorisability_residual(&self) -> f64 {
        max_abs(&(&self.k * &self.kinv - CMat::identity(self.dim(), self.dim())))
    }

    /// `K(ξ, η) = ⟨Kξ, η⟩`.
    pub fn killing(&self, a: &CVec, b: &CVec) -> C64 {
        (a.transpose() * &self.k * b)[(0, 0)]
    }

    /// `K⁻¹(φ, ψ) = ⟨φ, K⁻¹ψ⟩`.
    pub fn killing_inv(&self, a: &CVec, b: &CVec) -> C64 {
        (a.transpose() * &self.kinv * b)[(0, 0)]
    }

    pub fn double(&self) -> Result<DoubleAlgebra, BialgebraError> {
        DoubleAlgebra::build(&self.g, &self.m)
    }

    /// `ξ ⊕ φ ↦ (ξ + r₁φ, ξ − r₂φ) ∈ g_L ⊕ g_R`.
    pub fn iso_lr(&self, x: &CVec) -> (CVec, CVec) {
        let n = self.dim();
        let xi = x.rows(0, n).into_owned();
        let phi = x.rows(n, n).into_owned();
        (&xi + self.r1() * &phi, &xi - self.r2() * &phi)
    }

    /// `(K_L − K_R)` evaluated on two images of [`iso_lr`](Self::iso_lr).
    pub fn iso_pairing(&self, x: &CVec, y: &CVec) -> C64 {
        let (xl, xr) = self.iso_lr(x);
        let (yl, yr) = self.iso_lr(y);
        self.killing(&xl, &yl) - self.killing(&xr, &yr)
    }

    /// Max over basis pairs of the double of the bracket defect of
    /// [`iso_lr`](Self::iso_lr) in each factor, and of the pairing transport.
    pub fn iso_residuals(&self, d: &DoubleAlgebra) -> (f64, f64) {
        let dim = 2 * self.dim();
        let mut hom = 0.0f64;
        let mut pairing = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let (x, y) = (d.d.basis(i), d.d.basis(j));
                let (zl, zr) = self.iso_lr(&d.bracket(&x, &y));
                let (xl, xr) = self.iso_lr(&x);
                let (yl, yr) = self.iso_lr(&y);
                hom = hom
                    .max(max_abs_vec(&(zl - self.g.bracket(&xl, &yl))))
                    .max(max_abs_vec(&(zr - self.g.bracket(&xr, &yr))));
                pairing = pairing.max((d.pair(&x, &y) - self.iso_pairing(&x, &y)).norm());
            }
        }
        (hom, pairing)
    }

    pub fn report(&self) -> Result<BialgebraReport, BialgebraError> {
        let d = self.double()?;
        let (jacobi, invariance, isotropy) = double_report(&d);
        let (iso_homomorphism, iso_pairing) = self.iso_residuals(&d);
        Ok(BialgebraReport {
            cybe: self.cybe_residual(),
            r_plus_invariance: self.invariance_residual(),
            factorisability: self.factorisability_residual(),
            double_jacobi: jacobi,
            double_invariance: invariance,
            isotropy,
            iso_homomorphism,
            iso_pairing,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&BialgebraJson::from(self)).expect("bialgebra serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, BialgebraError> {
        let j: BialgebraJson = serde_json::from_str(s).map_err(LieError::from)?;
        let g = LieAlgebra::try_from(j.algebra)?;
        let n = g.dim();
        let mut r = CMat::zeros(n, n);
        for &(a, b, re, im) in &j.r {
            if a >= n || b >= n {
                return Err(LieError::Invalid(format!("r index ({a},{b}) out of range")).into());
            }
            r[(a, b)] = C64::new(re, im);
        }
        QuasiBialgebra::new(g, r)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct BialgebraJson {
    pub algebra: AlgebraJson,
    /// Nonzero entries of r as `[i, j, re, im]`.
    pub r: Vec<(usize, usize, f64, f64)>,
}

impl From<&QuasiBialgebra> for BialgebraJson {
    fn from(b: &QuasiBialgebra) -> Self {
        let n = b.dim();
        let mut r = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = b.r[(i, j)];
                if v != ZERO {
                    r.push((i, j, v.re, v.im));
                }
            }
        }
        BialgebraJson { algebra: AlgebraJson::from(&b.g), r }
    }
}

/// The double `d = g ⋈ m` with basis `(e_0..e_{n-1}, f_0..f_{n-1})`.
#[derive(Clone, Debug)]
pub struct DoubleAlgebra {
    pub d: LieAlgebra,
    /// Gram matrix `[[0, I], [I, 0]]`.
    pub pairing: CMat,
    pub n: usize,
}

impl DoubleAlgebra {
    /// Cross relations fixed by ad-invariance of the canonical pairing:
    /// `[f_a, e_i] = −Σ_b c_m[a][b][i] e_b + Σ_j c[i][j][a] f_j`.
    pub fn build(g: &LieAlgebra, m: &LieAlgebra) -> Result<Self, BialgebraError> {
        let n = g.dim();
        if m.dim() != n {
            return Err(LieError::DimMismatch { expected: n, got: m.dim() }.into());
        }
        let labels: Vec<String> = g.labels().iter().chain(m.labels()).cloned().collect();
        let cross = |a: usize, i: usize, k: usize| -> C64 {
            // [f_a, e_i] component along basis k of d
            if k < n {
                -m.sc(a, k, i)
            } else {
                g.sc(i, k - n, a)
            }
        };
        let d = LieAlgebra::from_fn(2 * n, labels, g.real && m.real, |x, y, k| {
            match (x < n, y < n) {
                (true, true) => {
                    if k < n {
                        g.sc(x, y, k)
                    } else {
                        ZERO
                    }
                }
                (false, false) => {
                    if k >= n {
                        m.sc(x - n, y - n, k - n)
                    } else {
                        ZERO
                    }
                }
                (false, true) => cross(x - n, y, k),
                (true, false) => -cross(y - n, x, k),
            }
        })?;
        let mut pairing = CMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            pairing[(i, n + i)] = C64::new(1.0, 0.0);
            pairing[(n + i, i)] = C64::new(1.0, 0.0);
        }
        let dbl = DoubleAlgebra { d, pairing, n };
        let jac = dbl.d.jacobi_residual();
        let scale = 1.0 + max_abs_c(g).max(max_abs_c(m)).powi(2);
        if jac > 1e-10 * scale {
            return Err(BialgebraError::DoubleJacobi(jac));
        }
        Ok(dbl)
    }

    pub fn embed_g(&self, xi: &CVec) -> CVec {
        let mut v = CVec::zeros(2 * self.n);
        v.rows_mut(0, self.n).copy_from(xi);
        v
    }

    pub fn embed_m(&self, phi: &CVec) -> CVec {
        let mut v = CVec::zeros(2 * self.n);
        v.rows_mut(self.n, self.n).copy_from(phi);
        v
    }

    pub fn split(&self, x: &CVec) -> (CVec, CVec) {
        (x.rows(0, self.n).into_owned(), x.rows(self.n, self.n).into_owned())
    }

    pub fn pair(&self, a: &CVec, b: &CVec) -> C64 {
        (a.transpose() * &self.pairing * b)[(0, 0)]
    }

    pub fn bracket(&self, a: &CVec, b: &CVec) -> CVec {
        self.d.bracket(a, b)
    }

    /// Max over basis triples of `|⟨[x,a],b⟩ + ⟨a,[x,b]⟩|`.
    pub fn invariance_residual(&self) -> f64 {
        let dim = 2 * self.n;
        let mut worst = 0.0f64;
        for x in 0..dim {
            let adx = self.d.ad(&self.d.basis(x));
            let m = adx.transpose() * &self.pairing + &self.pairing * &adx;
            worst = worst.max(max_abs(&m));
        }
        worst
    }

    /// Max of the pairing restricted to g and to m.
    pub fn isotropy_residual(&self) -> f64 {
        let n = self.n;
        let gg = self.pairing.view((0, 0), (n, n)).into_owned();
        let mm = self.pairing.view((n, n), (n, n)).into_owned();
        max_abs(&gg).max(max_abs(&mm))
    }

    /// `π_g` and `π_m` as `2n × 2n` matrices.
    pub fn projector_g(&self) -> CMat {
        let mut p = CMat::zeros(2 * self.n, 2 * self.n);
        for i in 0..self.n {
            p[(i, i)] = C64::new(1.0, 0.0);
        }
        p
    }

    pub fn projector_m(&self) -> CMat {
        CMat::identity(2 * self.n, 2 * self.n) - self.projector_g()
    }

    /// Adjoint of a pairing: the matrix `Mᵀ` w.r.t. `⟨ , ⟩`, i.e. `P⁻¹ Mᵀ P`.
    pub fn pairing_adjoint(&self, m: &CMat) -> CMat {
        &self.pairing * m.transpose() * &self.pairing
    }
}

fn max_abs_c(l: &LieAlgebra) -> f64 {
    l.constants().iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `(jacobi, invariance, isotropy)` residuals of a double.
pub fn double_report(d: &DoubleAlgebra) -> (f64, f64, f64) {
    (d.d.jacobi_residual(), d.invariance_residual(), d.isotropy_residual())
}

/// Structural residuals of a bialgebra and its double.
#[derive(Clone, Debug, Serialize)]
pub struct BialgebraReport {
    pub cybe: f64,
    pub r_plus_invariance: f64,
    pub factorisability: f64,
    pub double_jacobi: f64,
    pub double_invariance: f64,
    pub isotropy: f64,
    pub iso_homomorphism: f64,
    pub iso_pairing: f64,
}

impl BialgebraReport {
    pub fn max(&self) -> f64 {
        [
            self.cybe,
            self.r_plus_invariance,
            self.factorisability,
            self.double_jacobi,
            self.double_invariance,
            self.isotropy,
            self.iso_homomorphism,
            self.iso_pairing,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}
