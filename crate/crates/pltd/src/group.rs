//! Matrix realizations of G, M and D, exponentials, Iwasawa factorization,
//! dressing actions and the Poisson cocycles.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bialgebra::QuasiBialgebra;
use crate::lie::{CMat, CVec, C64, I, ONE, ZERO};

pub type Mat2 = Matrix2<C64>;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("group tag mismatch: {0:?} vs {1:?}")]
    TagMismatch(GroupTag, GroupTag),
    #[error("matrix is not invertible")]
    Singular,
    #[error("constraint violated for {tag:?}: defect {defect:.3e}")]
    Constraint { tag: GroupTag, defect: f64 },
    #[error("SU2* vector coordinate s3 = {0} must exceed -1")]
    OutOfDomain(f64),
}

pub fn mat2(a: C64, b: C64, c: C64, d: C64) -> Mat2 {
    Mat2::new(a, b, c, d)
}

pub fn id2() -> Mat2 {
    Mat2::identity()
}

pub fn inv2(m: &Mat2) -> Option<Mat2> {
    let det = m.determinant();
    if det.norm() < 1e-300 {
        return None;
    }
    Some(mat2(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det)
}

/// `m / sqrt(det m)`, restoring unit determinant.
pub fn det_normalize(m: &Mat2) -> Mat2 {
    m / m.determinant().sqrt()
}

pub fn max_abs2(m: &Mat2) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `sinh(w)/w`, `cosh(w)` with a series near zero.
fn sinhc_cosh(w2: C64) -> (C64, C64) {
    if w2.norm() < 1e-6 {
        let s = ONE + w2 / 6.0 + w2 * w2 / 120.0;
        let ch = ONE + w2 / 2.0 + w2 * w2 / 24.0;
        (s, ch)
    } else {
        let w = w2.sqrt();
        (w.sinh() / w, w.cosh())
    }
}

/// Exponential of a 2×2 matrix via Cayley–Hamilton.
pub fn exp2(x: &Mat2) -> Mat2 {
    let tr = x.trace() / 2.0;
    let y = x - id2() * tr;
    // traceless: y² = −det(y)·1
    let w2 = -y.determinant();
    let (sc, ch) = sinhc_cosh(w2);
    (id2() * ch + y * sc) * tr.exp()
}

/// Principal logarithm of a unit-determinant 2×2 matrix (traceless result).
/// Valid away from `−1`.
pub fn log2(g: &Mat2) -> Mat2 {
    let half_tr = g.trace() / 2.0;
    let w2 = half_tr * half_tr - ONE;
    let sc = if w2.norm() < 1e-6 {
        ONE + w2 / 6.0 + w2 * w2 / 120.0
    } else {
        let w = half_tr.acosh();
        w.sinh() / w
    };
    (g - id2() * half_tr) / sc
}

/// Dense 2×2 power series, used only as a test oracle.
pub fn exp2_series(x: &Mat2, terms: usize) -> Mat2 {
    let mut acc = id2();
    let mut term = id2();
    for k in 1..terms {
        term = term * x / C64::new(k as f64, 0.0);
        acc += term;
    }
    acc
}

/// A Lie algebra realized by 2×2 matrices through a chosen basis.
#[derive(Clone, Debug)]
pub struct MatrixRep {
    pub basis: Vec<Mat2>,
    pinv: CMat,
}

impl MatrixRep {
    pub fn new(basis: Vec<Mat2>) -> Self {
        let n = basis.len();
        let mut v = CMat::zeros(4, n);
        for (j, b) in basis.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    v[(2 * r + c, j)] = b[(r, c)];
                }
            }
        }
        let vh = v.adjoint();
        let pinv = (&vh * &v).try_inverse().expect("independent basis") * vh;
        MatrixRep { basis, pinv }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_matrix(&self, x: &CVec) -> Mat2 {
        self.basis.iter().zip(x.iter()).fold(Mat2::zeros(), |acc, (b, &c)| acc + b * c)
    }

    /// Coordinates by least squares; exact for matrices in the span.
    pub fn coords(&self, m: &Mat2) -> CVec {
        let flat = CVec::from_column_slice(&[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]);
        &self.pinv * flat
    }

    /// Matrix of `Ad_u` in the basis.
    pub fn ad(&self, u: &Mat2) -> CMat {
        let ui = inv2(u).expect("invertible group element");
        let n = self.dim();
        let mut a = CMat::zeros(n, n);
        for (j, b) in self.basis.iter().enumerate() {
            a.set_column(j, &self.coords(&(u * b * ui)));
        }
        a
    }

    pub fn exp(&self, x: &CVec) -> Mat2 {
        exp2(&self.to_matrix(x))
    }

    pub fn log(&self, g: &Mat2) -> CVec {
        self.coords(&log2(g))
    }
}

/// `{H, X₊, X₋}`.
pub fn sl2_rep() -> MatrixRep {
    let o = ONE;
    let z = ZERO;
    MatrixRep::new(vec![mat2(o, z, z, -o), mat2(z, o, z, z), mat2(z, z, o, z)])
}

/// `e_i = −(i/2)σ_i`.
pub fn su2_rep() -> MatrixRep {
    MatrixRep::new(su2_basis().to_vec())
}

pub fn su2_basis() -> [Mat2; 3] {
    let h = C64::new(0.0, -0.5);
    let o = ONE;
    let z = ZERO;
    [
        mat2(z, o, o, z) * h,
        mat2(z, -I, I, z) * h,
        mat2(o, z, z, -o) * h,
    ]
}

/// SU(2) element from Cayley–Klein parameters `u = [[a, b], [−b̄, ā]]`.
pub fn su2_from_ab(a: C64, b: C64) -> Mat2 {
    mat2(a, b, -b.conj(), a.conj())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GroupTag {
    Su2,
    Sl2r,
    Su2Star,
    Sl2cDouble,
}

/// A group element realized as a 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub tag: GroupTag,
    pub mat: Mat2,
}

impl GroupElement {
    pub fn new(tag: GroupTag, mat: Mat2) -> Result<Self, GroupError> {
        let g = GroupElement { tag, mat };
        let defect = g.constraint_defect();
        if defect > 1e-10 {
            return Err(GroupError::Constraint { tag, defect });
        }
        Ok(g)
    }

    pub fn identity(tag: GroupTag) -> Self {
        GroupElement { tag, mat: id2() }
    }

    pub fn constraint_defect(&self) -> f64 {
        let m = &self.mat;
        let det = (m.determinant() - ONE).norm();
        match self.tag {
            GroupTag::Su2 => {
                let unit = max_abs2(&(m.adjoint() * m - id2()));
                det.max(unit)
            }
            GroupTag::Sl2r => det.max(m.iter().fold(0.0, |a, z| a.max(z.im.abs()))),
            GroupTag::Sl2cDouble => det,
            GroupTag::Su2Star => {
                let x = m[(0, 0)];
                let tri = m[(1, 0)].norm();
                let pos = if x.re > 0.0 { x.im.abs() } else { 1.0 };
                det.max(tri).max(pos)
            }
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, GroupError> {
        if self.tag != other.tag {
            return Err(GroupError::TagMismatch(self.tag, other.tag));
        }
        Ok(GroupElement { tag: self.tag, mat: self.mat * other.mat })
    }

    pub fn inverse(&self) -> Result<Self, GroupError> {
        Ok(GroupElement { tag: self.tag, mat: inv2(&self.mat).ok_or(GroupError::Singular)? })
    }
}

/// `SU₂*` as `ℝ³` with `s₃ > −1` and product `s·t = s + (s₃+1)t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Su2StarVec(pub [f64; 3]);

impl Su2StarVec {
    pub fn new(s: [f64; 3]) -> Result<Self, GroupError> {
        if s[2] <= -1.0 {
            return Err(GroupError::OutOfDomain(s[2]));
        }
        Ok(Su2StarVec(s))
    }

    pub fn identity() -> Self {
        Su2StarVec([0.0; 3])
    }

    pub fn mul(&self, t: &Self) -> Self {
        let x = self.0[2] + 1.0;
        Su2StarVec([self.0[0] + x * t.0[0], self.0[1] + x * t.0[1], self.0[2] + x * t.0[2]])
    }

    pub fn inv(&self) -> Self {
        let x = self.0[2] + 1.0;
        Su2StarVec([-self.0[0] / x, -self.0[1] / x, -self.0[2] / x])
    }

    /// `s = φ (e^{φ₃} − 1)/φ₃`.
    pub fn exp(phi: [f64; 3]) -> Self {
        let f = expm1_over(phi[2]);
        Su2StarVec([phi[0] * f, phi[1] * f, phi[2] * f])
    }

    pub fn log(&self) -> [f64; 3] {
        let s3 = self.0[2];
        let f = if s3.abs() < 1e-8 { 1.0 - s3 / 2.0 + s3 * s3 / 3.0 } else { s3.ln_1p() / s3 };
        [self.0[0] * f, self.0[1] * f, self.0[2] * f]
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    /// Upper-triangular form `[[x, z], [0, 1/x]]`, `x = √(s₃+1)`, `z = (s₁ + i s₂)/x`.
    pub fn to_matrix(&self) -> Mat2 {
        let x = (self.0[2] + 1.0).sqrt();
        mat2(C64::new(x, 0.0), C64::new(self.0[0], self.0[1]) / x, ZERO, C64::new(1.0 / x, 0.0))
    }

    pub fn from_matrix(m: &Mat2) -> Self {
        let x = m[(0, 0)].re;
        let z = m[(0, 1)] * x;
        Su2StarVec([z.re, z.im, x * x - 1.0])
    }
}

fn expm1_over(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x / 2.0 + x * x / 6.0
    } else {
        x.exp_m1() / x
    }
}

/// Sign pattern carrying vector coordinates of `SU₂*` to the dual basis of
/// `su₂` in the real normalization: vector direction `i` is `L_ii f_i`.
pub const SU2STAR_VEC_SIGNS: [f64; 3] = [-1.0, 1.0, -1.0];

/// Closed form `Π̂(s) = −i(ε_{ija}s_a + ½ s² ε_{ij3})` in vector coordinates.
pub fn hat_pi_closed(s: &Su2StarVec) -> CMat {
    let s2 = s.norm2();
    let mut m = CMat::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let mut v = 0.0;
            for a in 0..3 {
                v += crate::lie::eps(i, j, a) * s.0[a];
            }
            v += 0.5 * s2 * crate::lie::eps(i, j, 2);
            m[(i, j)] = C64::new(0.0, -v);
        }
    }
    m
}

/// Basis of `sl₂(ℂ)` realizing the double of `su₂` in the real normalization:
/// `e_i = −(i/2)σ_i`, `f₁ = −E₁₂`, `f₂ = iE₁₂`, `f₃ = diag(−½, ½)`.
/// The invariant pairing is `⟨X, Y⟩ = 2 Im tr(XY)`.
#[derive(Clone, Debug)]
pub struct Sl2cDouble {
    pub basis: [Mat2; 6],
}

impl Default for Sl2cDouble {
    fn default() -> Self {
        Self::new()
    }
}

impl Sl2cDouble {
    pub fn new() -> Self {
        let [e1, e2, e3] = su2_basis();
        let o = ONE;
        let z = ZERO;
        let h = C64::new(0.5, 0.0);
        Sl2cDouble {
            basis: [e1, e2, e3, mat2(z, -o, z, z), mat2(z, I, z, z), mat2(-h, z, z, h)],
        }
    }

    pub fn pairing(x: &Mat2, y: &Mat2) -> f64 {
        2.0 * (x * y).trace().im
    }

    /// Coordinates in `(e, f)` read off with the pairing.
    pub fn coords(&self, x: &Mat2) -> CVec {
        let mut v = CVec::zeros(6);
        for i in 0..3 {
            v[i] = C64::new(Self::pairing(x, &self.basis[3 + i]), 0.0);
            v[3 + i] = C64::new(Self::pairing(x, &self.basis[i]), 0.0);
        }
        v
    }

    pub fn to_matrix(&self, v: &CVec) -> Mat2 {
        // real coefficients only; complex ones are not in the real form
        self.basis.iter().zip(v.iter()).fold(Mat2::zeros(), |acc, (b, c)| acc + b * C64::new(c.re, 0.0))
    }

    pub fn ad(&self, k: &Mat2) -> CMat {
        let ki = inv2(k).expect("invertible");
        let mut a = CMat::zeros(6, 6);
        for (j, b) in self.basis.iter().enumerate() {
            a.set_column(j, &self.coords(&(k * b * ki)));
        }
        a
    }

    pub fn exp(&self, v: &CVec) -> Mat2 {
        exp2(&self.to_matrix(v))
    }
}

/// Iwasawa factorization `k = u s`, `u ∈ SU(2)`, `s` upper triangular with
/// positive real diagonal. Householder QR with a phase fix.
pub fn iwasawa(k: &Mat2) -> Result<(Mat2, Mat2), GroupError> {
    if k.determinant().norm() < 1e-300 {
        return Err(GroupError::Singular);
    }
    let qr = k.qr();
    let (mut q, mut r) = (qr.q(), qr.r());
    for i in 0..2 {
        let d = r[(i, i)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..2 {
            q[(row, i)] *= ph;
        }
        for col in 0..2 {
            r[(i, col)] /= ph;
        }
        r[(i, i)] = C64::new(r[(i, i)].re, 0.0);
    }
    // unit determinant on both factors
    let dq = q.determinant().sqrt();
    Ok((q / dq, r * dq))
}

/// `k = u s` with `u ∈ G`, `s ∈ M`.
pub fn factorize_gm(k: &Mat2) -> Result<(Mat2, Mat2), GroupError> {
    iwasawa(k)
}

/// `k = t v` with `t ∈ M`, `v ∈ G`, from the Iwasawa factors of `k⁻¹`.
pub fn factorize_mg(k: &Mat2) -> Result<(Mat2, Mat2), GroupError> {
    let ki = inv2(k).ok_or(GroupError::Singular)?;
    let (u1, s1) = iwasawa(&ki)?;
    Ok((inv2(&s1).ok_or(GroupError::Singular)?, u1.adjoint()))
}

/// `s ▷ u`: the G-part of `s u`.
pub fn act_m_on_g(s: &Mat2, u: &Mat2) -> Result<Mat2, GroupError> {
    Ok(iwasawa(&(s * u))?.0)
}

/// `u ◁ s`: the M-part of `s u`.
pub fn act_g_on_m(u: &Mat2, s: &Mat2) -> Result<Mat2, GroupError> {
    Ok(iwasawa(&(s * u))?.1)
}

/// `Π(u) = Ad_u(r) − r`, given the matrix `Ad_u` on g.
pub fn pi_cocycle(b: &QuasiBialgebra, ad_u: &CMat) -> CMat {
    ad_u * &b.r * ad_u.transpose() - &b.r
}

/// `Π^R(u) = Ad_{u⁻¹}Π(u) = r − Ad_{u⁻¹}(r)`, given `Ad_u`.
pub fn pi_r(b: &QuasiBialgebra, ad_u: &CMat) -> CMat {
    let ai = ad_u.clone().try_inverse().expect("Ad is invertible");
    &b.r - &ai * &b.r * ai.transpose()
}

/// Closed form of `Π^R` on SU(2) in the complex normalization:
/// `2i e₁∧e₂|b|² − e₃∧e₁(ab̄ − āb) − i e₂∧e₃(ab̄ + āb)`.
pub fn su2_pi_r_closed(a: C64, b: C64) -> CMat {
    let wedge = |i: usize, j: usize, c: C64, m: &mut CMat| {
        m[(i, j)] += c;
        m[(j, i)] -= c;
    };
    let mut m = CMat::zeros(3, 3);
    let abc = a * b.conj();
    wedge(0, 1, I * 2.0 * b.norm_sqr(), &mut m);
    wedge(2, 0, -(abc - abc.conj()), &mut m);
    wedge(1, 2, -I * (abc + abc.conj()), &mut m);
    m
}

/// `Π̂^R(t) = π_m Ad_{t⁻¹}|_g · (Ad_{t⁻¹}|_m)ᵀ` from the double matrix `Ad_{t⁻¹}`.
pub fn hat_pi_r_from_ad(ad_tinv: &CMat) -> CMat {
    let n = ad_tinv.nrows() / 2;
    let amg = ad_tinv.view((n, 0), (n, n));
    let amm = ad_tinv.view((n, n), (n, n));
    amg * amm.transpose()
}

/// `Π̂(t) = Ad_t Π̂^R(t) Ad_tᵀ`, both adjoint matrices on the double.
pub fn hat_pi_from_ad(ad_t: &CMat, ad_tinv: &CMat) -> CMat {
    let n = ad_t.nrows() / 2;
    let at = ad_t.view((n, n), (n, n));
    at * hat_pi_r_from_ad(ad_tinv) * at.transpose()
}

/// Dressing cocycle `b_φ(u) = d/dε (exp(εφ) ▷ u) u⁻¹` by central differences
/// with one Richardson step. Returns coordinates in g.
pub fn cocycle_b_fd(dbl: &Sl2cDouble, u: &Mat2, phi: &CVec, h: f64) -> Result<CVec, GroupError> {
    let g_rep = su2_rep();
    let ui = u.adjoint();
    let phim = {
        let mut v = CVec::zeros(6);
        v.rows_mut(3, 3).copy_from(phi);
        dbl.to_matrix(&v)
    };
    let f = |eps: f64| -> Result<Mat2, GroupError> {
        Ok(act_m_on_g(&exp2(&(phim * C64::new(eps, 0.0))), u)? * ui)
    };
    let d = |h: f64| -> Result<Mat2, GroupError> { Ok((f(h)? - f(-h)?) / C64::new(2.0 * h, 0.0)) };
    let rich = (d(h / 2.0)? * C64::new(4.0, 0.0) - d(h)?) / C64::new(3.0, 0.0);
    Ok(g_rep.coords(&rich))
}

/// Exact `b_φ(u) = Ad_u π_g Ad_{u⁻¹} φ`, from the double matrices.
pub fn cocycle_b_exact(ad_u: &CMat, ad_uinv: &CMat, phi: &CVec) -> CVec {
    let n = ad_u.nrows() / 2;
    let mut x = CVec::zeros(2 * n);
    x.rows_mut(n, n).copy_from(phi);
    let mut y = ad_uinv * x;
    for i in n..2 * n {
        y[i] = ZERO;
    }
    (ad_u * y).rows(0, n).into_owned()
}
