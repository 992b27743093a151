//! Finite-dimensional Lie algebras over the complex numbers, stored as dense
//! structure constants `[e_i, e_j] = Σ_k c[i][j][k] e_k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;
/// Dense complex matrix. Used for linear operators, bilinear forms and two-tensors.
pub type CMat = DMatrix<C64>;
/// Coefficient vector of an algebra element.
pub type CVec = DVector<C64>;

/// Matrix of a linear map between algebras (target-dim × source-dim).
pub type LinearOperator = CMat;
/// Gram matrix of a bilinear form, evaluated as `aᵀ M b`.
pub type BilinearForm = CMat;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum LieError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("structure constants are not antisymmetric (defect {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("invalid algebra description: {0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    c: Vec<C64>,
    labels: Vec<String>,
    /// Whether the intended model is real. Diagnostic only.
    pub real: bool,
}

impl LieAlgebra {
    /// Build from flattened constants indexed `(i*n + j)*n + k`.
    pub fn new(dim: usize, c: Vec<C64>, labels: Vec<String>, real: bool) -> Result<Self, LieError> {
        if dim == 0 {
            return Err(LieError::Invalid("dimension must be positive".into()));
        }
        if c.len() != dim * dim * dim {
            return Err(LieError::DimMismatch { expected: dim * dim * dim, got: c.len() });
        }
        if labels.len() != dim {
            return Err(LieError::DimMismatch { expected: dim, got: labels.len() });
        }
        let alg = LieAlgebra { dim, c, labels, real };
        let anti = alg.antisymmetry_residual();
        if anti > 1e-12 {
            return Err(LieError::NotAntisymmetric(anti));
        }
        Ok(alg)
    }

    pub fn abelian(dim: usize, labels: Vec<String>) -> Self {
        LieAlgebra { dim, c: vec![ZERO; dim * dim * dim], labels, real: true }
    }

    /// Build from a closure giving `c[i][j][k]`.
    pub fn from_fn(
        dim: usize,
        labels: Vec<String>,
        real: bool,
        f: impl Fn(usize, usize, usize) -> C64,
    ) -> Result<Self, LieError> {
        let mut c = vec![ZERO; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    c[(i * dim + j) * dim + k] = f(i, j, k);
                }
            }
        }
        Self::new(dim, c, labels, real)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn sc(&self, i: usize, j: usize, k: usize) -> C64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn constants(&self) -> &[C64] {
        &self.c
    }

    /// Same basis, all brackets multiplied by `s`.
    pub fn scaled(&self, s: C64) -> Self {
        LieAlgebra {
            dim: self.dim,
            c: self.c.iter().map(|x| x * s).collect(),
            labels: self.labels.clone(),
            real: self.real,
        }
    }

    pub fn basis(&self, i: usize) -> CVec {
        let mut v = CVec::zeros(self.dim);
        v[i] = ONE;
        v
    }

    pub fn check_dim(&self, v: &CVec) -> Result<(), LieError> {
        if v.len() != self.dim {
            return Err(LieError::DimMismatch { expected: self.dim, got: v.len() });
        }
        Ok(())
    }

    pub fn try_bracket(&self, a: &CVec, b: &CVec) -> Result<CVec, LieError> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok(self.bracket(a, b))
    }

    /// Structure-constant contraction. Panics on a length mismatch; use
    /// [`try_bracket`](Self::try_bracket) for untrusted input.
    pub fn bracket(&self, a: &CVec, b: &CVec) -> CVec {
        assert_eq!(a.len(), self.dim);
        assert_eq!(b.len(), self.dim);
        let n = self.dim;
        let mut out = CVec::zeros(n);
        for i in 0..n {
            if a[i] == ZERO {
                continue;
            }
            for j in 0..n {
                let ab = a[i] * b[j];
                if ab == ZERO {
                    continue;
                }
                for k in 0..n {
                    out[k] += self.sc(i, j, k) * ab;
                }
            }
        }
        out
    }

    /// Matrix of `y ↦ [x, y]`.
    pub fn ad(&self, x: &CVec) -> CMat {
        let n = self.dim;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m[(k, j)] += self.sc(i, j, k) * x[i];
                }
            }
        }
        m
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.sc(i, j, k) + self.sc(j, i, k)).norm());
                }
            }
        }
        worst
    }

    /// Max-norm of the cyclic sum `[x,[y,z]] + [y,[z,x]] + [z,[x,y]]` over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    let (x, y, z) = (self.basis(a), self.basis(b), self.basis(d));
                    let s = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    worst = worst.max(max_abs_vec(&s));
                }
            }
        }
        worst
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&AlgebraJson::from(self)).expect("algebra serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, LieError> {
        let j: AlgebraJson = serde_json::from_str(s)?;
        j.try_into()
    }
}

/// JSON form: nonzero constants as `[i, j, k, re, im]` tuples.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct AlgebraJson {
    pub dim: usize,
    pub labels: Vec<String>,
    #[serde(default)]
    pub real: bool,
    pub constants: Vec<(usize, usize, usize, f64, f64)>,
}

impl From<&LieAlgebra> for AlgebraJson {
    fn from(l: &LieAlgebra) -> Self {
        let n = l.dim;
        let mut constants = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = l.sc(i, j, k);
                    if v != ZERO {
                        constants.push((i, j, k, v.re, v.im));
                    }
                }
            }
        }
        AlgebraJson { dim: n, labels: l.labels.clone(), real: l.real, constants }
    }
}

impl TryFrom<AlgebraJson> for LieAlgebra {
    type Error = LieError;
    fn try_from(j: AlgebraJson) -> Result<Self, LieError> {
        let n = j.dim;
        let mut c = vec![ZERO; n * n * n];
        for &(a, b, k, re, im) in &j.constants {
            if a >= n || b >= n || k >= n {
                return Err(LieError::Invalid(format!("index ({a},{b},{k}) out of range")));
            }
            c[(a * n + b) * n + k] = C64::new(re, im);
        }
        LieAlgebra::new(n, c, j.labels, j.real)
    }
}

/// `aᵀ · form · b`.
pub fn pair(form: &BilinearForm, a: &CVec, b: &CVec) -> Result<C64, LieError> {
    if form.nrows() != a.len() {
        return Err(LieError::DimMismatch { expected: form.nrows(), got: a.len() });
    }
    if form.ncols() != b.len() {
        return Err(LieError::DimMismatch { expected: form.ncols(), got: b.len() });
    }
    Ok((a.transpose() * form * b)[(0, 0)])
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_imag(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn cvec(xs: &[C64]) -> CVec {
    CVec::from_column_slice(xs)
}

pub fn rvec(xs: &[f64]) -> CVec {
    CVec::from_iterator(xs.len(), xs.iter().map(|&x| C64::new(x, 0.0)))
}

/// Levi-Civita symbol on indices 0..3.
pub fn eps(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Inverse with a condition-number guard based on singular values.
pub fn checked_inverse(m: &CMat, max_cond: f64) -> Option<CMat> {
    let cond = condition_number(m);
    if !cond.is_finite() || cond > max_cond {
        return None;
    }
    m.clone().try_inverse()
}

pub fn condition_number(m: &CMat) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn smallest_singular_value(m: &CMat) -> f64 {
    m.clone().singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su2() -> LieAlgebra {
        LieAlgebra::from_fn(3, vec!["e1".into(), "e2".into(), "e3".into()], true, |i, j, k| {
            C64::new(eps(i, j, k), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn bracket_of_basis() {
        let g = su2();
        let z = g.bracket(&g.basis(0), &g.basis(1));
        assert!((z - g.basis(2)).norm() < 1e-15);
    }

    #[test]
    fn mismatch_is_error() {
        let g = su2();
        assert!(g.try_bracket(&g.basis(0), &CVec::zeros(2)).is_err());
    }

    #[test]
    fn perturbed_constants_break_jacobi() {
        let g = su2();
        let mut c = g.constants().to_vec();
        // [e1, e2] gains an e1 component
        c[3] += 0.1;
        c[9] -= 0.1;
        let bad = LieAlgebra::new(3, c, g.labels().to_vec(), true).unwrap();
        assert!(bad.jacobi_residual() > 0.01);
    }

    #[test]
    fn rejects_non_antisymmetric() {
        let mut c = vec![ZERO; 8];
        c[1] = ONE;
        assert!(LieAlgebra::new(2, c, vec!["a".into(), "b".into()], true).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = su2().scaled(C64::new(0.0, 2.0));
        let back = LieAlgebra::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }
}
