//! Shipped bialgebras (`sl₂(ℝ)`, `su₂`) and named `(λ, μ)` presets.

use thiserror::Error;

use crate::bialgebra::{BialgebraError, QuasiBialgebra};
use crate::group::{sl2_rep, su2_rep};
use crate::lie::{eps, CMat, LieAlgebra, C64, I, ONE, ZERO};

#[derive(Debug, Error)]
pub enum ZooError {
    #[error(transparent)]
    Bialgebra(#[from] BialgebraError),
    #[error("splitting condition violated: |λ + 1 + 2μ| = {0:.3e}")]
    SplitCondition(f64),
    #[error("rescaling factor must be nonzero for finite μ")]
    ZeroRescale,
    #[error("unknown preset or algebra: {0}")]
    Unknown(String),
    #[error("cannot parse complex number {0:?}")]
    BadNumber(String),
}

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// `sl₂` in the basis `{H, X₊, X₋}`.
pub fn sl2_algebra() -> LieAlgebra {
    let mut c = vec![ZERO; 27];
    let mut set = |i: usize, j: usize, k: usize, v: f64| {
        c[(i * 3 + j) * 3 + k] = C64::new(v, 0.0);
        c[(j * 3 + i) * 3 + k] = C64::new(-v, 0.0);
    };
    set(0, 1, 1, 2.0);
    set(0, 2, 2, -2.0);
    set(1, 2, 0, 1.0);
    LieAlgebra::new(3, c, labels(&["H", "X+", "X-"]), true).expect("sl2 constants")
}

/// `su₂` with `[e_i, e_j] = ε_{ijk} e_k`.
pub fn su2_algebra() -> LieAlgebra {
    LieAlgebra::from_fn(3, labels(&["e1", "e2", "e3"]), true, |i, j, k| C64::new(eps(i, j, k), 0.0))
        .expect("su2 constants")
}

/// `r = X₊⊗X₋ + ¼ H⊗H`.
pub fn make_sl2r() -> QuasiBialgebra {
    let mut r = CMat::zeros(3, 3);
    r[(1, 2)] = ONE;
    r[(0, 0)] = C64::new(0.25, 0.0);
    QuasiBialgebra::new(sl2_algebra(), r).expect("sl2 bialgebra").with_rep(sl2_rep())
}

/// `r = −Σ e_i⊗e_i + i(e₁⊗e₂ − e₂⊗e₁)`.
pub fn make_su2() -> QuasiBialgebra {
    let mut r = -CMat::identity(3, 3);
    r[(0, 1)] = I;
    r[(1, 0)] = -I;
    QuasiBialgebra::new(su2_algebra(), r).expect("su2 bialgebra").with_rep(su2_rep())
}

/// Dual brackets of `sl₂(ℝ)*` in the basis `{φ, ψ₊, ψ₋}` as produced by the
/// cobracket: `[φ, ψ±] = −½ψ±`, `[ψ₊, ψ₋] = 0`.
pub fn sl2r_dual_table() -> LieAlgebra {
    let mut c = vec![ZERO; 27];
    let mut set = |i: usize, j: usize, k: usize, v: f64| {
        c[(i * 3 + j) * 3 + k] = C64::new(v, 0.0);
        c[(j * 3 + i) * 3 + k] = C64::new(-v, 0.0);
    };
    set(0, 1, 1, -0.5);
    set(0, 2, 2, -0.5);
    LieAlgebra::new(3, c, labels(&["phi", "psi+", "psi-"]), true).expect("sl2* constants")
}

/// Dual brackets of `su₂*`: `[f_i, f_j] = i(δ_{ik}δ_{j3} − δ_{jk}δ_{i3}) f_k`.
pub fn su2_dual_table() -> LieAlgebra {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    LieAlgebra::from_fn(3, labels(&["f1", "f2", "f3"]), true, |i, j, k| {
        I * (d(i, k) * d(j, 2) - d(j, k) * d(i, 2))
    })
    .expect("su2* constants")
}

pub fn algebra_by_name(name: &str) -> Result<QuasiBialgebra, ZooError> {
    match name {
        "sl2r" | "sl2" => Ok(make_sl2r()),
        "su2" => Ok(make_su2()),
        other => Err(ZooError::Unknown(other.to_string())),
    }
}

/// `μ`, possibly at the boundary point `μ = ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mu {
    Finite(C64),
    /// The principal model itself: `r/μ` rescaling taken to the limit, which
    /// makes `m` abelian.
    Infinite,
}

#[derive(Clone, Debug)]
pub struct ModelPreset {
    pub name: String,
    pub bialgebra: QuasiBialgebra,
    pub lambda: C64,
    pub mu: Mu,
    /// Factor applied to r. Ignored for `Mu::Infinite`.
    pub rescale: C64,
}

impl ModelPreset {
    pub fn new(
        name: impl Into<String>,
        bialgebra: QuasiBialgebra,
        lambda: C64,
        mu: Mu,
        rescale: C64,
    ) -> Result<Self, ZooError> {
        if let Mu::Finite(m) = mu {
            let cond = (lambda + 1.0 + m * 2.0).norm();
            if cond <= 1e-8 {
                return Err(ZooError::SplitCondition(cond));
            }
            if rescale.norm() == 0.0 {
                return Err(ZooError::ZeroRescale);
            }
        }
        Ok(ModelPreset { name: name.into(), bialgebra, lambda, mu, rescale })
    }

    pub fn custom(bialgebra: QuasiBialgebra, lambda: C64, mu: C64) -> Result<Self, ZooError> {
        Self::new(format!("custom({lambda},{mu})"), bialgebra, lambda, Mu::Finite(mu), ONE)
    }

    pub fn modified_principal(b: QuasiBialgebra) -> Self {
        Self::new("modified-principal", b, -ONE, Mu::Finite(ONE), ONE).expect("valid")
    }

    /// Real form on `su₂`: `μ = i` with r rescaled by `−i`.
    pub fn modified_principal_real(b: QuasiBialgebra) -> Self {
        Self::new("modified-principal-real", b, -ONE, Mu::Finite(I), -I).expect("valid")
    }

    pub fn pure_qt(b: QuasiBialgebra) -> Self {
        Self::new("pure-qt", b, ZERO, Mu::Finite(ZERO), ONE).expect("valid")
    }

    pub fn g_invariant(b: QuasiBialgebra, mu: C64) -> Result<Self, ZooError> {
        Self::new(format!("g-invariant({mu})"), b, ZERO, Mu::Finite(mu), ONE)
    }

    /// `λ = 0`, finite large `μ`, r rescaled by `1/μ`.
    pub fn principal_limit(b: QuasiBialgebra, mu: f64) -> Result<Self, ZooError> {
        Self::new(format!("principal-limit({mu})"), b, ZERO, Mu::Finite(C64::new(mu, 0.0)), C64::new(1.0 / mu, 0.0))
    }

    pub fn principal_exact(b: QuasiBialgebra) -> Self {
        Self::new("principal", b, ZERO, Mu::Infinite, ZERO).expect("valid")
    }

    /// Parse `modified-principal`, `modified-principal-real`, `pure-qt`,
    /// `principal-limit`, `principal-limit(μ)`, `principal`, `g-invariant(μ)`,
    /// `custom(λ, μ)`.
    pub fn parse(spec: &str, b: QuasiBialgebra) -> Result<Self, ZooError> {
        let spec = spec.trim();
        let (head, args) = match spec.find('(') {
            Some(i) if spec.ends_with(')') => (&spec[..i], Some(&spec[i + 1..spec.len() - 1])),
            _ => (spec, None),
        };
        let nums = |a: Option<&str>| -> Result<Vec<C64>, ZooError> {
            a.map(|s| s.split(',').map(parse_complex).collect()).unwrap_or(Ok(vec![]))
        };
        let v = nums(args)?;
        match (head, v.as_slice()) {
            ("modified-principal", []) => Ok(Self::modified_principal(b)),
            ("modified-principal-real", []) => Ok(Self::modified_principal_real(b)),
            ("pure-qt", []) => Ok(Self::pure_qt(b)),
            ("principal-limit", []) => Self::principal_limit(b, 1e3),
            ("principal-limit", [m]) => Self::principal_limit(b, m.re),
            ("principal", []) => Ok(Self::principal_exact(b)),
            ("g-invariant", [m]) => Self::g_invariant(b, *m),
            ("custom", [l, m]) => Self::custom(b, *l, *m),
            _ => Err(ZooError::Unknown(spec.to_string())),
        }
    }

    /// The same `(λ, μ)` family member in the real normalization of `su₂`
    /// (r rescaled by `−i`). The modified principal model moves to `μ = i`.
    pub fn real_variant(&self) -> Result<Self, ZooError> {
        match self.mu {
            Mu::Infinite => Ok(self.clone()),
            Mu::Finite(mu) => {
                let mu = if self.name == "modified-principal" { I } else { mu };
                Self::new(format!("{}-real", self.name), self.bialgebra.clone(), self.lambda, Mu::Finite(mu), -I)
            }
        }
    }

    /// Splitting coefficients `(α, β, s)` with `E_e⁻¹ = α R + β K₀⁻¹`, where `R`
    /// and `K₀⁻¹` belong to the unscaled bialgebra and `s` scales r.
    pub fn coefficients(&self) -> (C64, C64, C64) {
        match self.mu {
            Mu::Finite(mu) => ((self.lambda + 1.0) * self.rescale, mu * self.rescale, self.rescale),
            Mu::Infinite => (ZERO, ONE, ZERO),
        }
    }

    pub fn is_g_invariant(&self) -> bool {
        matches!(self.mu, Mu::Infinite) || self.lambda.norm() < 1e-14
    }

    pub fn mu_value(&self) -> Option<C64> {
        match self.mu {
            Mu::Finite(m) => Some(m),
            Mu::Infinite => None,
        }
    }
}

/// Accepts `1`, `-0.5`, `2i`, `-i`, `1+2i`, `0.5-0.25i`, `1e-3`.
pub fn parse_complex(s: &str) -> Result<C64, ZooError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || ZooError::BadNumber(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) {
        // find the split between real and imaginary parts (a sign not after 'e')
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'e' && bytes[k - 1] != b'E' {
                split = Some(k);
                break;
            }
        }
        let im_of = |x: &str| -> Result<f64, ZooError> {
            match x {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                v => v.parse().map_err(|_| bad()),
            }
        };
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                Ok(C64::new(re, im_of(&body[k..])?))
            }
            None => Ok(C64::new(0.0, im_of(body)?)),
        }
    } else {
        Ok(C64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parser() {
        assert_eq!(parse_complex("1").unwrap(), C64::new(1.0, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1+2i").unwrap(), C64::new(1.0, 2.0));
        assert_eq!(parse_complex("-0.5+0.5i").unwrap(), C64::new(-0.5, 0.5));
        assert_eq!(parse_complex("1e-3-2e-1i").unwrap(), C64::new(1e-3, -0.2));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn preset_names() {
        let p = ModelPreset::parse("modified-principal", make_su2()).unwrap();
        assert_eq!((p.lambda, p.mu), (-ONE, Mu::Finite(ONE)));
        let p = ModelPreset::parse("custom(0, 0)", make_sl2r()).unwrap();
        assert!(p.is_g_invariant());
        assert!(ModelPreset::parse("custom(0,-0.5)", make_sl2r()).is_err());
        assert!(ModelPreset::parse("g-invariant(-0.5)", make_sl2r()).is_err());
        assert!(ModelPreset::parse("bogus", make_sl2r()).is_err());
    }
}
