//! Large-μ limits of the `λ = 0` family on `su₂` with r rescaled by `1/μ`.
//!
//! The primal Lagrangian tends to the Killing-form principal model
//! `K(u⁻¹u₋, u⁻¹u₊)`. On the dual side the coordinates `t⃗` are scaled by
//! `1/μ` (so `t = exp(−i t⃗/μ)` in m) and `μ² L̂` tends to the abelian
//! `2 t⃗₊·t⃗₋`. Both deviations are expected to fall off as `μ⁻¹`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::duality::{DualityError, Splitting};
use crate::group::{su2_from_ab, su2_rep};
use crate::lie::{CMat, CVec, C64};
use crate::zoo::{make_su2, ModelPreset, ZooError};

#[derive(Debug, thiserror::Error)]
pub enum LimitError {
    #[error(transparent)]
    Zoo(#[from] ZooError),
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error("need at least two μ values, got {0}")]
    TooFew(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitRow {
    pub mu: f64,
    pub primal_deviation: f64,
    pub dual_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitSweep {
    pub rows: Vec<LimitRow>,
    pub primal_slope: f64,
    pub dual_slope: f64,
}

/// Random sample points shared by every μ so that only μ changes.
#[derive(Clone, Debug)]
pub struct LimitSamples {
    pub u: Vec<(C64, C64)>,
    pub xi: Vec<(CVec, CVec)>,
    pub t: Vec<([f64; 3], [f64; 3], [f64; 3])>,
}

impl LimitSamples {
    pub fn draw(count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r3 = |rng: &mut ChaCha8Rng| -> [f64; 3] { std::array::from_fn(|_| rng.random_range(-1.0..1.0)) };
        let mut u = Vec::with_capacity(count);
        let mut xi = Vec::with_capacity(count);
        let mut t = Vec::with_capacity(count);
        for _ in 0..count {
            let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = q.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
            u.push((C64::new(q[0] / n, q[1] / n), C64::new(q[2] / n, q[3] / n)));
            let (a, b) = (r3(&mut rng), r3(&mut rng));
            xi.push((real3(&a), real3(&b)));
            t.push((r3(&mut rng), r3(&mut rng), r3(&mut rng)));
        }
        LimitSamples { u, xi, t }
    }
}

fn real3(v: &[f64; 3]) -> CVec {
    CVec::from_iterator(3, v.iter().map(|x| C64::new(*x, 0.0)))
}

fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `λ = 0` with r rescaled by `1/μ`.
pub fn limit_splitting(mu: f64) -> Result<Splitting, LimitError> {
    Ok(Splitting::new(&ModelPreset::principal_limit(make_su2(), mu)?)?)
}

/// `max |L_μ(u; ξ₊, ξ₋) − K(ξ₋, ξ₊)| / (|ξ₊||ξ₋|)` over the samples.
pub fn primal_deviation(mu: f64, samples: &LimitSamples) -> Result<f64, LimitError> {
    let split = limit_splitting(mu)?;
    let base = make_su2();
    let rep = su2_rep();
    let mut worst: f64 = 0.0;
    for ((a, b), (xp, xm)) in samples.u.iter().zip(&samples.xi) {
        let ad_u = rep.ad(&su2_from_ab(*a, *b));
        let (_, l) = split.lagrangian_g(&ad_u, xp, xm)?;
        let k = base.killing(xm, xp);
        worst = worst.max((l - k).norm() / (xp.norm() * xm.norm()));
    }
    Ok(worst)
}

/// `max |μ² L̂_μ − 2 t⃗₊·t⃗₋| / (|t⃗₊||t⃗₋|)` with `t = exp(−i t⃗/μ)` in m.
pub fn dual_deviation(mu: f64, samples: &LimitSamples) -> Result<f64, LimitError> {
    let split = limit_splitting(mu)?;
    let dbl = &split.double;
    let to_m = |v: &[f64; 3], s: f64| CVec::from_iterator(3, v.iter().map(|x| C64::new(0.0, -x * s)));
    let mut worst: f64 = 0.0;
    for (t, tp, tm) in &samples.t {
        let phi = to_m(t, 1.0 / mu);
        let ad_phi = dbl.d.ad(&dbl.embed_m(&phi));
        let ad_t = ad_phi.clone().exp();
        let ad_tinv = (-ad_phi.clone()).exp();
        // t⁻¹t± = Σ (−ad_φ)ᵏ/(k+1)! φ±, with the bracket of m inside the double
        let n = split.dim();
        let left = |d: &CVec| dexp_left(&ad_phi, &dbl.embed_m(d)).rows(n, n).into_owned();
        let (phi_p, phi_m) = (left(&to_m(tp, 1.0 / mu)), left(&to_m(tm, 1.0 / mu)));
        let (_, l) = split.lagrangian_dual(&ad_t, &ad_tinv, &phi_p, &phi_m)?;
        let abelian: f64 = 2.0 * tp.iter().zip(tm).map(|(a, b)| a * b).sum::<f64>();
        let dev = (l * (mu * mu) - abelian).norm() / (norm3(tp) * norm3(tm));
        worst = worst.max(dev);
    }
    Ok(worst)
}

fn dexp_left(ad: &CMat, d: &CVec) -> CVec {
    let mut term = d.clone();
    let mut sum = d.clone();
    for k in 1..30 {
        term = -(ad * &term) / C64::new((k + 1) as f64, 0.0);
        sum += &term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn limit_sweep(mus: &[f64], samples: usize, seed: u64) -> Result<LimitSweep, LimitError> {
    if mus.len() < 2 {
        return Err(LimitError::TooFew(mus.len()));
    }
    let s = LimitSamples::draw(samples, seed);
    let mut rows = Vec::with_capacity(mus.len());
    for &mu in mus {
        rows.push(LimitRow { mu, primal_deviation: primal_deviation(mu, &s)?, dual_deviation: dual_deviation(mu, &s)? });
    }
    let pd: Vec<f64> = rows.iter().map(|r| r.primal_deviation).collect();
    let dd: Vec<f64> = rows.iter().map(|r| r.dual_deviation).collect();
    Ok(LimitSweep { primal_slope: log_log_slope(mus, &pd), dual_slope: log_log_slope(mus, &dd), rows })
}
