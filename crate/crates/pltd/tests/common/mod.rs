#![allow(dead_code)]

use pltd::group::{exp2, su2_from_ab, Mat2};
use pltd::lie::{CMat, CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn rand_cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| rand_c(rng)))
}

pub fn rand_rvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)))
}

/// Uniform on SU(2) via a normalized Gaussian-ish 4-vector.
pub fn rand_su2(rng: &mut ChaCha8Rng) -> (C64, C64, Mat2) {
    loop {
        let v: [f64; 4] = [0; 4].map(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n < 1.0 {
            let a = C64::new(v[0] / n, v[1] / n);
            let b = C64::new(v[2] / n, v[3] / n);
            return (a, b, su2_from_ab(a, b));
        }
    }
}

/// exp of a random real traceless matrix with entries in (−s, s).
pub fn rand_sl2r(rng: &mut ChaCha8Rng, s: f64) -> Mat2 {
    let h = rng.random_range(-s..s);
    let x = rng.random_range(-s..s);
    let y = rng.random_range(-s..s);
    exp2(&Mat2::new(C64::new(h, 0.0), C64::new(x, 0.0), C64::new(y, 0.0), C64::new(-h, 0.0)))
}

/// Random element of SL(2,C) near the identity scale `s`.
pub fn rand_sl2c(rng: &mut ChaCha8Rng, s: f64) -> Mat2 {
    let a = rand_c(rng) * s;
    let b = rand_c(rng) * s;
    let c = rand_c(rng) * s;
    exp2(&Mat2::new(a, b, c, -a))
}

pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}
