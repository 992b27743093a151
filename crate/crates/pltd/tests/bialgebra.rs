use pltd::bialgebra::{cybe_residual, dual_structure, DoubleAlgebra, QuasiBialgebra};
use pltd::lie::{max_abs, max_abs_vec, pair, CMat, CVec, LieAlgebra, C64, I, ONE, ZERO};
use pltd::zoo::{make_sl2r, make_su2, sl2r_dual_table, su2_dual_table};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| rand_c(rng)))
}

/// Independent CYBE evaluation: build r₁₂, r₁₃, r₂₃ as explicit rank-3 tensors
/// and take commutators slot by slot.
fn cybe_naive(g: &LieAlgebra, r: &CMat) -> f64 {
    let n = g.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = ZERO;
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            for d in 0..n {
                                // r12 r13: (e_a ⊗ e_b ⊗ 1)(e_c ⊗ 1 ⊗ e_d) → [e_a,e_c] ⊗ e_b ⊗ e_d
                                if b == j && d == k {
                                    acc += r[(a, b)] * r[(c, d)] * g.sc(a, c, i);
                                }
                                // r12 r23: e_a ⊗ [e_b, e_c] ⊗ e_d
                                if a == i && d == k {
                                    acc += r[(a, b)] * r[(c, d)] * g.sc(b, c, j);
                                }
                                // r13 r23: e_a ⊗ e_c ⊗ [e_b, e_d]
                                if a == i && c == j {
                                    acc += r[(a, b)] * r[(c, d)] * g.sc(b, d, k);
                                }
                            }
                        }
                    }
                }
                worst = worst.max(acc.norm());
            }
        }
    }
    worst
}

#[test]
fn cybe_shipped_models() {
    assert!(make_sl2r().cybe_residual() < 1e-13);
    assert!(make_su2().cybe_residual() < 1e-13);
    assert_eq!(cybe_residual(&make_su2().g, &CMat::zeros(3, 3)), 0.0);
}

#[test]
fn cybe_matches_naive_oracle_on_random_antisymmetric_r() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = make_su2().g;
    for _ in 0..5 {
        let a = CMat::from_fn(3, 3, |_, _| rand_c(&mut rng));
        let r = &a - a.transpose();
        let fast = cybe_residual(&g, &r);
        let slow = cybe_naive(&g, &r);
        assert!((fast - slow).abs() < 1e-13, "{fast} vs {slow}");
    }
}

#[test]
fn cybe_invariant_under_minus_r21() {
    for b in [make_sl2r(), make_su2()] {
        let r21 = -b.r.transpose();
        assert!(cybe_residual(&b.g, &r21) < 1e-12);
    }
}

#[test]
fn sl2_cobracket_values() {
    let b = make_sl2r();
    // δH = 0
    assert!(max_abs(&b.cobracket(&b.g.basis(0))) < 1e-15);
    assert!(max_abs(&b.cobracket(&CVec::zeros(3))) < 1e-15);
    // δX₊ = ½ X₊∧H = ½(X₊⊗H − H⊗X₊): expand ad_{X₊} on both slots by hand
    let d = b.cobracket(&b.g.basis(1));
    let mut expect = CMat::zeros(3, 3);
    expect[(1, 0)] = C64::new(0.5, 0.0);
    expect[(0, 1)] = C64::new(-0.5, 0.0);
    let anti = (&d - d.transpose()) * C64::new(0.5, 0.0);
    assert!(max_abs(&(anti - expect)) < 1e-15, "{d}");
}

#[test]
fn k_and_r2_maps() {
    let b = make_sl2r();
    let k = &b.k;
    // K(H)=2φ, K(X₊)=ψ₋, K(X₋)=ψ₊
    let col = |j: usize| k.column(j).into_owned();
    assert!(max_abs_vec(&(col(0) - b.m.basis(0) * C64::new(2.0, 0.0))) < 1e-14);
    assert!(max_abs_vec(&(col(1) - b.m.basis(2))) < 1e-14);
    assert!(max_abs_vec(&(col(2) - b.m.basis(1))) < 1e-14);
    let r2 = b.r2();
    assert!(max_abs_vec(&(r2.column(0).into_owned() - b.g.basis(0) * C64::new(0.25, 0.0))) < 1e-15);
    assert!(max_abs_vec(&r2.column(1).into_owned()) < 1e-15);
    assert!(max_abs_vec(&(r2.column(2).into_owned() - b.g.basis(1))) < 1e-15);

    let s = make_su2();
    assert!(max_abs(&(&s.k + CMat::identity(3, 3) * C64::new(0.5, 0.0))) < 1e-14);
    // r₂(f_j) = −e_j + i e_i ε_{ij3}
    for j in 0..3 {
        let mut e = -s.g.basis(j);
        for i in 0..3 {
            e[i] += I * pltd::lie::eps(i, j, 2);
        }
        assert!(max_abs_vec(&(s.r2().column(j).into_owned() - e)) < 1e-15);
    }
}

#[test]
fn dual_matches_hard_coded_tables() {
    for (b, t) in [(make_sl2r(), sl2r_dual_table()), (make_su2(), su2_dual_table())] {
        let d = dual_structure(&b.g, &b.r).unwrap();
        let diff = d.constants().iter().zip(t.constants()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-13);
        assert!(d.jacobi_residual() < 1e-12);
    }
}

#[test]
fn abelian_dual_for_zero_r() {
    let g = make_su2().g;
    let d = dual_structure(&g, &CMat::zeros(3, 3)).unwrap();
    assert!(d.constants().iter().all(|z| *z == ZERO));
}

#[test]
fn su2_dual_is_imaginary() {
    let b = make_su2();
    let z = b.m.bracket(&b.m.basis(0), &b.m.basis(2));
    // [f₁, f₃] = i f₁
    assert!((z - b.m.basis(0) * I).norm() < 1e-15);
}

#[test]
fn double_invariants() {
    for b in [make_sl2r(), make_su2()] {
        let d = b.double().unwrap();
        assert!(d.d.jacobi_residual() < 1e-12);
        assert!(d.invariance_residual() < 1e-12);
        assert_eq!(d.isotropy_residual(), 0.0);
        let xi = b.g.basis(1);
        let phi = b.m.basis(1);
        assert_eq!(d.pair(&d.embed_g(&xi), &d.embed_m(&phi)), ONE);
        assert_eq!(d.pair(&d.embed_g(&xi), &d.embed_g(&xi)), ZERO);
    }
}

#[test]
fn double_invariance_brute_force() {
    let b = make_su2();
    let d = b.double().unwrap();
    let mut worst = 0.0f64;
    for x in 0..6 {
        for a in 0..6 {
            for c in 0..6 {
                let (ex, ea, ec) = (d.d.basis(x), d.d.basis(a), d.d.basis(c));
                let v = pair(&d.pairing, &d.bracket(&ex, &ea), &ec).unwrap()
                    + pair(&d.pairing, &ea, &d.bracket(&ex, &ec)).unwrap();
                worst = worst.max(v.norm());
            }
        }
    }
    assert!(worst < 1e-13);
}

#[test]
fn double_rejects_incompatible_m() {
    // m with arbitrary brackets does not form a double with g
    let g = make_su2().g;
    let m = make_sl2r().g;
    assert!(DoubleAlgebra::build(&g, &m).is_err());
}

#[test]
fn iso_lr_is_homomorphism_and_transports_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for b in [make_sl2r(), make_su2()] {
        let d = b.double().unwrap();
        let xi = rand_vec(&mut rng, 3);
        let (l, r) = b.iso_lr(&d.embed_g(&xi));
        assert!(max_abs_vec(&(l - &xi)) < 1e-15 && max_abs_vec(&(r - &xi)) < 1e-15);
        for _ in 0..20 {
            let x = rand_vec(&mut rng, 6);
            let y = rand_vec(&mut rng, 6);
            let (zl, zr) = b.iso_lr(&d.bracket(&x, &y));
            let (xl, xr) = b.iso_lr(&x);
            let (yl, yr) = b.iso_lr(&y);
            assert!(max_abs_vec(&(zl - b.g.bracket(&xl, &yl))) < 1e-12);
            assert!(max_abs_vec(&(zr - b.g.bracket(&xr, &yr))) < 1e-12);
            assert!((d.pair(&x, &y) - b.iso_pairing(&x, &y)).norm() < 1e-12);
        }
    }
}

#[test]
fn double_independent_of_basis_scaling() {
    // g basis scaled by c, dual basis by 1/c
    let b = make_sl2r();
    let c = 2.0;
    let g2 = b.g.scaled(C64::new(c, 0.0));
    let r2 = &b.r * C64::new(1.0 / (c * c), 0.0);
    let b2 = QuasiBialgebra::new(g2, r2).unwrap();
    let d1 = b.double().unwrap();
    let d2 = b2.double().unwrap();
    // map x = ξ⊕φ in old coordinates to (ξ/c) ⊕ (cφ) in new ones
    let t = CMat::from_fn(6, 6, |i, j| {
        if i != j {
            ZERO
        } else if i < 3 {
            C64::new(1.0 / c, 0.0)
        } else {
            C64::new(c, 0.0)
        }
    });
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let x = rand_vec(&mut rng, 6);
        let y = rand_vec(&mut rng, 6);
        let lhs = &t * d1.bracket(&x, &y);
        let rhs = d2.bracket(&(&t * &x), &(&t * &y));
        assert!(max_abs_vec(&(lhs - rhs)) < 1e-13);
        assert!((d1.pair(&x, &y) - d2.pair(&(&t * &x), &(&t * &y))).norm() < 1e-13);
    }
}

#[test]
fn json_round_trip() {
    let b = make_su2();
    let back = QuasiBialgebra::from_json(&b.to_json()).unwrap();
    assert!(max_abs(&(back.r - &b.r)) == 0.0);
}

#[test]
fn singular_r_is_not_factorisable() {
    let g = make_sl2r().g;
    let mut r = CMat::zeros(3, 3);
    r[(1, 2)] = ONE;
    r[(2, 1)] = -ONE;
    // antisymmetric part only: symmetric part vanishes
    assert!(QuasiBialgebra::new(g, r).is_err());
}

proptest! {
    #[test]
    fn ad_matches_bracket(xs in proptest::collection::vec(-1.0f64..1.0, 12)) {
        let g = make_sl2r().g;
        let x = CVec::from_iterator(3, (0..3).map(|i| C64::new(xs[i], xs[3 + i])));
        let y = CVec::from_iterator(3, (0..3).map(|i| C64::new(xs[6 + i], xs[9 + i])));
        prop_assert!(max_abs_vec(&(g.ad(&x) * &y - g.bracket(&x, &y))) < 1e-13);
    }

    #[test]
    fn pairing_bilinear(xs in proptest::collection::vec(-1.0f64..1.0, 20)) {
        let d = make_su2().double().unwrap();
        let a = CVec::from_iterator(6, (0..6).map(|i| C64::new(xs[i], 0.0)));
        let b = CVec::from_iterator(6, (0..6).map(|i| C64::new(xs[6 + i], 0.0)));
        let cc = CVec::from_iterator(6, (0..6).map(|i| C64::new(xs[12 + i % 6], 0.0)));
        let (s, t) = (C64::new(xs[18], 0.0), C64::new(xs[19], 0.0));
        let lhs = d.pair(&(&a * s + &b * t), &cc);
        let rhs = d.pair(&a, &cc) * s + d.pair(&b, &cc) * t;
        prop_assert!((lhs - rhs).norm() < 1e-13);
    }
}

#[test]
fn report_is_clean_for_shipped_models() {
    for b in [make_sl2r(), make_su2()] {
        let r = b.report().unwrap();
        assert!(r.max() < 1e-12, "{r:?}");
    }
}
