//! Acceptance suite. Prints one PASS/FAIL line per criterion (with its
//! sub-checks indented) and asserts that the set of failing criteria is
//! exactly the known set below. Run with `--nocapture` to see the report.

mod common;

use common::*;
use pltd::bialgebra::{dual_structure, QuasiBialgebra};
use pltd::duality::{eps_matrix, invert_eps_matrix, Splitting};
use pltd::field::{dual_constancy, Boundary, DualNodeData, Field, LoopState};
use pltd::group::{id2, pi_r, su2_pi_r_closed, su2_rep, Mat2};
use pltd::lie::{max_abs, max_abs_vec, CMat, CVec, LieAlgebra, C64, ONE, ZERO};
use pltd::limits::limit_sweep;
use pltd::particle::*;
use pltd::zoo::{make_sl2r, make_su2, su2_dual_table, ModelPreset, Mu};

/// Criteria that fail against the literal reference values. The first is the
/// sign of the sl₂* table; the second inherits it through p(t).
const KNOWN_FAILURES: [u8; 2] = [1, 5];

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn mat_err(a: &Mat2, b: &Mat2) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct Check {
    label: String,
    value: f64,
    bound: String,
    pass: bool,
}

struct Criterion {
    id: u8,
    name: &'static str,
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: u8, name: &'static str) -> Self {
        Criterion { id, name, checks: vec![], notes: vec![] }
    }

    fn below(&mut self, label: impl Into<String>, value: f64, tol: f64) {
        let pass = value < tol;
        self.checks.push(Check { label: label.into(), value, bound: format!("< {tol:e}"), pass });
    }

    fn above(&mut self, label: impl Into<String>, value: f64, tol: f64) {
        let pass = value > tol;
        self.checks.push(Check { label: label.into(), value, bound: format!("> {tol:e}"), pass });
    }

    fn near(&mut self, label: impl Into<String>, value: f64, target: f64, tol: f64) {
        let pass = (value - target).abs() <= tol;
        self.checks.push(Check { label: label.into(), value, bound: format!("= {target} ± {tol}"), pass });
    }

    fn truth(&mut self, label: impl Into<String>, ok: bool) {
        self.checks.push(Check { label: label.into(), value: ok as u8 as f64, bound: "= 1".into(), pass: ok });
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn print(&self) {
        println!("{} [{}] {}", if self.pass() { "PASS" } else { "FAIL" }, self.id, self.name);
        for ch in &self.checks {
            println!("    {} {}: {:.3e} ({})", if ch.pass { "ok  " } else { "FAIL" }, ch.label, ch.value, ch.bound);
        }
        for n in &self.notes {
            println!("    note: {n}");
        }
    }
}

/// Reference `sl₂*` table: `[φ, ψ±] = ½ψ±`, `[ψ₊, ψ₋] = 0`.
fn sl2_dual_reference() -> LieAlgebra {
    let mut cs = vec![ZERO; 27];
    for k in [1usize, 2] {
        cs[k * 3 + k] = c(0.5);
        cs[(k * 3) * 3 + k] = c(-0.5);
    }
    LieAlgebra::new(3, cs, vec!["phi".into(), "psi+".into(), "psi-".into()], true).unwrap()
}

fn table_diff(a: &LieAlgebra, b: &LieAlgebra) -> f64 {
    a.constants().iter().zip(b.constants()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn algebraic() -> Criterion {
    let mut cr = Criterion::new(1, "algebraic validation");
    let models: [(&str, QuasiBialgebra, LieAlgebra); 2] =
        [("sl2r", make_sl2r(), sl2_dual_reference()), ("su2", make_su2(), su2_dual_table())];
    for (name, b, table) in models {
        cr.below(format!("{name} CYBE"), b.cybe_residual(), 1e-13);
        cr.below(format!("{name} ad-invariance of 2r+"), b.invariance_residual(), 1e-12);
        let dual = dual_structure(&b.g, &b.r).unwrap();
        cr.below(format!("{name} dual brackets vs table"), table_diff(&dual, &table), 1e-13);
        let d = b.double().unwrap();
        cr.below(format!("{name} double Jacobi"), d.d.jacobi_residual(), 1e-12);
        let (hom, pairing) = b.iso_residuals(&d);
        cr.below(format!("{name} gL+gR homomorphism defect"), hom, 1e-12);
        cr.below(format!("{name} gL+gR pairing transport"), pairing, 1e-12);
    }
    let flipped = {
        let t = sl2_dual_reference();
        LieAlgebra::new(3, t.constants().iter().map(|z| -z).collect(), t.labels().to_vec(), true).unwrap()
    };
    let derived = dual_structure(&make_sl2r().g, &make_sl2r().r).unwrap();
    cr.note(format!(
        "derived sl2r table has [phi, psi±] = -1/2 psi±; diff against the sign-flipped reference table {:.1e}",
        table_diff(&derived, &flipped)
    ));
    cr
}

fn splitting_suite() -> Criterion {
    let mut cr = Criterion::new(2, "splitting suite (100 random complex λ, μ)");
    let mut rng = rng(2);
    let (mut orth, mut diag, mut proj) = (0.0f64, 0.0f64, 0.0f64);
    let mut count = 0;
    while count < 100 {
        let l = rand_c(&mut rng) * 2.0;
        let m = rand_c(&mut rng) * 2.0;
        let cond = l + 1.0 + m * 2.0;
        if cond.norm() <= 0.1 {
            continue;
        }
        count += 1;
        for b in [make_sl2r(), make_su2()] {
            let s = Splitting::new(&ModelPreset::custom(b.clone(), l, m).unwrap()).unwrap();
            orth = orth.max(s.orthogonality_residual());
            proj = proj.max(s.projector_residual());
            let phi = rand_cvec(&mut rng, 3);
            let kp = b.killing_inv(&phi, &phi) * cond;
            let (xp, xm) = (&s.basis_plus * &phi, &s.basis_minus * &phi);
            diag = diag.max((s.double.pair(&xp, &xp) - kp).norm()).max((s.double.pair(&xm, &xm) + kp).norm());
        }
    }
    cr.below("E± orthogonality", orth, 1e-10);
    cr.below("diagonal pairings ±(λ+1+2μ)K⁻¹(φ,φ)", diag, 1e-10);
    cr.below("projector identities", proj, 1e-12);
    let guarded = ModelPreset::custom(make_sl2r(), c(-0.2), c(-0.4)).is_err();
    let mut p = ModelPreset::pure_qt(make_su2());
    p.mu = Mu::Finite(c(-0.5));
    cr.truth("rank drop at λ+1+2μ = 0 detected", guarded && Splitting::new(&p).is_err());
    cr
}

fn graph_paths() -> Criterion {
    let mut cr = Criterion::new(3, "graph-coordinate path equivalence");
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    for p in [
        ModelPreset::modified_principal(make_su2()),
        ModelPreset::custom(make_su2(), C64::new(0.4, -0.3), C64::new(1.2, 0.5)).unwrap(),
        ModelPreset::custom(make_sl2r(), c(-0.2), c(0.9)).unwrap(),
    ] {
        let s = Splitting::new(&p).unwrap();
        let rep = s.bialgebra().rep.clone().unwrap();
        let sl2 = p.bialgebra.g.labels()[0] == "H";
        for _ in 0..100 {
            let u = if sl2 { rand_sl2r(&mut rng, 0.8) } else { rand_su2(&mut rng).2 };
            let a = rep.ad(&u);
            let g1 = s.graph_at(&a);
            worst = worst.max(g1.distance(&s.graph_at_general(&a))).max(g1.distance(&s.graph_at_pi(&a)));
        }
    }
    cr.below("generic = general = Π^R forms (100 u per model)", worst, 1e-11);
    let mut inv = 0.0f64;
    for p in [ModelPreset::pure_qt(make_sl2r()), ModelPreset::g_invariant(make_su2(), C64::new(0.3, 0.7)).unwrap()] {
        let s = Splitting::new(&p).unwrap();
        let rep = s.bialgebra().rep.clone().unwrap();
        let sl2 = p.bialgebra.g.labels()[0] == "H";
        for _ in 0..100 {
            let u = if sl2 { rand_sl2r(&mut rng, 1.0) } else { rand_su2(&mut rng).2 };
            inv = inv.max(max_abs(&(&s.graph_at(&rep.ad(&u)).e_inv - &s.e_inv_e)));
        }
    }
    cr.below("λ = 0 graph is u-independent", inv, 1e-12);
    cr
}

/// `1/|a|² (Tr[(1 − π̸) ξ₊ ξ₋] − ½ Tr[π̸ ξ₊] Tr[π̸ ξ₋])`.
fn trace_lagrangian(a: C64, b: C64, xp: &Mat2, xm: &Mat2) -> C64 {
    let bb = b.norm_sqr();
    let pslash = Mat2::new(c(-bb), a.conj() * b, a * b.conj(), c(bb));
    (((Mat2::identity() - pslash) * xp * xm).trace() - (pslash * xp).trace() * (pslash * xm).trace() * 0.5)
        / a.norm_sqr()
}

fn su2_closed_forms() -> Criterion {
    let mut cr = Criterion::new(4, "SU(2) closed forms");
    let b = make_su2();
    let rep = su2_rep();
    let s = Splitting::new(&ModelPreset::modified_principal(b.clone())).unwrap();
    let mut rng = rng(4);
    let (mut pir, mut lag, mut eps_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let (a, bb, u) = rand_su2(&mut rng);
        pir = pir.max(max_abs(&(pi_r(&b, &rep.ad(&u)) - su2_pi_r_closed(a, bb))));
        let (xp, xm) = (rand_rvec(&mut rng, 3), rand_rvec(&mut rng, 3));
        let (l, _) = s.lagrangian_g(&rep.ad(&u), &xp, &xm).unwrap();
        let tr = trace_lagrangian(a, bb, &rep.to_matrix(&xp), &rep.to_matrix(&xm));
        lag = lag.max((l - tr).norm() / tr.norm().max(1e-3));
        // |π| < 1 keeps the ε-matrix invertible
        let pi = [rand_c(&mut rng) * 0.5, rand_c(&mut rng) * 0.5, rand_c(&mut rng) * 0.5];
        let dense = eps_matrix(c(-2.0), &pi).try_inverse().unwrap();
        let closed = invert_eps_matrix(c(-2.0), &pi).unwrap();
        eps_err = eps_err.max(max_abs(&(closed - &dense)) / max_abs(&dense));
    }
    cr.below("Π^R(u) vs closed form (50 random a, b)", pir, 1e-12);
    cr.below("modified-principal Lagrangian vs trace formula (relative)", lag, 1e-10);
    cr.below("ε-matrix inverse vs dense solve (relative)", eps_err, 1e-13);
    cr
}

fn point_particle() -> Criterion {
    let mut cr = Criterion::new(5, "point-particle analytic regression");
    let pt = Particle::new(Splitting::new(&ModelPreset::pure_qt(make_sl2r())).unwrap()).unwrap();
    let u0 = rand_sl2r(&mut rng(5), 0.5);
    let (omega, x0, xb0) = (0.7, 0.4, -0.3);
    let (_, p0) = pure_qt_sl2_solution(&u0, omega, x0, xb0, 0.0, 1.0);
    let traj = pt.integrate(&ParticleState::new(u0, p0.clone()), 1e-3, 1.0).unwrap();
    let end = traj.states.last().unwrap();
    // reference form: e^{−ωt} on ψ₋ and e^{ωt} on ψ₊
    let (u_lit, p_lit) = pure_qt_sl2_solution(&u0, omega, x0, xb0, end.time, -1.0);
    cr.below("pure-qt u(t) at t = 1", mat_err(&end.u, &u_lit), 1e-8);
    cr.below("pure-qt p(t) at t = 1, reference exponents", max_abs_vec(&(&end.p - p_lit)), 1e-8);
    let (_, p_cons) = pure_qt_sl2_solution(&u0, omega, x0, xb0, end.time, 1.0);
    cr.note(format!(
        "p(t) with the exponents exchanged (consistent with the derived bracket): error {:.1e}",
        max_abs_vec(&(&end.p - p_cons))
    ));
    let q0 = pt.charges(&traj.states[0].u, &traj.states[0].p).q_g;
    let qdrift = traj
        .states
        .iter()
        .flat_map(|s| pt.charges(&s.u, &s.p).q_g.into_iter().zip(q0.iter()).map(|(a, b)| (a - b).norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    cr.below("Q_G drift", qdrift, 1e-10);

    let b = make_sl2r();
    let rep = b.rep.clone().unwrap();
    let (h0, om) = (0.3, 1.0);
    let y0 = om * om / 4.0 - h0 * h0;
    let xi0 = CVec::from_column_slice(&[c(h0), ONE, c(y0)]);
    let out = integrate_xi(&b, &rep, &id2(), &xi0, 1e-3, 1.0);
    let inv0 = c(h0 * h0 + y0);
    let (mut herr, mut cas) = (0.0f64, 0.0f64);
    for (t, _, xi) in &out {
        herr = herr.max((xi[0] - riccati_h(c(h0), c(om), *t)).norm());
        cas = cas.max((xi[0] * xi[0] + xi[1] * xi[2] - inv0).norm());
    }
    cr.below("Riccati h(t), h(0) = 0.3, ω = 1", herr, 1e-8);
    cr.below("h² + xy drift", cas, 1e-11);

    let gen = Particle::new(Splitting::new(&ModelPreset::custom(make_su2(), c(0.5), c(0.8)).unwrap()).unwrap()).unwrap();
    let mut r = rng(55);
    let s0 = ParticleState::new(rand_su2(&mut r).2, rand_rvec(&mut r, 3) * c(1.5));
    let reference = gen.integrate(&s0, 1e-4, 1.0).unwrap().states.pop().unwrap();
    let err = |dt: f64| {
        let e = gen.integrate(&s0, dt, 1.0).unwrap().states.pop().unwrap();
        mat_err(&e.u, &reference.u).max(max_abs_vec(&(&e.p - &reference.p)))
    };
    let order = (err(0.1) / err(0.025)).ln() / 4f64.ln();
    cr.near("observed integrator order", order, 4.0, 0.3);

    let su2 = make_su2();
    let pp = Particle::new(Splitting::new(&ModelPreset::principal_exact(su2.clone())).unwrap()).unwrap();
    let mut r = rng(56);
    let u0 = rand_su2(&mut r).2;
    let pbar = rand_rvec(&mut r, 3);
    let tr = pp.integrate(&ParticleState::new(u0, pbar.clone()), 1e-2, 1.0).unwrap();
    let perr =
        tr.states.iter().map(|s| mat_err(&s.u, &principal_solution(&su2, &su2_rep(), &u0, &pbar, s.time))).fold(0.0, f64::max);
    cr.below("principal-limit u(t) = u(0) exp(−tK⁻¹p̄)", perr, 1e-12);
    cr
}

fn su2_field(p: ModelPreset, n: usize, bc: Boundary) -> Field {
    Field::from_preset(&p, n, bc).unwrap()
}

fn two_wave(f: &Field, amp: f64) -> LoopState {
    f.two_wave(amp, [1.0, -0.5, 0.3], [0.4, 0.7, -0.6])
}

fn field_simulation() -> Criterion {
    let mut cr = Criterion::new(6, "field simulation (su2, N = 64, dt = 2.5e-3, T = 1)");
    let mp = || ModelPreset::modified_principal(make_su2());
    let f = su2_field(mp(), 64, Boundary::DoubleNeumann);
    let (run, _) = f.run(&two_wave(&f, 0.3), 2.5e-3, 1.0, &[], 1).unwrap();
    let h0 = run.rows[0].hamiltonian;
    let drift = ((run.rows.last().unwrap().hamiltonian - h0) / h0).abs();
    let excursion = run.rows.iter().map(|r| ((r.hamiltonian - h0) / h0).abs()).fold(0.0, f64::max);
    cr.below("Hamiltonian relative drift at T (amplitude 0.3)", drift, 1e-6);
    cr.note(format!("maximum relative excursion over the run {excursion:.1e}"));
    cr.below("duality gap", run.rows.iter().map(|r| r.duality_gap).fold(0.0, f64::max), 1e-9);

    let residuals = |n: usize| {
        let f = su2_field(mp(), n, Boundary::DoubleNeumann);
        let (run, _) = f.run(&two_wave(&f, 0.5), 0.16 / n as f64, 0.5, &[], 1).unwrap();
        run.rows.iter().fold((0.0f64, 0.0f64), |(a, b), r| (a.max(r.eom_residual_g), b.max(r.eom_residual_dual)))
    };
    let (g64, d64) = residuals(64);
    let (g128, d128) = residuals(128);
    cr.near("G-side EOM residual ratio, N 64 → 128", g64 / g128, 4.0, 0.8);
    cr.near("dual EOM residual ratio, N 64 → 128", d64 / d128, 4.0, 0.8);

    let f = su2_field(mp(), 64, Boundary::Free);
    let (_, _, u0) = rand_su2(&mut rng(6));
    let p0 = CVec::from_column_slice(&[c(0.3), c(-0.2), c(0.4)]);
    let mut st = f.init_pointlike(&u0, &p0).unwrap();
    let xs = f.grid();
    let mid = f.n / 2;
    let mut spread = 0.0f64;
    for _ in 0..400 {
        st = f.step(&st, 2.5e-3).unwrap();
        let nodes = f.factorized(&st).unwrap();
        for (x, nd) in xs.iter().zip(&nodes) {
            if *x >= st.time && *x <= std::f64::consts::PI - st.time {
                spread = spread.max(max_abs_vec(&(&nd.phi - &nodes[mid].phi)));
            }
        }
    }
    cr.below("pointlike: s_x s⁻¹ spread inside the domain of dependence", spread, 1e-8);
    let inner: Vec<DualNodeData> = xs
        .iter()
        .zip(f.dual_factorized(&st).unwrap())
        .filter(|(x, _)| **x >= 1.0 && **x <= std::f64::consts::PI - 1.0)
        .map(|p| p.1)
        .collect();
    let (da, dc) = dual_constancy(&f, &inner).unwrap();
    cr.below("pointlike: dual constancy constraints", da.max(dc), 1e-8);
    cr.note("free ends feed an O(1e-5) boundary layer inward at unit speed; those nodes are excluded");

    let gi = su2_field(ModelPreset::g_invariant(make_su2(), C64::new(-0.5, 0.5)).unwrap(), 64, Boundary::DoubleNeumann);
    let deltas: Vec<CVec> = (0..3).map(|i| gi.split.double.d.basis(i)).collect();
    let (run, _) = gi.run(&two_wave(&gi, 0.3), 2.5e-3, 1.0, &deltas, 1).unwrap();
    let idrift = (0..3)
        .map(|i| run.rows.iter().map(|r| (r.i_delta[i] - run.rows[0].i_delta[i]).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    cr.below("λ = 0: I_δ drift, δ ∈ g", idrift, 1e-7);
    cr
}

fn point_phase() -> Criterion {
    let mut cr = Criterion::new(7, "point-phase structure");
    let mut rng = rng(7);
    let (mut inv, mut brk) = (0.0f64, 0.0f64);
    for g in [make_sl2r().g, make_su2().g] {
        for _ in 0..50 {
            let p = rand_rvec(&mut rng, 3);
            let (w, pm) = point_phase_matrices(&g, &p);
            inv = inv.max(max_abs(&(&w * &pm - CMat::identity(6, 6))));
            // {ξ, η} = 2⟨p, [ξ, η]⟩, {ξ, f} = −2⟨f, ξ⟩, {f, f'} = 0
            let pb = pm * c(2.0);
            let (xi, eta) = (rand_rvec(&mut rng, 3), rand_rvec(&mut rng, 3));
            let lhs = (xi.transpose() * pb.view((0, 0), (3, 3)) * &eta)[(0, 0)];
            brk = brk
                .max((lhs - p.dot(&g.bracket(&xi, &eta)) * 2.0).norm())
                .max(max_abs(&(pb.view((0, 3), (3, 3)).into_owned() + CMat::identity(3, 3) * c(2.0))))
                .max(max_abs(&pb.view((3, 3), (3, 3)).into_owned()));
        }
    }
    cr.below("symplectic × Poisson = 1 (50 random p per algebra)", inv, 1e-13);
    cr.below("Poisson blocks vs bracket relations", brk, 1e-13);
    cr
}

fn limits() -> Criterion {
    let mut cr = Criterion::new(8, "large-μ limits");
    let s = limit_sweep(&[10.0, 100.0, 1000.0], 20, 0).unwrap();
    for r in &s.rows {
        cr.note(format!("μ = {}: primal {:.3e}, dual {:.3e}", r.mu, r.primal_deviation, r.dual_deviation));
    }
    cr.near("primal deviation log-log slope", s.primal_slope, -1.0, 0.2);
    cr.near("dual deviation log-log slope", s.dual_slope, -1.0, 0.2);
    cr.above("deviations are nonzero", s.rows.iter().map(|r| r.primal_deviation.min(r.dual_deviation)).fold(f64::MAX, f64::min), 0.0);
    cr
}

#[test]
fn acceptance() {
    let criteria = [algebraic(), splitting_suite(), graph_paths(), su2_closed_forms(), point_particle(), field_simulation(), point_phase(), limits()];
    for c in &criteria {
        c.print();
    }
    let failed: Vec<u8> = criteria.iter().filter(|c| !c.pass()).map(|c| c.id).collect();
    println!("failing: {failed:?} (known: {KNOWN_FAILURES:?})");
    assert_eq!(failed, KNOWN_FAILURES);
    // the known failures must fail only on their literal-value checks
    for c in criteria.iter().filter(|c| !c.pass()) {
        let bad: Vec<&str> = c.checks.iter().filter(|ch| !ch.pass).map(|ch| ch.label.as_str()).collect();
        let expected: &[&str] = match c.id {
            1 => &["sl2r dual brackets vs table"],
            _ => &["pure-qt p(t) at t = 1, reference exponents"],
        };
        assert_eq!(bad, expected);
    }
}
