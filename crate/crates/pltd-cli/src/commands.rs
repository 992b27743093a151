use std::path::PathBuf;

use anyhow::{anyhow, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use pltd::duality::Splitting;
use pltd::field::{Boundary, Field, LoopState};
use pltd::group::{id2, su2_rep, Mat2};
use pltd::lie::{CVec, C64};
use pltd::limits::limit_sweep;
use pltd::particle::{pure_qt_sl2_solution, Particle, ParticleState};
use pltd::zoo::{algebra_by_name, parse_complex, ModelPreset, Mu};

use crate::config::{hex, RunConfig};
use crate::fail::config_error;
use crate::output::{file_name, pretty, Emitted, Table};

/// Result of a command; `failure` carries a numerical breakdown that happened
/// after the output was written.
pub struct Outcome {
    pub summary: Value,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Outcome { summary, failure: None }
    }
}

const REPORT_TOL: f64 = 1e-10;

fn c2j(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn resolve_preset(cfg: &RunConfig) -> Result<ModelPreset> {
    let b = algebra_by_name(cfg.algebra()).map_err(|e| config_error(e.to_string()))?;
    let p = match (&cfg.lambda, &cfg.mu, &cfg.preset) {
        (Some(l), Some(m), None) => {
            let l = parse_complex(l).map_err(|e| config_error(e.to_string()))?;
            let m = parse_complex(m).map_err(|e| config_error(e.to_string()))?;
            ModelPreset::custom(b, l, m)
        }
        (None, None, p) => ModelPreset::parse(p.as_deref().unwrap_or("modified-principal"), b),
        (_, _, Some(_)) => return Err(config_error("give either --preset or --lambda/--mu, not both")),
        _ => return Err(config_error("--lambda and --mu must be given together")),
    };
    p.map_err(|e| config_error(e.to_string()))
}

fn model_json(cfg: &RunConfig, p: &ModelPreset) -> Value {
    let mu = match p.mu {
        Mu::Finite(m) => c2j(m),
        Mu::Infinite => json!("infinity"),
    };
    json!({ "algebra": cfg.algebra(), "preset": p.name, "lambda": c2j(p.lambda), "mu": mu, "rescale": c2j(p.rescale) })
}

fn fill_model(cfg: &mut RunConfig) {
    cfg.algebra = Some(cfg.algebra().to_string());
    if cfg.lambda.is_none() && cfg.preset.is_none() {
        cfg.preset = Some("modified-principal".into());
    }
}

fn splitting(p: &ModelPreset) -> Result<Splitting> {
    Splitting::new(p).map_err(|e| config_error(e.to_string()))
}

pub fn validate(mut cfg: RunConfig) -> Result<Outcome> {
    fill_model(&mut cfg);
    let preset = resolve_preset(&cfg)?;
    let split = splitting(&preset)?;
    let bialgebra = preset.bialgebra.report()?;
    let orthogonality = split.orthogonality_residual();
    let projector = split.projector_residual();
    let worst = bialgebra.max().max(orthogonality).max(projector);
    let ok = worst < REPORT_TOL;
    let report = json!({
        "bialgebra": bialgebra,
        "splitting": { "orthogonality": orthogonality, "projector": projector },
        "max_residual": worst,
        "tolerance": REPORT_TOL,
        "ok": ok,
    });
    let em = Emitted { command: "validate", model: model_json(&cfg, &preset), config: cfg, summary: json!({ "ok": ok }) };
    em.write_report(report)?;
    Ok(Outcome {
        summary: json!({ "ok": ok, "max_residual": worst }),
        failure: (!ok).then(|| format!("max residual {worst:e} exceeds {REPORT_TOL:e}")),
    })
}

fn parse_vector(s: &str, n: usize) -> Result<CVec> {
    let v: Vec<C64> = s.split(',').map(parse_complex).collect::<Result<_, _>>().map_err(|e| config_error(e.to_string()))?;
    if v.len() != n {
        return Err(config_error(format!("expected {n} components, got {}", v.len())));
    }
    Ok(CVec::from_vec(v))
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> CVec {
    CVec::from_iterator(n, (0..n).map(|_| C64::new(rng.random_range(-amp..=amp), 0.0)))
}

fn push_c(row: &mut Vec<f64>, z: C64) {
    row.push(z.re);
    row.push(z.im);
}

fn cols(prefix: &str, n: usize) -> Vec<String> {
    (0..n).flat_map(|i| [format!("{prefix}{i}_re"), format!("{prefix}{i}_im")]).collect()
}

pub fn particle(mut cfg: RunConfig) -> Result<Outcome> {
    fill_model(&mut cfg);
    let dt = cfg.positive("dt", cfg.dt, 1e-3)?;
    let t_end = cfg.positive("T", cfg.t, 1.0)?;
    let every = cfg.every.unwrap_or(1).max(1);
    let amp = cfg.positive("amp", cfg.amp, 0.5)?;
    let init = cfg.init.clone().unwrap_or_else(|| "identity".into());
    (cfg.dt, cfg.t, cfg.every, cfg.amp, cfg.seed) = (Some(dt), Some(t_end), Some(every), Some(amp), Some(cfg.seed()));
    cfg.init = Some(init.clone());
    let preset = resolve_preset(&cfg)?;
    let pt = Particle::new(splitting(&preset)?).map_err(|e| config_error(e.to_string()))?;
    let n = pt.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let u0 = match init.as_str() {
        "identity" => id2(),
        "random" => pt.rep.exp(&uniform(&mut rng, n, amp)),
        other => return Err(config_error(format!("particle init must be identity or random, got '{other}'"))),
    };
    let p0 = match &cfg.p0 {
        Some(s) => parse_vector(s, n)?,
        None => uniform(&mut rng, n, amp),
    };

    // the closed form applies to the pure-qt sl₂ model with real momentum
    let oracle = preset.name == "pure-qt" && cfg.algebra() != "su2" && p0.iter().all(|z| z.im == 0.0);
    let traj = pt.integrate(&ParticleState::new(u0, p0.clone()), dt, t_end)?;

    let mut header = vec!["t".to_string()];
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        header.push(format!("u{i}{j}_re"));
        header.push(format!("u{i}{j}_im"));
    }
    header.extend(cols("p", n));
    header.extend(["H_re".to_string(), "H_im".to_string()]);
    header.extend(cols("Q_G", n));
    header.extend(cols("I_delta", 2 * n));
    if oracle {
        header.extend(["oracle_u_err".to_string(), "oracle_p_err".to_string()]);
    }
    let mut table = Table::new(header);
    let last = traj.states.len() - 1;
    let (mut worst_u, mut worst_p) = (0.0f64, 0.0f64);
    for (k, (s, h)) in traj.states.iter().zip(&traj.hamiltonian).enumerate() {
        let (eu, ep) = if oracle {
            let (u, p) = pure_qt_sl2_solution(&u0, p0[0].re / 2.0, p0[2].re, p0[1].re, s.time, 1.0);
            let eu = (s.u - u).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let ep = (&s.p - p).iter().map(|z| z.norm()).fold(0.0, f64::max);
            worst_u = worst_u.max(eu);
            worst_p = worst_p.max(ep);
            (eu, ep)
        } else {
            (0.0, 0.0)
        };
        if k % every != 0 && k != last {
            continue;
        }
        let mut row = vec![s.time];
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            push_c(&mut row, s.u[(r, c)]);
        }
        for z in s.p.iter() {
            push_c(&mut row, *z);
        }
        push_c(&mut row, *h);
        let ch = pt.charges(&s.u, &s.p);
        for z in ch.q_g.iter().chain(&ch.i_delta) {
            push_c(&mut row, *z);
        }
        if oracle {
            row.push(eu);
            row.push(ep);
        }
        table.rows.push(row);
    }
    let h0 = traj.hamiltonian[0];
    let h_drift = traj.hamiltonian.iter().map(|h| (h - h0).norm()).fold(0.0, f64::max);
    let mut summary = json!({
        "steps": last,
        "t_final": traj.states[last].time,
        "hamiltonian_drift": h_drift,
        "truncated": traj.truncated,
    });
    if oracle {
        summary["oracle_u_err"] = json!(worst_u);
        summary["oracle_p_err"] = json!(worst_p);
    }
    let em = Emitted { command: "particle", model: model_json(&cfg, &preset), config: cfg, summary: summary.clone() };
    em.write_table(&table)?;
    Ok(Outcome { summary, failure: traj.truncated })
}

struct FieldSetup {
    field: Field,
    state: LoopState,
    preset: ModelPreset,
}

fn field_setup(cfg: &mut RunConfig) -> Result<FieldSetup> {
    fill_model(cfg);
    if cfg.algebra() != "su2" {
        return Err(config_error("field simulations run on the su2 double only"));
    }
    let n = cfg.n.unwrap_or(64);
    let bc: Boundary = cfg.bc.as_deref().unwrap_or("double-neumann").parse().map_err(config_error)?;
    let amp = cfg.positive("amp", cfg.amp, 0.3)?;
    let init = cfg.init.clone().unwrap_or_else(|| {
        match bc {
            Boundary::DoubleNeumann => "two-wave",
            Boundary::Periodic => "random",
            Boundary::Free => "pointlike",
        }
        .into()
    });
    cfg.n = Some(n);
    cfg.bc = Some(serde_json::to_value(bc)?.as_str().unwrap_or_default().to_string());
    cfg.amp = Some(amp);
    cfg.init = Some(init.clone());
    cfg.seed = Some(cfg.seed());
    let preset = resolve_preset(cfg)?;
    let field = Field::from_preset(&preset, n, bc).map_err(|e| config_error(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let mut r3 = || -> [f64; 3] { std::array::from_fn(|_| rng.random_range(-1.0..=1.0)) };
    let state = match (init.as_str(), bc) {
        ("two-wave", Boundary::DoubleNeumann | Boundary::Free) => {
            let (cp, cm) = (r3(), r3());
            field.two_wave(amp, cp, cm)
        }
        ("random", Boundary::Periodic | Boundary::Free) => field.random_periodic(amp, cfg.seed()),
        ("pointlike", Boundary::Free) => {
            let u0: Mat2 = su2_rep().exp(&CVec::from_iterator(3, r3().iter().map(|x| C64::new(*x, 0.0))));
            let p = CVec::from_iterator(3, r3().iter().map(|x| C64::new(amp * x, 0.0)));
            field.init_pointlike(&u0, &p)?
        }
        (i, b) => {
            return Err(config_error(format!(
                "init '{i}' does not fit boundary {:?}; use two-wave (double-neumann), random (periodic) or pointlike (free)",
                b
            )))
        }
    };
    Ok(FieldSetup { field, state, preset })
}

pub fn field(mut cfg: RunConfig) -> Result<Outcome> {
    let FieldSetup { field, state, preset } = field_setup(&mut cfg)?;
    let dt = cfg.positive("dt", cfg.dt, 2.5e-3)?;
    let t_end = cfg.positive("T", cfg.t, 1.0)?;
    let every = cfg.every.unwrap_or(10).max(1);
    (cfg.dt, cfg.t, cfg.every) = (Some(dt), Some(t_end), Some(every));
    let deltas: Vec<CVec> = (0..6).map(|i| field.split.double.d.basis(i)).collect();
    let (run, _) = field.run(&state, dt, t_end, &deltas, every)?;
    for w in &run.warnings {
        eprintln!("{}", json!({ "warning": w }));
    }
    let mut header: Vec<String> =
        ["t", "H_total", "eom_res_g", "eom_res_dual", "duality_gap"].iter().map(|s| s.to_string()).collect();
    header.extend((0..deltas.len()).map(|i| format!("I_delta_{i}")));
    header.push("f_d".into());
    let mut table = Table::new(header);
    for r in &run.rows {
        let mut row = vec![r.time, r.hamiltonian, r.eom_residual_g, r.eom_residual_dual, r.duality_gap];
        row.extend(&r.i_delta);
        row.push(r.f_d);
        table.rows.push(row);
    }
    let summary = field_summary(&run.rows, &run.warnings, &run.truncated);
    let em = Emitted { command: "field", model: model_json(&cfg, &preset), config: cfg, summary: summary.clone() };
    em.write_table(&table)?;
    Ok(Outcome { summary, failure: run.truncated })
}

fn field_summary(rows: &[pltd::field::FieldDiagnostics], warnings: &[String], truncated: &Option<String>) -> Value {
    let max = |f: &dyn Fn(&pltd::field::FieldDiagnostics) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let h0 = first.hamiltonian;
    let rel = |h: f64| if h0 != 0.0 { (h - h0).abs() / h0.abs() } else { (h - h0).abs() };
    let i_drift = (0..first.i_delta.len()).map(|j| max(&|r| (r.i_delta[j] - first.i_delta[j]).abs())).collect::<Vec<_>>();
    json!({
        "t_final": last.time,
        "hamiltonian_relative_drift": rel(last.hamiltonian),
        "hamiltonian_max_excursion": max(&|r| rel(r.hamiltonian)),
        "duality_gap_max": max(&|r| r.duality_gap),
        "eom_res_g_max": max(&|r| r.eom_residual_g),
        "eom_res_dual_max": max(&|r| r.eom_residual_dual),
        "i_delta_drift": i_drift,
        "f_d_drift": max(&|r| (r.f_d - first.f_d).abs()),
        "warnings": warnings,
        "truncated": truncated,
    })
}

pub fn duality(mut cfg: RunConfig) -> Result<Outcome> {
    let FieldSetup { field, state, preset } = field_setup(&mut cfg)?;
    let gap = field.duality_check(&state)?;
    let h = field.hamiltonian(&state);
    let dual: Vec<f64> =
        field.dual_factorized(&state)?.iter().map(|d| field.dual_hamiltonian_density(d).re).collect();
    let h_dual = field.integrate(&dual);
    let report = json!({ "duality_gap": gap, "hamiltonian": h, "hamiltonian_dual": h_dual, "nodes": field.nodes() });
    let em = Emitted { command: "duality", model: model_json(&cfg, &preset), config: cfg, summary: report.clone() };
    em.write_report(report.clone())?;
    Ok(Outcome::ok(report))
}

pub fn limits(mut cfg: RunConfig) -> Result<Outcome> {
    let mus_s = cfg.mus.clone().unwrap_or_else(|| "10,100,1000".into());
    let mus: Vec<f64> = mus_s
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| config_error(format!("--mus: {e}")))?;
    if mus.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(config_error("--mus values must be positive"));
    }
    let samples = cfg.samples.unwrap_or(20).max(1);
    (cfg.mus, cfg.samples, cfg.seed) = (Some(mus_s), Some(samples), Some(cfg.seed()));
    let sweep = limit_sweep(&mus, samples, cfg.seed()).map_err(|e| anyhow!(e))?;
    let mut table = Table::new(vec!["mu".into(), "primal_deviation".into(), "dual_deviation".into()]);
    for r in &sweep.rows {
        table.rows.push(vec![r.mu, r.primal_deviation, r.dual_deviation]);
    }
    let summary = json!({ "primal_slope": sweep.primal_slope, "dual_slope": sweep.dual_slope });
    let model = json!({ "algebra": "su2", "family": "lambda = 0, r rescaled by 1/mu" });
    let em = Emitted { command: "limits", model, config: cfg, summary: summary.clone() };
    em.write_table(&table)?;
    Ok(Outcome::ok(summary))
}

/// One replica of a sweep.
struct Job {
    index: usize,
    preset: String,
    seed: u64,
    path: PathBuf,
}

pub fn sweep(mut cfg: RunConfig) -> Result<Outcome> {
    let dir = cfg.out.clone().ok_or_else(|| config_error("sweep needs --out DIR"))?;
    std::fs::create_dir_all(&dir)?;
    let kind = cfg.kind.clone().unwrap_or_else(|| "particle".into());
    if kind != "particle" && kind != "field" {
        return Err(config_error(format!("sweep kind must be particle or field, got '{kind}'")));
    }
    if cfg.lambda.is_some() || cfg.mu.is_some() {
        return Err(config_error("sweep takes --presets (custom(λ,μ) entries allowed), not --lambda/--mu"));
    }
    let presets: Vec<String> = cfg
        .presets
        .clone()
        .or_else(|| cfg.preset.clone())
        .unwrap_or_else(|| "modified-principal".into())
        .split(';')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let replicas = cfg.replicas.unwrap_or(1).max(1);
    (cfg.kind, cfg.replicas, cfg.seed) = (Some(kind.clone()), Some(replicas), Some(cfg.seed()));
    cfg.algebra = Some(cfg.algebra().to_string());
    cfg.presets = Some(presets.join(";"));
    cfg.preset = None;
    // fail fast on bad presets before spawning anything
    for p in &presets {
        let mut c = cfg.clone();
        c.preset = Some(p.clone());
        resolve_preset(&c)?;
    }
    let mut jobs = Vec::new();
    for p in &presets {
        for r in 0..replicas {
            let index = jobs.len();
            let seed = cfg.seed() + r as u64;
            let slug: String = p.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
            jobs.push(Job { index, preset: p.clone(), seed, path: dir.join(format!("{index:03}_{slug}_s{seed}.csv")) });
        }
    }
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(jobs.len()).max(1);
    let mut results: Vec<Option<Value>> = vec![None; jobs.len()];
    for chunk in jobs.chunks(threads) {
        let done: Vec<(usize, Value)> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|job| {
                    let mut c = cfg.clone();
                    c.preset = Some(job.preset.clone());
                    c.presets = None;
                    c.replicas = None;
                    c.kind = None;
                    c.seed = Some(job.seed);
                    c.out = Some(job.path.clone());
                    let kind = kind.clone();
                    s.spawn(move || {
                        let res = if kind == "field" { field(c) } else { particle(c) };
                        let entry = match res {
                            Ok(o) => json!({
                                "status": if o.failure.is_some() { "numerical-failure" } else { "ok" },
                                "failure": o.failure,
                                "summary": o.summary,
                            }),
                            Err(e) => json!({ "status": crate::fail::classify(&e).1, "failure": format!("{e:#}") }),
                        };
                        (job.index, entry)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("replica thread")).collect()
        });
        for (i, v) in done {
            results[i] = Some(v);
        }
    }
    let mut entries = Vec::new();
    let mut failed = 0;
    for (job, res) in jobs.iter().zip(results) {
        let mut e = res.unwrap_or(Value::Null);
        if e["status"] != "ok" {
            failed += 1;
        }
        let digest = std::fs::read(&job.path).ok().map(|b| hex(&<sha2::Sha256 as sha2::Digest>::digest(&b)));
        e["file"] = json!(file_name(&job.path));
        e["sha256"] = json!(digest);
        e["preset"] = json!(job.preset);
        e["seed"] = json!(job.seed);
        entries.push(e);
    }
    let summary = json!({ "replicas": entries.len(), "failed": failed });
    let em = Emitted { command: "sweep", model: json!({ "algebra": cfg.algebra(), "kind": kind }), config: cfg, summary: summary.clone() };
    let mut manifest = json!({
        "tool": "pltd",
        "version": crate::output::VERSION,
        "command": "sweep",
        "config": em.config,
        "config_sha256": em.hash(),
        "replicas": entries,
        "summary": summary,
    });
    manifest["model"] = em.model.clone();
    std::fs::write(dir.join("manifest.json"), pretty(&manifest)?)?;
    Ok(Outcome { summary, failure: (failed > 0).then(|| format!("{failed} replica(s) failed")) })
}
