//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `EXPECTED_FAILURES` are known not to be attainable at
//! desk scale; they are still evaluated at full tolerance and reported, but
//! do not fail the binary. Any other failure, or an expected failure that
//! starts passing, exits non-zero.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::Value;
use tickgate::{audit_reports, run_experiment, ExperimentKind, ExperimentManifest};
use tickgate_core::clockcore::{
    clock_state, free_evolve, make_model, riemann_sum, window_center, ClockModel, CustomParams, Overrides, Regime,
};
use tickgate_core::gatesim::{
    assemble_hamiltonian, default_dt, evolve, refine_dt, trace_distance, GateProgram, JointState, Method,
    DEFAULT_REFINE_TOL,
};
use tickgate_core::limits::{squeezing_report, Verdict};

const EXPECTED_FAILURES: [usize; 2] = [4, 5];

#[derive(Deserialize)]
struct Calibration {
    quantum_overrides: Overrides,
    bus_overrides: Overrides,
    oscillator: OscillatorCal,
    floors: Floors,
}

#[derive(Deserialize)]
struct OscillatorCal {
    gamma_bar0: f64,
}

#[derive(Deserialize)]
struct Floors {
    window_mass_d512: f64,
    cycle_spread_l10: f64,
}

fn calibration() -> Calibration {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("calibration/desk.toml");
    toml::from_str(&std::fs::read_to_string(p).expect("calibration file")).expect("calibration parses")
}

struct Outcome {
    pass: bool,
    detail: String,
}

struct Ctx {
    cal: Calibration,
    out: PathBuf,
}

impl Ctx {
    /// Calibrated quantum model; below d = 64 the schedule has no gate window and N_g is pinned to 1.
    fn quantum(&self, d: usize) -> ClockModel<f64> {
        let mut o = self.cal.quantum_overrides.clone();
        if d < 64 {
            o.ng = Some(1);
        }
        make_model(d, 0.05, Regime::Quantum, 1.0, &o).unwrap()
    }

    /// Run a manifest through the harness, store its artifacts and return the JSON envelope.
    fn run(&self, m: ExperimentManifest, name: &str) -> Value {
        let mut m = m;
        m.output_dir = self.out.join(name);
        let o = run_experiment(&m).unwrap_or_else(|e| panic!("{name}: {e}"));
        o.artifacts.write(&m.output_dir).unwrap();
        for v in &o.violations {
            println!("       note: {name}: {v}");
        }
        o.artifacts.json
    }

    fn sweep(&self, regime: Regime) -> Value {
        let mut m = ExperimentManifest::new(ExperimentKind::ScalingSweep);
        m.model.regime = regime;
        m.model.overrides = match regime {
            Regime::Quantum => self.cal.quantum_overrides.clone(),
            Regime::Classical => self.cal.bus_overrides.clone(),
        };
        m.program.gates = vec!["X".into()];
        m.sweep.ds = vec![64, 128, 256, 512];
        let name = format!("sweep_{regime:?}").to_lowercase();
        self.run(m, &name)
    }

    fn cycles(&self, d: usize, count: usize, max_cut: f64, name: &str) -> Value {
        let mut m = ExperimentManifest::new(ExperimentKind::OscillatorCycles);
        m.seed = 2024;
        m.model.d = d;
        m.model.overrides = self.cal.quantum_overrides.clone();
        m.program.gates = vec!["H".into(), "S".into(), "H*SDG".into()];
        m.dissipator.gamma_bar0 = self.cal.oscillator.gamma_bar0;
        m.grid.max_t_cut_t0 = max_cut;
        m.cycles.count = count;
        self.run(m, name)
    }
}

fn max_errors(sweep: &Value) -> Vec<f64> {
    sweep["result"]["rows"].as_array().unwrap().iter().map(|r| r["max_error"].as_f64().unwrap()).collect()
}

fn error_budget(errs: &[f64]) -> (bool, String) {
    let dec = errs.windows(2).all(|w| w[1] < w[0]);
    let ratio = errs[0] / errs[errs.len() - 1];
    let ok = errs.len() == 4 && dec && ratio >= 5.0;
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
    (ok, format!("errors [{}], strictly decreasing {dec}, e(64)/e(512) = {ratio:.3}", shown.join(", ")))
}

fn c1(ctx: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [8, 64, 512] {
        let m = ctx.quantum(d);
        let s = clock_state(&m, 0.0);
        let back = free_evolve(&m, &s, m.t0);
        worst = worst.max(trace_distance(&s.amplitudes, &back.amplitudes).unwrap());
    }
    Outcome { pass: worst <= 1e-12, detail: format!("max trace distance {worst:.3e}") }
}

fn c2(ctx: &Ctx) -> Outcome {
    let m = ctx.quantum(512);
    let worst = (1..=m.ng).map(|l| (riemann_sum(&m, window_center(&m, l, 0.0)) - 1.0).abs()).fold(0.0, f64::max);
    Outcome { pass: worst <= 1e-6, detail: format!("max |sum - 1| over {} windows {worst:.3e}", m.ng) }
}

fn c3(_: &Ctx) -> Outcome {
    let m = ClockModel::custom(CustomParams {
        d: 32,
        t0: 1.0,
        sigma: 32f64.sqrt(),
        n0: 15.5,
        n_pot: 1.0,
        n_exponent: 5,
        ng: 3,
    })
    .unwrap();
    let prog = GateProgram::<f64>::from_names(&["X", "H", "T"]).unwrap();
    let psi0 = JointState::product(&prog.initial_logical, &clock_state(&m, 0.0));
    let ham = assemble_hamiltonian(&m, &prog).unwrap();
    let dt = refine_dt(&ham, &psi0.amplitudes, m.t1(), default_dt(&m), DEFAULT_REFINE_TOL).unwrap();
    let a = evolve(&m, &prog, &psi0, m.t0, Method::Exact, dt).unwrap();
    let b = evolve(&m, &prog, &psi0, m.t0, Method::Splitstep, dt).unwrap();
    let td = trace_distance(&a.amplitudes, &b.amplitudes).unwrap();
    Outcome { pass: td <= 1e-6, detail: format!("trace distance at T0 {td:.3e} (dt = T0/{:.0})", 1.0 / dt) }
}

fn c4(q: &Value) -> Outcome {
    let (ok, detail) = error_budget(&max_errors(q));
    Outcome { pass: ok, detail: format!("quantum {detail}") }
}

fn c5(q: &Value, c: &Value) -> Outcome {
    let sq = q["result"]["slope"].as_f64().unwrap_or(f64::NAN);
    let sc = c["result"]["slope"].as_f64().unwrap_or(f64::NAN);
    let (bq, _) = error_budget(&max_errors(q));
    let (bc, dc) = error_budget(&max_errors(c));
    let in_q = (0.85..=1.0).contains(&sq);
    let in_c = (0.40..=0.55).contains(&sc);
    Outcome {
        pass: in_q && in_c && bq && bc,
        detail: format!(
            "slopes quantum {sq:.4} (in range {in_q}), classical {sc:.4} (in range {in_c}); budgets quantum {bq}, classical {bc} [classical {dc}]"
        ),
    }
}

fn c6(ctx: &Ctx) -> Outcome {
    let r = audit_reports(&[ctx.out.join("sweep_quantum"), ctx.out.join("sweep_classical")], 0.09).unwrap();
    let sql = r.rows.iter().filter(|x| x.entry.name == "sql").count();
    let hl = r.rows.iter().filter(|x| x.entry.name == "heisenberg").count();
    Outcome {
        pass: r.violations == 0 && sql > 0 && hl > 0 && r.refused.is_empty(),
        detail: format!("{hl} Heisenberg and {sql} SQL checks, {} violations, {} refused", r.violations, r.refused.len()),
    }
}

fn stats(v: &Value) -> &Value {
    &v["result"]["windows_stats"]
}

fn c7(c256: &Value) -> Outcome {
    let s = stats(c256);
    let mass = s["total_mass"].as_f64().unwrap();
    let tail = s["tail_mass"].as_f64().unwrap();
    Outcome {
        pass: (mass - 1.0).abs() <= 1e-3,
        detail: format!("integral over [0, 3T0] = {mass:.9} (survival left {tail:.2e})"),
    }
}

fn c8(c256: &Value) -> Outcome {
    let g = stats(c256)["identity_gap"].as_f64().unwrap();
    Outcome { pass: g <= 1e-2, detail: format!("relative gap {g:.3e}") }
}

fn c9(ctx: &Ctx) -> Outcome {
    let dirs: Vec<PathBuf> = ["cycles_d128", "cycles_d256", "cycles_d256_l10", "cycles_d512"].iter().map(|n| ctx.out.join(n)).collect();
    let r = audit_reports(&dirs, 0.09).unwrap();
    let rows: Vec<_> = r.rows.iter().filter(|x| x.entry.name == "p_diss").collect();
    let bad = rows.iter().filter(|x| !x.entry.pass).count();
    let worst = rows.iter().map(|x| x.entry.lhs / (x.entry.rhs / (1.0 + 1e-3))).fold(0.0, f64::max);
    Outcome {
        pass: !rows.is_empty() && bad == 0,
        detail: format!("{} stored cycles, {bad} over, max P_diss/P_in {worst:.6}", rows.len()),
    }
}

fn c10(ctx: &Ctx, runs: &[(usize, &Value)]) -> Outcome {
    let masses: Vec<f64> = runs.iter().map(|(_, v)| stats(v)["window_mass"].as_f64().unwrap()).collect();
    let mono = masses.windows(2).all(|w| w[1] >= w[0]);
    let floor = ctx.cal.floors.window_mass_d512;
    let last = masses[masses.len() - 1];
    Outcome {
        pass: mono && last >= floor,
        detail: format!("window masses {masses:.8?} for d = 128, 256, 512; monotone {mono}; d=512 floor {floor}"),
    }
}

fn c11(ctx: &Ctx, v: &Value) -> Outcome {
    let tr = &v["result"]["trajectories"][0];
    let spread = tr["max_error_spread"].as_f64().unwrap();
    let n = tr["cycles"].as_array().map(|a| a.len()).unwrap_or(0);
    let lim = ctx.cal.floors.cycle_spread_l10;
    Outcome {
        pass: n == 10 && spread <= lim,
        detail: format!("{n} cycles, relative spread {:.3e} (limit {}), mean max error {:.3e}", spread, lim, tr["mean_max_error"].as_f64().unwrap()),
    }
}

fn c12(ctx: &Ctx) -> Outcome {
    let mut m = ExperimentManifest::new(ExperimentKind::T0Invariance);
    m.model.d = 256;
    m.model.overrides = ctx.cal.quantum_overrides.clone();
    m.program.gates = vec!["H".into(), "S".into(), "H*SDG".into()];
    m.dissipator.gamma_bar0 = ctx.cal.oscillator.gamma_bar0;
    m.invariance.scale = 2.0;
    m.invariance.tol = 1e-10;
    let v = ctx.run(m, "invariance");
    let r = &v["result"];
    Outcome {
        pass: r["pass"].as_bool().unwrap(),
        detail: format!("max deviation {:.3e} under T0 -> 2T0", r["max_rel_deviation"].as_f64().unwrap()),
    }
}

fn c13(_: &Ctx) -> Outcome {
    let d = 256usize;
    let model = |sigma: f64| {
        ClockModel::custom(CustomParams { d, t0: 1.0, sigma, n0: 127.5, n_pot: 1.0, n_exponent: 5, ng: 1 }).unwrap()
    };
    let m1 = model((d as f64).sqrt());
    let m2 = model((d as f64).powf(0.8));
    let a = squeezing_report(&m1, &clock_state(&m1, 0.0)).unwrap();
    let b = squeezing_report(&m2, &clock_state(&m2, 0.0)).unwrap();
    Outcome {
        pass: a.verdict == Verdict::Semiclassical && b.verdict == Verdict::Squeezed,
        detail: format!(
            "sqrt(d): {:?} (residual {:.2e} <= {:.2e}, sigma_t {:.3}, sigma_H {:.3}); d^0.8: {:?} (sigma_t {:.2}, sigma_H {:.2})",
            a.verdict, a.residual, a.tol, a.sigma_t, a.sigma_h, b.verdict, b.sigma_t, b.sigma_h
        ),
    }
}

fn c14(ctx: &Ctx) -> Outcome {
    let bus = |offset: f64, name: &str| {
        let mut m = ExperimentManifest::new(ExperimentKind::BusLane);
        m.model.d = 256;
        m.model.regime = Regime::Classical;
        m.model.overrides = ctx.cal.bus_overrides.clone();
        m.bus.lanes = vec![1];
        m.bus.column = vec![0, 1, 2];
        m.bus.alphabet = 2;
        m.bus.offset_radians = offset;
        ctx.run(m, name)["result"][0]["min_fidelity"].as_f64().unwrap()
    };
    let on = bus(std::f64::consts::PI, "bus_pi");
    let off = bus(0.0, "bus_zero");
    Outcome { pass: on >= 0.99 && off < on, detail: format!("min fidelity offset pi {on:.6}, offset 0 {off:.6}") }
}

fn c15(c512: &Value) -> Outcome {
    let iso = &c512["result"]["isentropic"];
    let t_max = iso["t_max"].as_f64().unwrap();
    let t0 = iso["t0"].as_f64().unwrap();
    let t1 = iso["t1"].as_f64().unwrap();
    Outcome {
        pass: t_max >= t0 - t1 && t_max < t0,
        detail: format!("t_max = {t_max:.6} T0, window [{:.6}, 1), status {}", t0 - t1, iso["t_max_status"]),
    }
}

struct Line {
    id: usize,
    name: &'static str,
    budget: Option<Duration>,
    elapsed: Duration,
    outcome: Outcome,
}

fn timed<F: FnOnce() -> Outcome>(id: usize, name: &'static str, budget: Option<Duration>, f: F) -> Line {
    let t = Instant::now();
    let outcome = f();
    Line { id, name, budget, elapsed: t.elapsed(), outcome }
}

fn main() {
    tickgate::init_threads(None);
    let tmp = tempfile::tempdir().unwrap();
    let ctx = Ctx { cal: calibration(), out: tmp.path().to_path_buf() };
    let sec = Duration::from_secs;
    let mut lines = vec![
        timed(1, "free recurrence", Some(sec(1)), || c1(&ctx)),
        timed(2, "potential normalization", Some(sec(1)), || c2(&ctx)),
        timed(3, "backend oracle equivalence", Some(sec(10)), || c3(&ctx)),
    ];

    let t = Instant::now();
    let sq = ctx.sweep(Regime::Quantum);
    let sweep_q = t.elapsed();
    let t = Instant::now();
    let sc = ctx.sweep(Regime::Classical);
    let sweep_c = t.elapsed();
    let mut l = timed(4, "quantum error trend", None, || c4(&sq));
    l.elapsed += sweep_q;
    lines.push(l);
    let mut l = timed(5, "scaling slopes", None, || c5(&sq, &sc));
    l.elapsed += sweep_q + sweep_c;
    lines.push(l);
    lines.push(timed(6, "bound audit", Some(sec(1)), || c6(&ctx)));

    let t = Instant::now();
    let c256 = ctx.cycles(256, 1, 3.0, "cycles_d256");
    let osc256 = t.elapsed();
    for (id, name, f) in [(7, "oscillator normalization", c7 as fn(&Value) -> Outcome), (8, "energy identity", c8)] {
        let mut l = timed(id, name, Some(sec(60)), || f(&c256));
        l.elapsed += osc256;
        lines.push(l);
    }

    let t = Instant::now();
    let c128 = ctx.cycles(128, 1, 3.0, "cycles_d128");
    let osc128 = t.elapsed();
    let t = Instant::now();
    let c512 = ctx.cycles(512, 1, 3.0, "cycles_d512");
    let osc512 = t.elapsed();
    let t = Instant::now();
    let c256l = ctx.cycles(256, 10, 3.0, "cycles_d256_l10");
    let multi = t.elapsed();

    lines.push(timed(9, "dissipation bound", Some(sec(1)), || c9(&ctx)));
    let mut l = timed(10, "renewal concentration trend", None, || c10(&ctx, &[(128, &c128), (256, &c256), (512, &c512)]));
    l.elapsed += osc128 + osc256 + osc512;
    lines.push(l);
    let mut l = timed(11, "cycle non-accumulation", None, || c11(&ctx, &c256l));
    l.elapsed += multi;
    lines.push(l);
    lines.push(timed(12, "T0 invariance", Some(sec(60)), || c12(&ctx)));
    lines.push(timed(13, "squeezing classifier", Some(sec(1)), || c13(&ctx)));
    lines.push(timed(14, "bus read/write timing", Some(sec(60)), || c14(&ctx)));
    let mut l = timed(15, "isentropic interval", Some(sec(60)), || c15(&c512));
    l.elapsed += osc512;
    lines.push(l);

    let mut unexpected = 0;
    for l in &lines {
        let in_time = l.budget.is_none_or(|b| l.elapsed <= b);
        let pass = l.outcome.pass && in_time;
        let tag = if pass { "PASS" } else { "FAIL" };
        let budget = l.budget.map(|b| format!(" / {}s", b.as_secs())).unwrap_or_default();
        let note = match (pass, EXPECTED_FAILURES.contains(&l.id)) {
            (false, true) => " (expected failure, see notes)",
            (true, true) => " (listed as expected failure but passed)",
            _ => "",
        };
        println!(
            "{tag} [{:>2}] {}: {} [{:.2}s{budget}]{note}",
            l.id,
            l.name,
            l.outcome.detail,
            l.elapsed.as_secs_f64()
        );
        if pass == EXPECTED_FAILURES.contains(&l.id) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria deviate from the expected outcome");
        std::process::exit(1);
    }
}
