use std::path::{Path, PathBuf};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tickgate_core::bussim::{run_bus_lanes, LaneSpec};
use tickgate_core::clockcore::{clock_state, free_evolve, make_model, norm_diagnostics, ClockModel, Regime};
use tickgate_core::gatesim::{
    check_frequency_bounds, run_program, trace_distance, BoundConstants, BoundEntry, GateRunReport, RunOptions,
    ScalingResult,
};
use tickgate_core::limits::{check_steady_bounds, isentropic_report, squeezing_report, IsentropicReport, Verdict};
use tickgate_core::oscillator::{
    build_dissipator, ideal_cycle_targets, oscillator_dt, propagate_conditional, renewal_statistics, run_cycles,
    t0_invariance_check, CycleStats, MultiCycleReport,
};
use tickgate_core::vnorm;

use crate::artifacts::{num, schema_tag, ArtifactSet, Envelope, Table};
use crate::error::{HResult, HarnessError};
use crate::manifest::{ExperimentKind, ExperimentManifest};

/// Relative slack allowed on P_diss <= P_in.
pub const P_DISS_SLACK: f64 = 1e-3;
/// Allowed |∫P dt - 1| on a cycle.
pub const MASS_TOL: f64 = 1e-3;
/// Allowed relative gap of the renewal energy identity.
pub const IDENTITY_TOL: f64 = 1e-2;

pub struct RunOutcome {
    pub artifacts: ArtifactSet,
    /// Numerical invariants that failed; the artifacts are still written.
    pub violations: Vec<String>,
}

fn model_of(m: &ExperimentManifest, d: usize, regime: Regime) -> HResult<ClockModel<f64>> {
    Ok(make_model(d, m.model.eps_bar, regime, m.model.t0_seconds, &m.model.overrides)?)
}

fn run_opts(m: &ExperimentManifest) -> RunOptions<f64> {
    RunOptions { dt: m.run.dt_seconds, refine_tol: Some(m.run.refine_tol) }
}

fn provenance(m: &ExperimentManifest, model: Option<&ClockModel<f64>>, extra: Value) -> Value {
    json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "scalar": "f64",
        "backend": m.run.method,
        "tolerances": {
            "refine_tol": m.run.refine_tol,
            "run_dt_seconds": m.run.dt_seconds,
            "grid_dt_seconds": m.grid.dt_seconds,
            "tail_tol": m.grid.tail_tol,
        },
        "model": model,
        "detail": extra,
    })
}

// The echoed manifest leaves out output_dir so reruns elsewhere compare equal.
fn envelope<R: Serialize>(m: &ExperimentManifest, provenance: Value, result: R) -> Value {
    let mut echo = m.clone();
    echo.output_dir = PathBuf::new();
    serde_json::to_value(Envelope {
        schema: schema_tag(m.kind.slug()),
        manifest_hash: m.hash(),
        provenance,
        manifest: &echo,
        result,
    })
    .expect("report serializes")
}

fn outcome(m: &ExperimentManifest, json: Value, tables: Vec<Table>, mut log: Vec<String>, violations: Vec<String>) -> RunOutcome {
    log.insert(0, format!("kind {} manifest_hash {}", m.kind.slug(), m.hash()));
    for v in &violations {
        log.push(format!("VIOLATION {v}"));
    }
    RunOutcome {
        artifacts: ArtifactSet { json_name: m.kind.slug().to_string(), json, tables, log },
        violations,
    }
}

pub fn run_experiment(m: &ExperimentManifest) -> HResult<RunOutcome> {
    m.validate()?;
    match m.kind {
        ExperimentKind::ModelInfo => model_info(m),
        ExperimentKind::GateRun => gate_run(m),
        ExperimentKind::ScalingSweep => scaling_sweep(m),
        ExperimentKind::BusLane => bus_lane(m),
        ExperimentKind::OscillatorCycles => oscillator_cycles(m),
        ExperimentKind::BoundsAudit => bounds_audit(m),
        ExperimentKind::T0Invariance => t0_invariance(m),
    }
}

/// A trajectory is semi-classical (or squeezed) when two consecutive samples
/// both carry that verdict; otherwise it is unclassified.
pub fn two_time_verdict(samples: &[Verdict]) -> Verdict {
    let pair = |v: Verdict| samples.windows(2).any(|w| w[0] == v && w[1] == v);
    if pair(Verdict::Semiclassical) {
        Verdict::Semiclassical
    } else if pair(Verdict::Squeezed) {
        Verdict::Squeezed
    } else {
        Verdict::Unclassified
    }
}

/// Verdicts of the free clock state at t_j = j T0/N_g, j = 0..=max(N_g, 1).
pub fn clock_trajectory_verdicts(model: &ClockModel<f64>) -> HResult<Vec<Verdict>> {
    let s0 = clock_state(model, 0.0);
    let n = model.ng.max(1);
    (0..=n)
        .map(|j| {
            let s = free_evolve(model, &s0, j as f64 * model.t0 / n as f64);
            Ok(squeezing_report(model, &s)?.verdict)
        })
        .collect()
}

fn model_info(m: &ExperimentManifest) -> HResult<RunOutcome> {
    let model = model_of(m, m.model.d, m.model.regime)?;
    let norms = norm_diagnostics(&model)?;
    let samples = clock_trajectory_verdicts(&model)?;
    let verdict = two_time_verdict(&samples);
    let json = envelope(
        m,
        provenance(m, Some(&model), Value::Null),
        json!({ "model": &model, "norms": norms, "clock_samples": samples, "clock_trajectory": verdict }),
    );
    let log = vec![
        format!("d {} ng {} sigma {:.6} n {:.6}", model.d, model.ng, model.sigma, model.n_pot),
        format!("clock trajectory {verdict:?}"),
    ];
    Ok(outcome(m, json, vec![], log, vec![]))
}

fn bound_constants(c0: f64) -> BoundConstants {
    BoundConstants { c0, ..BoundConstants::default() }
}

fn gate_run(m: &ExperimentManifest) -> HResult<RunOutcome> {
    let model = model_of(m, m.model.d, m.model.regime)?;
    let program = m.build_program(model.ng)?;
    let report = run_program(&model, &program, m.run.method, &run_opts(m))?;
    let bounds = check_frequency_bounds(&report, &bound_constants(m.bounds.c0)).map_err(|e| e.to_string());
    let mut t = Table::new("gate_errors", &["j", "error"]);
    for (j, e) in report.per_gate_error.iter().enumerate() {
        t.push(vec![(j + 1).to_string(), num(*e)]);
    }
    let mut violations = vec![];
    if report.norm_drift > 1e-8 {
        violations.push(format!("norm drift {:e} on a unitary run", report.norm_drift));
    }
    let log = vec![format!("ng {} max_error {:e} dt {:?}", report.ng, report.max_error, report.dt)];
    let prov = provenance(m, Some(&model), json!({ "dt_seconds": report.dt }));
    let json = envelope(m, prov, json!({ "report": &report, "bounds": bounds.as_ref().ok(), "bounds_refused": bounds.as_ref().err() }));
    Ok(outcome(m, json, vec![t], log, violations))
}

pub const SWEEP_COLUMNS: [&str; 8] = ["d", "Ng", "f_T0", "E0_T0", "max_error", "method", "regime", "eps_bar"];

fn scaling_sweep(m: &ExperimentManifest) -> HResult<RunOutcome> {
    let opts = run_opts(m);
    let points: Vec<(usize, Result<GateRunReport<f64>, String>)> = m
        .sweep
        .ds
        .par_iter()
        .map(|&d| {
            let r = (|| -> HResult<GateRunReport<f64>> {
                let model = model_of(m, d, m.model.regime)?;
                let program = m.build_program(model.ng)?;
                Ok(run_program(&model, &program, m.run.method, &opts)?)
            })();
            (d, r.map_err(|e| e.to_string()))
        })
        .collect();
    let mut reports = vec![];
    let mut failures = vec![];
    for (d, r) in points {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => failures.push((d, e)),
        }
    }
    let res = ScalingResult::from_reports(reports, failures);
    let mut t = Table::new("scaling_sweep", &SWEEP_COLUMNS);
    for r in &res.rows {
        t.push(vec![
            r.d.to_string(),
            r.ng.to_string(),
            num(r.f_t0),
            num(r.e0_t0),
            num(r.max_error),
            format!("{:?}", r.method).to_lowercase(),
            format!("{:?}", r.regime).to_lowercase(),
            num(r.eps_bar),
        ]);
    }
    let mut log: Vec<String> = res.rows.iter().map(|r| format!("d {} ng {} max_error {:e}", r.d, r.ng, r.max_error)).collect();
    log.push(format!("slope {:?}", res.slope));
    for (d, e) in &res.failures {
        log.push(format!("d {d} failed: {e}"));
    }
    let prov = provenance(m, None, json!({ "ds": &m.sweep.ds }));
    let json = envelope(m, prov, &res);
    Ok(outcome(m, json, vec![t], log, vec![]))
}

fn bus_lane(m: &ExperimentManifest) -> HResult<RunOutcome> {
    let model = model_of(m, m.model.d, Regime::Classical)?;
    let b = &m.bus;
    let specs: Vec<LaneSpec> =
        b.lanes.iter().map(|&lane| LaneSpec { lane, column: b.column.clone(), alphabet: b.alphabet }).collect();
    let reports = run_bus_lanes(&model, &specs, b.cycles, b.offset_radians)?;
    let mut t = Table::new("bus_lane", &["d", "L", "lane", "offset", "cycle", "k", "fidelity"]);
    for r in &reports {
        for s in &r.samples {
            t.push(vec![
                r.d.to_string(),
                r.l.to_string(),
                r.lane.to_string(),
                num(r.offset_used),
                s.cycle.to_string(),
                s.k.to_string(),
                num(s.fidelity),
            ]);
        }
    }
    let log = reports.iter().map(|r| format!("lane {} min_fidelity {:.9}", r.lane, r.min_fidelity)).collect();
    let json = envelope(m, provenance(m, Some(&model), Value::Null), &reports);
    Ok(outcome(m, json, vec![t], log, vec![]))
}

/// Seed of trajectory `i`: stream `i` of a ChaCha8 generator keyed by the master seed.
pub fn trajectory_seed(master: u64, i: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(i);
    rng.next_u64()
}

fn check_cycle_stats(label: &str, st: &CycleStats<f64>, out: &mut Vec<String>) {
    if st.p_diss > st.p_in * (1.0 + P_DISS_SLACK) {
        out.push(format!("{label}: P_diss {:e} exceeds P_in {:e}", st.p_diss, st.p_in));
    }
    if (st.total_mass - 1.0).abs() > MASS_TOL {
        out.push(format!("{label}: renewal mass {:.9}", st.total_mass));
    }
    if st.identity_gap > IDENTITY_TOL {
        out.push(format!("{label}: energy identity gap {:e}", st.identity_gap));
    }
}

#[derive(Serialize)]
struct CyclesResult<'a> {
    model: &'a ClockModel<f64>,
    gamma0: f64,
    eps_b: f64,
    vc_norm: f64,
    windows_stats: &'a CycleStats<f64>,
    first_cycle_errors: &'a [f64],
    isentropic: &'a IsentropicReport<f64>,
    steady_bounds: Option<&'a tickgate_core::gatesim::BoundReport>,
    steady_bounds_refused: Option<&'a String>,
    trajectories: &'a [MultiCycleReport<f64>],
}

fn oscillator_cycles(m: &ExperimentManifest) -> HResult<RunOutcome> {
    let model = model_of(m, m.model.d, m.model.regime)?;
    let program = m.build_program(model.ng.saturating_sub(1))?;
    let diss = build_dissipator(&model, &program, m.dissipator.gamma_bar0, m.dissipator.eps_b)?;
    let grid = m.grid.spec();
    let method = m.run.method;
    let trace = propagate_conditional(&model, &program, &diss, &grid, method)?;
    let stats = renewal_statistics(&trace, &model)?;
    let mut errors = vec![];
    for (j, tgt) in ideal_cycle_targets(&model, &program, &program.initial_logical).iter().enumerate() {
        let psi = &trace.checkpoints[j + 1];
        let n = vnorm(psi);
        let normed: Vec<_> = psi.iter().map(|z| z.unscale(n)).collect();
        errors.push(trace_distance(tgt, &normed)?);
    }
    let eps_gate = m.cycles.eps_gate.unwrap_or_else(|| errors.iter().copied().fold(0.0, f64::max));
    let constants = bound_constants(m.cycles.c0);
    let iso = isentropic_report(&model, &program, &trace, &diss, &stats, eps_gate, &constants)?;
    let f = model.ng as f64 / model.t0;
    let steady = check_steady_bounds(&stats, &iso, f, model.regime == Regime::Classical).map_err(|e| e.to_string());

    let seeds: Vec<u64> = (0..m.cycles.trajectories as u64).map(|i| trajectory_seed(m.seed, i)).collect();
    let programs = [program.clone()];
    let trajectories: Vec<MultiCycleReport<f64>> = seeds
        .par_iter()
        .map(|&s| run_cycles(&model, &programs, &diss, m.cycles.count, m.cycles.mode, s, &grid, method))
        .collect::<Result<_, _>>()?;

    let mut violations = vec![];
    check_cycle_stats("initial cycle", &stats, &mut violations);
    for (i, tr) in trajectories.iter().enumerate() {
        for c in &tr.cycles {
            check_cycle_stats(&format!("trajectory {i} cycle {}", c.index), &c.stats, &mut violations);
        }
    }

    let mut tt = Table::new("cycle_trace", &["t", "survival", "renewal_density", "energy"]);
    for i in 0..trace.time_grid.len() {
        tt.push(vec![
            num(trace.time_grid[i]),
            num(trace.survival[i]),
            num(trace.renewal_density[i]),
            num(trace.energies[i]),
        ]);
    }
    let mut tc = Table::new(
        "cycles",
        &["trajectory", "seed", "cycle", "renewal_time", "renewal_site", "max_error", "eps_r", "p_in", "p_diss"],
    );
    for (i, tr) in trajectories.iter().enumerate() {
        for c in &tr.cycles {
            tc.push(vec![
                i.to_string(),
                tr.seed.to_string(),
                c.index.to_string(),
                num(c.renewal_time),
                c.renewal_site.map(|s| s.to_string()).unwrap_or_default(),
                num(c.max_error),
                num(c.stats.eps_r),
                num(c.stats.p_in),
                num(c.stats.p_diss),
            ]);
        }
    }
    let mut log = vec![
        format!("ng {} eps_r {:e} window_mass {:.9} identity_gap {:e}", model.ng, stats.eps_r, stats.window_mass, stats.identity_gap),
        format!("t_max {:.9} ({:?}) eps_gate {:e}", iso.t_max, iso.t_max_status, eps_gate),
    ];
    for (i, tr) in trajectories.iter().enumerate() {
        log.push(format!("trajectory {i} seed {} spread {:.4}", tr.seed, tr.max_error_spread));
    }
    let res = CyclesResult {
        model: &model,
        gamma0: diss.gamma0,
        eps_b: diss.eps_b,
        vc_norm: diss.norm(),
        windows_stats: &stats,
        first_cycle_errors: &errors,
        isentropic: &iso,
        steady_bounds: steady.as_ref().ok(),
        steady_bounds_refused: steady.as_ref().err(),
        trajectories: &trajectories,
    };
    let prov = provenance(
        m,
        Some(&model),
        json!({ "substep_seconds": grid.dt.unwrap_or_else(|| oscillator_dt(&model)), "trajectory_seeds": seeds }),
    );
    let json = envelope(m, prov, &res);
    Ok(outcome(m, json, vec![tt, tc], log, violations))
}

fn t0_invariance(m: &ExperimentManifest) -> HResult<RunOutcome> {
    if !m.program.custom.is_empty() {
        return Err(HarnessError::config("program.custom", "t0_invariance takes preset gates only"));
    }
    let r = t0_invariance_check(
        m.model.d,
        m.model.eps_bar,
        m.model.regime,
        &m.model.overrides,
        &m.program.gates,
        m.dissipator.gamma_bar0,
        m.dissipator.eps_b,
        m.invariance.scale,
        &m.grid.spec(),
        m.run.method,
        m.invariance.tol,
    )?;
    let violations = if r.pass {
        vec![]
    } else {
        vec![format!("dimensionless deviation {:e} exceeds {:e}", r.max_rel_deviation, r.tol)]
    };
    let log = vec![format!("max_rel_deviation {:e}", r.max_rel_deviation)];
    let json = envelope(m, provenance(m, None, Value::Null), &r);
    Ok(outcome(m, json, vec![], log, violations))
}

/// One audited bound, tagged with the stored file and run it came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditRow {
    pub file: String,
    pub run: String,
    #[serde(flatten)]
    pub entry: BoundEntry,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AuditResult {
    pub files: Vec<String>,
    pub rows: Vec<AuditRow>,
    /// Runs whose bound hypotheses did not hold, with the reason.
    pub refused: Vec<(String, String)>,
    pub violations: usize,
}

fn collect_reports(paths: &[PathBuf]) -> HResult<Vec<PathBuf>> {
    let mut out = vec![];
    for p in paths {
        if p.is_dir() {
            let rd = std::fs::read_dir(p).map_err(|e| HarnessError::Io { path: p.display().to_string(), source: e })?;
            let mut found: Vec<PathBuf> = rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn parse<T: for<'de> Deserialize<'de>>(v: &Value, file: &Path, what: &str) -> HResult<T> {
    serde_json::from_value(v.clone())
        .map_err(|e| HarnessError::config(file.display().to_string(), format!("{what}: {e}")))
}

/// Audit stored gate and oscillator reports against the frequency bounds.
pub fn audit_reports(paths: &[PathBuf], c0: f64) -> HResult<AuditResult> {
    let constants = bound_constants(c0);
    let mut res = AuditResult::default();
    for file in collect_reports(paths)? {
        let text = std::fs::read_to_string(&file)
            .map_err(|e| HarnessError::Io { path: file.display().to_string(), source: e })?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| HarnessError::config(file.display().to_string(), e.to_string()))?;
        let name = file.display().to_string();
        let schema = v.get("schema").and_then(Value::as_str).unwrap_or("");
        let result = &v["result"];
        let push = |run: String, entries: Vec<BoundEntry>, res: &mut AuditResult| {
            for e in entries {
                res.rows.push(AuditRow { file: name.clone(), run: run.clone(), entry: e });
            }
        };
        if schema == schema_tag("gate_run") || schema == schema_tag("scaling_sweep") {
            let reports: Vec<GateRunReport<f64>> = if schema == schema_tag("gate_run") {
                vec![parse(&result["report"], &file, "report")?]
            } else {
                parse(&result["reports"], &file, "reports")?
            };
            for r in &reports {
                let run = format!("{:?} d={}", r.regime, r.d).to_lowercase();
                match check_frequency_bounds(r, &constants) {
                    Ok(b) => push(run, b.entries, &mut res),
                    Err(e) => res.refused.push((format!("{name} {run}"), e.to_string())),
                }
            }
        } else if schema == schema_tag("oscillator_cycles") {
            let model = &result["model"];
            let ng = model["ng"].as_u64().unwrap_or(0) as f64;
            let t0 = model["t0"].as_f64().unwrap_or(f64::NAN);
            let classical = model["regime"].as_str() == Some("classical");
            let iso: IsentropicReport<f64> = parse(&result["isentropic"], &file, "isentropic")?;
            let mut stats: Vec<(String, CycleStats<f64>)> =
                vec![("initial".into(), parse(&result["windows_stats"], &file, "windows_stats")?)];
            if let Some(trs) = result["trajectories"].as_array() {
                for (i, tr) in trs.iter().enumerate() {
                    for c in tr["cycles"].as_array().into_iter().flatten() {
                        let idx = c["index"].as_u64().unwrap_or(0);
                        stats.push((format!("trajectory {i} cycle {idx}"), parse(&c["stats"], &file, "stats")?));
                    }
                }
            }
            match check_steady_bounds(&stats[0].1, &iso, ng / t0, classical) {
                Ok(b) => push("steady".into(), b.entries, &mut res),
                Err(e) => res.refused.push((format!("{name} steady"), e.to_string())),
            }
            for (run, st) in &stats {
                let e = BoundEntry::new("p_diss", st.p_diss, st.p_in * (1.0 + P_DISS_SLACK), &constants);
                push(run.clone(), vec![e], &mut res);
            }
        } else {
            continue;
        }
        res.files.push(name);
    }
    res.violations = res.rows.iter().filter(|r| !r.entry.pass).count();
    Ok(res)
}

fn bounds_audit(m: &ExperimentManifest) -> HResult<RunOutcome> {
    if m.bounds.reports.is_empty() {
        return Err(HarnessError::config("bounds.reports", "name at least one report file or directory"));
    }
    let res = audit_reports(&m.bounds.reports, m.bounds.c0)?;
    let mut t = Table::new("bounds_audit", &["file", "run", "bound", "lhs", "rhs", "slack", "pass"]);
    for r in &res.rows {
        t.push(vec![
            r.file.clone(),
            r.run.clone(),
            r.entry.name.clone(),
            num(r.entry.lhs),
            num(r.entry.rhs),
            num(r.entry.slack),
            r.entry.pass.to_string(),
        ]);
    }
    let violations: Vec<String> = res
        .rows
        .iter()
        .filter(|r| !r.entry.pass)
        .map(|r| format!("{} {} {}: {:e} > {:e}", r.file, r.run, r.entry.name, r.entry.lhs, r.entry.rhs))
        .collect();
    let mut log = vec![format!("{} files, {} bounds, {} refused", res.files.len(), res.rows.len(), res.refused.len())];
    log.extend(res.refused.iter().map(|(r, e)| format!("refused {r}: {e}")));
    let json = envelope(m, provenance(m, None, Value::Null), &res);
    Ok(outcome(m, json, vec![t], log, violations))
}
