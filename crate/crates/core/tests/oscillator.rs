use std::sync::OnceLock;

use proptest::prelude::*;
use tickgate_core::clockcore::*;
use tickgate_core::gatesim::{GateProgram, JointState, Method};
use tickgate_core::limits::{epsilon_quality, quality_sandwich};
use tickgate_core::oscillator::*;

fn desk() -> Overrides {
    Overrides {
        sigma_scale: Some(6.7),
        c_n: Some(0.012),
        n_exponent: Some(5),
        n_tilde0: Some(0.5),
        ng_scale: Some(0.021),
        ..Default::default()
    }
}

struct Fixture {
    model: ClockModel<f64>,
    program: GateProgram<f64>,
    diss: Dissipator<f64>,
    trace: CycleTrace<f64>,
    stats: CycleStats<f64>,
}

// d = 128 carries two windows: one gate, then the renewal window.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let model = make_model(128, 0.05, Regime::Quantum, 1.0, &desk()).unwrap();
        let program = GateProgram::<f64>::repeat(&["H"], model.ng - 1).unwrap();
        let diss = build_dissipator(&model, &program, 5.0, None).unwrap();
        let trace = propagate_conditional(&model, &program, &diss, &GridSpec::default(), Method::Splitstep).unwrap();
        let stats = renewal_statistics(&trace, &model).unwrap();
        Fixture { model, program, diss, trace, stats }
    })
}

#[test]
fn dissipator_floor_and_scale() {
    let f = fixture();
    let m = &f.model;
    assert!((f.diss.gamma0 - 5.0 * (128f64).powf(0.05 * 0.05)).abs() < 1e-12);
    let floor = f.diss.eps_b / (2.0 * m.t0);
    assert!(f.diss.vc_values.iter().all(|&v| v >= floor * (1.0 - 1e-12)));
    assert!(f.diss.eps_b > 0.0);
    assert!(build_dissipator(m, &f.program, -1.0, None).is_err());
    assert!(build_dissipator(m, &f.program, 1.0, Some(-0.1)).is_err());
}

#[test]
fn renewal_density_is_normalized() {
    let s = &fixture().stats;
    assert!((s.total_mass - 1.0).abs() < 1e-3, "{}", s.total_mass);
    assert!(s.window_mass > 0.999);
    assert!(s.eps_r >= 0.0 && s.eps_r < 1e-3);
}

#[test]
fn renewal_energy_identity_and_dissipation() {
    let s = &fixture().stats;
    assert!(s.identity_gap <= 1e-2, "{}", s.identity_gap);
    assert!(s.p_diss <= s.p_in * (1.0 + 1e-3));
    assert!(s.p_diss >= 0.0);
}

#[test]
fn survival_is_non_increasing() {
    let t = &fixture().trace;
    for w in t.survival.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    assert!((t.survival[0] - 1.0).abs() < 1e-12);
}

fn survival_gap(points_per_t0: usize) -> f64 {
    let f = fixture();
    let grid = GridSpec { points_per_t0, t_cut_t0: 1.0, max_t_cut_t0: 1.0, ..GridSpec::default() };
    let t = propagate_conditional(&f.model, &f.program, &f.diss, &grid, Method::Splitstep).unwrap();
    let cum = cumulative_trapezoid(&t.time_grid, &t.renewal_density);
    t.survival.iter().zip(&cum).map(|(s, c)| (1.0 - c - s).abs()).fold(0.0, f64::max)
}

// 1 - S(t) = ∫P: the trapezoid gap must shrink at second order with the grid.
#[test]
fn survival_equals_one_minus_integrated_density() {
    let coarse = survival_gap(512);
    let fine = survival_gap(2048);
    assert!(coarse < 1e-3, "{coarse}");
    assert!(fine < coarse / 8.0, "{coarse} -> {fine}");
}

#[test]
fn zero_dissipator_keeps_the_norm() {
    let f = fixture();
    let diss = build_dissipator(&f.model, &f.program, 0.0, Some(0.0)).unwrap();
    assert!(diss.is_zero());
    let g = GridSpec { t_cut_t0: 0.5, max_t_cut_t0: 0.5, points_per_t0: 64, ..GridSpec::default() };
    let tr = propagate_conditional(&f.model, &f.program, &diss, &g, Method::Splitstep).unwrap();
    assert!(tr.survival.iter().all(|s| (s - 1.0).abs() < 1e-10));
    assert_eq!(epsilon_quality(&tr, &diss, 0.25).unwrap(), 0.0);
}

#[test]
fn dense_and_split_propagation_agree() {
    let f = fixture();
    let g = GridSpec { t_cut_t0: 1.0, max_t_cut_t0: 1.0, points_per_t0: 128, ..GridSpec::default() };
    let a = propagate_conditional(&f.model, &f.program, &f.diss, &g, Method::Exact).unwrap();
    let b = propagate_conditional(&f.model, &f.program, &f.diss, &g, Method::Splitstep).unwrap();
    assert_eq!(a.time_grid.len(), b.time_grid.len());
    let worst = a.survival.iter().zip(&b.survival).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn trapezoid_is_exact_on_lines() {
    let x = [0.0, 0.1, 0.35, 1.0, 2.0];
    let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
    let c = cumulative_trapezoid(&x, &y);
    for (xi, ci) in x.iter().zip(&c) {
        assert!((ci - (1.5 * xi * xi + xi)).abs() < 1e-14);
    }
    assert!((trapezoid(&x, &y) - 8.0).abs() < 1e-14);
}

#[test]
fn renewal_resets_the_clock() {
    let f = fixture();
    let psi = JointState::product(&[num_complex::Complex::new(0.6, 0.0), num_complex::Complex::new(0.0, 0.8)],
        &clock_state(&f.model, 30.0));
    let (logical, out) = renew(&psi, 30, &f.diss.renewal_target).unwrap();
    assert!((logical[0].norm() - 0.6).abs() < 1e-12 && (logical[1].norm() - 0.8).abs() < 1e-12);
    let back = out.at_site(0);
    assert!((out.norm() - 1.0).abs() < 1e-12 && back.iter().any(|z| z.norm() > 0.0));
}

#[test]
fn cycles_are_reproducible_per_seed() {
    let f = fixture();
    let g = GridSpec::default();
    let run = |seed| run_cycles(&f.model, &[f.program.clone()], &f.diss, 2, CycleMode::Montecarlo, seed, &g, Method::Splitstep).unwrap();
    let a = run(3);
    let b = run(3);
    let c = run(4);
    let ta: Vec<f64> = a.cycles.iter().map(|r| r.renewal_time).collect();
    let tb: Vec<f64> = b.cycles.iter().map(|r| r.renewal_time).collect();
    let tc: Vec<f64> = c.cycles.iter().map(|r| r.renewal_time).collect();
    assert_eq!(ta, tb);
    assert_ne!(ta, tc);
    for r in &a.cycles {
        assert!(r.renewal_time > f.model.t0 - 2.0 * f.model.t1() && r.renewal_time < 2.0 * f.model.t0);
        assert!(r.max_error < 1e-2);
    }
}

#[test]
fn mode_time_renews_at_density_peak() {
    let f = fixture();
    let r = run_cycles(&f.model, &[f.program.clone()], &f.diss, 1, CycleMode::ModeTime, 0, &GridSpec::default(), Method::Splitstep).unwrap();
    let t = &f.trace;
    let peak = t.renewal_density.iter().cloned().fold(f64::MIN, f64::max);
    let i = t.renewal_density.iter().position(|&v| v == peak).unwrap();
    assert!((r.cycles[0].renewal_time - t.time_grid[i]).abs() < 1e-12);
    assert!(r.cycles[0].renewal_site.is_none());
}

#[test]
fn cycle_count_must_be_positive() {
    let f = fixture();
    assert!(run_cycles(&f.model, &[f.program.clone()], &f.diss, 0, CycleMode::Montecarlo, 0, &GridSpec::default(), Method::Splitstep).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quality_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let f = fixture();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let t = f.trace.t_cut;
        let ql = epsilon_quality(&f.trace, &f.diss, lo * t).unwrap();
        let qh = epsilon_quality(&f.trace, &f.diss, hi * t).unwrap();
        prop_assert!(ql <= qh + 1e-15);
    }

    #[test]
    fn quality_sandwich_holds(u in 0.05f64..1.0) {
        let f = fixture();
        let s = quality_sandwich(&f.trace, &f.diss, u * f.trace.t_cut).unwrap();
        prop_assert!(s.holds(1e-9), "{:?}", s);
    }
}
