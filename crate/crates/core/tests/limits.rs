use std::sync::OnceLock;

use nalgebra::DMatrix;
use proptest::prelude::*;
use tickgate_core::clockcore::*;
use tickgate_core::gatesim::{BoundConstants, GateProgram, Method};
use tickgate_core::limits::*;
use tickgate_core::oscillator::*;
use tickgate_core::C;

fn gaussian_model(d: usize, sigma: f64) -> ClockModel<f64> {
    ClockModel::custom(CustomParams {
        d,
        t0: 1.0,
        sigma,
        n0: (d as f64 - 1.0) / 2.0,
        n_pot: 1.0,
        n_exponent: 5,
        ng: 1,
    })
    .unwrap()
}

#[test]
fn root_d_gaussian_is_semiclassical() {
    let m = gaussian_model(256, 16.0);
    let r = squeezing_report(&m, &clock_state(&m, 0.0)).unwrap();
    assert_eq!(r.verdict, Verdict::Semiclassical);
    assert!(r.equal_uncertainty_gap <= EQUAL_UNCERTAINTY_TOL);
    assert!(!r.degenerate && !r.mixed);
}

#[test]
fn wide_gaussian_is_squeezed() {
    let d = 256usize;
    let m = gaussian_model(d, (d as f64).powf(0.8));
    let r = squeezing_report(&m, &clock_state(&m, 0.0)).unwrap();
    assert_eq!(r.verdict, Verdict::Squeezed);
    assert!(r.sigma_t > r.sigma_h);
}

#[test]
fn energy_eigenstate_is_degenerate() {
    let m = gaussian_model(64, 8.0);
    let r = squeezing_report(&m, &energy_eigenstate(64, 10)).unwrap();
    assert_eq!(r.verdict, Verdict::Squeezed);
    assert!(r.degenerate);
}

#[test]
fn mixed_states_are_unclassified() {
    let m = gaussian_model(64, 8.0);
    let a = clock_state(&m, 0.0).amplitudes;
    let b = clock_state(&m, 32.0).amplitudes;
    let rho = DMatrix::from_fn(64, 64, |i, j| (a[i] * a[j].conj() + b[i] * b[j].conj()) * 0.5);
    let r = squeezing_report_mixed(&m, &rho).unwrap();
    assert_eq!(r.verdict, Verdict::Unclassified);
    assert!(r.mixed);
    let pure = DMatrix::from_fn(64, 64, |i, j| a[i] * a[j].conj());
    assert_eq!(squeezing_report_mixed(&m, &pure).unwrap().verdict, Verdict::Semiclassical);
}

#[test]
fn wrong_dimension_is_rejected() {
    let m = gaussian_model(64, 8.0);
    assert!(squeezing_report_ensemble(&m, &[(1.0, vec![C::new(1.0, 0.0); 3])]).is_err());
}

#[test]
fn ceiling_matches_its_definition() {
    let lam = BoundConstants::default().lambda;
    let e = gate_error_ceiling(lam);
    assert!((e * (2.0 - e) - 1.0 / (4.0 * (1.0 + lam).powi(2))).abs() < 1e-15);
}

struct Osc {
    model: ClockModel<f64>,
    program: GateProgram<f64>,
    diss: Dissipator<f64>,
    trace: CycleTrace<f64>,
    stats: CycleStats<f64>,
}

fn osc() -> &'static Osc {
    static F: OnceLock<Osc> = OnceLock::new();
    F.get_or_init(|| {
        let o = Overrides {
            sigma_scale: Some(6.7),
            c_n: Some(0.012),
            n_exponent: Some(5),
            n_tilde0: Some(0.5),
            ng_scale: Some(0.021),
            ..Default::default()
        };
        let model = make_model(128, 0.05, Regime::Quantum, 1.0, &o).unwrap();
        let program = GateProgram::<f64>::repeat(&["X"], model.ng - 1).unwrap();
        let diss = build_dissipator(&model, &program, 5.0, None).unwrap();
        let trace = propagate_conditional(&model, &program, &diss, &GridSpec::default(), Method::Splitstep).unwrap();
        let stats = renewal_statistics(&trace, &model).unwrap();
        Osc { model, program, diss, trace, stats }
    })
}

#[test]
fn t_max_lands_in_the_last_window() {
    let o = osc();
    let c = BoundConstants::default();
    let s = solve_t_max(&o.trace, &o.diss, 0.0, &c).unwrap();
    assert_eq!(s.status, TmaxStatus::Root);
    assert!(s.residual.abs() <= 1e-10);
    let t1 = o.model.t1();
    assert!(s.t_max >= o.model.t0 - t1 && s.t_max < o.model.t0, "{}", s.t_max);
    let top = solve_t_max(&o.trace, &o.diss, gate_error_ceiling(c.lambda), &c).unwrap();
    assert_eq!(top.status, TmaxStatus::Zero);
    assert!(solve_t_max(&o.trace, &o.diss, 1.0, &c).is_err());
}

#[test]
fn steady_bounds_hold_on_calibrated_cycle() {
    let o = osc();
    let rep = isentropic_report(&o.model, &o.program, &o.trace, &o.diss, &o.stats, 0.0, &BoundConstants::default()).unwrap();
    assert!(rep.eps_h0 > 0.0);
    let f = o.model.ng as f64 / o.model.t0;
    let b = check_steady_bounds(&o.stats, &rep, f, true).unwrap();
    assert_eq!(b.entries.len(), 2);
    assert!(b.entries[0].pass);
}

#[test]
fn quality_rejects_tau_outside_grid() {
    let o = osc();
    assert!(epsilon_quality(&o.trace, &o.diss, -0.1).is_err());
    assert!(epsilon_quality(&o.trace, &o.diss, o.trace.t_cut * 2.0).is_err());
}

fn random_state(d: usize, re: &[f64], im: &[f64]) -> ClockState<f64> {
    let mut v: Vec<C<f64>> = (0..d).map(|k| C::new(re[k % re.len()] + 0.01, im[k % im.len()])).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    ClockState { amplitudes: v, basis: Basis::Theta, a_nor: 1.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn robertson_schrodinger_gap_is_non_negative(
        re in prop::collection::vec(-1.0f64..1.0, 1..16),
        im in prop::collection::vec(-1.0f64..1.0, 1..16),
        d in 16usize..96,
    ) {
        let m = gaussian_model(d, (d as f64).sqrt());
        let r = squeezing_report(&m, &random_state(d, &re, &im)).unwrap();
        prop_assert!(r.rs_gap >= -1e-8, "{}", r.rs_gap);
    }

    #[test]
    fn verdict_ignores_phase_and_lattice_shift(
        d in 64usize..256,
        power in 0.3f64..0.9,
        phase in 0.0f64..6.3,
        shift in 0usize..64,
    ) {
        let m = gaussian_model(d, (d as f64).powf(power));
        let s = clock_state(&m, 0.0);
        let base = squeezing_report(&m, &s).unwrap();
        let mut p = s.clone();
        p.amplitudes.iter_mut().for_each(|z| *z *= C::from_polar(1.0, phase));
        prop_assert_eq!(squeezing_report(&m, &p).unwrap().verdict, base.verdict);
        let moved = free_evolve(&m, &s, m.t0 * shift as f64 / d as f64);
        let r = squeezing_report(&m, &moved).unwrap();
        prop_assert_eq!(r.verdict, base.verdict);
        prop_assert!((r.sigma_t - base.sigma_t).abs() < 1e-6 * base.sigma_t.max(1.0));
    }

    #[test]
    fn t_max_shrinks_with_gate_error(a in 0.0f64..0.09, b in 0.0f64..0.09) {
        let o = osc();
        let c = BoundConstants::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let sl = solve_t_max(&o.trace, &o.diss, lo, &c).unwrap();
        let sh = solve_t_max(&o.trace, &o.diss, hi, &c).unwrap();
        prop_assert!(sh.t_max <= sl.t_max + 1e-12);
        if sl.status == TmaxStatus::Root {
            prop_assert!(sl.residual.abs() <= 1e-10);
        }
    }
}
