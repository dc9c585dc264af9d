use nalgebra::DMatrix;
use proptest::prelude::*;
use tickgate_core::clockcore::*;
use tickgate_core::gatesim::*;
use tickgate_core::C;

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

fn micro(d: usize, ng: usize) -> ClockModel<f64> {
    ClockModel::custom(CustomParams {
        d,
        t0: 1.0,
        sigma: (d as f64).sqrt(),
        n0: (d as f64 - 1.0) / 2.0,
        n_pot: 1.0,
        n_exponent: 5,
        ng,
    })
    .unwrap()
}

fn opnorm_diff(a: &DMatrix<C<f64>>, b: &DMatrix<C<f64>>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn exp_minus_i(k: &DMatrix<C<f64>>) -> DMatrix<C<f64>> {
    k.map(|z| C::new(z.im, -z.re)).exp()
}

#[test]
fn preset_generators_exponentiate_back() {
    for name in ["X", "Y", "Z", "H", "S", "SDG", "T", "CNOT", "H*SDG", "I"] {
        let u = named_gate::<f64>(name).unwrap();
        let g = gate_generator(&u, name).unwrap();
        assert!(opnorm_diff(&exp_minus_i(&g.drive), &u) < 1e-12, "{name} drive");
        let m_exp = g.matrix.map(|z| C::new(-z.im, z.re)).exp();
        assert!(opnorm_diff(&m_exp, &u) < 1e-12, "{name} generator");
    }
}

#[test]
fn distinct_eigenvalue_counts() {
    let counts: Vec<usize> = ["I", "X", "H", "T", "CNOT"]
        .iter()
        .map(|n| gate_generator(&named_gate::<f64>(n).unwrap(), n).unwrap().distinct_eigenvalues)
        .collect();
    assert_eq!(counts, vec![1, 2, 2, 2, 2]);
}

#[test]
fn product_preset_is_matrix_product() {
    let p = named_gate::<f64>("H*SDG").unwrap();
    let q = named_gate::<f64>("H").unwrap() * named_gate::<f64>("SDG").unwrap();
    assert!(opnorm_diff(&p, &q) < 1e-15);
    assert!(named_gate::<f64>("H*CNOT").is_err());
    assert!(named_gate::<f64>("Q").is_err());
}

#[test]
fn non_unitary_gate_is_rejected() {
    let m = DMatrix::from_element(2, 2, C::new(1.0, 0.0));
    assert!(gate_generator(&m, "bad").is_err());
}

#[test]
fn backends_agree_on_three_gate_program() {
    let m = micro(32, 3);
    let prog = GateProgram::<f64>::from_names(&["X", "H", "T"]).unwrap();
    let psi0 = JointState::product(&prog.initial_logical, &clock_state(&m, 0.0));
    let ham = assemble_hamiltonian(&m, &prog).unwrap();
    let dt = refine_dt(&ham, &psi0.amplitudes, m.t1(), default_dt(&m), DEFAULT_REFINE_TOL).unwrap();
    for t in [m.t1(), m.t0] {
        let a = evolve(&m, &prog, &psi0, t, Method::Exact, dt).unwrap();
        let b = evolve(&m, &prog, &psi0, t, Method::Splitstep, dt).unwrap();
        let td = trace_distance(&a.amplitudes, &b.amplitudes).unwrap();
        assert!(td <= 1e-6, "t={t}: {td}");
    }
}

#[test]
fn exact_run_matches_splitstep_run() {
    let m = micro(32, 3);
    let prog = GateProgram::<f64>::from_names(&["X", "H", "T"]).unwrap();
    let a = run_program(&m, &prog, Method::Exact, &RunOptions::default()).unwrap();
    let b = run_program(&m, &prog, Method::Splitstep, &RunOptions::default()).unwrap();
    for (x, y) in a.per_gate_error.iter().zip(&b.per_gate_error) {
        assert!((x - y).abs() < 1e-5, "{x} vs {y}");
    }
    assert!(b.norm_drift < 1e-10);
}

#[test]
fn explicit_memory_reduces_to_classical_strings() {
    let m = micro(32, 2);
    let alphabet = vec![
        ("X".to_string(), named_gate::<f64>("X").unwrap()),
        ("H".to_string(), named_gate::<f64>("H").unwrap()),
    ];
    let amps: Vec<C<f64>> = (0..4).map(|i| C::new(0.5, 0.1 * i as f64)).collect();
    let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let amps: Vec<_> = amps.iter().map(|z| z / n).collect();
    let gap = explicit_memory_gap(&m, &alphabet, &amps, 0.7).unwrap();
    assert!(gap < 1e-10, "{gap}");
}

#[test]
fn explicit_memory_capability_is_enforced() {
    let m = micro(256, 2);
    let alphabet = vec![
        ("X".to_string(), named_gate::<f64>("X").unwrap()),
        ("H".to_string(), named_gate::<f64>("H").unwrap()),
    ];
    let err = explicit_memory_gap(&m, &alphabet, &[C::new(0.5, 0.0); 4], 0.1).unwrap_err();
    assert!(matches!(err, tickgate_core::Error::CapabilityExceeded { .. }));
}

#[test]
fn quantum_runs_respect_the_frequency_bound() {
    for d in [64, 128, 256] {
        let model = make_model(d, 0.05, Regime::Quantum, 1.0, &desk()).unwrap();
        let prog = GateProgram::<f64>::repeat(&["X"], model.ng).unwrap();
        let r = run_program(&model, &prog, Method::Splitstep, &RunOptions::default()).unwrap();
        let b = check_frequency_bounds(&r, &BoundConstants::default()).unwrap();
        assert!(b.all_pass() && !b.degenerate);
        assert!(r.max_error < 1e-3);
        assert!((r.min_consecutive_logical_distance - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bound_check_refuses_non_orthogonal_trajectory() {
    let model = make_model(128, 0.05, Regime::Quantum, 1.0, &desk()).unwrap();
    let prog = GateProgram::<f64>::repeat(&["T"], model.ng).unwrap();
    let r = run_program(&model, &prog, Method::Splitstep, &RunOptions::default()).unwrap();
    assert!(check_frequency_bounds(&r, &BoundConstants::default()).is_err());
}

#[test]
fn line_fit_recovers_exact_line() {
    let x = [0.0, 1.0, 2.5, 4.0];
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 3.0).collect();
    let (s, c) = fit_line(&x, &y).unwrap();
    assert!((s - 2.0).abs() < 1e-14 && (c + 3.0).abs() < 1e-14);
    assert!(fit_line(&[1.0, 1.0], &[0.0, 2.0]).is_none());
}

#[test]
fn sweep_rejects_unsorted_grid() {
    let t = ProgramTemplate::new(&["X"]);
    let r = scaling_sweep::<f64>(&[128, 64], 0.05, Regime::Quantum, &t, Method::Splitstep, &desk(), &RunOptions::default());
    assert!(r.is_err());
}

fn random_unitary(seed: &[f64]) -> DMatrix<C<f64>> {
    // e^{iA} for Hermitian A built from the seed
    let a = DMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => C::new(seed[0], 0.0),
        (1, 1) => C::new(seed[1], 0.0),
        (0, 1) => C::new(seed[2], seed[3]),
        _ => C::new(seed[2], -seed[3]),
    });
    a.map(|z| C::new(-z.im, z.re)).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_round_trip(seed in prop::collection::vec(-3.0f64..3.0, 4)) {
        let u = random_unitary(&seed);
        let g = gate_generator(&u, "U").unwrap();
        prop_assert!(opnorm_diff(&exp_minus_i(&g.drive), &u) < 1e-10);
        for p in &g.eigenphases {
            prop_assert!(*p > 0.0 && *p <= 2.0 * std::f64::consts::PI + 1e-12);
        }
    }

    #[test]
    fn trace_distance_is_a_bounded_phase_blind_metric(
        a in prop::collection::vec(-1.0f64..1.0, 8),
        b in prop::collection::vec(-1.0f64..1.0, 8),
        phase in 0.0f64..6.3,
    ) {
        let mk = |v: &[f64]| {
            let z: Vec<C<f64>> = v.chunks(2).map(|p| C::new(p[0], p[1])).collect();
            let n = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1e-3);
            z.iter().map(|x| x / n).collect::<Vec<_>>()
        };
        let (x, y) = (mk(&a), mk(&b));
        let tab = trace_distance(&x, &y).unwrap();
        let tba = trace_distance(&y, &x).unwrap();
        prop_assert!((tab - tba).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&tab));
        let xp: Vec<_> = x.iter().map(|z| z * C::from_polar(1.0, phase)).collect();
        prop_assert!(trace_distance(&x, &xp).unwrap() < 1e-7);
    }

    #[test]
    fn splitstep_is_unitary(d in 16usize..64, t in 0.0f64..1.0) {
        let m = micro(d, 2);
        let prog = GateProgram::<f64>::from_names(&["H", "X"]).unwrap();
        let psi = JointState::product(&prog.initial_logical, &clock_state(&m, 0.0));
        let out = evolve(&m, &prog, &psi, t, Method::Splitstep, default_dt(&m)).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }
}
