use proptest::prelude::*;
use tickgate_core::clockcore::*;
use tickgate_core::gatesim::trace_distance;
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

// Below d = 64 the desk schedule has no gate window; pin N_g = 1 there.
fn quantum(d: usize) -> ClockModel<f64> {
    let mut o = desk();
    if d < 64 {
        o.ng = Some(1);
    }
    make_model(d, 0.05, Regime::Quantum, 1.0, &o).unwrap()
}

// O(d²) transform straight from ⟨E_n|θ_k⟩ = d^{-1/2} e^{-2πi nk/d}.
fn naive_to_energy(theta: &[C<f64>]) -> Vec<C<f64>> {
    let d = theta.len();
    let s = (d as f64).sqrt();
    (0..d)
        .map(|n| {
            theta.iter().enumerate().fold(C::new(0.0, 0.0), |acc, (k, z)| {
                let ph = -2.0 * std::f64::consts::PI * ((n * k) % d) as f64 / d as f64;
                acc + z * C::from_polar(1.0, ph)
            }) / s
        })
        .collect()
}

#[test]
fn dft_matches_direct_sum() {
    let m = quantum(64);
    let st = clock_state(&m, 5.3);
    let fast = basis_change(&st, Basis::Energy);
    let slow = naive_to_energy(&st.amplitudes);
    let err = fast.amplitudes.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err}");
    let back = basis_change(&fast, Basis::Theta);
    let err = back.amplitudes.iter().zip(&st.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-13);
}

#[test]
fn sinc_integrals_match_closed_forms() {
    // ∫ sinc^{2N} for the normalized sinc: 1, 2/3, 11/20, 151/315, 15619/36288.
    let exact = [1.0, 2.0 / 3.0, 11.0 / 20.0, 151.0 / 315.0, 15619.0 / 36288.0];
    for (i, e) in exact.iter().enumerate() {
        let v: f64 = sinc_power_integral((i + 1) as u32);
        assert!((v - e).abs() < 1e-12, "N={} got {v} want {e}", i + 1);
    }
}

#[test]
fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
    let (x, w) = gauss_legendre(8);
    for p in 0..16 {
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
        let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
        assert!((q - exact).abs() < 1e-14, "degree {p}");
    }
}

#[test]
fn free_evolution_recurs_after_one_cycle() {
    for d in [8, 64, 512] {
        let m = quantum(d);
        let s = clock_state(&m, 0.0);
        let back = free_evolve(&m, &s, m.t0);
        let td = trace_distance(&s.amplitudes, &back.amplitudes).unwrap();
        assert!(td <= 1e-12, "d={d}: {td}");
    }
}

#[test]
fn potential_riemann_sum_is_unit() {
    for d in [64, 256, 512] {
        let m = quantum(d);
        for l in 1..=m.ng {
            let x0 = window_center(&m, l, 0.0);
            let s = riemann_sum(&m, x0);
            assert!((s - 1.0).abs() < 1e-6, "d={d} l={l}: {s}");
        }
    }
}

#[test]
fn desk_schedule_gate_counts() {
    let ng: Vec<usize> = [64, 128, 256, 512].iter().map(|&d| quantum(d).ng).collect();
    assert_eq!(ng, vec![1, 2, 4, 7]);
}

#[test]
fn creation_operator_norm() {
    for d in [8, 33, 256] {
        let m = quantum(d);
        let r = norm_diagnostics(&m).unwrap();
        // Σ_{n<d} |⟨n+1|a†|n⟩|² = Σ n
        let direct: f64 = (1..d).map(|n| n as f64).sum::<f64>().sqrt();
        assert!((r.creation_frobenius - direct).abs() < 1e-9 * direct);
    }
}

#[test]
fn mean_energy_matches_energy_amplitudes() {
    let m = quantum(128);
    let s = clock_state(&m, 0.0);
    let e = naive_to_energy(&s.amplitudes);
    let direct: f64 = e.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum::<f64>() * m.omega0;
    let got = mean_energy(&m, &s).unwrap();
    assert!((got - direct).abs() < 1e-9 * direct);
    // Gaussian centred on n0 far from both edges
    assert!((got / m.omega0 - m.n0).abs() < 1e-6 * m.n0);
}

#[test]
fn unknown_override_key_is_rejected() {
    let map = std::collections::BTreeMap::from([("sigma_scal".to_string(), 2.0)]);
    assert!(Overrides::from_map(&map).is_err());
    let map = std::collections::BTreeMap::from([("ng".to_string(), 2.5)]);
    assert!(Overrides::from_map(&map).is_err());
}

#[test]
fn bad_model_parameters_are_rejected() {
    assert!(make_model::<f64>(1, 0.05, Regime::Quantum, 1.0, &Overrides::default()).is_err());
    assert!(make_model::<f64>(64, 0.05, Regime::Quantum, -1.0, &Overrides::default()).is_err());
    assert!(potential_profile(&quantum(64), 0, 0.0).is_err());
    assert!(potential_profile(&quantum(64), 1, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clock_states_are_normalized(d in 8usize..300, k0 in -50.0f64..400.0) {
        let m = quantum(d);
        let s = clock_state(&m, k0);
        let n: f64 = s.amplitudes.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_evolution_is_a_lattice_shift(d in 8usize..200, k0 in 0.0f64..50.0, s in 0usize..40) {
        let m = quantum(d);
        let a = free_evolve(&m, &clock_state(&m, k0), m.t0 * s as f64 / d as f64);
        let b = clock_state(&m, k0 + s as f64);
        prop_assert!(trace_distance(&a.amplitudes, &b.amplitudes).unwrap() < 1e-10);
    }

    #[test]
    fn window_rep_is_centred_and_congruent(k in 0usize..1000, k0 in -500.0f64..500.0, d in 2usize..400) {
        let df = d as f64;
        let r = window_rep(k as f64, k0, df);
        prop_assert!(r - k0 > -df / 2.0 - 1e-9 && r - k0 <= df / 2.0 + 1e-9);
        let q = (r - k as f64) / df;
        prop_assert!((q - q.round()).abs() < 1e-9);
    }

    #[test]
    fn anchored_profile_ignores_anchor(d in 16usize..160, k0 in -100.0f64..100.0) {
        let m = quantum(d);
        let a = potential_profile(&m, m.ng, 0.0).unwrap();
        let b = potential_profile_anchored(&m, m.ng, 0.0, k0).unwrap();
        let peak = a.values.iter().copied().fold(0.0, f64::max);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-12 * peak);
        }
    }

    #[test]
    fn potential_is_non_negative_and_periodic(d in 16usize..160, x in -10.0f64..10.0) {
        let m = quantum(d);
        let x0 = window_center(&m, 1, 0.0);
        let v = vbar(&m, x, x0);
        prop_assert!(v >= 0.0);
        let w = vbar(&m, x + 2.0 * std::f64::consts::PI, x0);
        prop_assert!((v - w).abs() <= 1e-9 * (1.0 + v));
    }
}
