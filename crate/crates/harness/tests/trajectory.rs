use tickgate::experiments::{clock_trajectory_verdicts, two_time_verdict};
use tickgate_core::clockcore::{ClockModel, CustomParams};
use tickgate_core::limits::Verdict::{self, *};

fn clock(sigma: f64, ng: usize) -> ClockModel<f64> {
    ClockModel::custom(CustomParams { d: 256, t0: 1.0, sigma, n0: 127.5, n_pot: 1.0, n_exponent: 5, ng }).unwrap()
}

#[test]
fn rule_needs_two_consecutive_samples() {
    let cases: [(&[Verdict], Verdict); 6] = [
        (&[Semiclassical, Semiclassical], Semiclassical),
        (&[Semiclassical, Squeezed, Semiclassical], Unclassified),
        (&[Squeezed, Semiclassical, Semiclassical], Semiclassical),
        (&[Squeezed, Squeezed, Unclassified], Squeezed),
        (&[Semiclassical], Unclassified),
        (&[], Unclassified),
    ];
    for (samples, want) in cases {
        assert_eq!(two_time_verdict(samples), want, "{samples:?}");
    }
}

#[test]
fn free_clock_keeps_its_class() {
    let d = 256f64;
    let round = clock(d.sqrt(), 3);
    let v = clock_trajectory_verdicts(&round).unwrap();
    assert_eq!(v.len(), 4);
    assert_eq!(two_time_verdict(&v), Semiclassical);
    let squeezed = clock(d.powf(0.8), 1);
    let v = clock_trajectory_verdicts(&squeezed).unwrap();
    assert_eq!(v.len(), 2);
    assert_eq!(two_time_verdict(&v), Squeezed);
}
