use std::collections::HashSet;

use proptest::prelude::*;
use tickgate::{trajectory_seed, ExperimentKind, ExperimentManifest};

#[test]
fn trajectory_seeds_are_distinct() {
    let s: HashSet<u64> = (0..256).map(|i| trajectory_seed(7, i)).collect();
    assert_eq!(s.len(), 256);
    assert_ne!(trajectory_seed(7, 0), trajectory_seed(8, 0));
}

proptest! {
    #[test]
    fn seeds_are_pure_functions(master in any::<u64>(), i in 0u64..1000) {
        prop_assert_eq!(trajectory_seed(master, i), trajectory_seed(master, i));
    }

    #[test]
    fn numeric_fields_round_trip(seed in 0u64..(i64::MAX as u64), d in 8usize..4096, eps in 0.001f64..0.16, g in 0.0f64..50.0) {
        let mut m = ExperimentManifest::new(ExperimentKind::OscillatorCycles);
        m.seed = seed;
        m.model.d = d;
        m.model.eps_bar = eps;
        m.dissipator.gamma_bar0 = g;
        let back = ExperimentManifest::from_toml_str(&m.to_toml_string(), "generated").unwrap();
        prop_assert_eq!(&m, &back);
    }
}
