use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::run::GateRunReport;
use crate::clockcore::Regime;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Numerical constants of the frequency bounds.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct BoundConstants {
    pub lambda: f64,
    pub kappa: f64,
    /// SQL constant; cited externally and never calibrated here.
    pub c0: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants { lambda: 4.64, kappa: 0.091, c0: 0.09 }
    }
}

impl BoundConstants {
    /// Δ_0 = 1/(2(λ+1)).
    pub fn delta0(&self) -> f64 {
        1.0 / (2.0 * (self.lambda + 1.0))
    }

    pub fn c_hl(&self) -> f64 {
        self.delta0() / self.kappa
    }

    pub fn c_sql(&self) -> f64 {
        self.delta0() / self.c0
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("lambda".to_string(), self.lambda),
            ("kappa".to_string(), self.kappa),
            ("c0".to_string(), self.c0),
            ("c0_calibrated".to_string(), 0.0),
        ])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs - lhs; negative means violation.
    pub slack: f64,
    pub pass: bool,
    pub constants: BTreeMap<String, f64>,
}

impl BoundEntry {
    pub fn new(name: &str, lhs: f64, rhs: f64, constants: &BoundConstants) -> Self {
        BoundEntry {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            pass: lhs <= rhs,
            constants: constants.as_map(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
    /// Zero energy (or power): the bound forces f = 0.
    pub degenerate: bool,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// f <= (Δ0/κ) E and, for classical runs, f <= (Δ0/c0) √(E/T0).
///
/// The bounds presuppose an orthogonal logical trajectory; consecutive ideal
/// states must be at trace distance >= 1 - 2·max_error or the check is refused.
pub fn check_frequency_bounds<T: Real>(
    report: &GateRunReport<T>,
    constants: &BoundConstants,
) -> Result<BoundReport> {
    let max_err = report.max_error.to_f64_lossy();
    let min_dist = report.min_consecutive_logical_distance.to_f64_lossy();
    if report.per_gate_error.len() > 1 && min_dist < 1.0 - 2.0 * max_err {
        return Err(Error::Degenerate(format!(
            "logical trajectory not orthogonal (min consecutive distance {min_dist:.3e}); \
             bound hypothesis violated"
        )));
    }
    let f = report.f.to_f64_lossy();
    let e = report.e0.to_f64_lossy();
    let t0 = report.t0.to_f64_lossy();
    let mut entries = vec![BoundEntry::new("heisenberg", f, constants.c_hl() * e, constants)];
    if report.regime == Regime::Classical {
        let rhs = constants.c_sql() * (e.max(0.0) / t0).sqrt();
        entries.push(BoundEntry::new("sql", f, rhs, constants));
    }
    Ok(BoundReport { entries, degenerate: e <= 0.0 })
}
