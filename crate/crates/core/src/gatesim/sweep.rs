use serde::Serialize;

use super::evolve::Method;
use super::program::GateProgram;
use super::run::{run_program, GateRunReport, RunOptions};
use crate::clockcore::{make_model, Overrides, Regime};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow<T: Real> {
    pub d: usize,
    pub ng: usize,
    pub f_t0: T,
    pub e0_t0: T,
    pub max_error: T,
    pub method: Method,
    pub regime: Regime,
    pub eps_bar: T,
}

impl<T: Real> ScalingRow<T> {
    pub fn from_report(r: &GateRunReport<T>) -> Self {
        ScalingRow {
            d: r.d,
            ng: r.ng,
            f_t0: r.f_t0,
            e0_t0: r.e0_t0,
            max_error: r.max_error,
            method: r.method,
            regime: r.regime,
            eps_bar: r.eps_bar,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingResult<T: Real> {
    pub rows: Vec<ScalingRow<T>>,
    /// Least-squares slope of ln(f T0) against ln(E0 T0); None when undefined.
    pub slope: Option<T>,
    pub intercept: Option<T>,
    /// Points that failed, with the reason.
    pub failures: Vec<(usize, String)>,
    pub partial: bool,
    pub reports: Vec<GateRunReport<T>>,
}

/// Least-squares line through (x, y); None with fewer than two distinct x.
pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Option<(T, T)> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = T::of_usize(x.len());
    let mx = x.iter().copied().fold(T::zero(), |a, b| a + b) / n;
    let my = y.iter().copied().fold(T::zero(), |a, b| a + b) / n;
    let sxx = x.iter().fold(T::zero(), |a, &v| a + (v - mx) * (v - mx));
    if sxx <= T::zero() {
        return None;
    }
    let sxy = x.iter().zip(y).fold(T::zero(), |a, (&u, &v)| a + (u - mx) * (v - my));
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

impl<T: Real> ScalingResult<T> {
    pub fn from_reports(reports: Vec<GateRunReport<T>>, failures: Vec<(usize, String)>) -> Self {
        let rows: Vec<_> = reports.iter().map(ScalingRow::from_report).collect();
        let x: Vec<T> = rows.iter().map(|r| r.e0_t0.ln()).collect();
        let y: Vec<T> = rows.iter().map(|r| r.f_t0.ln()).collect();
        let fit = fit_line(&x, &y);
        ScalingResult {
            slope: fit.map(|f| f.0),
            intercept: fit.map(|f| f.1),
            partial: !failures.is_empty(),
            failures,
            rows,
            reports,
        }
    }

    pub fn errors_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].max_error < w[0].max_error)
    }
}

/// Gate program filling every window by cycling through preset names.
#[derive(Clone, Debug, Serialize)]
pub struct ProgramTemplate {
    pub gates: Vec<String>,
}

impl ProgramTemplate {
    pub fn new<S: AsRef<str>>(gates: &[S]) -> Self {
        ProgramTemplate { gates: gates.iter().map(|s| s.as_ref().to_string()).collect() }
    }

    pub fn build<T: Real>(&self, len: usize) -> Result<GateProgram<T>> {
        GateProgram::repeat(&self.gates, len)
    }
}

/// One point of a sweep.
pub fn sweep_point<T: Real>(
    d: usize,
    eps_bar: T,
    regime: Regime,
    template: &ProgramTemplate,
    method: Method,
    overrides: &Overrides,
    opts: &RunOptions<T>,
) -> Result<GateRunReport<T>> {
    let model = make_model(d, eps_bar, regime, T::one(), overrides)?;
    let program = template.build(model.ng)?;
    run_program(&model, &program, method, opts)
}

/// Frequency-versus-energy sweep over `ds` (ascending).
pub fn scaling_sweep<T: Real>(
    ds: &[usize],
    eps_bar: T,
    regime: Regime,
    template: &ProgramTemplate,
    method: Method,
    overrides: &Overrides,
    opts: &RunOptions<T>,
) -> Result<ScalingResult<T>> {
    if ds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("ds", "must be strictly ascending"));
    }
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &d in ds {
        match sweep_point(d, eps_bar, regime, template, method, overrides, opts) {
            Ok(r) => reports.push(r),
            Err(e) => failures.push((d, e.to_string())),
        }
    }
    Ok(ScalingResult::from_reports(reports, failures))
}
