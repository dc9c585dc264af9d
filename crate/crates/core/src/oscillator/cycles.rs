use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dissipator::{oscillator_hamiltonian, renew, Dissipator};
use super::quad::cumulative_trapezoid;
use super::stats::{renewal_statistics, CycleStats};
use super::trace::{propagate_from, CycleTrace, GridSpec};
use crate::clockcore::ClockModel;
use crate::error::{Error, Result};
use crate::gatesim::{
    apply_matrix, step_count, trace_distance, ExpmStepper, GateProgram,
    JointHamiltonian, JointState, Method, SplitStep,
};
use crate::scalar::{vnorm, Real, C};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleMode {
    /// Quantum-jump unravelling: sample the renewal time and the jump site.
    Montecarlo,
    /// Renew deterministically at the density maximum.
    ModeTime,
}

impl std::str::FromStr for CycleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "montecarlo" | "monte_carlo" => Ok(CycleMode::Montecarlo),
            "mode_time" | "modetime" => Ok(CycleMode::ModeTime),
            other => Err(Error::param("mode", format!("unknown cycle mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleRecord<T: Real> {
    pub index: usize,
    /// τ_{l+1} - τ_l.
    pub renewal_time: T,
    /// θ-site of the jump (mode_time: none, the dominant marginal is kept).
    pub renewal_site: Option<usize>,
    /// Trace distance to the ideal state at t_j, j = 1..N_g-1.
    pub errors: Vec<T>,
    pub max_error: T,
    pub stats: CycleStats<T>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiCycleReport<T: Real> {
    pub mode: CycleMode,
    pub seed: u64,
    pub cycles: Vec<CycleRecord<T>>,
    pub mean_max_error: T,
    /// (max - min)/mean of the per-cycle max errors.
    pub max_error_spread: T,
}

/// Ideal joint states at t_j, j = 1..N_g-1: the program's gates applied to
/// `logical`, clock at k0 = j d/N_g.
pub fn ideal_cycle_targets<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    logical: &[C<T>],
) -> Vec<Vec<C<T>>> {
    let mut l = logical.to_vec();
    let mut out = Vec::with_capacity(program.len());
    for (j, g) in program.generators.iter().enumerate() {
        l = apply_matrix(&g.unitary, &l);
        let clock = CycleTrace::clock_target(model, j + 1);
        out.push(JointState::product(&l, &clock).amplitudes);
    }
    out
}

fn normalized<T: Real>(v: &[C<T>]) -> Result<Vec<C<T>>> {
    let n = vnorm(v);
    if n <= T::zero() {
        return Err(Error::Degenerate("conditional state vanished".into()));
    }
    Ok(v.iter().map(|z| z.unscale(n)).collect())
}

fn cycle_errors<T: Real>(
    model: &ClockModel<T>,
    program: &GateProgram<T>,
    trace: &CycleTrace<T>,
) -> Result<Vec<T>> {
    let targets = ideal_cycle_targets(model, program, &trace.initial_logical);
    targets
        .iter()
        .enumerate()
        .map(|(j, tgt)| trace_distance(tgt, &normalized(&trace.checkpoints[j + 1])?))
        .collect()
}

fn advance_by<T: Real>(
    model: &ClockModel<T>,
    ham: &JointHamiltonian<T>,
    psi: &[C<T>],
    dt: T,
    grid: &GridSpec<T>,
    method: Method,
) -> Result<Vec<C<T>>> {
    if dt <= T::zero() {
        return Ok(psi.to_vec());
    }
    Ok(match method {
        Method::Splitstep => {
            let ss = SplitStep::new(ham.clone());
            let (n, h) = step_count(dt, grid.dt.unwrap_or_else(|| super::trace::oscillator_dt(model)));
            let k = ss.kernel(h);
            let mut v = psi.to_vec();
            ss.advance(&mut v, &k, n);
            v
        }
        Method::Exact => ExpmStepper::new(ham, dt)?.apply(psi),
    })
}

fn dominant_marginal<T: Real>(psi: &JointState<T>, v: &[T]) -> Vec<C<T>> {
    let dl = psi.d_l;
    let mut sigma = DMatrix::<C<T>>::zeros(dl, dl);
    for (k, &vk) in v.iter().enumerate() {
        if vk == T::zero() {
            continue;
        }
        let s = psi.at_site(k);
        for a in 0..dl {
            for b in 0..dl {
                sigma[(a, b)] += (s[a] * s[b].conj()).scale(T::of(2.0) * vk);
            }
        }
    }
    let e = sigma.symmetric_eigen();
    let imax = (0..dl).fold(0, |best, i| if e.eigenvalues[i] > e.eigenvalues[best] { i } else { best });
    e.eigenvectors.column(imax).iter().copied().collect()
}

fn sample_index<T: Real>(w: &[T], u: T) -> usize {
    let mut acc = T::zero();
    for (i, &x) in w.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    w.iter().rposition(|&x| x > T::zero()).unwrap_or(0)
}

/// Run `cycles` renewal cycles; cycle l uses `programs[l % programs.len()]`.
#[allow(clippy::too_many_arguments)]
pub fn run_cycles<T: Real>(
    model: &ClockModel<T>,
    programs: &[GateProgram<T>],
    dissipator: &Dissipator<T>,
    cycles: usize,
    mode: CycleMode,
    seed: u64,
    grid: &GridSpec<T>,
    method: Method,
) -> Result<MultiCycleReport<T>> {
    if cycles == 0 {
        return Err(Error::param("L", "need at least one cycle"));
    }
    if programs.is_empty() {
        return Err(Error::param("programs", "need at least one program"));
    }
    let hams = programs
        .iter()
        .map(|p| oscillator_hamiltonian(model, p, dissipator))
        .collect::<Result<Vec<_>>>()?;
    let mut g = grid.clone();
    g.keep_states = true;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut logical = programs[0].initial_logical.clone();
    let mut records = Vec::with_capacity(cycles);
    for l in 0..cycles {
        let idx = l % programs.len();
        let (prog, ham) = (&programs[idx], &hams[idx]);
        let trace = propagate_from(model, ham, &logical, dissipator, &g, method)?;
        let stats = renewal_statistics(&trace, model)?;
        let errors = cycle_errors(model, prog, &trace)?;
        let cdf = cumulative_trapezoid(&trace.time_grid, &trace.renewal_density);
        let total = *cdf.last().unwrap();
        if !(total > T::zero()) {
            return Err(Error::Degenerate(format!(
                "cycle {l}: no renewal mass before t_cut = {:.3e}",
                trace.t_cut.to_f64_lossy()
            )));
        }
        let states = trace.states.as_ref().unwrap();
        let (tau, site, next) = match mode {
            CycleMode::Montecarlo => {
                let u = T::of(rng.gen::<f64>()) * total;
                let i = cdf.iter().rposition(|&c| c <= u).unwrap_or(0).min(cdf.len() - 2);
                let span = cdf[i + 1] - cdf[i];
                let frac = if span > T::zero() { (u - cdf[i]) / span } else { T::zero() };
                let h = trace.time_grid[i + 1] - trace.time_grid[i];
                let tau = trace.time_grid[i] + frac * h;
                let psi = advance_by(model, ham, &states[i], frac * h, &g, method)?;
                let js = JointState { amplitudes: psi, d_l: prog.d_l, d: model.d };
                let w: Vec<T> = (0..model.d)
                    .map(|k| {
                        T::of(2.0) * dissipator.vc_values[k]
                            * js.at_site(k).iter().fold(T::zero(), |a, z| a + z.norm_sqr())
                    })
                    .collect();
                let wsum = w.iter().copied().fold(T::zero(), |a, b| a + b);
                let j = sample_index(&w, T::of(rng.gen::<f64>()) * wsum);
                let (next, _) = renew(&js, j, &dissipator.renewal_target)
                    .ok_or_else(|| Error::Degenerate("renewal on an empty site".into()))?;
                (tau, Some(j), next)
            }
            CycleMode::ModeTime => {
                let i = (0..trace.renewal_density.len()).fold(0, |b, i| {
                    if trace.renewal_density[i] > trace.renewal_density[b] { i } else { b }
                });
                let js = JointState { amplitudes: states[i].clone(), d_l: prog.d_l, d: model.d };
                (trace.time_grid[i], None, dominant_marginal(&js, &dissipator.vc_values))
            }
        };
        let max_error = errors.iter().copied().fold(T::zero(), |a, b| a.max(b));
        records.push(CycleRecord { index: l, renewal_time: tau, renewal_site: site, errors, max_error, stats });
        logical = next;
    }
    let maxes: Vec<T> = records.iter().map(|r| r.max_error).collect();
    let mean = maxes.iter().copied().fold(T::zero(), |a, b| a + b) / T::of_usize(maxes.len());
    let hi = maxes.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let lo = maxes.iter().copied().fold(hi, |a, b| a.min(b));
    let spread = if mean > T::zero() { (hi - lo) / mean } else { T::zero() };
    Ok(MultiCycleReport { mode, seed, cycles: records, mean_max_error: mean, max_error_spread: spread })
}
