use nalgebra::DMatrix;
use serde::Serialize;

use super::block::{shift_generator, ShiftGenerator};
use crate::clockcore::{clock_state, potential_profile, window_center, Basis, ClockModel, ClockState, Regime};
use crate::error::{Error, Result};
use crate::gatesim::{
    step_count, Coupling, ExactPropagator, JointHamiltonian, SplitStep, EXACT_DIM_CAP,
};
use crate::scalar::{vdot, Real, C};

/// Samples per read interval, placed at the midpoints of 8 equal slices.
pub const READ_SAMPLES: usize = 8;

/// Largest (block_dim^lanes)·d the bus simulator accepts.
pub const BUS_DIM_CAP: usize = 1 << 22;

/// One bus lane: the lane index selects both the read interval and the
/// interaction window.
#[derive(Clone, Debug, Serialize)]
pub struct LaneSpec {
    pub lane: usize,
    pub column: Vec<usize>,
    pub alphabet: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BusSample {
    pub cycle: usize,
    pub k: usize,
    pub t: f64,
    pub expected: usize,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BusReport {
    pub d: usize,
    /// L: number of non-zero cells in the column.
    pub l: usize,
    pub lane: usize,
    pub offset_used: f64,
    pub f_bus: f64,
    pub samples: Vec<BusSample>,
    pub min_fidelity: f64,
}

/// Spectral branches of the lane dynamics. The drive is block diagonal in
/// the shift eigenbasis, so the joint state is Σ_τ (⊗_l P_{τ_l}|0⟩_l) ⊗ ψ_τ(t)
/// where ψ_τ evolves under H_C2 + Σ_l Ω_{τ_l} I_C2^(l).
pub struct LaneBranches<T: Real> {
    pub model: ClockModel<T>,
    pub offset: T,
    pub lanes: Vec<LaneSpec>,
    pub shifts: Vec<ShiftGenerator<T>>,
    /// Per lane, per eigenvalue: P_Ω|0⟩ in the block basis.
    pub components: Vec<Vec<Vec<C<T>>>>,
    /// Eigenvalue index per lane for each retained branch.
    pub tuples: Vec<Vec<usize>>,
    props: Vec<ExactPropagator<T>>,
    psi0: Vec<C<T>>,
}

fn cproj<T: Real>(p: &DMatrix<C<T>>, idx: usize) -> Vec<C<T>> {
    p.column(idx).iter().copied().collect()
}

fn norm_sq<T: Real>(v: &[C<T>]) -> T {
    v.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
}

pub fn lane_branches<T: Real>(
    model: &ClockModel<T>,
    lanes: &[LaneSpec],
    offset: T,
) -> Result<LaneBranches<T>> {
    if model.regime != Regime::Classical {
        return Err(Error::param("model2", "bus clock must use the classical schedule"));
    }
    if lanes.is_empty() || lanes.len() > 3 {
        return Err(Error::param("lanes", "between 1 and 3 lanes are simulated"));
    }
    for (i, a) in lanes.iter().enumerate() {
        if lanes[..i].iter().any(|b| b.lane == a.lane) {
            return Err(Error::param("lanes", format!("lane {} given twice", a.lane)));
        }
    }
    if model.d > EXACT_DIM_CAP {
        return Err(Error::CapabilityExceeded {
            what: "bus clock".into(),
            dim: model.d,
            cap: EXACT_DIM_CAP,
        });
    }
    let shifts = lanes
        .iter()
        .map(|s| shift_generator::<T>(&s.column, s.alphabet))
        .collect::<Result<Vec<_>>>()?;
    let dim = shifts
        .iter()
        .try_fold(model.d, |acc, s| acc.checked_mul(s.block.block_dim))
        .unwrap_or(usize::MAX);
    if dim > BUS_DIM_CAP {
        return Err(Error::CapabilityExceeded { what: "bus lanes".into(), dim, cap: BUS_DIM_CAP });
    }
    let profiles = lanes
        .iter()
        .map(|s| potential_profile(model, s.lane, offset).map(|p| p.values))
        .collect::<Result<Vec<_>>>()?;

    let components: Vec<Vec<Vec<C<T>>>> = shifts
        .iter()
        .map(|s| {
            let i0 = s.block.initial_index();
            s.projectors.iter().map(|(_, p)| cproj(p, i0)).collect()
        })
        .collect();

    // enumerate eigenvalue tuples carrying weight
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for comp in &components {
        let mut next = Vec::new();
        for t in &tuples {
            for (a, v) in comp.iter().enumerate() {
                if norm_sq(v) > T::of(1e-24) {
                    let mut u = t.clone();
                    u.push(a);
                    next.push(u);
                }
            }
        }
        tuples = next;
    }

    let mut props = Vec::with_capacity(tuples.len());
    for tup in &tuples {
        let couplings = tup
            .iter()
            .zip(&shifts)
            .zip(&profiles)
            .map(|((&a, s), prof)| Coupling {
                drive: DMatrix::from_element(1, 1, C::new(s.projectors[a].0, T::zero())),
                potential: prof.clone(),
            })
            .collect();
        let ham = JointHamiltonian::new(model, 1, couplings, None)?;
        props.push(ExactPropagator::new(&ham)?);
    }
    let psi0 = clock_state(model, T::zero()).amplitudes;
    Ok(LaneBranches {
        model: model.clone(),
        offset,
        lanes: lanes.to_vec(),
        shifts,
        components,
        tuples,
        props,
        psi0,
    })
}

impl<T: Real> LaneBranches<T> {
    /// ψ_τ(t) for every retained branch, θ basis (unit norm each).
    pub fn clock_branches(&self, t: T) -> Vec<Vec<C<T>>> {
        self.props.iter().map(|p| p.apply(&self.psi0, t)).collect()
    }

    pub fn branch_state(&self, i: usize, t: T) -> ClockState<T> {
        ClockState { amplitudes: self.props[i].apply(&self.psi0, t), basis: Basis::Theta, a_nor: T::one() }
    }

    /// Population of symbol `s` in cell 0 of lane `li` (position in `lanes`).
    pub fn cell0_population(&self, branches: &[Vec<C<T>>], li: usize, s: usize) -> T {
        let block = &self.shifts[li].block;
        let mut acc = T::zero();
        for (i, ti) in self.tuples.iter().enumerate() {
            for (j, tj) in self.tuples.iter().enumerate() {
                let same_rest = ti.iter().zip(tj).enumerate().all(|(m, (a, b))| m == li || a == b);
                if !same_rest {
                    continue;
                }
                let mut w = T::one();
                for (m, &a) in ti.iter().enumerate() {
                    if m != li {
                        w *= norm_sq(&self.components[m][a]);
                    }
                }
                let vi = &self.components[li][ti[li]];
                let vj = &self.components[li][tj[li]];
                let mut cross = C::new(T::zero(), T::zero());
                for (b, (zi, zj)) in vi.iter().zip(vj).enumerate() {
                    if block.cell0(b) == s {
                        cross += zj.conj() * zi;
                    }
                }
                if cross.norm_sqr() == T::zero() {
                    continue;
                }
                let ov = vdot(&branches[j], &branches[i]);
                acc += (ov * cross).re.scale(w);
            }
        }
        acc
    }

    /// Full lane ⊗ clock state for a single lane, block-major like the gate simulator.
    pub fn joint_state(&self, t: T) -> Result<Vec<C<T>>> {
        if self.lanes.len() != 1 {
            return Err(Error::param("lanes", "joint state is built for one lane only"));
        }
        let d = self.model.d;
        let n = self.shifts[0].block.block_dim;
        let br = self.clock_branches(t);
        let mut out = vec![C::new(T::zero(), T::zero()); n * d];
        for (tup, psi) in self.tuples.iter().zip(&br) {
            let v = &self.components[0][tup[0]];
            for b in 0..n {
                if v[b].norm_sqr() == T::zero() {
                    continue;
                }
                for k in 0..d {
                    out[b * d + k] += v[b] * psi[k];
                }
            }
        }
        Ok(out)
    }
}

/// Same single-lane state by splitstep on the full block ⊗ clock space.
pub fn joint_lane_state<T: Real>(
    model: &ClockModel<T>,
    lane: &LaneSpec,
    offset: T,
    t: T,
    dt: T,
) -> Result<Vec<C<T>>> {
    if !(dt > T::zero()) {
        return Err(Error::param("dt", "must be positive"));
    }
    let sg = shift_generator::<T>(&lane.column, lane.alphabet)?;
    let n = sg.block.block_dim;
    let dim = n * model.d;
    if dim > BUS_DIM_CAP {
        return Err(Error::CapabilityExceeded { what: "joint bus lane".into(), dim, cap: BUS_DIM_CAP });
    }
    let prof = potential_profile(model, lane.lane, offset)?;
    let ham = JointHamiltonian::new(
        model,
        n,
        vec![Coupling { drive: sg.drive().clone(), potential: prof.values }],
        None,
    )?;
    let clock = clock_state(model, T::zero());
    let mut init = vec![C::new(T::zero(), T::zero()); n];
    init[sg.block.initial_index()] = C::new(T::one(), T::zero());
    let mut psi = crate::gatesim::JointState::product(&init, &clock).amplitudes;
    let ss = SplitStep::new(ham);
    let (steps, h) = step_count(t, dt);
    let k = ss.kernel(h);
    ss.advance(&mut psi, &k, steps);
    Ok(psi)
}

/// Write time of `lane` within cycle 0 under the π-offset schedule.
fn write_time<T: Real>(model: &ClockModel<T>, lane: usize) -> T {
    let x = window_center(model, lane, T::pi()) / T::two_pi();
    (x - x.floor()) * model.t0
}

/// Symbol cell 0 must hold at time t under the π-offset schedule.
fn expected_symbol<T: Real>(model: &ClockModel<T>, spec: &LaneSpec, t: T) -> usize {
    let tw = write_time(model, spec.lane);
    let writes = if t <= tw { 0 } else { ((t - tw) / model.t0).ceil().to_usize().unwrap_or(0) };
    spec.column[writes % spec.column.len()]
}

/// Evolve up to three lanes for `cycles` cycles and sample cell 0 of each
/// lane inside its read intervals.
pub fn run_bus_lanes<T: Real>(
    model2: &ClockModel<T>,
    lanes: &[LaneSpec],
    cycles: usize,
    offset: T,
) -> Result<Vec<BusReport>> {
    let br = lane_branches(model2, lanes, offset)?;
    let t1 = model2.t1();
    let mut reports: Vec<BusReport> = lanes
        .iter()
        .map(|s| BusReport {
            d: model2.d,
            l: s.column.len() - 1,
            lane: s.lane,
            offset_used: offset.to_f64_lossy(),
            f_bus: (T::one() / model2.t0).to_f64_lossy(),
            samples: vec![],
            min_fidelity: 1.0,
        })
        .collect();
    let mut sample = |t: T, cycle: usize, k: usize, states: &[Vec<C<T>>], li: usize| {
        let s = &lanes[li];
        let expected = expected_symbol(model2, s, t);
        let f = br.cell0_population(states, li, expected).max(T::zero()).min(T::one());
        let r = &mut reports[li];
        r.min_fidelity = r.min_fidelity.min(f.to_f64_lossy());
        r.samples.push(BusSample { cycle, k, t: t.to_f64_lossy(), expected, fidelity: f.to_f64_lossy() });
    };
    if cycles == 0 {
        let states = br.clock_branches(T::zero());
        for li in 0..lanes.len() {
            sample(T::zero(), 0, 0, &states, li);
        }
        return Ok(reports);
    }
    for r in 0..cycles {
        for (li, s) in lanes.iter().enumerate() {
            let start = T::of_usize(r) * model2.t0 + T::of_usize(s.lane - 1) * t1;
            for k in 0..READ_SAMPLES {
                let t = start + t1 * (T::of_usize(k) + T::of(0.5)) / T::of_usize(READ_SAMPLES);
                let states = br.clock_branches(t);
                sample(t, r, k, &states, li);
            }
        }
    }
    Ok(reports)
}

pub fn run_bus_lane<T: Real>(
    model2: &ClockModel<T>,
    lane: usize,
    column: &[usize],
    alphabet: usize,
    cycles: usize,
    offset: T,
) -> Result<BusReport> {
    let spec = LaneSpec { lane, column: column.to_vec(), alphabet };
    Ok(run_bus_lanes(model2, &[spec], cycles, offset)?.remove(0))
}
