//! One lane of the internal bus: a memory block whose cell contents are
//! cyclically shifted once per cycle by a second, semi-classical clock.

mod block;
mod lane;

pub use block::{shift_generator, shift_permutation, MemoryBlock, ShiftGenerator, ZERO_SYMBOL};
pub use lane::{
    joint_lane_state, lane_branches, run_bus_lane, run_bus_lanes, BusReport, BusSample, BUS_DIM_CAP,
    LaneBranches, LaneSpec, READ_SAMPLES,
};
