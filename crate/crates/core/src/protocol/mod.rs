//! Slot-level protocol: the pre-shared schedule, the three slot kinds and
//! disturbance bookkeeping.

mod schedule;
mod slots;

pub use schedule::{generate_schedule, NodePair, Schedule, SlotAssignment, SlotType};
pub use slots::{
    detect_eavesdropper, estimate_disturbance, run_type1_slot, run_type2_slot, run_type3_slot,
    DisturbanceEstimate, DisturbanceStats, Link, Streams, Type1Record,
};
