use std::ops::AddAssign;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::adversary::{Eavesdropper, InFlight, InterceptDecision};
use crate::channel::ChannelModel;
use crate::quantum::{
    interfere_path_packet, measure_qubit, prepare_bb84, prepare_path_packet, Basis, QubitPreparation,
    SpatioTemporalMode,
};
use crate::rng::{stream, Subsystem};

use super::schedule::{SlotAssignment, SlotType};

/// Independent random streams used while running slots.
#[derive(Debug, Clone)]
pub struct Streams {
    pub source: ChaCha8Rng,
    pub channel: ChaCha8Rng,
    pub measurement: ChaCha8Rng,
}

impl Streams {
    pub fn from_seed(root_seed: u64) -> Self {
        Self {
            source: stream(root_seed, Subsystem::Source),
            channel: stream(root_seed, Subsystem::Channel),
            measurement: stream(root_seed, Subsystem::Measurement),
        }
    }
}

/// Both directions of a link. The forward model also supplies γ and μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub forward: ChannelModel,
    pub back: ChannelModel,
}

impl Link {
    pub fn symmetric(model: ChannelModel) -> Self {
        Self {
            forward: model,
            back: model,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DisturbanceStats {
    pub type2_trials: u64,
    pub type2_errors: u64,
    pub type3_trials: u64,
    pub type3_errors: u64,
}

impl AddAssign for DisturbanceStats {
    fn add_assign(&mut self, rhs: Self) {
        self.type2_trials += rhs.type2_trials;
        self.type2_errors += rhs.type2_errors;
        self.type3_trials += rhs.type3_trials;
        self.type3_errors += rhs.type3_errors;
    }
}

/// Empirical disturbances; `None` where no trials were run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceEstimate {
    pub d2: Option<f64>,
    pub d3: Option<f64>,
}

fn ratio(errors: u64, trials: u64) -> Option<f64> {
    (trials > 0).then(|| errors as f64 / trials as f64)
}

pub fn estimate_disturbance(stats: &DisturbanceStats) -> DisturbanceEstimate {
    DisturbanceEstimate {
        d2: ratio(stats.type2_errors, stats.type2_trials),
        d3: ratio(stats.type3_errors, stats.type3_trials),
    }
}

pub fn detect_eavesdropper(d2_hat: f64, d3_hat: f64, threshold2: f64, threshold3: f64) -> bool {
    d2_hat > threshold2 || d3_hat > threshold3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Type1Record {
    pub delivered: bool,
    pub eve_learned_endpoints: bool,
}

fn forward_mode(a: &SlotAssignment) -> SpatioTemporalMode {
    SpatioTemporalMode::new(a.sender, a.receiver, a.cycle)
}

fn return_mode(a: &SlotAssignment) -> SpatioTemporalMode {
    SpatioTemporalMode::new(a.receiver, a.sender, a.cycle + 1)
}

/// Sends a random qubit back on the next cycle. Its content is never read;
/// Eve's decision for the round trip covers it.
fn send_return_qubit<R: Rng>(
    a: &SlotAssignment,
    link: &Link,
    eve: &mut Eavesdropper<R>,
    intercept: InterceptDecision,
    streams: &mut Streams,
) {
    let qubit = QubitPreparation::random(&mut streams.source);
    let mode = return_mode(a);
    eve.tamper(InFlight::Single { mode, qubit }, intercept);
    link.back.transmit(&mut streams.channel);
}

/// Payload qubit (Z-encoded `payload_bit`) from sender to receiver, followed
/// by the dummy return.
pub fn run_type1_slot<R: Rng>(
    a: &SlotAssignment,
    payload_bit: bool,
    link: &Link,
    eve: &mut Eavesdropper<R>,
    intercept: InterceptDecision,
    streams: &mut Streams,
) -> Type1Record {
    debug_assert_eq!(a.slot_type, SlotType::Type1);
    let packet = InFlight::Single {
        mode: forward_mode(a),
        qubit: prepare_bb84(Basis::Z, payload_bit),
    };
    eve.tamper(packet, intercept);
    let delivered = link.forward.transmit(&mut streams.channel);
    send_return_qubit(a, link, eve, intercept, streams);
    Type1Record {
        delivered,
        eve_learned_endpoints: intercept.path,
    }
}

pub fn run_type2_slot<R: Rng>(
    a: &SlotAssignment,
    link: &Link,
    eve: &mut Eavesdropper<R>,
    intercept: InterceptDecision,
    streams: &mut Streams,
    stats: &mut DisturbanceStats,
) {
    debug_assert_eq!(a.slot_type, SlotType::Type2);
    let basis = a.basis.expect("Type 2 assignment carries a basis");
    let sent_bit = streams.source.random_bool(0.5);
    let sent = prepare_bb84(basis, sent_bit);

    let arrived = match eve.tamper(InFlight::Single { mode: forward_mode(a), qubit: sent }, intercept) {
        InFlight::Single { qubit, .. } => qubit,
        InFlight::Path(_) => unreachable!("single-mode packet stays single-mode"),
    };
    let survived = link.forward.transmit(&mut streams.channel);
    let measured = if survived {
        measure_qubit(arrived, basis, link.forward.mu, &mut streams.measurement)
            .expect("validated channel model")
    } else {
        streams.measurement.random_bool(0.5)
    };

    send_return_qubit(a, link, eve, intercept, streams);

    stats.type2_trials += 1;
    stats.type2_errors += (measured != sent_bit) as u64;
}

pub fn run_type3_slot<R: Rng>(
    a: &SlotAssignment,
    link: &Link,
    eve: &mut Eavesdropper<R>,
    intercept: InterceptDecision,
    streams: &mut Streams,
    stats: &mut DisturbanceStats,
) {
    debug_assert_eq!(a.slot_type, SlotType::Type3);
    let packet = prepare_path_packet(a.sender, a.receiver, a.cycle, &mut streams.source)
        .expect("schedule pairs have distinct endpoints");
    // one interception covers the round trip: the return leg adds nothing
    let packet = match eve.tamper(InFlight::Path(packet), intercept) {
        InFlight::Path(p) => p,
        InFlight::Single { .. } => unreachable!("path packet stays a path packet"),
    };
    let out = link.forward.transmit(&mut streams.channel);
    let back = link.back.transmit(&mut streams.channel);
    let outcome = interfere_path_packet(&packet, out && back, link.forward.gamma, &mut streams.measurement)
        .expect("validated channel model");

    stats.type3_trials += 1;
    stats.type3_errors += (outcome != packet.sign) as u64;
}
