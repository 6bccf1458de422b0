//! Intercept-and-resend eavesdropper.
//!
//! Eve decides whether to intercept a link on a given cycle before she can
//! tell which slot type it carries, then either reads the propagation mode,
//! measures the payload qubit, or both, and forwards what she has. Her resend
//! hardware is ideal: interception never changes survival odds.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{check_probability, Error, Result};
use crate::quantum::{measure_qubit, prepare_bb84, Basis, PathPacket, QubitPreparation, SpatioTemporalMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttackMode {
    #[default]
    None,
    Path,
    Message,
    Both,
}

impl AttackMode {
    fn attacks_path(self) -> bool {
        matches!(self, AttackMode::Path | AttackMode::Both)
    }

    fn attacks_message(self) -> bool {
        matches!(self, AttackMode::Message | AttackMode::Both)
    }
}

impl FromStr for AttackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AttackMode::None),
            "path" => Ok(AttackMode::Path),
            "message" => Ok(AttackMode::Message),
            "both" => Ok(AttackMode::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown attack mode {other:?} (expected none, path, message or both)"
            ))),
        }
    }
}

impl fmt::Display for AttackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackMode::None => "none",
            AttackMode::Path => "path",
            AttackMode::Message => "message",
            AttackMode::Both => "both",
        })
    }
}

/// Attack configuration. Rates that the mode does not use are forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttackConfig {
    mode: AttackMode,
    eta_path: f64,
    eta_msg: f64,
}

impl AttackConfig {
    pub fn new(mode: AttackMode, eta_path: f64, eta_msg: f64) -> Result<Self> {
        check_probability("eta_path", eta_path)?;
        check_probability("eta_msg", eta_msg)?;
        Ok(Self {
            mode,
            eta_path: if mode.attacks_path() { eta_path } else { 0.0 },
            eta_msg: if mode.attacks_message() { eta_msg } else { 0.0 },
        })
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn path(eta: f64) -> Result<Self> {
        Self::new(AttackMode::Path, eta, 0.0)
    }

    pub fn message(eta: f64) -> Result<Self> {
        Self::new(AttackMode::Message, 0.0, eta)
    }

    pub fn mode(&self) -> AttackMode {
        self.mode
    }

    pub fn eta_path(&self) -> f64 {
        self.eta_path
    }

    pub fn eta_msg(&self) -> f64 {
        self.eta_msg
    }
}

/// What Eve does to the packet(s) on one link and cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InterceptDecision {
    pub path: bool,
    pub message: bool,
}

impl InterceptDecision {
    pub fn any(&self) -> bool {
        self.path || self.message
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnedBit {
    pub mode: SpatioTemporalMode,
    pub bit: bool,
    pub basis: Basis,
}

/// Append-only record of everything Eve touched and learned during a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EveLedger {
    intercepted: BTreeSet<SpatioTemporalMode>,
    learned_endpoints: Vec<SpatioTemporalMode>,
    learned_bits: Vec<LearnedBit>,
}

impl EveLedger {
    pub fn intercepted(&self) -> &BTreeSet<SpatioTemporalMode> {
        &self.intercepted
    }

    pub fn learned_endpoints(&self) -> &[SpatioTemporalMode] {
        &self.learned_endpoints
    }

    pub fn learned_bits(&self) -> &[LearnedBit] {
        &self.learned_bits
    }

    pub fn is_empty(&self) -> bool {
        self.intercepted.is_empty()
    }

    fn record_intercept(&mut self, mode: SpatioTemporalMode) {
        self.intercepted.insert(mode);
    }

    fn record_endpoints(&mut self, mode: SpatioTemporalMode) {
        self.intercepted.insert(mode);
        self.learned_endpoints.push(mode);
    }

    fn record_bit(&mut self, learned: LearnedBit) {
        self.intercepted.insert(learned.mode);
        self.learned_bits.push(learned);
    }
}

/// A packet as Eve sees it on the wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InFlight {
    /// Type 1 payload, Type 2 probe, or a dummy/return qubit: one mode only.
    Single {
        mode: SpatioTemporalMode,
        qubit: QubitPreparation,
    },
    /// The travelling arm of a Type 3 path superposition.
    Path(PathPacket),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageInterception {
    pub resent: QubitPreparation,
    pub eve_bit: bool,
    pub eve_basis: Basis,
}

pub fn decide_intercept<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<bool> {
    check_probability("rate", rate)?;
    Ok(rng.random_bool(rate))
}

/// Measure in a uniformly chosen basis and resend the observed eigenstate.
pub fn intercept_message<R: Rng + ?Sized>(prep: QubitPreparation, rng: &mut R) -> MessageInterception {
    let eve_basis = Basis::random(rng);
    let eve_bit = measure_qubit(prep, eve_basis, 0.0, rng).expect("zero flip probability is valid");
    MessageInterception {
        resent: prepare_bb84(eve_basis, eve_bit),
        eve_bit,
        eve_basis,
    }
}

/// Which-path measurement. Collapses a path superposition; a single-mode
/// packet's label is already classical, so it passes through unchanged.
pub fn intercept_path(packet: InFlight) -> (InFlight, SpatioTemporalMode) {
    match packet {
        InFlight::Single { mode, .. } => (packet, mode),
        InFlight::Path(mut p) => {
            let mode = p.forward_mode();
            p.collapsed = true;
            (InFlight::Path(p), mode)
        }
    }
}

/// Fraction of `type1_slots` (modes carrying actual traffic) whose endpoints
/// appear in the ledger.
pub fn learned_traffic_fraction(
    ledger: &EveLedger,
    type1_slots: &BTreeSet<SpatioTemporalMode>,
) -> Result<f64> {
    if type1_slots.is_empty() {
        return Err(Error::ZeroDenominator("number of Type 1 slots"));
    }
    Ok(learned_traffic_slots(ledger, type1_slots) as f64 / type1_slots.len() as f64)
}

/// Number of distinct `type1_slots` whose endpoints Eve read.
pub fn learned_traffic_slots(ledger: &EveLedger, type1_slots: &BTreeSet<SpatioTemporalMode>) -> usize {
    ledger
        .learned_endpoints
        .iter()
        .filter(|m| type1_slots.contains(m))
        .collect::<BTreeSet<_>>()
        .len()
}

/// Stateful eavesdropper for one simulation run. Owns its random stream and
/// ledger.
#[derive(Debug, Clone)]
pub struct Eavesdropper<R> {
    config: AttackConfig,
    ledger: EveLedger,
    rng: R,
}

impl<R: Rng> Eavesdropper<R> {
    pub fn new(config: AttackConfig, rng: R) -> Self {
        Self {
            config,
            ledger: EveLedger::default(),
            rng,
        }
    }

    pub fn config(&self) -> &AttackConfig {
        &self.config
    }

    pub fn ledger(&self) -> &EveLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> EveLedger {
        self.ledger
    }

    /// Hands over the ledger and starts a fresh one, keeping the random stream.
    pub fn take_ledger(&mut self) -> EveLedger {
        std::mem::take(&mut self.ledger)
    }

    /// Two draws per call regardless of mode, so the decision stream stays
    /// aligned across attack configurations with the same seed.
    pub fn decide(&mut self) -> InterceptDecision {
        let path = self.rng.random_bool(self.config.eta_path);
        let message = self.rng.random_bool(self.config.eta_msg);
        InterceptDecision { path, message }
    }

    /// Applies `decision` to a packet on the wire and books what was learned.
    pub fn tamper(&mut self, packet: InFlight, decision: InterceptDecision) -> InFlight {
        if !decision.any() {
            return packet;
        }
        let mut packet = packet;
        if decision.path {
            let (seen, mode) = intercept_path(packet);
            self.ledger.record_endpoints(mode);
            packet = seen;
        }
        if decision.message {
            packet = match packet {
                InFlight::Single { mode, qubit } => {
                    let m = intercept_message(qubit, &mut self.rng);
                    self.ledger.record_bit(LearnedBit { mode, bit: m.eve_bit, basis: m.eve_basis });
                    InFlight::Single { mode, qubit: m.resent }
                }
                InFlight::Path(mut p) => {
                    // polarization readout of |y> leaves the path degree of freedom alone
                    let m = intercept_message(p.dummy, &mut self.rng);
                    self.ledger.record_bit(LearnedBit {
                        mode: p.forward_mode(),
                        bit: m.eve_bit,
                        basis: m.eve_basis,
                    });
                    p.dummy = m.resent;
                    InFlight::Path(p)
                }
            };
        }
        packet
    }

    /// Marks a mode as intercepted when Eve touches a link that carries no
    /// packet on this cycle.
    pub fn touch_empty(&mut self, mode: SpatioTemporalMode, decision: InterceptDecision) {
        if decision.any() {
            self.ledger.record_intercept(mode);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{prepare_path_packet, Sign};
    use crate::rng::{stream, Subsystem};

    const N: usize = 100_000;

    #[test]
    fn mode_none_zeroes_rates() {
        let c = AttackConfig::new(AttackMode::None, 0.7, 0.3).unwrap();
        assert_eq!((c.eta_path(), c.eta_msg()), (0.0, 0.0));
        let c = AttackConfig::new(AttackMode::Path, 0.7, 0.3).unwrap();
        assert_eq!((c.eta_path(), c.eta_msg()), (0.7, 0.0));
        assert!(AttackConfig::new(AttackMode::Both, 1.1, 0.0).is_err());
        assert_eq!("both".parse::<AttackMode>().unwrap(), AttackMode::Both);
        assert!("sideways".parse::<AttackMode>().is_err());
    }

    #[test]
    fn decide_intercept_rates() {
        let mut rng = stream(3, Subsystem::Eve);
        assert!((0..1000).all(|_| !decide_intercept(0.0, &mut rng).unwrap()));
        assert!((0..1000).all(|_| decide_intercept(1.0, &mut rng).unwrap()));
        let hits = (0..N).filter(|_| decide_intercept(0.3, &mut rng).unwrap()).count();
        let sigma = (0.3f64 * 0.7 / N as f64).sqrt();
        assert!((hits as f64 / N as f64 - 0.3).abs() <= 3.0 * sigma);
        assert!(decide_intercept(-0.2, &mut rng).is_err());
    }

    #[test]
    fn matching_basis_interception_is_transparent() {
        let mut rng = stream(4, Subsystem::Eve);
        for prep in QubitPreparation::ALL {
            for _ in 0..200 {
                let m = intercept_message(prep, &mut rng);
                if m.eve_basis == prep.basis {
                    assert_eq!(m.resent, prep);
                    assert_eq!(m.eve_bit, prep.bit);
                }
            }
        }
    }

    #[test]
    fn wrong_basis_interception_resends_uniform_eigenstate() {
        let mut rng = stream(5, Subsystem::Eve);
        let prep = prepare_bb84(Basis::Z, false);
        let (mut x_count, mut ones) = (0usize, 0usize);
        for _ in 0..N {
            let m = intercept_message(prep, &mut rng);
            if m.eve_basis == Basis::X {
                x_count += 1;
                ones += m.resent.bit as usize;
                assert_eq!(m.resent.basis, Basis::X);
            }
        }
        let f = ones as f64 / x_count as f64;
        assert!((f - 0.5).abs() <= 3.0 * (0.25 / x_count as f64).sqrt());
    }

    /// Exact receiver error under full intercept-resend: average over the
    /// four preparations and two Eve bases of P(receiver bit != sent bit).
    fn enumerated_resend_error() -> f64 {
        let mut total = 0.0;
        for prep in QubitPreparation::ALL {
            for eve_basis in Basis::ALL {
                for eve_bit in [false, true] {
                    let p_eve = if eve_basis == prep.basis {
                        if eve_bit == prep.bit { 1.0 } else { 0.0 }
                    } else {
                        0.5
                    };
                    // receiver measures the resent eigenstate in prep.basis
                    let p_wrong = if eve_basis == prep.basis {
                        if eve_bit == prep.bit { 0.0 } else { 1.0 }
                    } else {
                        0.5
                    };
                    total += 0.25 * 0.5 * p_eve * p_wrong;
                }
            }
        }
        total
    }

    #[test]
    fn full_message_attack_error_matches_enumeration() {
        let oracle = enumerated_resend_error();
        assert!((oracle - 0.25).abs() < 1e-15);
        let mut rng = stream(6, Subsystem::Eve);
        let mut meas = stream(6, Subsystem::Measurement);
        let mut errors = 0;
        for i in 0..N {
            let prep = QubitPreparation::ALL[i % 4];
            let m = intercept_message(prep, &mut rng);
            if measure_qubit(m.resent, prep.basis, 0.0, &mut meas).unwrap() != prep.bit {
                errors += 1;
            }
        }
        let sigma = (oracle * (1.0 - oracle) / N as f64).sqrt();
        assert!((errors as f64 / N as f64 - oracle).abs() <= 3.0 * sigma);
    }

    #[test]
    fn path_interception_collapses_superposition() {
        let mut rng = stream(7, Subsystem::Source);
        let mut p = prepare_path_packet(0, 1, 9, &mut rng).unwrap();
        p.sign = Sign::Plus;
        let (seen, mode) = intercept_path(InFlight::Path(p));
        assert_eq!(mode, SpatioTemporalMode::new(0, 1, 9));
        match seen {
            InFlight::Path(q) => {
                assert!(q.collapsed);
                assert_eq!(q.sign, Sign::Plus);
            }
            _ => panic!("packet kind changed"),
        }
    }

    #[test]
    fn path_interception_reads_single_mode_label() {
        let mode = SpatioTemporalMode::new(3, 5, 42);
        let packet = InFlight::Single { mode, qubit: prepare_bb84(Basis::Z, true) };
        let (seen, learned) = intercept_path(packet);
        assert_eq!(learned, mode);
        assert_eq!(seen, packet);
    }

    #[test]
    fn no_decision_leaves_packet_and_ledger_alone() {
        let mut eve = Eavesdropper::new(AttackConfig::path(1.0).unwrap(), stream(8, Subsystem::Eve));
        let packet = InFlight::Single {
            mode: SpatioTemporalMode::new(0, 1, 0),
            qubit: prepare_bb84(Basis::X, false),
        };
        assert_eq!(eve.tamper(packet, InterceptDecision::default()), packet);
        assert!(eve.ledger().is_empty());
    }

    #[test]
    fn learned_fraction_edges() {
        let slots: BTreeSet<_> = (0..10).map(|c| SpatioTemporalMode::new(0, 1, c)).collect();
        let ledger = EveLedger::default();
        assert_eq!(learned_traffic_fraction(&ledger, &slots).unwrap(), 0.0);
        assert!(learned_traffic_fraction(&ledger, &BTreeSet::new()).is_err());

        let mut eve = Eavesdropper::new(AttackConfig::path(1.0).unwrap(), stream(9, Subsystem::Eve));
        for &mode in &slots {
            let d = eve.decide();
            eve.tamper(InFlight::Single { mode, qubit: prepare_bb84(Basis::Z, false) }, d);
        }
        assert_eq!(learned_traffic_fraction(eve.ledger(), &slots).unwrap(), 1.0);
        let ledger = eve.ledger();
        assert!(ledger.learned_endpoints().iter().all(|m| ledger.intercepted().contains(m)));
    }

    #[test]
    fn learned_fraction_tracks_rate() {
        let eta = 0.4;
        let mut eve = Eavesdropper::new(AttackConfig::path(eta).unwrap(), stream(10, Subsystem::Eve));
        let slots: BTreeSet<_> = (0..N as u64).map(|c| SpatioTemporalMode::new(2, 4, c)).collect();
        for &mode in &slots {
            let d = eve.decide();
            eve.tamper(InFlight::Single { mode, qubit: prepare_bb84(Basis::Z, false) }, d);
        }
        let f = learned_traffic_fraction(eve.ledger(), &slots).unwrap();
        assert!((f - eta).abs() <= 3.0 * (eta * (1.0 - eta) / N as f64).sqrt());
    }
}
