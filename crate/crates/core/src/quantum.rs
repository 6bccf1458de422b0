//! Outcome-level quantum primitives.
//!
//! Qubits are tracked symbolically as a (basis, bit) preparation record. The
//! intercept-resend analysis only needs outcome probabilities, so no state
//! vectors are carried here; the full matrix treatment lives in
//! [`crate::constraints`].

use std::fmt;

use rand::Rng;

use crate::error::{check_probability, Error, Result};

pub type NodeId = u32;
pub type Cycle = u64;

/// BB84 measurement/preparation basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    /// Computational basis {|0>, |1>}.
    Z,
    /// Hadamard basis {|+>, |->}.
    X,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Z, Basis::X];

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Basis::X
        } else {
            Basis::Z
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Z => f.write_str("Z"),
            Basis::X => f.write_str("X"),
        }
    }
}

/// A BB84 eigenstate: `bit = false` is |0> or |+>, `bit = true` is |1> or |->.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitPreparation {
    pub basis: Basis,
    pub bit: bool,
}

impl QubitPreparation {
    pub const ALL: [QubitPreparation; 4] = [
        QubitPreparation { basis: Basis::Z, bit: false },
        QubitPreparation { basis: Basis::Z, bit: true },
        QubitPreparation { basis: Basis::X, bit: false },
        QubitPreparation { basis: Basis::X, bit: true },
    ];

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let basis = Basis::random(rng);
        prepare_bb84(basis, rng.random_bool(0.5))
    }
}

/// Propagation label |from, to, cycle>. `from == to` is the component kept
/// inside a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpatioTemporalMode {
    pub from: NodeId,
    pub to: NodeId,
    pub cycle: Cycle,
}

impl SpatioTemporalMode {
    pub fn new(from: NodeId, to: NodeId, cycle: Cycle) -> Self {
        Self { from, to, cycle }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// Two-mode path superposition (|origin,origin,n> ± |origin,partner,n>)|y>/√2.
///
/// `sign` is fixed when the packet is prepared. `collapsed` records that
/// which-path information has been extracted, after which the two arms no
/// longer interfere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathPacket {
    pub origin: NodeId,
    pub partner: NodeId,
    pub cycle: Cycle,
    pub sign: Sign,
    pub collapsed: bool,
    /// Payload qubit |y>. Carried but never measured by the origin.
    pub dummy: QubitPreparation,
}

impl PathPacket {
    /// Mode of the travelling arm on its outbound leg.
    pub fn forward_mode(&self) -> SpatioTemporalMode {
        SpatioTemporalMode::new(self.origin, self.partner, self.cycle)
    }

    /// Mode of the travelling arm on its way back, one cycle later.
    pub fn return_mode(&self) -> SpatioTemporalMode {
        SpatioTemporalMode::new(self.partner, self.origin, self.cycle + 1)
    }
}

pub fn prepare_bb84(basis: Basis, bit: bool) -> QubitPreparation {
    QubitPreparation { basis, bit }
}

/// Measures `prep` in `meas_basis`; `flip_prob` is the channel error applied
/// after projection.
pub fn measure_qubit<R: Rng + ?Sized>(
    prep: QubitPreparation,
    meas_basis: Basis,
    flip_prob: f64,
    rng: &mut R,
) -> Result<bool> {
    check_probability("flip_prob", flip_prob)?;
    let projected = if meas_basis == prep.basis {
        prep.bit
    } else {
        // |<+|0>|^2 = 1/2 for every cross-basis pair
        rng.random_bool(0.5)
    };
    Ok(projected ^ rng.random_bool(flip_prob))
}

pub fn prepare_path_packet<R: Rng + ?Sized>(
    origin: NodeId,
    partner: NodeId,
    cycle: Cycle,
    rng: &mut R,
) -> Result<PathPacket> {
    if origin == partner {
        return Err(Error::LocalPathPacket(origin));
    }
    let sign = Sign::random(rng);
    let dummy = QubitPreparation::random(rng);
    Ok(PathPacket {
        origin,
        partner,
        cycle,
        sign,
        collapsed: false,
        dummy,
    })
}

/// Port measurement in the |±>_p basis at the origin node.
///
/// A lost arm or a collapsed packet leaves the origin with no interference,
/// so the reported sign is a fair coin.
pub fn interfere_path_packet<R: Rng + ?Sized>(
    packet: &PathPacket,
    survived: bool,
    visibility_error: f64,
    rng: &mut R,
) -> Result<Sign> {
    check_probability("visibility_error", visibility_error)?;
    if !survived || packet.collapsed {
        return Ok(Sign::random(rng));
    }
    if rng.random_bool(visibility_error) {
        Ok(packet.sign.flipped())
    } else {
        Ok(packet.sign)
    }
}
