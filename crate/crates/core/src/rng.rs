//! Seed handling.
//!
//! Every run is driven by a single 64-bit root seed. Each subsystem draws from
//! its own ChaCha8 stream: the key is derived from the root seed and the
//! ChaCha stream id selects the subsystem. Streams never share state, so
//! switching the attack model on or off leaves the channel noise sequence
//! untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Subsystems that own an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    /// Pre-shared schedule secrets.
    Schedule = 1,
    /// Node-side state preparation (payload bits, signs, dummy qubits).
    Source = 2,
    /// Photon survival on links.
    Channel = 3,
    /// Interception decisions and the eavesdropper's own measurements.
    Eve = 4,
    /// Receiver-side measurement outcomes.
    Measurement = 5,
    /// Monte-Carlo sampling of overhead quantities.
    MonteCarlo = 6,
    /// Random unitaries for the proof-structure checks.
    Unitaries = 7,
}

pub fn stream(root_seed: u64, subsystem: Subsystem) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(subsystem as u64);
    rng
}
