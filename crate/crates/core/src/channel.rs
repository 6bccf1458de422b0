use rand::Rng;

use crate::error::{check_probability, Error, Result};

/// Parameters of one directed link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    /// One-way photon survival probability T.
    pub transmissivity: f64,
    /// Wrong-port probability of the interferometer when the packet survives.
    pub gamma: f64,
    /// Bit-flip probability of a same-basis message measurement.
    pub mu: f64,
}

impl ChannelModel {
    pub fn new(transmissivity: f64, gamma: f64, mu: f64) -> Result<Self> {
        Ok(Self {
            transmissivity: check_probability("T", transmissivity)?,
            gamma: check_probability("gamma", gamma)?,
            mu: check_probability("mu", mu)?,
        })
    }

    pub fn from_loss_db(loss_db: f64, gamma: f64, mu: f64) -> Result<Self> {
        Self::new(loss_db_to_t(loss_db)?, gamma, mu)
    }

    /// Ideal lossless, noiseless link.
    pub fn ideal() -> Self {
        Self {
            transmissivity: 1.0,
            gamma: 0.0,
            mu: 0.0,
        }
    }

    pub fn transmit<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        transmit(self.transmissivity, rng)
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// T = 10^(-loss/10).
pub fn loss_db_to_t(loss_db: f64) -> Result<f64> {
    if loss_db.is_nan() || loss_db < 0.0 {
        return Err(Error::NegativeLoss(loss_db));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

/// Bernoulli survival draw. `transmissivity` must already be a probability.
pub fn transmit<R: Rng + ?Sized>(transmissivity: f64, rng: &mut R) -> bool {
    rng.random_bool(transmissivity)
}
