//! Closed-form security analysis for a homogeneous network.
//!
//! Under intercept-resend, intercepting a fraction η of cycles reveals the
//! endpoints of a fraction η of the traffic and adds η/2 to the Type 3
//! disturbance. Attributing all observed disturbance D to Eve and paying the
//! Shannon-limit length factor 1 + h(e) for error correction gives the leaked
//! fraction g = min(1, 2D(1 + h(e))).

use crate::channel::loss_db_to_t;
use crate::error::{check_probability, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityPoint {
    pub loss_db: f64,
    pub transmissivity: f64,
    /// Baseline Type 3 disturbance.
    pub disturbance: f64,
    /// Message error probability.
    pub message_error: f64,
    /// h(e) in bits.
    pub entropy: f64,
    /// Capped leaked fraction.
    pub leaked: f64,
}

/// h(e) in bits, with h(0) = h(1) = 0.
pub fn binary_entropy(e: f64) -> Result<f64> {
    check_probability("e", e)?;
    if e == 0.0 || e == 1.0 {
        return Ok(0.0);
    }
    Ok(-e * e.log2() - (1.0 - e) * (1.0 - e).log2())
}

/// γT² + (1 − T²)/2 for a symmetric link.
pub fn baseline_disturbance(gamma: f64, transmissivity: f64) -> Result<f64> {
    link_baseline_disturbance(gamma, transmissivity, transmissivity)
}

/// γT_fT_b + (1 − T_fT_b)/2 for a round trip over two directed legs.
pub fn link_baseline_disturbance(gamma: f64, t_forward: f64, t_back: f64) -> Result<f64> {
    check_probability("gamma", gamma)?;
    check_probability("T", t_forward)?;
    check_probability("T", t_back)?;
    let round_trip = t_forward * t_back;
    Ok(gamma * round_trip + (1.0 - round_trip) / 2.0)
}

/// μT + (1 − T)/2.
pub fn message_error(mu: f64, transmissivity: f64) -> Result<f64> {
    check_probability("mu", mu)?;
    check_probability("T", transmissivity)?;
    Ok(mu * transmissivity + (1.0 - transmissivity) / 2.0)
}

/// 2D(1 + h(e)) without the cap.
pub fn leaked_fraction_uncapped(disturbance: f64, error: f64) -> Result<f64> {
    check_probability("D", disturbance)?;
    Ok(2.0 * disturbance * (1.0 + binary_entropy(error)?))
}

pub fn leaked_fraction(disturbance: f64, error: f64) -> Result<f64> {
    Ok(leaked_fraction_uncapped(disturbance, error)?.min(1.0))
}

/// Worst-case interception rate consistent with an observed Type 3
/// disturbance.
pub fn inferred_eta(d3_hat: f64) -> Result<f64> {
    check_probability("D3_hat", d3_hat)?;
    Ok((2.0 * d3_hat).min(1.0))
}

pub fn security_point(gamma: f64, mu: f64, loss_db: f64) -> Result<SecurityPoint> {
    let t = loss_db_to_t(loss_db)?;
    let d = baseline_disturbance(gamma, t)?;
    let e = message_error(mu, t)?;
    Ok(SecurityPoint {
        loss_db,
        transmissivity: t,
        disturbance: d,
        message_error: e,
        entropy: binary_entropy(e)?,
        leaked: leaked_fraction(d, e)?,
    })
}

/// Leaked fraction over an evenly spaced loss grid, endpoints included.
pub fn figure2_curve(
    gamma: f64,
    mu: f64,
    loss_min_db: f64,
    loss_max_db: f64,
    steps: usize,
) -> Result<Vec<SecurityPoint>> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 grid steps, got {steps}")));
    }
    if !(loss_min_db <= loss_max_db) {
        return Err(Error::InvalidArgument(format!(
            "loss range [{loss_min_db}, {loss_max_db}] is empty"
        )));
    }
    let span = loss_max_db - loss_min_db;
    (0..steps)
        .map(|i| {
            let loss = if i + 1 == steps {
                loss_max_db
            } else {
                loss_min_db + span * i as f64 / (steps - 1) as f64
            };
            security_point(gamma, mu, loss)
        })
        .collect()
}

/// Loss (dB) at which the uncapped leaked fraction reaches 1, by bisection.
pub fn loss_threshold(gamma: f64, mu: f64, tol_db: f64) -> Result<f64> {
    if !(tol_db > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol_db}")));
    }
    let excess = |loss: f64| -> Result<f64> {
        let t = loss_db_to_t(loss)?;
        Ok(leaked_fraction_uncapped(baseline_disturbance(gamma, t)?, message_error(mu, t)?)? - 1.0)
    };
    let at_zero = excess(0.0)?;
    if at_zero >= 0.0 {
        return Err(Error::AlreadySaturated(at_zero + 1.0));
    }
    // g -> 2 as T -> 0, so the root is bracketed well before T underflows
    let mut lo = 0.0;
    let mut hi = 1.0;
    while excess(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1000.0 {
            return Err(Error::InvalidArgument(
                "leaked fraction never reaches 1 (γ or μ above 1/2?)".into(),
            ));
        }
    }
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
