//! Overhead accounting and escape probabilities.
//!
//! Per node pair, the overhead H counts the schedule announcement (slot
//! indices plus one basis bit per Type 2 slot), the H2 + H3 decoy qubits
//! themselves, and one outcome bit per decoy at the end. With H2 and H3 fixed
//! by the target escape probability, H grows like (H2 + H3)·log K.
//!
//! The escape probability is the chance that Eve intercepts m of the K slots
//! without tripping any of the H3 Type 3 decoys; each decoy she hits trips
//! with probability 1/2.

use rand::seq::index;
use rand::Rng;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::rng::{stream, Subsystem};

/// Bits needed to name one of `k` slots in fixed-width binary.
pub fn slot_index_bits(k: u64) -> u64 {
    if k <= 1 {
        0
    } else {
        64 - u64::from((k - 1).leading_zeros())
    }
}

/// Schedule announcement: one slot index per decoy plus one basis bit per
/// Type 2 decoy.
pub fn h1_bits(h2: u64, h3: u64, k: u64) -> u64 {
    let width = slot_index_bits(k);
    h2 * (width + 1) + h3 * width
}

/// Final outcome exchange: one bit per decoy.
pub fn h4_bits(h2: u64, h3: u64) -> u64 {
    h2 + h3
}

pub fn total_overhead(h2: u64, h3: u64, k: u64) -> u64 {
    h1_bits(h2, h3, k) + h2 + h3 + h4_bits(h2, h3)
}

fn check_counts(k: u64, h3: u64, m: u64) -> Result<()> {
    if h3 > k {
        return Err(Error::InvalidArgument(format!("H3 = {h3} exceeds K = {k}")));
    }
    if m > k {
        return Err(Error::InvalidArgument(format!("m = {m} exceeds K = {k}")));
    }
    Ok(())
}

/// Exact escape probability when Eve intercepts a uniformly random set of `m`
/// of the `k` slots and `h3` of them are Type 3 decoys:
/// Σ_j Hyp(j; k, h3, m)·2^(−j), summed in log space.
pub fn exact_escape_prob(k: u64, h3: u64, m: u64) -> Result<f64> {
    check_counts(k, h3, m)?;
    let h0 = k - h3;
    let lo = m.saturating_sub(h0);
    let hi = h3.min(m);
    let ln_total = ln_binomial(k, m);
    let ln_half = std::f64::consts::LN_2;
    let terms: Vec<f64> = (lo..=hi)
        .map(|j| ln_binomial(h3, j) + ln_binomial(h0, m - j) - ln_total - j as f64 * ln_half)
        .collect();
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - peak).exp()).sum();
    Ok((peak + sum.ln()).exp().clamp(0.0, 1.0))
}

/// Closed-form upper bound ((K − H3)/K + H3/(2(1 − η)K))^(ηK). Exceeds 1 when
/// η ≥ 1/2 and is then vacuous; it is returned as-is.
pub fn bound_escape_prob(k: u64, h3: u64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("bound needs 0 < eta < 1, got {eta}")));
    }
    if k == 0 || h3 > k {
        return Err(Error::InvalidArgument(format!("need 0 < K and H3 <= K, got K = {k}, H3 = {h3}")));
    }
    let (k, h3) = (k as f64, h3 as f64);
    let base = (k - h3) / k + h3 / (2.0 * (1.0 - eta) * k);
    Ok(base.powf(eta * k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticBound {
    /// K → ∞ limit of the closed-form bound at η_max.
    pub limit: f64,
    /// Small-η form exp(−η_max·H3/2). Smaller than `limit` for every
    /// η_max in (0, 1), yet still above the exact large-K escape probability.
    pub relaxed: f64,
}

pub fn asymptotic_bound(h3: u64, eta_max: f64) -> Result<AsymptoticBound> {
    check_open_unit("eta_max", eta_max)?;
    let h3 = h3 as f64;
    Ok(AsymptoticBound {
        limit: (-eta_max * h3 * (1.0 - 2.0 * eta_max) / (2.0 * (1.0 - eta_max))).exp(),
        relaxed: (-0.5 * eta_max * h3).exp(),
    })
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// (2/η_max)·ln(1/ε) before rounding up.
pub fn alpha_raw(epsilon: f64, eta_max: f64) -> Result<f64> {
    check_open_unit("epsilon", epsilon)?;
    check_open_unit("eta_max", eta_max)?;
    Ok(2.0 / eta_max * (1.0 / epsilon).ln())
}

/// Type 3 decoys per pair needed for escape probability below ε.
pub fn alpha_for(epsilon: f64, eta_max: f64) -> Result<u64> {
    Ok(alpha_raw(epsilon, eta_max)?.ceil() as u64)
}

/// Type 2 sizing if each intercepted Type 2 slot trips with probability 1/4
/// (BB84 intercept-resend) rather than 1/2.
pub fn beta_quarter_detection(epsilon: f64, eta_max: f64) -> Result<u64> {
    Ok((2.0 * alpha_raw(epsilon, eta_max)?).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizingReport {
    pub k: u64,
    pub epsilon: f64,
    pub eta_max: f64,
    /// H3.
    pub alpha: u64,
    /// H2, mirroring α.
    pub beta: u64,
    /// Alternative H2 for a 1/4 per-hit detection probability.
    pub beta_quarter: u64,
    /// Slope of H in log2 K: α + β.
    pub g1: u64,
    /// Constant from summing the four components: 2α + 3β.
    pub g0_component_sum: u64,
    /// Alternative published constant α + 2β; differs from the component sum.
    pub g0_printed: u64,
    /// total_overhead(β, α, K).
    pub h_sum: u64,
    /// g1·⌈log2 K⌉ + g0_printed.
    pub h_printed: u64,
}

pub fn required_overhead(k: u64, epsilon: f64, eta_max: f64) -> Result<SizingReport> {
    let alpha = alpha_for(epsilon, eta_max)?;
    let beta = alpha;
    let g1 = alpha + beta;
    let g0_printed = alpha + 2 * beta;
    Ok(SizingReport {
        k,
        epsilon,
        eta_max,
        alpha,
        beta,
        beta_quarter: beta_quarter_detection(epsilon, eta_max)?,
        g1,
        g0_component_sum: 2 * alpha + 3 * beta,
        g0_printed,
        h_sum: total_overhead(beta, alpha, k),
        h_printed: g1 * slot_index_bits(k) + g0_printed,
    })
}

/// Running sums for a Monte-Carlo escape estimate. Accumulators from
/// independent seeds merge by addition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EscapeAccumulator {
    pub trials: u64,
    sum: f64,
    sum_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl EscapeAccumulator {
    pub fn push(&mut self, value: f64) {
        self.trials += 1;
        self.sum += value;
        self.sum_sq += value * value;
    }

    pub fn merge(&mut self, other: &EscapeAccumulator) {
        self.trials += other.trials;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn finish(&self) -> MonteCarloEstimate {
        let n = self.trials as f64;
        let mean = self.sum / n;
        let var = if self.trials > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        MonteCarloEstimate {
            estimate: mean,
            std_error: (var / n).sqrt(),
            trials: self.trials,
        }
    }
}

/// Samples `trials` pairs of (uniform H3-subset of decoys, uniform m-subset of
/// intercepted slots) and averages 2^(−overlap).
pub fn montecarlo_escape_with<R: Rng + ?Sized>(
    k: u64,
    h3: u64,
    m: u64,
    trials: u64,
    rng: &mut R,
) -> Result<EscapeAccumulator> {
    check_counts(k, h3, m)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut acc = EscapeAccumulator::default();
    if h3 == 0 {
        for _ in 0..trials {
            acc.push(1.0);
        }
        return Ok(acc);
    }
    let mut decoy = vec![false; k as usize];
    for _ in 0..trials {
        let decoys = index::sample(rng, k as usize, h3 as usize);
        for i in decoys.iter() {
            decoy[i] = true;
        }
        let overlap = index::sample(rng, k as usize, m as usize)
            .iter()
            .filter(|&i| decoy[i])
            .count();
        for i in decoys.iter() {
            decoy[i] = false;
        }
        acc.push(0.5f64.powi(overlap as i32));
    }
    Ok(acc)
}

pub fn montecarlo_escape(k: u64, h3: u64, m: u64, trials: u64, seed: u64) -> Result<MonteCarloEstimate> {
    let mut rng = stream(seed, Subsystem::MonteCarlo);
    Ok(montecarlo_escape_with(k, h3, m, trials, &mut rng)?.finish())
}
