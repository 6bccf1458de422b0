//! Full protocol runs: schedule, clocked slot execution over every pair,
//! disturbance estimation and detection.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::adversary::{learned_traffic_slots, AttackConfig, Eavesdropper};
use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::protocol::{
    detect_eavesdropper, estimate_disturbance, generate_schedule, run_type1_slot, run_type2_slot,
    run_type3_slot, DisturbanceEstimate, DisturbanceStats, Link, NodePair, SlotType, Streams,
};
use crate::quantum::{NodeId, SpatioTemporalMode};
use crate::rng::{stream, Subsystem};
use crate::security::{inferred_eta, leaked_fraction, link_baseline_disturbance, message_error};

/// Type 1 workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Traffic {
    /// Every free cycle of every pair carries a payload qubit.
    #[default]
    Full,
    /// No payload traffic; only decoys are sent.
    Silent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// Per-pair baseline expectation plus `sigmas` binomial standard errors.
    Baseline { sigmas: f64 },
    Fixed { type2: f64, type3: f64 },
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Baseline { sigmas: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub seed: u64,
    /// Communication cycles per round.
    pub k: u64,
    pub num_nodes: u32,
    pub pairs: Vec<NodePair>,
    pub h2: u64,
    pub h3: u64,
    /// Default model for every directed link.
    pub channel: ChannelModel,
    /// Per-direction overrides keyed by (from, to).
    pub link_overrides: BTreeMap<(NodeId, NodeId), ChannelModel>,
    pub attack: AttackConfig,
    /// Independent protocol rounds, each with a fresh schedule.
    pub rounds: u64,
    pub traffic: Traffic,
    pub thresholds: ThresholdPolicy,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            k: 1000,
            num_nodes: 2,
            pairs: vec![NodePair { sender: 0, receiver: 1 }],
            h2: 100,
            h3: 100,
            channel: ChannelModel::ideal(),
            link_overrides: BTreeMap::new(),
            attack: AttackConfig::none(),
            rounds: 1,
            traffic: Traffic::Full,
            thresholds: ThresholdPolicy::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        if self.h2 + self.h3 > self.k {
            return Err(Error::InvalidArgument(format!(
                "H2 + H3 = {} exceeds K = {}",
                self.h2 + self.h3,
                self.k
            )));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.pairs.is_empty() {
            return Err(Error::InvalidArgument("at least one node pair is required".into()));
        }
        for p in &self.pairs {
            if p.sender >= self.num_nodes || p.receiver >= self.num_nodes {
                return Err(Error::InvalidArgument(format!(
                    "pair {p} references a node outside 0..{}",
                    self.num_nodes
                )));
            }
        }
        match self.thresholds {
            ThresholdPolicy::Baseline { sigmas } if !(sigmas >= 0.0) => {
                return Err(Error::InvalidArgument(format!("threshold sigmas must be >= 0, got {sigmas}")));
            }
            ThresholdPolicy::Fixed { type2, type3 } => {
                for (name, v) in [("threshold2", type2), ("threshold3", type3)] {
                    if !(0.0..=0.5).contains(&v) {
                        return Err(Error::InvalidArgument(format!("{name} must lie in [0, 0.5], got {v}")));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn link(&self, pair: NodePair) -> Link {
        let directed = |from, to| *self.link_overrides.get(&(from, to)).unwrap_or(&self.channel);
        Link {
            forward: directed(pair.sender, pair.receiver),
            back: directed(pair.receiver, pair.sender),
        }
    }

    /// Expected (D2, D3) for a pair in the absence of an attack.
    pub fn baseline(&self, pair: NodePair) -> Result<(f64, f64)> {
        let link = self.link(pair);
        let d2 = message_error(link.forward.mu, link.forward.transmissivity)?;
        let d3 = link_baseline_disturbance(link.forward.gamma, link.forward.transmissivity, link.back.transmissivity)?;
        Ok((d2, d3))
    }

    fn thresholds_for(&self, pair: NodePair) -> Result<(f64, f64)> {
        match self.thresholds {
            ThresholdPolicy::Fixed { type2, type3 } => Ok((type2, type3)),
            ThresholdPolicy::Baseline { sigmas } => {
                let (d2, d3) = self.baseline(pair)?;
                let bound = |d: f64, trials: u64| {
                    if trials == 0 {
                        return 0.5;
                    }
                    (d + sigmas * (d * (1.0 - d) / trials as f64).sqrt()).min(0.5)
                };
                Ok((bound(d2, self.h2 * self.rounds), bound(d3, self.h3 * self.rounds)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub pair: NodePair,
    pub stats: DisturbanceStats,
    /// Type 1 slots that carried a payload.
    pub type1_slots: u64,
    pub type1_delivered: u64,
    /// Payload slots whose endpoints Eve read.
    pub type1_learned: u64,
    pub threshold2: f64,
    pub threshold3: f64,
    pub detected: bool,
}

impl PairReport {
    pub fn estimate(&self) -> DisturbanceEstimate {
        estimate_disturbance(&self.stats)
    }

    pub fn learned_fraction(&self) -> Option<f64> {
        (self.type1_slots > 0).then(|| self.type1_learned as f64 / self.type1_slots as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub stats: DisturbanceStats,
    pub detected: bool,
    pub inferred_eta: Option<f64>,
    /// Worst-case leaked fraction attributed from the pooled Type 3 disturbance.
    pub leaked_fraction_bound: Option<f64>,
    /// What Eve actually learned, pooled over pairs.
    pub eve_learned_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub pairs: Vec<PairReport>,
    pub summary: Summary,
}

fn d_or_zero(d: Option<f64>) -> f64 {
    d.unwrap_or(0.0)
}

pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let mut schedule_rng = stream(config.seed, Subsystem::Schedule);
    let mut streams = Streams::from_seed(config.seed);
    let mut eve = Eavesdropper::new(config.attack, stream(config.seed, Subsystem::Eve));

    let mut reports: Vec<PairReport> = config
        .pairs
        .iter()
        .map(|&pair| {
            let (threshold2, threshold3) = config.thresholds_for(pair)?;
            Ok(PairReport {
                pair,
                stats: DisturbanceStats::default(),
                type1_slots: 0,
                type1_delivered: 0,
                type1_learned: 0,
                threshold2,
                threshold3,
                detected: false,
            })
        })
        .collect::<Result<_>>()?;
    let links: Vec<Link> = config.pairs.iter().map(|&p| config.link(p)).collect();

    for _ in 0..config.rounds {
        let shared_seed: u64 = schedule_rng.random();
        let schedule = generate_schedule(config.k, &config.pairs, config.h2, config.h3, shared_seed)?;
        let timelines: Vec<_> = config.pairs.iter().map(|&p| schedule.timeline(p)).collect();
        let mut payload_modes: Vec<BTreeSet<SpatioTemporalMode>> = vec![BTreeSet::new(); config.pairs.len()];

        for cycle in 0..config.k as usize {
            for (idx, timeline) in timelines.iter().enumerate() {
                let slot = &timeline[cycle];
                let link = &links[idx];
                let report = &mut reports[idx];
                // decided before Eve can tell what the slot is
                let decision = eve.decide();
                match slot.slot_type {
                    SlotType::Type1 => match config.traffic {
                        Traffic::Full => {
                            let bit = streams.source.random_bool(0.5);
                            let rec = run_type1_slot(slot, bit, link, &mut eve, decision, &mut streams);
                            payload_modes[idx].insert(SpatioTemporalMode::new(slot.sender, slot.receiver, slot.cycle));
                            report.type1_slots += 1;
                            report.type1_delivered += rec.delivered as u64;
                        }
                        Traffic::Silent => {
                            eve.touch_empty(SpatioTemporalMode::new(slot.sender, slot.receiver, slot.cycle), decision);
                        }
                    },
                    SlotType::Type2 => run_type2_slot(slot, link, &mut eve, decision, &mut streams, &mut report.stats),
                    SlotType::Type3 => run_type3_slot(slot, link, &mut eve, decision, &mut streams, &mut report.stats),
                }
            }
        }

        let ledger = eve.take_ledger();
        for (idx, modes) in payload_modes.iter().enumerate() {
            reports[idx].type1_learned += learned_traffic_slots(&ledger, modes) as u64;
        }
    }

    let mut pooled = DisturbanceStats::default();
    let (mut slots, mut learned) = (0u64, 0u64);
    for r in reports.iter_mut() {
        let est = r.estimate();
        r.detected = detect_eavesdropper(d_or_zero(est.d2), d_or_zero(est.d3), r.threshold2, r.threshold3);
        pooled += r.stats;
        slots += r.type1_slots;
        learned += r.type1_learned;
    }
    let pooled_est = estimate_disturbance(&pooled);
    let e = message_error(config.channel.mu, config.channel.transmissivity)?;
    let summary = Summary {
        stats: pooled,
        detected: reports.iter().any(|r| r.detected),
        inferred_eta: pooled_est.d3.map(inferred_eta).transpose()?,
        leaked_fraction_bound: pooled_est
            .d3
            .map(|d| leaked_fraction(d.min(0.5), e))
            .transpose()?,
        eve_learned_fraction: (slots > 0).then(|| learned as f64 / slots as f64),
    };
    Ok(SimulationReport {
        pairs: reports,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(attack: AttackConfig, channel: ChannelModel) -> SimulationConfig {
        SimulationConfig {
            seed: 42,
            k: 2000,
            h2: 200,
            h3: 200,
            channel,
            attack,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn quiet_ideal_network() {
        let r = run_simulation(&config(AttackConfig::none(), ChannelModel::ideal())).unwrap();
        let p = &r.pairs[0];
        assert_eq!(p.stats.type2_trials, 200);
        assert_eq!(p.stats.type3_trials, 200);
        assert_eq!(p.stats.type2_errors + p.stats.type3_errors, 0);
        assert_eq!(p.type1_slots, 1600);
        assert_eq!(p.type1_learned, 0);
        assert!(!r.summary.detected);
    }

    #[test]
    fn path_attack_detected() {
        let r = run_simulation(&config(AttackConfig::path(0.5).unwrap(), ChannelModel::ideal())).unwrap();
        let d3 = r.pairs[0].estimate().d3.unwrap();
        assert!((d3 - 0.25).abs() < 4.0 * (0.25 * 0.75 / 200.0f64).sqrt());
        assert!(r.summary.detected);
        let learned = r.summary.eve_learned_fraction.unwrap();
        assert!(r.summary.leaked_fraction_bound.unwrap() >= learned - 0.1);
    }

    #[test]
    fn deterministic() {
        let c = config(AttackConfig::new(crate::adversary::AttackMode::Both, 0.3, 0.2).unwrap(), ChannelModel::new(0.8, 0.01, 0.02).unwrap());
        assert_eq!(run_simulation(&c).unwrap(), run_simulation(&c).unwrap());
    }

    #[test]
    fn attack_does_not_perturb_channel_noise() {
        // survival draws come from the channel stream alone
        let channel = ChannelModel::new(0.7, 0.05, 0.0).unwrap();
        let a = run_simulation(&config(AttackConfig::none(), channel)).unwrap();
        let b = run_simulation(&config(AttackConfig::message(1.0).unwrap(), channel)).unwrap();
        assert_eq!(a.pairs[0].type1_delivered, b.pairs[0].type1_delivered);
        assert_eq!(a.pairs[0].stats.type3_trials, b.pairs[0].stats.type3_trials);
    }

    #[test]
    fn silent_network_has_no_learned_fraction() {
        let mut c = config(AttackConfig::path(1.0).unwrap(), ChannelModel::ideal());
        c.traffic = Traffic::Silent;
        let r = run_simulation(&c).unwrap();
        assert_eq!(r.pairs[0].type1_slots, 0);
        assert_eq!(r.pairs[0].learned_fraction(), None);
        assert_eq!(r.summary.eve_learned_fraction, None);
    }

    #[test]
    fn validation_errors() {
        let bad = [
            SimulationConfig {
                h2: 600,
                h3: 600,
                ..SimulationConfig::default()
            },
            SimulationConfig {
                pairs: vec![NodePair::new(0, 5).unwrap()],
                ..SimulationConfig::default()
            },
            SimulationConfig {
                thresholds: ThresholdPolicy::Fixed { type2: 0.7, type3: 0.1 },
                ..SimulationConfig::default()
            },
        ];
        for c in &bad {
            assert!(run_simulation(c).is_err());
        }
    }

    #[test]
    fn heterogeneous_links() {
        let mut c = config(AttackConfig::none(), ChannelModel::ideal());
        c.num_nodes = 3;
        c.pairs = vec![NodePair::new(0, 1).unwrap(), NodePair::new(1, 2).unwrap()];
        c.link_overrides.insert((2, 1), ChannelModel::new(0.0, 0.0, 0.0).unwrap());
        let r = run_simulation(&c).unwrap();
        assert_eq!(r.pairs[0].stats.type3_errors, 0);
        // return leg 2->1 always lost: every Type 3 outcome is a coin flip
        let d3 = r.pairs[1].estimate().d3.unwrap();
        assert!((d3 - 0.5).abs() < 4.0 * (0.25 / 200.0f64).sqrt());
        assert_eq!(c.baseline(r.pairs[1].pair).unwrap().1, 0.5);
    }
}
