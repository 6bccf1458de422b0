use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum::{Basis, Cycle, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotType {
    /// Payload traffic.
    Type1,
    /// Message-integrity probe.
    Type2,
    /// Path-integrity interferometric probe.
    Type3,
}

/// Ordered node pair. Forward legs always run `sender -> receiver`; return
/// legs run the other way on the following cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePair {
    pub sender: NodeId,
    pub receiver: NodeId,
}

impl NodePair {
    pub fn new(sender: NodeId, receiver: NodeId) -> Result<Self> {
        if sender == receiver {
            return Err(Error::InvalidArgument(format!(
                "node pair {sender}-{receiver} has identical endpoints"
            )));
        }
        Ok(Self { sender, receiver })
    }
}

impl fmt::Display for NodePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.sender, self.receiver)
    }
}

impl FromStr for NodePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed node pair {s:?} (expected A-B)"));
        let (a, b) = s.trim().split_once('-').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        NodePair::new(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotAssignment {
    pub slot_type: SlotType,
    pub cycle: Cycle,
    pub sender: NodeId,
    pub receiver: NodeId,
    /// Present exactly for Type 2 slots.
    pub basis: Option<Basis>,
}

impl SlotAssignment {
    pub fn type1(pair: NodePair, cycle: Cycle) -> Self {
        Self {
            slot_type: SlotType::Type1,
            cycle,
            sender: pair.sender,
            receiver: pair.receiver,
            basis: None,
        }
    }

    pub fn pair(&self) -> NodePair {
        NodePair {
            sender: self.sender,
            receiver: self.receiver,
        }
    }
}

/// Pre-shared decoy schedule. Cycles not listed for a pair are free for
/// Type 1 traffic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    k: Cycle,
    pairs: Vec<NodePair>,
    /// Decoy assignments sorted by (pair, cycle).
    assignments: Vec<SlotAssignment>,
    shared_seed: u64,
}

impl Schedule {
    pub fn k(&self) -> Cycle {
        self.k
    }

    pub fn pairs(&self) -> &[NodePair] {
        &self.pairs
    }

    pub fn shared_seed(&self) -> u64 {
        self.shared_seed
    }

    pub fn assignments(&self) -> &[SlotAssignment] {
        &self.assignments
    }

    pub fn decoys_for(&self, pair: NodePair) -> impl Iterator<Item = &SlotAssignment> {
        self.assignments.iter().filter(move |a| a.pair() == pair)
    }

    pub fn count(&self, pair: NodePair, slot_type: SlotType) -> u64 {
        match slot_type {
            SlotType::Type1 => self.k - self.decoys_for(pair).count() as u64,
            t => self.decoys_for(pair).filter(|a| a.slot_type == t).count() as u64,
        }
    }

    /// Full per-cycle timeline for one pair, Type 1 filling the gaps.
    pub fn timeline(&self, pair: NodePair) -> Vec<SlotAssignment> {
        let mut line: Vec<SlotAssignment> = (0..self.k).map(|n| SlotAssignment::type1(pair, n)).collect();
        for a in self.decoys_for(pair) {
            line[a.cycle as usize] = *a;
        }
        line
    }

    pub fn decoy_cycles(&self, pair: NodePair) -> BTreeSet<Cycle> {
        self.decoys_for(pair).map(|a| a.cycle).collect()
    }
}

/// Draws `h2 + h3` distinct cycles per pair uniformly from `[0, k)`; the first
/// `h2` become Type 2 slots with a uniform basis, the rest Type 3.
pub fn generate_schedule(
    k: Cycle,
    pairs: &[NodePair],
    h2: u64,
    h3: u64,
    shared_seed: u64,
) -> Result<Schedule> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let requested = h2 + h3;
    let mut rng = ChaCha8Rng::seed_from_u64(shared_seed);
    let mut assignments = Vec::with_capacity(pairs.len() * requested as usize);
    let mut seen = BTreeSet::new();
    for &pair in pairs {
        if requested > k {
            return Err(Error::Oversubscribed {
                sender: pair.sender,
                receiver: pair.receiver,
                requested,
                k,
            });
        }
        // one ordered pair per link: the reverse direction carries return legs
        let link = (pair.sender.min(pair.receiver), pair.sender.max(pair.receiver));
        if !seen.insert(link) {
            return Err(Error::InvalidArgument(format!(
                "node pair {pair} shares a link with an earlier pair"
            )));
        }
        let cycles = index::sample(&mut rng, k as usize, requested as usize);
        let mut pair_slots: Vec<SlotAssignment> = cycles
            .iter()
            .enumerate()
            .map(|(rank, cycle)| {
                let is_type2 = (rank as u64) < h2;
                SlotAssignment {
                    slot_type: if is_type2 { SlotType::Type2 } else { SlotType::Type3 },
                    cycle: cycle as Cycle,
                    sender: pair.sender,
                    receiver: pair.receiver,
                    basis: None,
                }
            })
            .collect();
        for slot in pair_slots.iter_mut().filter(|s| s.slot_type == SlotType::Type2) {
            slot.basis = Some(Basis::random(&mut rng));
        }
        pair_slots.sort_by_key(|s| s.cycle);
        assignments.extend(pair_slots);
    }
    Ok(Schedule {
        k,
        pairs: pairs.to_vec(),
        assignments,
        shared_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> NodePair {
        NodePair::new(0, 1).unwrap()
    }

    #[test]
    fn counts_match_request() {
        let s = generate_schedule(10, &[pair()], 2, 3, 99).unwrap();
        assert_eq!(s.count(pair(), SlotType::Type2), 2);
        assert_eq!(s.count(pair(), SlotType::Type3), 3);
        assert_eq!(s.count(pair(), SlotType::Type1), 5);
        for a in s.assignments() {
            assert_eq!(a.basis.is_some(), a.slot_type == SlotType::Type2);
            assert!(a.cycle < 10);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let pairs = [pair(), NodePair::new(2, 1).unwrap()];
        let a = generate_schedule(64, &pairs, 5, 7, 1234).unwrap();
        let b = generate_schedule(64, &pairs, 5, 7, 1234).unwrap();
        assert_eq!(a, b);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn different_seeds_give_different_decoys() {
        let mut identical = 0;
        for s in 0..100u64 {
            let a = generate_schedule(1000, &[pair()], 10, 10, 2 * s).unwrap();
            let b = generate_schedule(1000, &[pair()], 10, 10, 2 * s + 1).unwrap();
            if a.decoy_cycles(pair()) == b.decoy_cycles(pair()) {
                identical += 1;
            }
        }
        assert_eq!(identical, 0);
    }

    #[test]
    fn oversubscription_rejected() {
        let err = generate_schedule(4, &[pair()], 3, 2, 0).unwrap_err();
        assert!(matches!(err, Error::Oversubscribed { requested: 5, k: 4, .. }));
        assert!(generate_schedule(0, &[pair()], 0, 0, 0).is_err());
    }

    #[test]
    fn full_schedule_uses_every_cycle() {
        let s = generate_schedule(6, &[pair()], 3, 3, 5).unwrap();
        assert_eq!(s.decoy_cycles(pair()).len(), 6);
        assert_eq!(s.count(pair(), SlotType::Type1), 0);
    }

    #[test]
    fn return_legs_never_collide_with_forward_legs() {
        let pairs = [pair(), NodePair::new(1, 2).unwrap(), NodePair::new(3, 0).unwrap()];
        let s = generate_schedule(50, &pairs, 8, 8, 77).unwrap();
        let mut used = BTreeSet::new();
        for &p in &pairs {
            for a in s.timeline(p) {
                assert!(used.insert((a.sender, a.receiver, a.cycle)));
                assert!(used.insert((a.receiver, a.sender, a.cycle + 1)));
            }
        }
    }

    #[test]
    fn node_pair_parsing() {
        assert_eq!("3-5".parse::<NodePair>().unwrap(), NodePair::new(3, 5).unwrap());
        assert!("3-3".parse::<NodePair>().is_err());
        assert!("35".parse::<NodePair>().is_err());
        assert!("a-b".parse::<NodePair>().is_err());
    }

    #[test]
    fn duplicate_pairs_rejected() {
        assert!(generate_schedule(10, &[pair(), pair()], 1, 1, 0).is_err());
        let reverse = NodePair::new(1, 0).unwrap();
        assert!(generate_schedule(10, &[pair(), reverse], 1, 1, 0).is_err());
    }
}
