use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// Which enabled processes move in a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// One process, uniformly at random.
    CentralRandom,
    /// The process with the smallest `(node id, tier)`.
    CentralAdversarialMinId,
    /// The process with the largest `(node id, tier)`.
    CentralAdversarialMaxId,
    /// Each process independently with probability 1/2, never empty.
    DistributedRandomSubset,
    /// Every enabled process of the highest enabled tier.
    DistributedAdversarial,
    /// Every enabled process.
    Synchronous,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::CentralRandom,
        PolicyKind::CentralAdversarialMinId,
        PolicyKind::CentralAdversarialMaxId,
        PolicyKind::DistributedRandomSubset,
        PolicyKind::DistributedAdversarial,
        PolicyKind::Synchronous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::CentralRandom => "central-random",
            PolicyKind::CentralAdversarialMinId => "central-adversarial-min-id",
            PolicyKind::CentralAdversarialMaxId => "central-adversarial-max-id",
            PolicyKind::DistributedRandomSubset => "distributed-random-subset",
            PolicyKind::DistributedAdversarial => "distributed-adversarial",
            PolicyKind::Synchronous => "synchronous",
        }
    }

    pub fn is_central(self) -> bool {
        matches!(
            self,
            PolicyKind::CentralRandom
                | PolicyKind::CentralAdversarialMinId
                | PolicyKind::CentralAdversarialMaxId
        )
    }

    /// The selection depends on the configuration alone, so a repeated
    /// configuration implies an infinite execution.
    pub fn is_deterministic(self) -> bool {
        !matches!(
            self,
            PolicyKind::CentralRandom | PolicyKind::DistributedRandomSubset
        )
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = PolicyKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown scheduler `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerPolicy {
    pub kind: PolicyKind,
    pub seed: u64,
}

impl SchedulerPolicy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        SchedulerPolicy { kind, seed }
    }
}

/// An enabled `(node, tier)` process as seen by the daemon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub node: NodeId,
    pub tier: usize,
}

/// The scheduler with its random state. Owned by exactly one run.
#[derive(Debug, Clone)]
pub struct Daemon {
    policy: SchedulerPolicy,
    rng: ChaCha8Rng,
    steps: u64,
}

/// Random stream used by the scheduler; stream 0 seeds initial configurations.
pub(crate) const SCHEDULER_STREAM: u64 = 1;

impl Daemon {
    pub fn new(policy: SchedulerPolicy) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
        rng.set_stream(SCHEDULER_STREAM);
        Daemon {
            policy,
            rng,
            steps: 0,
        }
    }

    pub fn policy(&self) -> SchedulerPolicy {
        self.policy
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub(crate) fn advance(&mut self) -> u64 {
        let s = self.steps;
        self.steps += 1;
        s
    }

    /// Picks indices into `candidates`, which must be sorted by `(node, tier)`
    /// and nonempty. The result is sorted and nonempty.
    pub fn select(&mut self, candidates: &[Candidate]) -> Vec<usize> {
        assert!(!candidates.is_empty(), "daemon asked to select from nothing");
        let n = candidates.len();
        match self.policy.kind {
            PolicyKind::CentralRandom => vec![self.rng.gen_range(0..n)],
            PolicyKind::CentralAdversarialMinId => vec![0],
            PolicyKind::CentralAdversarialMaxId => vec![n - 1],
            PolicyKind::DistributedRandomSubset => {
                let picked: Vec<usize> = (0..n).filter(|_| self.rng.gen_bool(0.5)).collect();
                if picked.is_empty() {
                    vec![self.rng.gen_range(0..n)]
                } else {
                    picked
                }
            }
            PolicyKind::DistributedAdversarial => {
                let top = candidates.iter().map(|c| c.tier).max().unwrap_or(0);
                (0..n).filter(|&i| candidates[i].tier == top).collect()
            }
            PolicyKind::Synchronous => (0..n).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cands(n: u32) -> Vec<Candidate> {
        (1..=n)
            .map(|i| Candidate {
                node: NodeId(i),
                tier: (i % 2) as usize,
            })
            .collect()
    }

    #[test]
    fn central_policies_pick_one() {
        let c = cands(5);
        for kind in PolicyKind::ALL.into_iter().filter(|k| k.is_central()) {
            let mut d = Daemon::new(SchedulerPolicy::new(kind, 3));
            for _ in 0..20 {
                assert_eq!(d.select(&c).len(), 1);
            }
        }
        let mut min = Daemon::new(SchedulerPolicy::new(PolicyKind::CentralAdversarialMinId, 0));
        let mut max = Daemon::new(SchedulerPolicy::new(PolicyKind::CentralAdversarialMaxId, 0));
        assert_eq!(min.select(&c), vec![0]);
        assert_eq!(max.select(&c), vec![4]);
    }

    #[test]
    fn distributed_policies_never_select_nothing() {
        let c = cands(3);
        for kind in PolicyKind::ALL {
            let mut d = Daemon::new(SchedulerPolicy::new(kind, 11));
            for _ in 0..200 {
                let s = d.select(&c);
                assert!(!s.is_empty());
                assert!(s.iter().all(|&i| i < c.len()));
                assert!(s.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn adversarial_distributed_takes_top_tier() {
        let c = cands(5);
        let mut d = Daemon::new(SchedulerPolicy::new(PolicyKind::DistributedAdversarial, 0));
        assert_eq!(d.select(&c), vec![0, 2, 4]);
    }

    #[test]
    fn policy_names_parse() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        }
        assert!("fair".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn random_selection_is_seeded() {
        let c = cands(9);
        let draw = |seed| {
            let mut d = Daemon::new(SchedulerPolicy::new(PolicyKind::DistributedRandomSubset, seed));
            (0..50).map(|_| d.select(&c)).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }
}
