use serde::{Deserialize, Serialize};

use crate::graph::NodeId;
use crate::protocols::{Rule, State};

/// One rule firing: a single variable assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub step: u64,
    pub node: NodeId,
    /// Index of the tier in its stack.
    pub tier: usize,
    pub priority: u32,
    pub rule: Rule,
    pub old: State,
    pub new: State,
}

/// Every move of a run, in execution order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub moves: Vec<MoveRecord>,
    /// Number of scheduler steps taken.
    pub steps: u64,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn moves_of(&self, tier: usize) -> u64 {
        self.moves.iter().filter(|m| m.tier == tier).count() as u64
    }

    /// Step of the last move by any tier with a smaller priority value.
    pub fn last_lower_step(&self, priority: u32) -> Option<u64> {
        self.moves
            .iter()
            .filter(|m| m.priority < priority)
            .map(|m| m.step)
            .max()
    }

    /// Moves by the tier with `priority` that happen in steps after the last
    /// move of every lower-priority tier.
    pub fn moves_after_lower_stable(&self, priority: u32) -> u64 {
        self.moves_after_lower_stable_where(priority, |_| true)
    }

    pub(crate) fn moves_after_lower_stable_where(
        &self,
        priority: u32,
        mut keep: impl FnMut(&MoveRecord) -> bool,
    ) -> u64 {
        let after = self.last_lower_step(priority);
        self.moves
            .iter()
            .filter(|m| m.priority == priority && after.is_none_or(|s| m.step > s))
            .filter(|m| keep(m))
            .count() as u64
    }
}

/// Free-function form of [`Trace::moves_after_lower_stable`].
pub fn moves_after_lower_stable(trace: &Trace, priority: u32) -> u64 {
    trace.moves_after_lower_stable(priority)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(step: u64, priority: u32) -> MoveRecord {
        MoveRecord {
            step,
            node: NodeId(1),
            tier: priority as usize - 1,
            priority,
            rule: Rule::RWait,
            old: State::Out,
            new: State::Wait,
        }
    }

    #[test]
    fn single_algorithm_counts_everything() {
        let trace = Trace {
            moves: (0..7).map(|s| mv(s, 1)).collect(),
            steps: 7,
        };
        assert_eq!(trace.moves_after_lower_stable(1), 7);
    }

    #[test]
    fn counts_only_after_last_lower_move() {
        let mut moves = Vec::new();
        for s in 0..=40 {
            moves.push(mv(s, 1));
            if s % 10 == 0 {
                moves.push(mv(s, 2));
            }
        }
        for s in 41..53 {
            moves.push(mv(s, 2));
        }
        let trace = Trace { moves, steps: 53 };
        assert_eq!(trace.last_lower_step(2), Some(40));
        assert_eq!(trace.moves_after_lower_stable(2), 12);
        assert_eq!(trace.moves_of(1), 17);
    }
}
