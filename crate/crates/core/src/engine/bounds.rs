use serde::{Deserialize, Serialize};

use crate::protocols::Kind;

/// Move ceiling of a single protocol on `n` nodes: BW `2n`,
/// MIS `max(3n − 5, 2n)`, MDS `4n`.
pub fn bound_for(kind: Kind, n: u64) -> u64 {
    match kind {
        Kind::Bw => n.saturating_mul(2),
        Kind::Mis => {
            let three = n.saturating_mul(3).saturating_sub(5);
            three.max(n.saturating_mul(2))
        }
        Kind::Mds => n.saturating_mul(4),
    }
}

/// `Σ_{k=1}^{|ALG|} Π_{i=1}^{k} bound(a_i, n)`. Saturates at `u64::MAX`.
pub fn combined_bound(kinds: &[Kind], n: u64) -> u64 {
    let mut total = 0u64;
    let mut product = 1u64;
    for &kind in kinds {
        product = product.saturating_mul(bound_for(kind, n));
        total = total.saturating_add(product);
    }
    total
}

/// Observed moves against the ceilings, per tier and overall.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub tiers: Vec<TierBound>,
    pub total_moves: u64,
    /// `n` used for the combined ceiling (largest tier graph).
    pub combined_n: u64,
    pub combined_bound: u64,
    pub combined_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierBound {
    pub label: String,
    pub kind: Kind,
    pub priority: u32,
    pub total_moves: u64,
    /// Moves made after the last move of any lower-priority tier.
    pub moves_after_lower_stable: u64,
    /// Of those, moves at nodes that lower tiers exclude in the final configuration.
    pub gated_moves_after_lower_stable: u64,
    /// Order of the subgraph induced by the lower tiers in the final configuration.
    pub induced_n: u64,
    pub bound: u64,
    pub pass: bool,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.combined_pass && self.tiers.iter().all(|t| t.pass)
    }
}
