//! Enumeration and canonical forms of decomposition types.
//!
//! Punctured-sphere decompositions are trivalent trees with labelled leaves
//! ([`LabelledTree`]); forgetting the labels gives an [`UnlabelledTreeClass`].
//! Closed and small-genus decompositions are trivalent multigraphs
//! ([`DualGraph`]).

mod dual_graph;
mod trees;

pub use dual_graph::{enum_dual_graphs, DualGraph, DEFAULT_GENUS_CUTOFF};
pub use trees::{
    all_splits_of, build_ti, canonical_unlabelled, edge_leafset, enum_labelled_trees, enum_unlabelled_classes,
    for_each_labelled_tree, separating_count, tree_from_laminar, LabelledTree, TreeBuilder,
    UnlabelledTreeClass,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unordered triple of puncture counts around a pair of pants, stored sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PantsType(pub [u32; 3]);

impl PantsType {
    pub fn new(a: u32, b: u32, c: u32) -> Self {
        let mut k = [a, b, c];
        k.sort_unstable();
        PantsType(k)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl std::fmt::Display for PantsType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// All sorted triples summing to `n`; `k1 >= 1` when `essential_only`.
pub fn enum_pants_types(n: u32, essential_only: bool) -> Vec<PantsType> {
    let start = u32::from(essential_only);
    let mut out = Vec::new();
    for a in start..=n / 3 {
        for b in a..=(n - a) / 2 {
            out.push(PantsType([a, b, n - a - b]));
        }
    }
    out
}

/// `sum_{i=2}^{floor(n/2)} floor(n/i)`: curves forced by the trees `T_i`.
pub fn lower_bound_sum(n: u32) -> u64 {
    (2..=n / 2).map(|i| u64::from(n / i)).sum()
}

/// `(2n-5)!!`, the number of labelled trivalent trees with `n` leaves.
pub fn double_factorial_count(n: u32) -> Result<u64> {
    if n < 3 {
        return Err(Error::NTooSmall(n));
    }
    Ok((1..=2 * u64::from(n) - 5).step_by(2).product())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pants_type_listing() {
        let ess = enum_pants_types(6, true);
        assert_eq!(
            ess,
            vec![PantsType([1, 1, 4]), PantsType([1, 2, 3]), PantsType([2, 2, 2])]
        );
        assert_eq!(enum_pants_types(6, false).len(), 7);
        assert_eq!(enum_pants_types(3, true), vec![PantsType([1, 1, 1])]);
    }

    #[test]
    fn lower_bound_sum_values() {
        assert_eq!(lower_bound_sum(8), 8);
        assert_eq!(lower_bound_sum(10), 12);
        assert_eq!(lower_bound_sum(4), 2);
    }
}
