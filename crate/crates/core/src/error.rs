//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("enclosed puncture set is empty")]
    EmptyEnclosedSet,
    #[error("puncture {0} is outside 1..={1}")]
    PunctureOutOfRange(u32, u32),
    #[error("wiggle map domain mismatch: {0}")]
    BadWiggleDomain(String),
    #[error("puncture counts differ ({0} vs {1})")]
    MismatchedN(u32, u32),
    #[error("curves {0} and {1} intersect")]
    NotDisjoint(usize, usize),
    #[error("enclosed sets of curves {0} and {1} are neither nested nor disjoint")]
    NotLaminar(usize, usize),
    #[error("region has {0} boundary elements, expected 3")]
    NotPants(usize),
    #[error("n = {0} is too small")]
    NTooSmall(u32),
    #[error("n = {0} exceeds the search cutoff {1}")]
    NTooLarge(u32, u32),
    #[error("tree is not trivalent")]
    NotTrivalent,
    #[error("edge ({0}, {1}) is not an internal edge")]
    NotInternalEdge(usize, usize),
    #[error("vertex {0} is not an internal vertex")]
    RootNotInternal(usize),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("genus {0} exceeds the cutoff {1}")]
    GTooLarge(u32, u32),
    #[error("bad size range {0}..={1} for n = {2}")]
    BadRange(u32, u32, u32),
    #[error("constant c must be positive and finite, got {0}")]
    BadC(f64),
    #[error("leaf count {0} does not match n = {1}")]
    LeafCountMismatch(usize, u32),
    #[error("cycle length {0} outside 3..=8")]
    EllOutOfRange(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph is not unicyclic")]
    NotUnicyclic,
    #[error("graph does not have cyclomatic number 2")]
    NotCyclomatic2,
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
}
