//! Exact point-to-point distance queries through 2-hop labels built by
//! iterative label generation (hop stepping, hop doubling or a hybrid of the
//! two), in memory or with a bounded memory budget on disk.

pub mod bitparallel;
pub mod extmem;
pub mod graph;
pub mod labeling;
pub mod oracle;
pub mod par;
pub mod query;
pub mod report;

pub use graph::{Graph, GraphError, Length, RankAssignment, VertexId};
pub use labeling::{build_index, BuildConfig, BuildMode, LabelIndex};

/// Distance of an unreachable pair; never a real distance.
pub const INF: Length = Length::MAX;
