//! Label construction under a memory budget, over sorted run files, and the
//! on-disk index format.
//!
//! Every label set lives in a run file of fixed-size records sorted by
//! (owner, pivot). Candidate generation is a block nested-loop join: the
//! outer loop loads `prev` groups together with the entries that share their
//! key, the inner loop streams the full label file once per block.
//! Candidates spill to sorted runs that are merged with duplicate removal.
//! Pruning is a second nested-loop join keyed the same way. The budget bounds
//! the label data held at once; arrays with one slot per vertex (ranks,
//! offsets) are not counted against it.

mod build;
mod disk;
mod generate;
mod prune;
mod run;

pub use build::{extmem_build, init_runs, ExtmemOptions, ExtmemOutcome, IterationIo, LabelRuns};
pub use disk::{write_label_index, DiskIndex, DistWidth, FormatError, IndexHeader, INDEX_MAGIC, INDEX_VERSION};
pub use generate::extmem_generate;
pub use prune::{extmem_prune, merge_final, merge_improvements};
pub use run::{IoCounts, RunFile, RunReader, RunRecord, RunStore, RunWriter, RECORD_BYTES};

use std::path::PathBuf;

use thiserror::Error;

use crate::graph::VertexId;
use crate::labeling::BuildError;

/// Memory budget `M` and block size `B`, in bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemoryBudget {
    total_bytes: usize,
    block_bytes: usize,
}

impl MemoryBudget {
    pub const MIN_BLOCK: usize = 4096;

    /// Requires `4096 <= B <= M / 2`.
    pub fn new(total_bytes: usize, block_bytes: usize) -> Result<MemoryBudget, ExtmemError> {
        if block_bytes < Self::MIN_BLOCK || block_bytes > total_bytes / 2 {
            return Err(ExtmemError::Budget(format!(
                "block size {block_bytes} must be at least {} and at most half of the memory budget {total_bytes}",
                Self::MIN_BLOCK
            )));
        }
        Ok(MemoryBudget { total_bytes, block_bytes })
    }

    pub fn total_bytes(&self) -> usize {
        self.total_bytes
    }

    pub fn block_bytes(&self) -> usize {
        self.block_bytes
    }

    /// Outer-loop block: `M / 2`.
    pub fn outer_bytes(&self) -> usize {
        self.total_bytes / 2
    }

    /// One inner-loop group: `M / 4`.
    pub fn group_bytes(&self) -> usize {
        self.total_bytes / 4
    }

    /// Candidate buffer before spilling: `M / 4`.
    pub fn buffer_records(&self) -> usize {
        (self.total_bytes / 4 / RECORD_BYTES).max(2)
    }

    /// Runs merged at once: one block-sized read buffer each, plus output.
    pub fn merge_fan_in(&self) -> usize {
        (self.total_bytes / self.block_bytes).saturating_sub(1).max(2)
    }
}

#[derive(Debug, Error)]
pub enum ExtmemError {
    #[error("invalid memory budget: {0}")]
    Budget(String),
    #[error("vertex group exceeds budget: vertex {vertex} needs {bytes} bytes, limit is {limit}")]
    GroupExceedsBudget { vertex: VertexId, bytes: usize, limit: usize },
    #[error("work directory {0} is locked by another build")]
    Locked(PathBuf),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
