//! The MDS-TSPIR protocol: storage encoding, query construction, masked
//! answers and two-stage decoding.
//!
//! Indices are 0-based throughout the library (nodes, rounds, files).
//! Wire messages, transcripts and the CLI use 1-based numbering.

mod decode;
mod params;
mod query;
mod selection;
mod storage;

pub use decode::{decode, decode_with_trace, round_system, DecodeTrace};
pub use params::{ParamsSpec, SchemeParams, SelectionCase};
pub use query::{compute_masked_unknowns, node_answer, Answers, CommonRandomness, QueryPlan};
pub use selection::{build_selection_matrix, SelectionMatrix};
pub use storage::{encode_storage, Database, StorageMatrix};

use crate::error::Result;
use crate::field::Fe;

/// Runs one retrieval in-process and returns the decoded file.
pub fn retrieve(
    params: &SchemeParams,
    storage: &StorageMatrix,
    plan: &QueryPlan,
    common: &CommonRandomness,
) -> Result<Vec<Fe>> {
    let answers = Answers::compute(params, storage, plan, common)?;
    decode(params, plan, &answers)
}
