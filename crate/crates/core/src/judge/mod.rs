//! Relevance judging: two-round vote aggregation, inter-assessor agreement,
//! qrels export, a journaled judgment store and its HTTP service.

pub mod aggregate;
pub mod export;
pub mod kappa;
pub mod server;
pub mod store;

use serde::{Deserialize, Serialize};

use crate::corpus::Grade;

pub use aggregate::{aggregate, AggregatedQrel, Aggregation, Status};
pub use export::{export_qrels, ExclusionRule, ExportReport};
pub use kappa::{agreement_report, cohen_kappa, AgreementReport};
pub use store::{Collection, JudgeSettings, JudgeStore};

/// Version tag on every JSON payload the service sends.
pub const SCHEMA_VERSION: u32 = 1;

/// One grade given by one assessor. `round` is 1 for pool judging and 2 for
/// a tie-resolution vote; `timestamp` is milliseconds since the Unix epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub assessor_id: String,
    pub topic_id: u32,
    pub docno: String,
    pub grade: Grade,
    pub round: u8,
    pub timestamp: u64,
}
