//! Multiple-query relevance, nDCG, and the query-pair experiment protocol.

mod experiment;
mod metrics;
pub mod synth;

pub use experiment::{
    front_relevance_profile, is_viable, pair_relevance, run_query_pair_experiment, FrontProfiles,
    MetricReport, ProfileInput, ProfileOptions, QueryPairBatch, ReportMeta, MIN_RELEVANT_ITEMS,
};
pub use metrics::{dcg_at_k, ideal_dcg, mq_uniq_rel, ndcg_at_k};
pub use synth::BridgeBenchmark;
