//! Leave-one-out ranking evaluation against sampled negatives.

mod metrics;
mod protocol;
mod results;

pub use metrics::{hr_at_k, mrr, ndcg_at_k, rank_of_positive, MetricVector};
pub use protocol::{
    evaluate_users, sample_candidates, CandidateSet, EvalConfig, EvalTarget, FoldEvaluation, UserRankResult,
    TEST_STREAM,
};
pub use results::{read_results_csv, write_results_csv, ResultRow};
