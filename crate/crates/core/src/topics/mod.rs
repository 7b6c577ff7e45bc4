//! Review topic extraction and user/item topic profiles.
//!
//! Embeddings are reduced with PCA, clustered with k-means, labeled with
//! class-based TF-IDF keywords and pruned by document prevalence. Reviews
//! then receive soft topic distributions which are averaged into user and
//! item profiles.

mod ctfidf;
mod embed;
mod kmeans;
mod model;
mod pca;
mod pipeline;
mod profiles;

pub use ctfidf::{ctfidf_keywords, default_stopwords, tokenize, CtfidfConfig, Keyword};
pub use embed::{load_embeddings, EmbeddingMatrix};
pub use kmeans::{kmeans, nearest, KMeansConfig, KMeansResult};
pub use model::{
    apply_edits, prune_topics, soft_assign, soft_assign_reduced, MergeRecord, PruneOutcome, TopicDistribution,
    TopicEdits, TopicModel,
};
pub use pca::{embeddings_to_matrix, fit_pca, reduce, Projection};
pub use pipeline::{fit_topics, TopicConfig, TopicFit};
pub use profiles::{aggregate_profiles, read_profiles_csv, write_profiles_csv, ProfileNorm, Profiles};
