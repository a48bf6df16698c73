//! Cross-lingual concept alignment: translation to a pivot language, exact
//! and cluster-based alignment matrices, and the two-stage noun/phrase
//! clustering tree.

mod align;
mod embedding;
mod kmeans;
mod pca;
mod translate;
mod tree;

pub use align::{cluster_alignment, exact_alignment, AlignmentMatrix, AlignmentMode};
pub use embedding::EmbeddingStore;
pub use kmeans::{choose_k, kmeans, kmeans_restarts, ElbowChoice, ElbowOptions, KMeansResult, MAX_ITERATIONS};
pub use pca::project_2d;
pub use translate::{translate_ontologies, TranslatedAnp, TranslatedSet, TranslationTable, Translator};
pub use tree::{build_cluster_tree, ClusterTree, ClusteredPhrase, NounCluster, SubCluster, TreeOptions, DEFAULT_K1};

/// Mixes a base seed with a stream index (splitmix64 finalizer).
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
