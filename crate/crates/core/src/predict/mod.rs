//! Cross-lingual sentiment prediction over precomputed image features.

mod cross;
mod features;
mod labels;
mod linear;
mod splits;
pub mod synthetic;

pub use cross::{cross_predict, train_per_language, AccuracyMatrix};
pub use features::{anp_key, FeatureRow, FeatureSet, FEATURE_MAGIC, FEATURE_VERSION};
pub use labels::{label_images, LabeledImage, SentimentLabeling, DEFAULT_LABEL_THRESHOLD};
pub use linear::{train_linear, LinearModel, TrainOptions, TrainReport, DEFAULT_EPOCHS, DEFAULT_LAMBDA};
pub use splits::{make_splits, ClassCounts, LangSplit, SplitPlan, DEFAULT_MIN_IMAGES_PER_ANP, TRAIN_FRACTION};
