//! Construction and analysis of a multilingual ontology of sentiment-biased
//! adjective-noun pairs (ANPs) mined from image tag corpora.
//!
//! The pipeline runs in stages:
//!
//! 1. [`corpus`]: load image-metadata records and pull per-emotion slices
//!    using ranked seed keywords.
//! 2. [`tagging`] + [`discovery`]: tokenize tags, label parts of speech and
//!    collect adjacent adjective-noun pairs.
//! 3. [`filters`]: language, semantics, sentiment, frequency, diversity,
//!    subsampling and stem unification.
//! 4. [`analysis`], [`crosslingual`], [`predict`]: downstream statistics,
//!    cross-language concept alignment and sentiment transfer experiments.

pub mod analysis;
pub mod corpus;
pub mod crosslingual;
pub mod discovery;
pub mod error;
pub mod filters;
pub mod io;
pub mod predict;
pub mod tagging;
pub mod text;

pub use corpus::{Emotion, EmotionSeedSet, EmotionSlice, ImageRecord};
pub use discovery::{AnpCandidate, LanguageConfig};
pub use error::{Error, Result};
pub use filters::{AnpRecord, AnpStatus};

/// Number of emotions in the seed taxonomy (8 basic emotions x 3 intensities).
pub const NUM_EMOTIONS: usize = 24;
