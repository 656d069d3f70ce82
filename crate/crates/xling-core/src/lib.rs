//! Cross-lingual word embeddings for dictionary-only languages.
//!
//! The pipeline: load word2vec-text embeddings for resource-rich languages,
//! normalize their vocabularies, reduce every space to one dimensionality,
//! align them to an anchor language with orthogonal Procrustes plus CSLS
//! refinement, project endangered-language lexemes as centroids of their
//! translations' vectors, fine-tune the projected spaces on small treebanks
//! with skip-gram negative sampling, re-align, and finally train/apply a
//! zero-shot sentiment classifier over the shared coordinate system.
//!
//! All numeric kernels are generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the aliases below fix the scalar for common use. The CLI works in `f64`.

pub mod align;
pub mod conllu;
pub mod dictionary;
pub mod embeddings;
pub mod error;
pub mod linalg;
pub mod reduce;
pub mod scalar;
pub mod sentiment;
pub mod sgns;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type WordEmbeddingsF32 = embeddings::WordEmbeddings<f32>;
pub type WordEmbeddingsF64 = embeddings::WordEmbeddings<f64>;
pub type MatrixF32 = linalg::Matrix<f32>;
pub type MatrixF64 = linalg::Matrix<f64>;
pub type AlignmentResultF32 = align::AlignmentResult<f32>;
pub type AlignmentResultF64 = align::AlignmentResult<f64>;
pub type SentimentModelF32 = sentiment::SentimentModel<f32>;
pub type SentimentModelF64 = sentiment::SentimentModel<f64>;
