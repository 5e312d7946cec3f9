//! Compressed text indexing toolkit: LZ77, run-length BWT, recompression
//! grammars, synchronizing sets and compressed wavelet trees.

pub mod text;
pub mod lbgen;
pub mod measures;
pub mod rlslp;
pub mod grammar_queries;
pub mod range;
pub mod compressed_index;
pub mod syncset;
pub mod corpus;
pub mod cwt;
pub mod lz2rlbwt;
