//! Dynamic relative compression.
//!
//! A string `S` is stored as a maximal cover of substrings of a fixed
//! reference `R`, and can be read and edited without decompressing it.

pub mod block;
pub mod cover;
pub mod cover_file;
pub mod forest;
pub mod oracles;
pub mod packed;
pub mod ref_index;
pub mod script;
pub mod sum_tree;

pub use block::Block;
pub use cover::{CompressedString, CoverError, OpStats};
pub use forest::{CoverForest, ForestError, Handle};
pub use packed::{PackedSums, PsConfig, PsError};
pub use ref_index::{IndexError, RefIndex};
pub use sum_tree::SumTree;
