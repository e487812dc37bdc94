//! Finite-size machinery for robust sunflowers and the monotone lower-bound
//! constructions built on them.

pub mod check;
pub mod clique;
pub mod codes;
pub mod error;
pub mod family;
pub mod harnik_raz;
pub mod mask;
pub mod monotone;
pub mod probability;
pub mod rational;
pub mod sunflower;

pub use error::{Error, Result};
pub use family::{GroundSet, SetFamily, SpreadReport};
pub use mask::SubsetMask;
