//! Tree growth, sampling and exhaustive enumeration of small trees.

pub mod enumerate;
pub mod sampler;
pub mod tree;

pub use enumerate::{enumerate_small, EnumeratedLaw, SmallTree};
pub use sampler::FenwickSampler;
pub use tree::{grow, GreedyPath, HeightStats, Mode, WrtState};
