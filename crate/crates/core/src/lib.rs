//! Decorated trees for stable reduction of elliptic surfaces over rational
//! curves: sliced and pruned trees, pruning, enumeration at fixed height,
//! intersection-number formulas and Weierstrass vanishing orders.

pub mod cli;
pub mod dot;
pub mod enumerate;
pub mod error;
pub mod examples;
pub mod frac;
pub mod kodaira;
pub mod numerics;
pub mod par;
pub mod prune;
pub mod tree;
pub mod weierstrass;

pub use enumerate::{Census, EnumerationParams, Target};
pub use error::{Error, Result};
pub use frac::{Frac12, Rational};
pub use kodaira::{KodairaType, SlicingPair};
pub use par::ExecMode;
pub use prune::{prune, prune_with_order, LeafPolicy, PruneTrace};
pub use tree::{CanonicalKey, PrunedTree, SlicedTree};
