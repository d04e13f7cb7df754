//! Doubling measures built as multiplicative cascades on interval grids.
//!
//! The 5-ary model lives in [`kahane`]; the grid over the complement of the
//! ternary Cantor set is assembled from [`cantor`], [`leaves`] and [`chartgrid`],
//! and explored by the random walk in [`walk`].

pub mod cantor;
pub mod chartgrid;
pub mod export;
pub mod halfplane;
pub mod interp;
pub mod kahane;
pub mod leaves;
pub mod rational;
pub mod walk;

pub use cantor::{Gap, Geometry, Kind, Located, RInterval, Slot, WhitneyId, WhitneyInterval, WhitneyParams};
pub use chartgrid::{GridNode, Model, NodeClass, Params};
pub use rational::Rational;
pub use walk::{WalkConfig, WalkStats, Walker};
