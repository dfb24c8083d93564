pub mod certify;
pub mod curves;
pub mod error;
pub mod filling;
pub mod generators;
pub mod geometry;
pub mod homology;
pub mod intersect;
pub mod lattice;
pub mod lemmas;
pub mod linking;
pub mod mesh;
pub mod refined;
pub mod sweep;

pub use error::{Error, Result};
