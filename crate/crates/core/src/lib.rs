//! Exact and certified computation of polytope norms, tree-space norms,
//! renormings and interpolation norms.

pub mod catalog;
pub mod embedding;
pub mod error;
pub mod hrep;
pub mod hull_body;
pub mod interpolation;
pub mod interval;
pub mod linalg;
pub mod lp;
pub mod polytope;
pub mod rat;
pub mod renorming;
pub mod space;
pub mod suite;
pub mod treespace;

pub use error::{Error, Result};
pub use interval::{CertInterval, QuadSurd};
pub use linalg::RatVec;
pub use polytope::PolytopeBall;
pub use rat::Rat;
