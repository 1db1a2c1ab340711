//! Numerical laboratory for pointwise ergodicity, partitionability and
//! uniformity of compact dynamical systems built from families of circles.

pub mod dynamics;
pub mod error;
pub mod gallery;
pub mod measure;
pub mod summation;
pub mod topology;
pub mod verdict;

pub use error::{LabError, Result};
pub mod suite;
