//! Exact optimal transport and perpendicular Radon transforms on locally
//! finite metric trees.
//!
//! All coordinates, lengths and masses are exact rationals. The crate is
//! organised as
//!
//! - [`tree`]: trees, points, paths, geodesics, projections, perpendiculars
//! - [`measure`]: finitely supported probability measures and projections
//! - [`transport`]: exact W₂, optimal plans, interpolation, extension
//! - [`radon`]: the combinatorial transform, its inversion, reconstruction
//! - [`verify`]: random generators and the property suite
//! - [`io`] and [`cli`]: JSON file formats and the command line

pub mod cli;
pub mod error;
pub mod io;
pub mod measure;
pub mod radon;
pub mod rational;
pub mod transport;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Rational;
