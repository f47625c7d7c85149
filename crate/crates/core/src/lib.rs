//! Exact Fedosov deformation quantization on a Darboux chart with polynomial data.
//!
//! The crate is layered: [`ring`] supplies exact polynomials, [`weyl`] the
//! truncated Weyl algebra, [`fedosov`] the connection, flat lift and star
//! product, [`symfield`] the quantization of symplectic vector fields and the
//! 2-cocycle, and [`liecross`] the deformed cross product with a Lie algebra.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fedosov;
pub mod liecross;
pub mod ring;
pub mod symfield;
pub mod weyl;

pub use error::{Error, Result};
