//! Rigorous construction and covering certification of stably intersecting affine Cantor sets.

pub mod construct;
pub mod cover;
pub mod error;
pub mod fractal;
pub mod liecover;
pub mod renorm;
pub mod rignum;

pub use error::{Error, Result};
