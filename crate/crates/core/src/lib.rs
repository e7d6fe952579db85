//! Direct sampling reconstruction for diffusive optical tomography.
//!
//! The crate synthesizes boundary Cauchy data for absorbing inclusions in a
//! rectangle ([`synthesis`]), solves the underlying elliptic problems by finite
//! differences ([`pde`]), and turns one noisy data pair into index maps that
//! peak at the inclusions ([`dsm`]). Closed forms on the unit disk and image
//! series on rectangles live in [`kernels`].

pub mod dsm;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod pde;
pub mod synthesis;

pub use error::{DsmError, Result};
