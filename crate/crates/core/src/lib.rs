//! Shadowing for nonautonomous random dynamical systems driven by an
//! invertible base map, together with the numerical tooling to check the
//! shadowing certificate and Lyapunov exponent conservation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod driving;
pub mod error;
pub mod green;
pub mod harness;
pub mod linalg;
pub mod lyapunov;
pub mod shadowing;

pub use error::{Error, Result};
