//! Exact arithmetic for anticyclotomic theta elements over ring class groups.
//!
//! The crate is organised bottom-up: residue and polynomial arithmetic, group rings and
//! Fitting ideals, binary quadratic forms, definite quaternion orders, elliptic curve
//! hypotheses, and finally the theta and Bertolini-Darmon elements.

pub mod arith;
pub mod curve;
pub mod algebra;
pub mod error;
pub mod fitting;
pub mod group_ring;
pub mod quadratic;
pub mod quaternion;
pub mod theta;

pub use error::{Error, Result};
