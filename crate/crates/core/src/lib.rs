//! Rolling a ball on a ball without slipping or twisting, the split-octonion
//! model of its configuration space, and the local invariants of its singular
//! extremals.

pub mod algebra;
pub mod error;
pub mod invariants;
pub mod linalg;
pub mod octmodel;
pub mod rolling;
pub mod sampling;

pub use error::Error;
