//! Quantum reference frames for spin.
//!
//! A frame is modelled as three spin coherent states pointing along three
//! orthogonal axes. Changing from one frame to another rotates the described
//! spin by Euler angles that are read out of the frame state, either exactly
//! per branch (the large-spin limit) or through operator-valued angles at
//! finite spin.

pub mod error;
pub mod frames;
pub mod qrf;
pub mod spin;
pub mod symmetry;

pub use error::{QrfError, Result};
