//! Eigenvalue isolation, perturbation bounds and eigenvalue curves.

mod continuation;
mod curve;
mod glue;
mod initial;
mod isolation;

pub use continuation::*;
pub use curve::*;
pub use glue::*;
pub use initial::*;
pub use isolation::*;
