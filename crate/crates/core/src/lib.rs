pub mod circle;
pub mod cli;
pub mod density;
pub mod dynamics;
pub mod eigensolve;
pub mod error;
pub mod fastvar;
pub mod format;
pub mod greens;
pub mod operator;
pub mod perturb;
pub mod suite;
