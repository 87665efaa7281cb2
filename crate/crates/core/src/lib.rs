pub mod cli;
pub mod constitutive;
pub mod diagnostics;
pub mod diff;
pub mod dynamics;
pub mod elastic;
pub mod error;
pub mod field;
pub mod frame;
pub mod grid;
pub mod initial;
pub mod integrator;
pub mod io;

pub use error::{Error, Result};
