pub mod cli;
pub mod coords;
pub mod duct;
pub mod error;
pub mod gradients;
pub mod mhd;
pub mod numerics;
pub mod pressure;
pub mod riccati;
pub mod solver;

pub use error::{Error, Result};
