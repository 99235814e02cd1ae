pub mod cli;
pub mod error;
pub mod families;
pub mod krein;
pub mod mat;
pub mod model;
pub mod quad;
pub mod scatter;
pub mod szego;
pub mod transfer;
pub mod weyl;

pub use error::{Error, Result};
