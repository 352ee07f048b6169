pub mod cli;
pub mod dynamics;
pub mod effective;
pub mod embedding;
pub mod error;
pub mod linalg;
pub mod models;
pub mod partition;

pub use error::{Error, Result};
