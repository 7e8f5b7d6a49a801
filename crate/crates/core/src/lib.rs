pub mod cli;
pub mod cone;
pub mod curve;
pub mod error;
pub mod geodesic;
pub mod io;
pub mod learning;
pub mod linalg;
pub mod metric;
pub mod params;
pub mod registration;
pub mod reparam;
pub mod weight;

pub use error::{Error, Result};
