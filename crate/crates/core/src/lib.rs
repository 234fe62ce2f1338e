pub mod error;
pub mod exec;
pub mod linalg;
pub mod mixing;
pub mod model;
pub mod prox;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Exec;
