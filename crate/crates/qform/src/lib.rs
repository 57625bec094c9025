pub mod catalog;
pub mod cli;
pub mod dickson;
pub mod error;
pub mod forms;
pub mod io;
pub mod limits;
pub mod matrix;
pub mod oracle;
pub mod reflections;
pub mod ring;
pub mod transforms;
pub mod witt;

pub use error::{Error, Result};
