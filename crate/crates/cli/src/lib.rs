//! Matrix file formats, test-matrix generators and the Monte-Carlo experiment
//! harness around [`elemsparse_core`].

pub mod error;
pub mod experiment;
pub mod generate;
pub mod io;

pub use error::{HarnessError, Result};
