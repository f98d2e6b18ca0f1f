//! File formats, pipeline stages and the `geoloc` command line on top of
//! [`geoloc_core`].

pub mod cli;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod stages;

pub use error::{Error, Result};
