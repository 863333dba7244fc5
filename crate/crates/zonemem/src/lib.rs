//! Persistent storage, file formats and the command line for `zonemem-core`.
//!
//! - [`ltm`]: single-file LTM store with an index footer.
//! - [`io`]: world, spec, scenario and trace JSON.
//! - [`export`]: trace/ledger CSV and run summaries.
//! - [`svg`]: static line charts of the three memory curves.
//! - [`cli`]: the `zonemem` binary.

pub mod cli;
pub mod error;
pub mod export;
pub mod io;
pub mod ltm;
pub mod svg;

pub use error::{Error, Result};
pub use ltm::FileStore;
pub use zonemem_core as core;
