//! File formats, the HTTP model client and the `pmvis` command line on top
//! of [`pmvis_core`].

pub mod cli;
pub mod clock;
pub mod formats;
pub mod http;
pub mod load;

pub use clock::SystemClock;
pub use load::{load_database, load_from_root, LoadError};
