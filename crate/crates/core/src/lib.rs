//! Guitar tablature processing: MusicXML ingest, exact-time score model,
//! token encoding for sequence models, musical analysis and corpus
//! statistics.

pub mod analysis;
pub mod codec;
pub mod error;
pub mod ingest;
pub mod model;
pub mod par;
pub mod stats;

pub use error::{Error, Result};
