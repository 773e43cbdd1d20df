pub mod annotate;
pub mod bio;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod harness;
pub mod oracle;
pub mod tagger;
pub mod taxonomy;

pub use error::{Error, Result};
