pub mod error;
pub mod moments;
pub mod observables;
pub mod oracle;
pub mod quantifiers;
pub mod spectral;
pub mod statefile;
pub mod states;
pub mod witnesses;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
