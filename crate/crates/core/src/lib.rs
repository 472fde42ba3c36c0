//! Data-driven analysis of noisy linear systems with a norm-bounded unknown
//! state matrix.
pub mod error;
pub mod inference;
pub mod interp;
pub mod lmi;
pub mod matcore;
pub mod predict;
pub mod sysio;

pub use error::{Error, Result};
