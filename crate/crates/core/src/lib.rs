//! Strichartz Fourier transform on the Heisenberg group `Hⁿ` with numerical
//! checks of the associated uncertainty principles.

pub mod checks;
pub mod error;
pub mod fan;
pub mod hgroup;
pub mod quad;
pub mod radial;
pub mod sft;
pub mod specfun;
pub mod suite;
pub mod uncertainty;

pub use error::{Error, Result};
