//! Bell (CHSH) tests between an atomic qubit and a single-photon optical
//! mode, with photon counting or homodyne detection on the optical side.

pub mod app;
pub mod chsh;
pub mod error;
pub mod fock;
pub mod hilbert;
pub mod measure;
pub mod model;

pub use error::{Error, Result};
