//! Characteristic initial value problem for spherically symmetric barotropic flow.
//!
//! The pipeline: free data on two intersecting characteristics
//! ([`constraints`]) → Picard iteration in characteristic coordinates
//! ([`goursat`]) → map to the physical t-r plane ([`hodograph`]), with
//! diagnostics and refinement studies in [`verify`]. [`scenario`] reads run
//! descriptions, [`pipeline`] strings the stages together and [`output`]
//! writes the artifacts.

pub mod constraints;
pub mod eos;
pub mod error;
pub mod goursat;
pub mod hodograph;
pub mod numerics;
pub mod output;
pub mod pipeline;
pub mod scenario;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
