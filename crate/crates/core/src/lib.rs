//! Construction and verification of dimensional dual arcs and hyperovals in
//! classical polar spaces.
//!
//! The crate provides exact finite-field arithmetic ([`gf`]), canonical
//! subspace linear algebra ([`linalg`]), the classical forms and polar space
//! models ([`forms`], [`polarspace`]), dual-arc machinery with inner
//! distributions and Vanhove-type feasibility ([`dho`]), and exhaustive
//! certified searches ([`search`]).

pub mod dho;
pub mod error;
pub mod forms;
pub mod gf;
pub mod linalg;
pub mod polarspace;
pub mod search;

pub use error::{Error, Result};
