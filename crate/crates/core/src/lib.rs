//! Exact arithmetic for wreath products, iterated wreath towers and free
//! solvable groups, together with the random-walk machinery used to study
//! entropy ladders and escape probabilities on them.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`]: normal forms, multiplication, canonical keys and projections.
//! * [`magnus`]: the Magnus embedding of free solvable groups into wreath towers.
//! * [`measures`]: finitely supported probability measures, exact and float.
//! * [`walk`]: entropy ladders, trajectory enumeration and escape estimators.
//! * [`experiments`]: textual grammars, experiment configs and reports.

pub mod error;
pub mod experiments;
pub mod group;
pub mod magnus;
pub mod measures;
pub mod walk;

pub use error::{Error, Result};
pub use group::{CanonicalKey, GroupElement, GroupSpec, Projection, ProjectionKind};
pub use magnus::{FreeWord, SdmImage};
pub use measures::{FiniteMeasure, LogLinear, Rational, Weight};
