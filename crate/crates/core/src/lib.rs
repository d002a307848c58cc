//! Finite-scale workbench for amalgamation classes, Fraïssé-style stage
//! construction, universal homomorphisms over a fixed target, and finite
//! clone machinery.
//!
//! Everything here is bounded and says so: class properties are checked up to
//! explicit size bounds, stage constructions are budgeted, and every verdict
//! carries witnesses that re-verify independently of the search that found
//! them.

pub mod age;
pub mod amalgam;
pub mod canon;
pub mod cert;
pub mod checks;
pub mod clone;
pub mod comma;
pub mod config;
pub mod error;
pub mod fraisse;
pub mod morphism;
pub mod report;
pub mod search;
pub mod structure;

pub use canon::{canonical_form, CanonicalCode};
pub use config::Caps;
pub use error::{Error, Result};
pub use morphism::{Morphism, MorphismKind, MorphismRecord};
pub use search::PartialMap;
pub use structure::{RelStructure, Signature, SymbolDecl};
