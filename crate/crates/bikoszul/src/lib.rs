//! Exact computer algebra for the bigraded A-infinity Ext-algebra of a
//! finitely presented connected graded algebra.
//!
//! The pipeline: parse a presentation (generators in degree 1, homogeneous
//! relations), build the dual-bar DG algebra, compute cohomology with a
//! deterministic retraction, transfer the minimal A-infinity structure, and
//! analyze it: Stasheff/morphism identity verification, degree-distribution
//! classification, admissible-multiplication enumeration, generation
//! analysis, and truncated-structure surgery.

pub mod ainfty;
pub mod bar;
pub mod field;
pub mod format;
pub mod generation;
pub mod koszul;
pub mod linalg;
pub mod oracle;
pub mod presentation;
pub mod synth;
pub mod transfer;

pub use field::{Field, FieldScalar};
pub use presentation::Presentation;
