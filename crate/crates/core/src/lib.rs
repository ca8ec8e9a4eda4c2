//! Turns entity-access traces of a monolith into microservice
//! decompositions, quality measures, sagas and a Domain-Driven Design model
//! written in a subset of the Context Mapper language (CML).
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`ingest`] parses and validates access traces and entity structures.
//! 2. [`decompose`] clusters entities by access similarity.
//! 3. [`measures`] scores decompositions by cohesion, coupling and complexity.
//! 4. [`saga`] rewrites each functionality as a saga of cluster-local steps.
//! 5. [`dddmap`] maps clusters and sagas to bounded contexts.
//! 6. [`cml`] emits, parses, validates and refactors CML documents.
//! 7. [`diagrams`] renders context maps, decompositions and coordinations.

pub mod cli;
pub mod cml;
pub mod dddmap;
pub mod decompose;
pub mod diagrams;

mod error;
pub mod ident;
pub mod ingest;
pub mod measures;
pub mod saga;

pub use error::{Error, Location, Result};
