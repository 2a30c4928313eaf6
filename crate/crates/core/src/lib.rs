//! Consistency checking and corpus building for small OWL ontologies.
//!
//! The crate covers the whole path from a parsed ontology to a labelled,
//! balanced dataset: a tableau reasoner with a finite-model cross-check,
//! antipattern detection and injection, modularization, text translation and
//! graph embeddings.

pub mod antipattern;
pub mod corpus;
pub mod embed;
pub mod manchester;
pub mod model;
pub mod modularize;
pub mod semantics;
pub mod tableau;
pub mod translate;

pub use model::{
    nnf, signature_of, partition_abox_tbox_rbox, Axiom, AxiomBox, BoxPartition, ClassExpression,
    EntityKind, EntityName, ModelError, Ontology, OntologyStatus, RoleExpression,
    DEFAULT_NAMESPACE,
};
