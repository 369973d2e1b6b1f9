//! Storage and publication for benchmark components, contexts and runs.
//!
//! A [`Registry`] owns a directory holding content-addressed payload blobs
//! and a SQLite metadata database. Component versions are immutable once
//! registered. Publishing a run mints a persistent identifier through a
//! [`Registrar`] and pins every component version the run references.

pub mod archive;
mod error;
mod records;
pub mod registrar;
mod registry;
mod store;

pub use error::{RegistryError, Result};
pub use records::{
    AuditReport, ComponentMetadata, ComponentQuery, ComponentRecord, Page, Principal, PublicationRecord, RunQuery,
    Scope, Subject, DEFAULT_PAGE_SIZE, MAX_PAGE_SIZE,
};
pub use registrar::{LocalSim, Registrar, RegistrarKind, ZenodoSandbox};
pub use registry::Registry;
pub use store::Store;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/registry.md")]
pub mod book {}
