//! Core data model and pure analysis for causalbench.
//!
//! This crate holds everything that does not touch the disk, the network, or
//! a child process:
//!
//! - [`model`]: components, contexts, scenarios, system profiles, results and
//!   runs, plus the set algebra that expands a context into scenarios.
//! - [`canonical`]: the canonical JSON form used for hashing, the wire, and
//!   the on-disk store.
//! - [`compat`]: role-based compatibility between datasets, models and
//!   metrics, and the suggestion engine built on top of it.
//! - [`analysis`]: run tables, slicing, virtual runs, backdoor-adjusted
//!   impact estimates, Pareto fronts, prediction and recommendation.
//!
//! The guide in `book/` walks through each of these with runnable snippets;
//! those snippets are compiled and run as doc-tests of this crate.

pub mod analysis;
pub mod canonical;
pub mod compat;
pub mod error;
pub mod model;
#[cfg(feature = "testing")]
pub mod testing;

pub use error::ModelError;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/contexts.md")]
    pub mod contexts {}
    #[doc = include_str!("../../../book/src/compatibility.md")]
    pub mod compatibility {}
    #[doc = include_str!("../../../book/src/impact.md")]
    pub mod impact {}
    #[doc = include_str!("../../../book/src/pareto.md")]
    pub mod pareto {}
    #[doc = include_str!("../../../book/src/prediction.md")]
    pub mod prediction {}
}
