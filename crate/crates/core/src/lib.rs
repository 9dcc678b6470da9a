//! Metadata catalog engine for data lakes.
//!
//! Every object in the lake gets a [`model::Hypernode`]: a tree of version
//! and representation nodes plus object-level properties, tags and a
//! summary. Objects are connected by similarity links, groupings and
//! parenthood hyperedges, and the whole lake is covered by an inverted
//! index, an append-only usage log and loadable thesauri.
//!
//! [`Catalog`] is the entry point. It persists everything under one
//! directory and exposes the operations of every module as methods.

pub mod auditlog;
pub mod error;
pub mod index;
pub mod ingest;
pub mod inter;
pub mod intra;
pub mod model;
pub mod semantic;
pub mod store;

pub use error::{Error, ParseError, Result};
pub use store::{Catalog, OpenOptions};
