//! Terms, quantum states, operational semantics, bisimulation and rewriting
//! for a reversible quantum process algebra.
//!
//! This crate needs only `alloc`. Parsing, file formats and the command line
//! live in the `rqpap` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod qstate;
pub mod term;
pub mod model;
pub mod sos;
pub mod bisim;
pub mod parser;
pub mod rewrite;
