//! Model-based diagnosis engine.
//!
//! Computes the most preferred minimal diagnoses of a diagnosis problem
//! instance with a linear-space recursive best-first hitting set search, or
//! with Reiter's HS-Tree as a baseline. Conflicts come from QuickXplain over a
//! propositional reasoner, or from an explicitly given conflict family.

pub mod conflict;
pub mod dpi;
pub mod logic;
pub mod search;
pub mod sequential;
