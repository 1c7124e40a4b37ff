//! Finite-scale inverse monoids, germ groupoids, cocycle envelopes and
//! expander certification.

pub mod envelope;
pub mod expander;
pub mod graph;
pub mod group;
pub mod groupoid;
pub mod invmon;
pub mod pbij;
pub mod pipeline;
pub mod translations;
pub mod verdict;
