//! Coverability checking for broadcast networks of identical finite-state
//! processes.
//!
//! The crate models broadcast protocols over arbitrary communication
//! topologies and decides whether a target state can be covered:
//!
//! * [`protocol`] — the protocol model, its textual format, phase-partition
//!   inference and the k-unfolding transformation;
//! * [`topology`] — topologies, standard families, and the tree unfolding
//!   that reduces coverability over graphs to coverability over trees;
//! * [`semantics`] — exact operational semantics, replay validation and the
//!   exhaustive breadth-first coverability oracle;
//! * [`line_cover`] — the polynomial procedure for line topologies and
//!   protocols with at most two phases;
//! * [`star_cover`] — the star reduction for one-phase protocols via
//!   broadcast prints and VASS control-state reachability, plus the
//!   VASS-to-protocol generator;
//! * [`minsky`] — two-counter machines and the reduction producing
//!   6-phase-bounded protocols together with replayable witnesses.

pub mod line_cover;
pub mod minsky;
pub mod protocol;
pub mod semantics;
pub mod star_cover;
pub mod topology;

#[cfg(test)]
pub(crate) mod fixtures;
