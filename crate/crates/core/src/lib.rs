//! Exact analysis of continuous cocycles on shift spaces over finitely
//! generated groups.
//!
//! The crate builds four ingredients and wires them together:
//!
//! * [`group`] — normal forms, word metric, balls, and relators for a fixed
//!   family of groups with decidable word problem;
//! * [`coeff`] — the discrete coefficient group the cocycles map into;
//! * [`topology`] — finite-radius end estimation and outside-ball paths in
//!   Cayley graphs;
//! * [`shift`] — finite-overlay configurations, subshift membership, cones,
//!   and the specification witness constructions;
//! * [`cocycle`] — locally constant cocycles, their limit cocycles along
//!   non-torsion directions, obstruction tests, and the untwisting pipeline
//!   that recovers a transfer map and a homomorphism;
//! * [`jsonio`] — the JSON file formats binding everything to the CLI.
//!
//! All computations are exact: integers, hash/tree maps, and finite
//! enumerations with explicit caps. Reports either carry machine-checkable
//! certificates or say plainly that they are finite-radius evidence.

pub mod cocycle;
pub mod coeff;
pub mod group;
pub mod jsonio;
pub mod par;
pub mod shift;
pub mod topology;
