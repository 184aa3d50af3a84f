//! Computational machinery for relative train-track dynamics of free-group
//! outer automorphisms.
//!
//! The crate is organized around the objects the theory manipulates:
//!
//! * [`words`] — reduced words, conjugacy classes and basis-defined
//!   automorphisms of the free group `F` of rank `n`.
//! * [`stallings`] — folded core graphs for finite-rank subgroups, carrying
//!   tests, fiber products, malnormality and the meet of subgroup systems.
//! * [`markedgraph`] — filtered marked graphs, tightened edge paths and the
//!   translation between paths and words.
//! * [`trainmap`] — topological representatives: transition matrices,
//!   Perron–Frobenius growth rates, strata classification, legality of turns,
//!   bounded cancellation and Nielsen path search.
//! * [`laminations`] — finite approximations of attracting laminations,
//!   attracting neighborhoods, the weak-attraction trichotomy, admissibility
//!   checking and nonattracting systems.
//! * [`electro`] — the electric (coned-off) length relative to a subgroup
//!   system and the relative legality ratio.
//! * [`flaring`] — the empirical flaring harness (conjugacy flaring, hallway
//!   flaring, 3-out-of-4 stretch and friends).
//!
//! All value types are immutable after construction and every analysis is a
//! pure function of its inputs, so the whole API is safe to drive from
//! multiple threads.

pub mod electro;
pub mod flaring;
pub mod formats;
pub mod laminations;
pub mod markedgraph;
pub mod scalar;
pub mod stallings;
pub mod trainmap;
pub mod words;

pub use scalar::Real;

/// Default scalar used by the command-line tool and the shipped reports.
pub type Scalar = f64;

/// Growth rates and derived constants reported by analyses, at the default
/// precision.
pub type GrowthRate = Scalar;
