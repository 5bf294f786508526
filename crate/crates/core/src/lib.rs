// SPDX-License-Identifier: Apache-2.0

//! Spectral curves of constant mean curvature and constrained Willmore tori
//! in S³.
//!
//! The crate samples immersed tori on a periodic grid, builds the associated
//! families of flat connections, and reads the spectral data off their
//! holonomy. Surfaces are reconstructed from parallel frames by the
//! Sym–Bobenko formulas and checked with independent curvature oracles.

pub mod algebra;
pub mod family;
pub mod immersions;
pub mod pipeline;
pub mod spectral;
pub mod suite;
pub mod sym;
pub mod tolerances;
pub mod torus;
pub mod transport;
pub mod willmore;

pub use tolerances::Tolerances;

/// Version tag written into every report and data file.
pub const SCHEMA_VERSION: u32 = 1;
