//! Simulator and benchmark harness for block-partitioned analog matrix
//! computing (BlockAMC): solving `Ax = b` on resistive crossbars by cascading
//! one-step analog inversion (INV) and matrix-vector multiplication (MVM)
//! over the blocks of a partitioned matrix.
//!
//! - [`matgen`]: seeded Wishart, Toeplitz and uniform test systems.
//! - [`mapping`]: normalization, signed split, conductance programming.
//! - [`analog`]: ideal and resistive-network engines for MVM and INV.
//! - [`solver`]: partitioning, Schur complement, one-stage cascade,
//!   multi-stage recursion, tiled MVM and the single-array baseline.
//! - [`cost`]: OPA/DAC/ADC/cell counts, area, power and latency.
//! - [`bench`]: Monte Carlo sweeps, aggregation, CSV/JSON/SVG output.
//! - [`metrics`]: relative error.
//! - [`io`]: matrix and vector CSV files.

pub mod analog;
pub mod bench;
pub mod cost;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mapping;
pub mod matgen;
pub mod metrics;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
