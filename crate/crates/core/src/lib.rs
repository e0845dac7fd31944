//! Numerical laboratory for decoupling-type experiments on exponential sums.
//!
//! The crate is organized around five subsystems:
//!
//! * [`freqsets`] — generators for frequency point sets: canonical cap grids
//!   on `[0,1]^{d-1}` and their paraboloid lifts, lattice points on spheres
//!   and in thin annuli, moment-curve points, equal-measure surface
//!   partitions and the randomized (Bernoulli-thinned) point selections.
//! * [`expsum`] — evaluation of exponential sums and estimation of their
//!   `L^p` means over balls, boxes and tori, plus log-log exponent fits
//!   across a scan of the scale parameter `R`.
//! * [`partitions`] — exact combinatorics of unordered partitions of
//!   `{1,..,R}` into equal-size cells: counting, enumeration, transversal
//!   families, and averaged moment checks in exact Gaussian-rational
//!   arithmetic.
//! * [`ensembles`] — partitions of the cap grid into large ensembles
//!   (strips, concentric rings, spread sets, random M-sets) and the
//!   decoupling / recoupling ratio measurements built on them.
//! * [`tubes`] — the bush of `(R, R^{1/2}, R^{1/2})`-tubes through the
//!   origin, incidence counting and `L^r` norms of tube sums.
//!
//! All randomness flows from explicit 64-bit seeds through counter-based
//! streams (see [`rng`]), so every result is reproducible bit-for-bit for a
//! fixed seed, independent of thread count.

pub mod ensembles;
pub mod error;
pub mod expsum;
pub mod freqsets;
pub mod partitions;
pub mod rng;
pub mod tubes;

pub use error::{Error, Result};
