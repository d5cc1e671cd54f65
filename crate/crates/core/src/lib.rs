//! Exact-arithmetic toolkit for carpet iterated function systems, the
//! lattices and diagonal flows attached to attractor points, and the
//! S-arithmetic random walks generated by the defining maps. Everything
//! structural is computed over Q; Monte Carlo layers are seeded and
//! reproducible.

pub mod arith;
pub mod dioph;
pub mod ifs;
pub mod latflow;
pub mod qmat;
pub mod report;
pub mod rng;
pub mod sadic;
pub mod shift;

pub use arith::{Place, PlaceValue, Rat};
pub use ifs::{CarpetIfs, Separation};
pub use qmat::QMat;
pub use report::{CsvTable, ExperimentReport};
