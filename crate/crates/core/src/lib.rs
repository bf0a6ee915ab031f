//! Spectral analysis of two-dimensional magnetic Schrödinger operators with a
//! periodic magnetic field, reduced onto perturbed Landau levels.
//!
//! The pipeline runs field -> gauge ([`field`]) -> Hermite matrix elements
//! ([`elements`]) -> fiber operators ([`fiber`]) -> iterative
//! block-diagonalization ([`reduction`]) -> effective difference operators and
//! band sweeps ([`effective`]) -> generalized eigenfunctions
//! ([`eigenfunctions`]).

pub mod effective;
pub mod eigenfunctions;
pub mod elements;
pub mod error;
pub mod fiber;
pub mod field;
pub mod fourier;
pub mod hermite;
pub mod linalg;
pub mod reduction;
pub mod stats;

pub use effective::{
    band_measure, extract_effective, morse_check, reduce_family, sweep, EffectiveOperator, SpectrumSweep,
    SweepConfig, SweepMethod,
};
pub use eigenfunctions::{decay_report, reconstruct, EigenfunctionField};
pub use elements::{MatrixElementTable, TableOptions};
pub use error::{Error, Result};
pub use fiber::{assemble, dense_spectrum, FiberOperator};
pub use field::{check_diophantine, decompose, FieldSpec, GaugeData, PeriodicField};
pub use fourier::{Fourier1, Fourier2};
pub use num_complex::Complex64;
pub use reduction::{reduce, ReductionOptions, ReductionState};
