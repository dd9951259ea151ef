//! Numerical toolkit for rearrangement-invariant function spaces.
//!
//! Fields live on periodic boxes ([`grid`]), are reduced to one-dimensional
//! decreasing profiles ([`rearrange`]) and measured in Lebesgue, Lorentz,
//! Lorentz-Zygmund, Orlicz and Orlicz-Lorentz norms ([`spaces`], [`young`]).
//! The [`operators`] module provides Riesz potentials, Hardy operators, the
//! Helmholtz projection and the co-canceling symbol test; [`interpolation`]
//! computes K-functionals and Calderon-Zygmund splittings, and [`verify`]
//! runs inequality sweeps and reports trends.

pub mod error;
pub mod grid;
pub mod interpolation;
pub mod operators;
pub mod quad;
pub mod rearrange;
pub mod spaces;
pub mod verify;
pub mod young;

pub use error::{Error, Result};
pub use grid::{FieldDescriptor, GriddedField, Mollifier, TensorIndexSet};
pub use interpolation::{CZDecomposition, Couple, KQuery};
pub use operators::{RieszKernelSpec, SymbolMap};
pub use rearrange::{PowerLog, Profile};
pub use spaces::{Family, SpaceSpec};
pub use verify::{InequalityReport, Trend};
pub use young::YoungFunction;
