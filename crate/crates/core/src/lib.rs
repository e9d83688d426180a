//! Numerical laboratory for weighted L² estimates of quadratic exponential
//! sums `f(x,t) = Σ a_n e(nx + n²t)`: fast torus evaluation, superlevel
//! strip statistics, rational incidence counting, the major/minor arc
//! split of the kernel, tube statistics of weights on `B_R`, and the
//! sharpness constructions.

pub mod counterexamples;
pub mod dyadic;
pub mod error;
pub mod expsum;
pub mod incidence;
pub mod io;
pub mod kernel;
pub mod levelsets;
pub mod rationals;
pub mod weights;

pub use error::{Error, Result};
pub use expsum::{CoefficientVector, GridPoint, Preset, TorusField, TorusGrid};
pub use rationals::{FareyLayer, ReducedFraction};
