//! General fractional calculus on `[0, T]`.
//!
//! The crate builds integral and differential operators of arbitrary
//! positive integer order `n` from a *Sonine pair* of kernels
//! `(kappa, k)`: two locally integrable functions whose Laplace
//! convolution reproduces the monomial kernel of `n`-fold integration,
//!
//! ```text
//! (kappa * k)(t) = t^(n-1) / (n-1)!
//! ```
//!
//! With such a pair,
//!
//! * `I f = kappa * f` is a generalized fractional integral,
//! * `D f = d^n/dt^n (k * f)` is its left inverse of
//!   Riemann-Liouville type, and
//! * the regularized (Caputo-type) derivative subtracts the Taylor
//!   polynomial of `f` at `0` before applying `D`.
//!
//! Kernel constructors, the weakly singular convolution quadrature, the
//! operators themselves, and residual checks that certify the two
//! fundamental theorems numerically live in the modules below.
//!
//! The heavy per-node quadrature loops run on rayon when the `parallel`
//! feature (on by default) is enabled; disabling it yields a purely
//! sequential build with bitwise-identical results, because every
//! node's inner summation order is fixed.

pub mod convolution;
mod error;
pub mod exec;
pub mod kernels;
pub mod operators;
pub mod specfun;
pub mod verify;

pub use convolution::{Grid, LaplaceValue, SampledResult};
pub use error::Error;
pub use kernels::{standard_pairs, Kernel, KernelFamily, KernelPair};
pub use operators::{
    classical_derivative, gfd_caputo, gfd_rl, gfi, rl_integral, DerivativeFlavor, FunctionSpec,
    OperatorKind, OperatorRequest,
};
pub use verify::{
    check_ftc1, check_ftc2, check_index_law, check_laplace_condition, check_pair_condition,
    convergence_study, default_tolerance, CheckKind, ConvergenceStudy, ResidualReport,
    StudyTarget,
};
