//! Grid arithmetic on distribution functions: discretization, Stieltjes
//! convolution, renewal functions, stochastic-order checks and the
//! Lorden-type bounds.

mod bounds;
mod function;
mod grid;

pub use bounds::{
    backward_tail_bound, generalized_bound, lorden_classical_bound, GeneralizedBound,
};
pub use function::{renewal_function, RenewalDiagnostics, RenewalFunction, DEFAULT_TOL};
pub use grid::{
    convolution_power, convolve, discretize, discretize_allowing_truncation, ordering_check,
    AtomSnap, GridDistribution, OrderingCheck, MAX_TAIL_MASS,
};
