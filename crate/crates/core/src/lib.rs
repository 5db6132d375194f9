//! Exact-arithmetic machinery for the multistochastic (n,k)-Kantorovich
//! transport problem on discrete grids.
//!
//! Everything in this crate computes with exact rationals: XOR (Nim-addition)
//! transport plans and their fractal supports, the recurrence-defined dual
//! potential and its integral representation, and a certified rational
//! simplex for the marginal-constrained linear programs. No floating point
//! appears anywhere; every identity is checked with exact equality.
//!
//! The numeric kernels ([`tensor`], [`linalg`], [`simplex`]) are generic over
//! any exact ordered scalar implementing [`Scalar`]; the rest of the crate
//! instantiates them with the arbitrary-precision [`Rational`].

pub mod checks;
pub mod dyadic;
pub mod error;
pub mod fractal;
pub mod integral;
pub mod linalg;
pub mod lp;
pub mod measure;
pub mod monotone;
pub mod potential;
pub mod rational;
pub mod simplex;
pub mod tensor;

pub use error::{Error, Result};

/// The concrete scalar used throughout the artifact: an arbitrary-precision
/// signed fraction, always stored in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

/// Exact ordered scalar bound for the generic numeric kernels.
///
/// Satisfied by [`Rational`] and by any other exact totally ordered field
/// type from the `num` ecosystem. Floating-point types do not qualify: they
/// are not `Ord` and exact-equality certificates would be meaningless.
pub trait Scalar:
    Clone + Ord + std::fmt::Debug + num_traits::Num + num_traits::Signed
{
}

impl<T> Scalar for T where
    T: Clone + Ord + std::fmt::Debug + num_traits::Num + num_traits::Signed
{
}

pub use dyadic::{nim_add_int, nim_add_unit, to_common_level, Dyadic};
pub use lp::{LpModel, LpSolution, LpStatus, MarginalSpec, Sense};
pub use measure::{CostRule, GridMeasure3, PlanKind};
pub use potential::PotentialTable;
pub use tensor::Tensor;
