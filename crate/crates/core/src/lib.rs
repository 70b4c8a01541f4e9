//! Multisecant lines of space curves.
//!
//! Rational curves given by four binary forms and complete intersections of
//! two surfaces in projective 3-space: k-secant enumeration by homotopy
//! continuation, secant order, gonality and Clifford index from the secant
//! order, and local dimension estimates for the related incidence varieties.
//!
//! Containers are generic over the scalar field (see [`scalar::Scalar`]). Exact
//! rational and complex double instantiations are aliased below.

pub mod binary_forms;
pub mod ci_curves;
pub mod error;
pub mod gonality;
pub mod line;
pub mod linalg;
pub mod psolve;
pub mod rational_curves;
pub mod scalar;
pub mod secant;
pub mod strata;

pub use error::{Error, Result};
pub use scalar::{FieldKind, Scalar};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Complex double scalar.
pub type C64 = num_complex::Complex64;
/// Real double scalar.
pub type Real = f64;

pub type QForm = binary_forms::BinaryForm<Rational>;
pub type CForm = binary_forms::BinaryForm<C64>;
pub type QPoint = binary_forms::PointP1<Rational>;
pub type CPoint = binary_forms::PointP1<C64>;

pub type CLine = line::LineP3<C64>;
pub type QLine = line::LineP3<Rational>;
