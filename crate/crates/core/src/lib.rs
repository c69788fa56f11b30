//! Constructive resolution of singularities for basic objects over the
//! rationals, computed chart by chart.

pub mod charts;
pub mod contact;
pub mod delta;
pub mod driver;
pub mod error;
pub mod ideal;
pub mod invariants;
pub mod monomial;
pub mod poly;
pub mod trace;
pub mod transforms;

pub use error::{ParseError, PolyError, ResolveError};
pub use ideal::{GroebnerBasis, Ideal};
pub use poly::{Monomial, Polynomial, Rational, RingMap, VariableContext};
