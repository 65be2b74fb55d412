//! Precision-agnostic arithmetic and the special functions everything else is
//! built on.

mod dd;
mod quadrature;
mod real;
mod special;
mod stencil;

pub use dd::{DoubleDouble, ParseDoubleDoubleError};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use real::{pow_real, Precision, Real};
pub use special::{binomial, double_factorial, factorial, falling_factorial, legendre_p, rising_factorial};
pub use stencil::{centered_weights, fornberg_weights};
