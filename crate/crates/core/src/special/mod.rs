//! Special functions and fixed numerical rules shared by the field and
//! spectral computations.

pub mod bessel;
pub mod chebyshev;
pub mod filters;
pub mod quadrature;
pub mod sine_integral;

pub use bessel::{bessel_j0, j0, j0_envelope_constant};
pub use filters::{lp_filter, unit_partition, DyadicFilterBank, UnitIntervalPartition};
pub use quadrature::{gauss_legendre, sphere_rule, GaussRule, SphereRule};
pub use sine_integral::sine_integral;
