//! Numerical toolkit for the Glassey-Strauss field representation of the
//! relativistic Vlasov-Maxwell system.
//!
//! The crate evaluates the representation kernels, the tangential fields
//! `E_T`/`B_T` and their scalar majorant `u` by backward-light-cone
//! quadrature, computes the Fourier transform of `u` through the
//! sphere-to-Bessel reduction, splits it into Littlewood-Paley and
//! triple-dyadic blocks, and checks every inequality of the
//! `L^{2+δ}` regularity argument on prescribed phase-space densities.
//!
//! Module map:
//!
//! - [`kinematics`]: momentum/velocity map and the kernels `K_{E,T}`, `K_{E,S}`,
//!   `K_{E,DT}`, `K_{B,T}`, `K_{B,DT}`.
//! - [`special`]: Bessel `J₀`, Gauss-Legendre and sphere rules, the dyadic
//!   filter bank `φ_j` and the unit-interval partition `ψ_k`.
//! - [`density`]: prescribed densities `f(t,x,p)`, moments and the kinetic
//!   energy functional, grid ingestion.
//! - [`fieldrep`]: light-cone quadrature of `u`, `E_T`, `B_T`, `E_S` and the
//!   data terms.
//! - [`spectral`]: `û`, its blocks and all norm measurements.
//! - [`estimates`]: orchestrated checks producing [`report::EstimateReport`]s.

pub mod density;
pub mod error;
pub mod estimates;
pub mod fieldrep;
pub mod kinematics;
pub mod report;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};

/// Real 3-vector used for positions, momenta, frequencies and field values.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Real 3×3 matrix.
pub type Mat3 = nalgebra::Matrix3<f64>;
/// Complex scalar.
pub type C64 = num_complex::Complex64;
