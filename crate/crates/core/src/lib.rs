//! Environmental decoherence of rotational (and translational) superpositions.
//!
//! The engine expands the Born scattering amplitude of an interaction potential
//! in spherical harmonics, so that the squared amplitude difference driving
//! decoherence becomes a sum over angular coefficients `G` (two Wigner 3-j
//! symbols and a rotation phase) and radial overlaps `R` (spherical Bessel
//! integrals against the potential's radial profile). Rates follow by
//! averaging over orientation and over a Maxwell–Boltzmann gas.
//!
//! Modules, bottom up:
//!
//! * [`specfun`]: 3-j symbols, spherical harmonics, spherical Bessel functions.
//! * [`potential`]: multipole terms and the dipole/quadrupole presets.
//! * [`coefficients`]: `G`, `G̃` and `R` (published closed forms, exact
//!   closed forms, quadrature).
//! * [`rates`]: series summation, thermal averaging, closed-form rates.
//! * [`oracle`]: an independent brute-force Born/sphere-quadrature path.

pub mod coefficients;
pub mod constants;
mod error;
pub mod oracle;
pub mod potential;
pub mod quad;
pub mod rates;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
