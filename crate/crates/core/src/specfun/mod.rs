//! Special functions: log-factorials, Wigner 3-j symbols, spherical
//! harmonics (Condon–Shortley phase) and spherical Bessel/Hankel functions.
//!
//! Everything here is pure and reentrant.

mod bessel;
mod factorial;
mod harmonics;
mod wigner;

pub use bessel::{
    spherical_bessel_j, spherical_bessel_j_array, spherical_hankel1, spherical_hankel1_array,
    SERIES_SWITCH,
};
pub use factorial::{ln_factorial, ln_gamma, recip_gamma};
pub use harmonics::{harmonic_index, spherical_harmonic, spherical_harmonics_upto, AngularIndex};
pub use wigner::{wigner3j, wigner3j_unchecked};
