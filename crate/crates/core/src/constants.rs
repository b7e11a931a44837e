//! Physical constants, SI units (CODATA 2018 exact or recommended values).

/// Reduced Planck constant ħ [J s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant k_B [J/K] (exact).
pub const K_B: f64 = 1.380_649e-23;

/// Vacuum magnetic permeability μ₀ [N/A²].
pub const MU_0: f64 = 1.256_637_062_12e-6;
