//! Maxwell–Boltzmann wavenumber distribution.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::quad::GaussLegendre;
use crate::specfun::ln_gamma;
use crate::{Error, Result};

/// Thermal gas: number density [1/m³], particle mass [kg], temperature [K].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub density: f64,
    pub gas_mass: f64,
    pub temperature: f64,
}

impl Environment {
    pub fn new(density: f64, gas_mass: f64, temperature: f64) -> Result<Self> {
        for (name, v) in [
            ("density", density),
            ("gas mass", gas_mass),
            ("temperature", temperature),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Environment {
            density,
            gas_mass,
            temperature,
        })
    }

    /// `σ² = m k_B T / ħ²`, the variance of each wavevector component.
    pub fn k_variance(&self) -> f64 {
        self.gas_mass * K_B * self.temperature / (HBAR * HBAR)
    }

    /// Mean wavenumber `⟨k⟩ = M₁`.
    pub fn mean_k(&self) -> f64 {
        thermal_moment(self, 1)
    }

    /// `ħ / sqrt(m k_B T)`, the length unit of dimensionless distances.
    pub fn thermal_length(&self) -> f64 {
        1.0 / self.k_variance().sqrt()
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Environment::new(self.density, self.gas_mass, temperature)
    }
}

/// `ρ(k) = 4π k² μ(k)` for the Maxwell–Boltzmann `μ`.
pub fn maxwell_boltzmann_density(env: &Environment, k: f64) -> f64 {
    if k < 0.0 {
        return 0.0;
    }
    let s2 = env.k_variance();
    (2.0 / PI).sqrt() * k * k / (s2 * s2.sqrt()) * (-0.5 * k * k / s2).exp()
}

/// `M_q = ∫ k^q ρ(k) dk = (2σ²)^{q/2} Γ((q+3)/2) / Γ(3/2)`.
pub fn thermal_moment(env: &Environment, q: u32) -> f64 {
    thermal_moment_real(env, q as f64)
}

pub(crate) fn thermal_moment_real(env: &Environment, q: f64) -> f64 {
    let s2 = env.k_variance();
    (0.5 * q * (2.0 * s2).ln() + ln_gamma(0.5 * (q + 3.0)) - ln_gamma(1.5)).exp()
}

const THERMAL_NODES: usize = 96;

/// `∫ ρ(k) g(k) dk` by Gauss–Legendre on a k-range covering mean ± 8
/// standard deviations of `ρ`; the upper end is taken at +12 so that weights
/// up to k⁵ stay accurate to ~1e-12.
pub fn thermal_average<F>(env: &Environment, mut g: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    for (k, w) in thermal_nodes(env) {
        acc += w * g(k)?;
    }
    Ok(acc)
}

/// Nodes and weights (already multiplied by `ρ`) used by [`thermal_average`].
pub(crate) fn thermal_nodes(env: &Environment) -> Vec<(f64, f64)> {
    let mean = thermal_moment(env, 1);
    let sd = (thermal_moment(env, 2) - mean * mean).max(0.0).sqrt();
    let lo = (mean - 8.0 * sd).max(0.0);
    let hi = mean + 12.0 * sd;
    GaussLegendre::cached(THERMAL_NODES)
        .mapped(lo, hi)
        .map(|(k, w)| (k, w * maxwell_boltzmann_density(env, k)))
        .collect()
}
