//! Interaction potentials as finite sums of multipole terms
//! `V(r) = Σ d̃_{l″m″} Y_{l″m″}(r̂) / r^p`, optionally cut off below `r_min`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::MU_0;
use crate::specfun::spherical_harmonic;
use crate::{Error, Result};

/// Angular weights a_{m″} of the dipole preset, m″ = -1, 0, 1.
pub const DIPOLE_WEIGHTS: [f64; 3] = [1.0, -2.0, 1.0];

/// Angular weights a_{m″} of the quadrupole preset, m″ = -2..=2.
pub const QUADRUPOLE_WEIGHTS: [f64; 5] = [1.0, -4.0, 6.0, -4.0, 1.0];

/// One `(l″, m″)` component with radial profile `d̃ / r^p` for `r >= r_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultipoleTerm {
    l_pp: i32,
    m_pp: i32,
    amplitude: Complex64,
    exponent: f64,
    cutoff: f64,
}

impl MultipoleTerm {
    pub fn l_pp(&self) -> i32 {
        self.l_pp
    }

    pub fn m_pp(&self) -> i32 {
        self.m_pp
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Hard inner cutoff in meters, 0 for none.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn has_cutoff(&self) -> bool {
        self.cutoff > 0.0
    }

    /// Same term with a different amplitude.
    pub fn with_amplitude(&self, amplitude: Complex64) -> MultipoleTerm {
        MultipoleTerm { amplitude, ..*self }
    }

    /// Radial profile d(r).
    pub fn radial(&self, r: f64) -> Complex64 {
        if r < self.cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            self.amplitude * r.powf(-self.exponent)
        }
    }
}

/// Validated constructor for a power-law term.
///
/// Without a cutoff the small-r integrability of every radial overlap that
/// the term can feed requires `l″ > p - 3`; spherical (`l″ = 0`) terms are
/// accepted regardless since they never enter the rotational series.
pub fn make_power_law_term(
    l_pp: i32,
    m_pp: i32,
    amplitude: Complex64,
    p: f64,
    r_min: f64,
) -> Result<MultipoleTerm> {
    if l_pp < 0 {
        return Err(Error::invalid(format!("multipole order l'' = {l_pp} is negative")));
    }
    if m_pp.abs() > l_pp {
        return Err(Error::invalid(format!("|m''| = {} exceeds l'' = {l_pp}", m_pp.abs())));
    }
    if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
        return Err(Error::invalid("amplitude is not finite"));
    }
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::invalid(format!(
            "radial exponent p = {p} must exceed 1 for large-r convergence"
        )));
    }
    if !r_min.is_finite() || r_min < 0.0 {
        return Err(Error::invalid(format!("cutoff r_min = {r_min} must be >= 0")));
    }
    if r_min == 0.0 && l_pp >= 1 && (l_pp as f64) <= p - 3.0 {
        return Err(Error::invalid(format!(
            "term (l''={l_pp}, p={p}) without cutoff diverges at small r; give r_min > 0"
        )));
    }
    Ok(MultipoleTerm {
        l_pp,
        m_pp,
        amplitude,
        exponent: p,
        cutoff: r_min,
    })
}

/// A direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub theta: f64,
    pub phi: f64,
}

impl Orientation {
    /// Validates θ ∈ [0, π] and wraps φ into [0, 2π).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid(format!("polar angle {theta} outside [0, pi]")));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("azimuth is not finite"));
        }
        Ok(Orientation {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    pub fn z_axis() -> Self {
        Orientation { theta: 0.0, phi: 0.0 }
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Named potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Dipole,
    Quadrupole,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Dipole => "dipole",
            Preset::Quadrupole => "quadrupole",
        }
    }

    /// Terms for the given couplings and carried orientation.
    pub fn terms(self, c1: f64, c2: f64, orientation: Orientation) -> Result<Vec<MultipoleTerm>> {
        match self {
            Preset::Dipole => dipole_dipole_terms(c1, c2, orientation),
            Preset::Quadrupole => quadrupole_quadrupole_terms(c1, c2, orientation),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dipole" => Ok(Preset::Dipole),
            "quadrupole" => Ok(Preset::Quadrupole),
            other => Err(Error::invalid(format!("unknown preset '{other}'"))),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Magnetic dipole-dipole interaction, orientation `r̂₁` of the system dipole.
///
/// `d̃_{1,m} = (-1)^{m+1} (μ₀/4π) a_m γ₁γ₂ conj(Y_{1m}(r̂₁))`, `p = 3`.
pub fn dipole_dipole_terms(
    gamma1: f64,
    gamma2: f64,
    partner_orientation: Orientation,
) -> Result<Vec<MultipoleTerm>> {
    check_positive("gamma1", gamma1)?;
    check_positive("gamma2", gamma2)?;
    let scale = MU_0 / (4.0 * PI) * gamma1 * gamma2;
    (-1..=1)
        .zip(DIPOLE_WEIGHTS)
        .map(|(m, a)| {
            let y = spherical_harmonic(1, m, partner_orientation.theta, partner_orientation.phi)?;
            let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
            make_power_law_term(1, m, sign * scale * a * y.conj(), 3.0, 0.0)
        })
        .collect()
}

/// Modified quadrupole-quadrupole interaction, orientation `r̂₂` of the
/// environmental molecule.
///
/// `d̃_{2,m} = 4π μ₁μ₂ a_m conj(Y_{2m}(r̂₂))`, `p = 4`.
pub fn quadrupole_quadrupole_terms(
    mu1: f64,
    mu2: f64,
    partner_orientation: Orientation,
) -> Result<Vec<MultipoleTerm>> {
    check_positive("mu1", mu1)?;
    check_positive("mu2", mu2)?;
    let scale = 4.0 * PI * mu1 * mu2;
    (-2..=2)
        .zip(QUADRUPOLE_WEIGHTS)
        .map(|(m, a)| {
            let y = spherical_harmonic(2, m, partner_orientation.theta, partner_orientation.phi)?;
            make_power_law_term(2, m, scale * a * y.conj(), 4.0, 0.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_orientation_keeps_only_m_zero() {
        let d = dipole_dipole_terms(1.0, 1.0, Orientation::z_axis()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d[0].amplitude(), Complex64::new(0.0, 0.0));
        assert_eq!(d[2].amplitude(), Complex64::new(0.0, 0.0));
        // d̃_{1,0} = -(μ₀/4π)(-2) Y_10(ẑ)
        let expect = 2.0 * MU_0 / (4.0 * PI) * (3.0 / (4.0 * PI)).sqrt();
        assert!((d[1].amplitude().re - expect).abs() < 1e-15 * expect);

        let q = quadrupole_quadrupole_terms(1.0, 1.0, Orientation::z_axis()).unwrap();
        assert_eq!(q.len(), 5);
        for t in &q {
            assert!(t.exponent() == 4.0);
            if t.m_pp() != 0 {
                assert_eq!(t.amplitude().norm(), 0.0);
            }
        }
    }

    #[test]
    fn term_validation() {
        let c = Complex64::new(1.0, 0.5);
        assert!(make_power_law_term(0, 0, c, 3.0, 0.0).is_ok());
        assert!(make_power_law_term(1, 2, c, 3.0, 0.0).is_err());
        assert!(make_power_law_term(2, 0, c, 5.0, 0.0).is_err());
        assert!(make_power_law_term(2, 0, c, 5.0, 1e-10).is_ok());
        assert!(make_power_law_term(1, 0, c, 1.0, 0.0).is_err());
        assert!(make_power_law_term(1, 0, c, 3.0, -1.0).is_err());
        assert!(dipole_dipole_terms(0.0, 1.0, Orientation::z_axis()).is_err());
        assert!(quadrupole_quadrupole_terms(1.0, -1.0, Orientation::z_axis()).is_err());
    }

    #[test]
    fn cutoff_zeroes_inner_region() {
        let t = make_power_law_term(2, 1, Complex64::new(2.0, 0.0), 5.0, 0.5).unwrap();
        assert_eq!(t.radial(0.25), Complex64::new(0.0, 0.0));
        assert!((t.radial(1.0).re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn orientation_wraps_azimuth() {
        let o = Orientation::new(1.0, -0.5).unwrap();
        assert!((o.phi - (2.0 * PI - 0.5)).abs() < 1e-15);
        assert!(Orientation::new(4.0, 0.0).is_err());
    }
}
