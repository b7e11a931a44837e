//! Angular coefficients `G`, `G̃` and radial overlaps `R`.
//!
//! `R_{l,l'}(k) = ∫ r² j_l(kr) j_{l'}(kr) d(r) dr` is available three ways:
//! [`r_closed`] (the published dipole/quadrupole formulas, kept for table
//! regressions), [`r_exact`] (gamma-function closed form of the spherical
//! Bessel integral for cutoff-free power laws) and [`r_numeric`] (adaptive
//! quadrature, the only option for terms with an inner cutoff).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::potential::MultipoleTerm;
use crate::quad::{integrate, integrate_panels, Tolerance};
use crate::specfun::{
    ln_gamma, recip_gamma, spherical_bessel_j_array, spherical_hankel1_array, wigner3j_unchecked,
};
use crate::{Error, Result};

/// Index tuple `(l, m, l', m', l'', m'')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoeffKey {
    pub l: i32,
    pub m: i32,
    pub l_p: i32,
    pub m_p: i32,
    pub l_pp: i32,
    pub m_pp: i32,
}

impl CoeffKey {
    pub fn new(l: i32, m: i32, l_p: i32, m_p: i32, l_pp: i32, m_pp: i32) -> Self {
        CoeffKey {
            l,
            m,
            l_p,
            m_p,
            l_pp,
            m_pp,
        }
    }

    /// Offset `s = l' - l`.
    pub fn s(&self) -> i32 {
        self.l_p - self.l
    }

    pub fn validate(&self) -> Result<()> {
        for (name, l, m) in [
            ("l", self.l, self.m),
            ("l'", self.l_p, self.m_p),
            ("l''", self.l_pp, self.m_pp),
        ] {
            if l < 0 {
                return Err(Error::invalid(format!("{name} = {l} is negative")));
            }
            if m.abs() > l {
                return Err(Error::invalid(format!("|m| = {} exceeds {name} = {l}", m.abs())));
            }
        }
        Ok(())
    }
}

fn i_pow(n: i32) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `G̃` without validation; zero outside the selection rules.
pub(crate) fn g_tilde(l: i32, m: i32, l_p: i32, m_p: i32, l_pp: i32, m_pp: i32) -> Complex64 {
    if m_p != m + m_pp || (l + l_p + l_pp) % 2 != 0 {
        return Complex64::new(0.0, 0.0);
    }
    let w1 = wigner3j_unchecked(l, l_p, l_pp, m, -m_p, m_pp);
    if w1 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let w0 = wigner3j_unchecked(l, l_p, l_pp, 0, 0, 0);
    let norm = (((2 * l + 1) * (2 * l_p + 1) * (2 * l_pp + 1)) as f64 / (4.0 * PI)).sqrt();
    let sign = if m_p % 2 == 0 { 1.0 } else { -1.0 };
    i_pow(l_p - l) * (sign * norm * w1 * w0)
}

/// Rotation factor `1 - e^{iω(m-m')}` written in terms of `m'' = m' - m`.
pub fn rotation_factor(m_pp: i32, omega: f64) -> Complex64 {
    // 1 - e^{-iφ} = 2i sin(φ/2) e^{-iφ/2}, free of cancellation at small φ
    let half = 0.5 * omega * m_pp as f64;
    Complex64::new(0.0, 2.0 * half.sin()) * Complex64::from_polar(1.0, -half)
}

/// Rotational angular coefficient `G(ω)`.
pub fn g_rotational(key: CoeffKey, omega: f64) -> Result<Complex64> {
    key.validate()?;
    let g = g_tilde(key.l, key.m, key.l_p, key.m_p, key.l_pp, key.m_pp);
    if g == Complex64::new(0.0, 0.0) {
        return Ok(g);
    }
    Ok(rotation_factor(key.m_p - key.m, omega) * g)
}

/// Translational angular coefficient `G̃` (no rotation factor).
pub fn g_translational(key: CoeffKey) -> Result<Complex64> {
    key.validate()?;
    Ok(g_tilde(key.l, key.m, key.l_p, key.m_p, key.l_pp, key.m_pp))
}

/// Degrees `l'` coupled to `l` through an `l''` multipole (triangle and parity rules).
pub fn partner_degrees(l: i32, l_pp: i32) -> impl Iterator<Item = i32> {
    ((l - l_pp).abs()..=l + l_pp).step_by(2)
}

/// Every key with `l <= l_max` allowed by the selection rules for a given `(l'', m'')`.
pub fn nonvanishing_keys(l_max: i32, l_pp: i32, m_pp: i32) -> Vec<CoeffKey> {
    let mut out = Vec::new();
    for l in 0..=l_max {
        for m in -l..=l {
            let m_p = m + m_pp;
            for l_p in partner_degrees(l, l_pp) {
                if m_p.abs() <= l_p {
                    out.push(CoeffKey::new(l, m, l_p, m_p, l_pp, m_pp));
                }
            }
        }
    }
    out
}

/// Published closed form of `R_{l,l+s}` for the dipole (`l'' = 1`, `p = 3`)
/// and quadrupole (`l'' = 2`, `p = 4`) potentials.
pub fn r_closed(l: i32, s: i32, l_pp: i32, amplitude: Complex64, k: f64) -> Result<Complex64> {
    if l < 0 {
        return Err(Error::invalid(format!("l = {l} is negative")));
    }
    match l_pp {
        1 => {
            if s != 1 && s != -1 {
                return Err(Error::invalid(format!("dipole offset s = {s} not in {{-1, 1}}")));
            }
            if 2 * l + s <= 0 {
                return Err(Error::invalid(format!("dipole closed form needs 2l+s > 0 (l={l}, s={s})")));
            }
            // 2 sin(πs/2)/(πs) = 2/π for s = ±1
            Ok(amplitude * (2.0 / (PI * (2 * l + s) as f64)))
        }
        2 => {
            if !(-2..=2).contains(&s) {
                return Err(Error::invalid(format!("quadrupole offset s = {s} not in -2..=2")));
            }
            if 2 * l + s <= 1 {
                return Err(Error::invalid(format!(
                    "quadrupole closed form needs 2l+s > 1 (l={l}, s={s})"
                )));
            }
            let cos = match s {
                0 => 1.0,
                2 | -2 => -1.0,
                _ => return Ok(Complex64::new(0.0, 0.0)),
            };
            let (lf, sf) = (l as f64, s as f64);
            let den = PI * (1.0 - sf * sf) * (sf * sf + 4.0 * lf * sf + 4.0 * lf * lf - 1.0);
            Ok(amplitude * (4.0 * k * cos / den))
        }
        _ => Err(Error::invalid(format!("no closed form for l'' = {l_pp}"))),
    }
}

fn convergence_check(l: i32, l_p: i32, term: &MultipoleTerm) -> Result<()> {
    if l < 0 || l_p < 0 {
        return Err(Error::invalid(format!("negative degree in R_({l},{l_p})")));
    }
    if !term.has_cutoff() && (l + l_p) as f64 <= term.exponent() - 3.0 {
        return Err(Error::ConvergenceViolation(format!(
            "R_({l},{l_p}) with r^-{} and no cutoff diverges at r -> 0 (needs l+l' > p-3)",
            term.exponent()
        )));
    }
    Ok(())
}

/// `∫₀^∞ x^{2-p} j_l(x) j_{l'}(x) dx` (Weber–Schafheitlin).
pub fn scaled_radial_integral(l: i32, l_p: i32, p: f64) -> f64 {
    let (lf, lpf) = (l as f64, l_p as f64);
    let lambda = p - 1.0;
    let a = 0.5 * (lf + lpf + 3.0 - p);
    let b = 0.5 * (lpf - lf + p);
    let c = 0.5 * (lf + lpf + 1.0 + p);
    let d = 0.5 * (lf - lpf + p);
    let ln_mag = ln_gamma(lambda) - lambda * std::f64::consts::LN_2 + ln_gamma(a) - ln_gamma(c);
    0.5 * PI * ln_mag.exp() * recip_gamma(b) * recip_gamma(d)
}

/// Exact `R_{l,l'}(k)` for a cutoff-free power-law term.
pub fn r_exact(l: i32, l_p: i32, term: &MultipoleTerm, k: f64) -> Result<Complex64> {
    if term.has_cutoff() {
        return Err(Error::invalid("exact radial closed form needs a cutoff-free term"));
    }
    if !(k > 0.0) {
        return Err(Error::invalid(format!("wavenumber k = {k} must be positive")));
    }
    convergence_check(l, l_p, term)?;
    let p = term.exponent();
    Ok(term.amplitude() * (k.powf(p - 3.0) * scaled_radial_integral(l, l_p, p)))
}

/// `R_{l,l'}(k)` by adaptive quadrature in `x = kr`.
///
/// `[k r_min, X]` is integrated on π-wide panels. Beyond `X` the product
/// `j_l j_{l'}` is split as `½Re(h_l h_{l'}) + ½Re(h_l h̄_{l'})` with
/// `h = h^(1)`: the oscillating part goes onto the ray `X + it`, the smooth
/// part is mapped to `[0, 1]` by `u = X/x`.
pub fn r_numeric(
    l: i32,
    l_p: i32,
    term: &MultipoleTerm,
    k: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(Error::invalid(format!("wavenumber k = {k} must be positive")));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::invalid(format!("rel_tol = {rel_tol} must be positive")));
    }
    convergence_check(l, l_p, term)?;
    let p = term.exponent();
    let lmax = l.max(l_p) as u32;
    let (lu, lpu) = (l as usize, l_p as usize);
    let x_min = k * term.cutoff();
    let x_split = x_min.max(1.5 * (lmax as f64 + 1.0) + 10.0);
    let piece_tol = Tolerance {
        abs: 0.0,
        rel: 0.1 * rel_tol,
        max_segments: 5000,
    };

    let mut breaks = vec![x_min];
    let mut x = (x_min / PI).floor() * PI + PI;
    while x < x_split {
        breaks.push(x);
        x += PI;
    }
    if x_split > x_min {
        breaks.push(x_split);
    }
    let near = integrate_panels(
        |x| {
            let j = spherical_bessel_j_array(lmax, x);
            Complex64::new(x.powf(2.0 - p) * j[lu] * j[lpu], 0.0)
        },
        &breaks,
        piece_tol,
    )?;

    let scale = near.value.norm().max(x_split.powf(1.0 - p));
    let tail_tol = Tolerance {
        abs: 0.05 * rel_tol * scale,
        ..piece_tol
    };
    let i = Complex64::new(0.0, 1.0);
    let oscillating = integrate(
        |t| {
            let z = Complex64::new(x_split, t);
            let h = spherical_hankel1_array(lmax, z);
            i * z.powf(2.0 - p) * h[lu] * h[lpu]
        },
        0.0,
        30.0,
        tail_tol,
    )?;
    let smooth = integrate(
        |u| {
            if u == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let x = x_split / u;
            let h = spherical_hankel1_array(lmax, Complex64::new(x, 0.0));
            let v = (h[lu] * h[lpu].conj()).re * x.powf(2.0 - p) * x_split / (u * u);
            Complex64::new(v, 0.0)
        },
        0.0,
        1.0,
        tail_tol,
    )?;

    let value = near.value.re + 0.5 * oscillating.value.re + 0.5 * smooth.value.re;
    let error = near.error + 0.5 * (oscillating.error + smooth.error);
    if error > rel_tol * value.abs() && error > 1e-300 {
        return Err(Error::ToleranceNotReached {
            requested: rel_tol,
            value,
            error,
        });
    }
    Ok(term.amplitude() * (k.powf(p - 3.0) * value))
}
