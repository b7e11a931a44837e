//! Partial-wave series for the integrated squared Born amplitudes.
//!
//! For a list of terms `t` with amplitudes `w_t` and unit-amplitude radial
//! overlaps `ρ_t`, every sum of the form `Σ |Σ_t w_t φ_t ρ_t G̃_t|²` over
//! `(l, m, l', m')` equals `Σ_{tt'} W_{tt'} M_{tt'}` with `W = (wφ)(wφ)†` and
//! the coupling matrix `M_{tt'} = Σ ρ_t G̃_t conj(ρ_t' G̃_t')`. `M` does not
//! depend on ω, and for cutoff-free terms its k dependence is a pure power,
//! so one table serves rotation angles, wavenumbers and orientation averages
//! (where `W` becomes a covariance).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{r_closed, r_exact, r_numeric, rotation_factor};
use crate::constants::HBAR;
use crate::potential::MultipoleTerm;
use crate::specfun::{spherical_harmonics_upto, wigner3j_unchecked, harmonic_index};
use crate::{Error, Result};

/// How radial overlaps are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialModel {
    /// Gamma-function closed form; quadrature for terms with a cutoff.
    Exact,
    /// Quadrature for every overlap.
    Numeric,
    /// The published dipole/quadrupole closed forms.
    Published,
}

impl std::str::FromStr for RadialModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(RadialModel::Exact),
            "numeric" => Ok(RadialModel::Numeric),
            "published" => Ok(RadialModel::Published),
            other => Err(Error::invalid(format!("unknown radial model '{other}'"))),
        }
    }
}

impl RadialModel {
    pub fn name(self) -> &'static str {
        match self {
            RadialModel::Exact => "exact",
            RadialModel::Numeric => "numeric",
            RadialModel::Published => "published",
        }
    }
}

/// Truncation and accuracy controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// Largest `l` the series may be extended to.
    pub l_max: u32,
    /// First checkpoint; later ones double.
    pub l_start: u32,
    /// Relative tolerance on the extrapolated tail.
    pub tail_tol: f64,
    pub radial: RadialModel,
    /// Relative tolerance of radial quadratures.
    pub quad_tol: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            l_max: 2048,
            l_start: 8,
            tail_tol: 1e-6,
            radial: RadialModel::Exact,
            quad_tol: 1e-10,
        }
    }
}

impl SeriesOptions {
    pub fn validate(&self) -> Result<()> {
        if self.l_max < 1 {
            return Err(Error::invalid("l_max must be at least 1"));
        }
        if self.l_start < 1 {
            return Err(Error::invalid("l_start must be at least 1"));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::invalid(format!("tail_tol = {} must be positive", self.tail_tol)));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::invalid(format!("quad_tol = {} must be positive", self.quad_tol)));
        }
        Ok(())
    }
}

/// A converged (or exactly zero) series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub l_max_used: u32,
    /// Extrapolated tail relative to `value`.
    pub tail_estimate: f64,
}

impl SeriesValue {
    pub(crate) fn zero() -> Self {
        SeriesValue {
            value: 0.0,
            l_max_used: 0,
            tail_estimate: 0.0,
        }
    }

    pub(crate) fn scaled(self, factor: f64) -> Self {
        SeriesValue {
            value: self.value * factor,
            ..self
        }
    }
}

/// Coupling matrix accumulated shell by shell in `l`.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    channels: Vec<MultipoleTerm>,
    k: f64,
    radial: RadialModel,
    quad_tol: f64,
    max_l_pp: i32,
    shells: Vec<Vec<Complex64>>,
}

impl CouplingTable {
    /// Table for the given terms (amplitudes are ignored) at wavenumber `k`.
    pub fn new(terms: &[MultipoleTerm], k: f64, radial: RadialModel, quad_tol: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("wavenumber k = {k} must be positive")));
        }
        let channels: Vec<MultipoleTerm> = terms
            .iter()
            .map(|t| t.with_amplitude(Complex64::new(1.0, 0.0)))
            .collect();
        if radial == RadialModel::Published {
            for t in &channels {
                let ok = !t.has_cutoff()
                    && ((t.l_pp() == 1 && t.exponent() == 3.0) || (t.l_pp() == 2 && t.exponent() == 4.0));
                if !ok {
                    return Err(Error::invalid(
                        "published radial closed forms exist only for cutoff-free l''=1, p=3 and l''=2, p=4 terms",
                    ));
                }
            }
        }
        let max_l_pp = channels.iter().map(|t| t.l_pp()).max().unwrap_or(0);
        Ok(CouplingTable {
            channels,
            k,
            radial,
            quad_tol,
            max_l_pp,
            shells: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    fn radial(&self, t: &MultipoleTerm, l: i32, l_p: i32) -> Result<Complex64> {
        match self.radial {
            RadialModel::Exact if !t.has_cutoff() => r_exact(l, l_p, t, self.k),
            RadialModel::Exact | RadialModel::Numeric => r_numeric(l, l_p, t, self.k, self.quad_tol),
            RadialModel::Published => r_closed(l, l_p - l, t.l_pp(), t.amplitude(), self.k),
        }
    }

    /// Computes shells up to and including `l_max`.
    pub fn extend_to(&mut self, l_max: u32) -> Result<()> {
        let n = self.channels.len();
        while self.shells.len() <= l_max as usize {
            let l = self.shells.len() as i32;
            let mut shell = vec![Complex64::new(0.0, 0.0); n * n];
            let lo = (l - self.max_l_pp).max(0);
            for l_p in lo..=l + self.max_l_pp {
                // per-channel radial overlap and m-independent angular factor
                let mut base: Vec<Option<Complex64>> = vec![None; n];
                for (t, ch) in self.channels.iter().enumerate() {
                    let l_pp = ch.l_pp();
                    if l_p < (l - l_pp).abs() || l_p > l + l_pp || (l + l_p + l_pp) % 2 != 0 {
                        continue;
                    }
                    let w0 = wigner3j_unchecked(l, l_p, l_pp, 0, 0, 0);
                    if w0 == 0.0 {
                        continue;
                    }
                    let norm = (((2 * l + 1) * (2 * l_p + 1) * (2 * l_pp + 1)) as f64 / (4.0 * PI)).sqrt();
                    let rho = self.radial(ch, l, l_p)?;
                    base[t] = Some(rho * ipow(l_p - l) * (norm * w0));
                }
                if base.iter().all(Option::is_none) {
                    continue;
                }
                for m in -l..=l {
                    let mut v = vec![Complex64::new(0.0, 0.0); n];
                    for (t, ch) in self.channels.iter().enumerate() {
                        let Some(b) = base[t] else { continue };
                        let m_p = m + ch.m_pp();
                        if m_p.abs() > l_p {
                            continue;
                        }
                        let w1 = wigner3j_unchecked(l, l_p, ch.l_pp(), m, -m_p, ch.m_pp());
                        let sign = if m_p % 2 == 0 { 1.0 } else { -1.0 };
                        v[t] = b * (sign * w1);
                    }
                    for a in 0..n {
                        if v[a] == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for b in 0..n {
                            // different m'' means a different m' and no interference
                            if self.channels[a].m_pp() != self.channels[b].m_pp() {
                                continue;
                            }
                            shell[a * n + b] += v[a] * v[b].conj();
                        }
                    }
                }
            }
            self.shells.push(shell);
        }
        Ok(())
    }

    /// `Σ_{tt'} W_{tt'} M_{tt'}` restricted to shell `l` (must be computed).
    fn shell_value(&self, l: usize, weights: &[Complex64]) -> f64 {
        self.shells[l]
            .iter()
            .zip(weights)
            .map(|(m, w)| (m * w).re)
            .sum()
    }

    /// Partial sum over `l <= l_max` without any tail treatment.
    pub fn partial_sum(&mut self, weights: &[Complex64], l_max: u32) -> Result<f64> {
        self.check_weights(weights)?;
        self.extend_to(l_max)?;
        Ok((0..=l_max as usize).map(|l| self.shell_value(l, weights)).sum())
    }

    fn check_weights(&self, weights: &[Complex64]) -> Result<()> {
        let n = self.channels.len();
        if weights.len() != n * n {
            return Err(Error::invalid(format!(
                "weight matrix has {} entries, expected {}",
                weights.len(),
                n * n
            )));
        }
        Ok(())
    }

    /// Series sum with geometric truncation and tail extrapolation.
    ///
    /// Checkpoints are `l_start·2^j`. From the last two increments `D1, D2`
    /// the ratio `r = D2/D1` gives a geometric tail `D2·r/(1-r)` (exact for
    /// power-law shells to leading order). The sum is accepted once that tail,
    /// or the change of the extrapolated value between checkpoints, is below
    /// `tail_tol` relative.
    pub fn sum(&mut self, weights: &[Complex64], opts: &SeriesOptions) -> Result<SeriesValue> {
        opts.validate()?;
        self.check_weights(weights)?;
        if self.channels.is_empty() || weights.iter().all(|w| *w == Complex64::new(0.0, 0.0)) {
            return Ok(SeriesValue::zero());
        }
        let mut l = opts.l_start.min(opts.l_max);
        let mut acc = 0.0;
        let mut next_shell = 0usize;
        let mut sums: Vec<f64> = Vec::new();
        let mut prev_extrap: Option<f64> = None;
        let mut last_tail = f64::INFINITY;
        loop {
            self.extend_to(l)?;
            while next_shell <= l as usize {
                acc += self.shell_value(next_shell, weights);
                next_shell += 1;
            }
            sums.push(acc);
            let n = sums.len();
            if n >= 3 {
                let d1 = sums[n - 2] - sums[n - 3];
                let d2 = sums[n - 1] - sums[n - 2];
                if d2 == 0.0 {
                    return Ok(SeriesValue {
                        value: acc,
                        l_max_used: l,
                        tail_estimate: 0.0,
                    });
                }
                let r = d2 / d1;
                if r > 0.0 && r < 1.0 {
                    let tail = d2 * r / (1.0 - r);
                    let extrap = acc + tail;
                    let scale = extrap.abs();
                    last_tail = (tail / extrap).abs();
                    let settled = prev_extrap.is_some_and(|p| (extrap - p).abs() <= opts.tail_tol * scale);
                    if tail.abs() <= opts.tail_tol * scale || settled {
                        return Ok(SeriesValue {
                            value: extrap,
                            l_max_used: l,
                            tail_estimate: last_tail,
                        });
                    }
                    prev_extrap = Some(extrap);
                } else {
                    prev_extrap = None;
                    last_tail = f64::INFINITY;
                }
            }
            if l >= opts.l_max {
                return Err(Error::TailToleranceNotMet {
                    requested: opts.tail_tol,
                    partial_sum: acc,
                    tail_estimate: last_tail,
                    l_max: l,
                });
            }
            l = l.saturating_mul(2).min(opts.l_max);
        }
    }
}

fn ipow(n: i32) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `W = u u†` for a vector `u`.
pub fn outer_weights(u: &[Complex64]) -> Vec<Complex64> {
    let mut w = Vec::with_capacity(u.len() * u.len());
    for a in u {
        for b in u {
            w.push(a * b.conj());
        }
    }
    w
}

fn phased_amplitudes(terms: &[MultipoleTerm], omega: f64) -> Vec<Complex64> {
    terms
        .iter()
        .map(|t| t.amplitude() * rotation_factor(t.m_pp(), omega))
        .collect()
}

/// Terms that can contribute to rotational decoherence (`m'' != 0`).
pub(crate) fn rotating_terms(terms: &[MultipoleTerm]) -> Vec<MultipoleTerm> {
    terms.iter().copied().filter(|t| t.m_pp() != 0).collect()
}

fn check_mass(m_gas: f64) -> Result<()> {
    if m_gas > 0.0 && m_gas.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("gas mass {m_gas} must be positive")))
    }
}

/// `∫dk̂'∫dp̂' |Δf^ω|² = (64π² m²/ħ⁴) Σ |R G(ω)|²`.
pub fn integrated_sq_amplitude(
    terms: &[MultipoleTerm],
    omega: f64,
    k: f64,
    m_gas: f64,
    opts: &SeriesOptions,
) -> Result<SeriesValue> {
    check_mass(m_gas)?;
    let rot = rotating_terms(terms);
    let mut table = CouplingTable::new(&rot, k, opts.radial, opts.quad_tol)?;
    let w = outer_weights(&phased_amplitudes(&rot, omega));
    let s = table.sum(&w, opts)?;
    Ok(s.scaled(64.0 * PI * PI * (m_gas / (HBAR * HBAR)).powi(2)))
}

/// `∫dk̂'∫dp̂' |f|² = (64π² m²/ħ⁴) Σ |R G̃|²`.
pub fn born_sq_amplitude(
    terms: &[MultipoleTerm],
    k: f64,
    m_gas: f64,
    opts: &SeriesOptions,
) -> Result<SeriesValue> {
    check_mass(m_gas)?;
    let mut table = CouplingTable::new(terms, k, opts.radial, opts.quad_tol)?;
    let amps: Vec<Complex64> = terms.iter().map(|t| t.amplitude()).collect();
    let s = table.sum(&outer_weights(&amps), opts)?;
    Ok(s.scaled(64.0 * PI * PI * (m_gas / (HBAR * HBAR)).powi(2)))
}

/// Short-distance translational analogue `(32π² m² k² z²/ħ⁴) Σ |R G̃|²`.
pub fn translational_sq_amplitude(
    terms: &[MultipoleTerm],
    k: f64,
    z: f64,
    m_gas: f64,
    opts: &SeriesOptions,
) -> Result<SeriesValue> {
    if !(z >= 0.0) {
        return Err(Error::invalid(format!("distance z = {z} must be >= 0")));
    }
    if z == 0.0 {
        check_mass(m_gas)?;
        return Ok(SeriesValue::zero());
    }
    Ok(born_sq_amplitude(terms, k, m_gas, opts)?.scaled(0.5 * k * k * z * z))
}

/// Truncated pointwise series for `Δf^ω(k k̂', k p̂')`, summed over `l <= l_max`.
pub fn delta_f_series(
    terms: &[MultipoleTerm],
    k: f64,
    khat: [f64; 2],
    phat: [f64; 2],
    omega: f64,
    m_gas: f64,
    l_max: u32,
    radial: RadialModel,
) -> Result<Complex64> {
    check_mass(m_gas)?;
    let rot = rotating_terms(terms);
    let table = CouplingTable::new(&rot, k, radial, 1e-10)?;
    let l_max = l_max as i32;
    let l_top = l_max + table.max_l_pp;
    let yk = spherical_harmonics_upto(l_top, khat[0], khat[1]);
    let yp = spherical_harmonics_upto(l_top, phat[0], phat[1]);
    let mut acc = Complex64::new(0.0, 0.0);
    for ch in &rot {
        let l_pp = ch.l_pp();
        let unit = ch.with_amplitude(Complex64::new(1.0, 0.0));
        let phase = rotation_factor(ch.m_pp(), omega);
        for l in 0..=l_max {
            for l_p in crate::coefficients::partner_degrees(l, l_pp) {
                let w0 = wigner3j_unchecked(l, l_p, l_pp, 0, 0, 0);
                if w0 == 0.0 {
                    continue;
                }
                let rho = table.radial(&unit, l, l_p)?;
                let norm = (((2 * l + 1) * (2 * l_p + 1) * (2 * l_pp + 1)) as f64 / (4.0 * PI)).sqrt();
                let base = rho * ipow(l_p - l) * (norm * w0) * phase;
                for m in -l..=l {
                    let m_p = m + ch.m_pp();
                    if m_p.abs() > l_p {
                        continue;
                    }
                    let w1 = wigner3j_unchecked(l, l_p, l_pp, m, -m_p, ch.m_pp());
                    if w1 == 0.0 {
                        continue;
                    }
                    let sign = if m_p % 2 == 0 { 1.0 } else { -1.0 };
                    acc += ch.amplitude()
                        * base
                        * (sign * w1)
                        * yk[harmonic_index(l, m)].conj()
                        * yp[harmonic_index(l_p, m_p)];
                }
            }
        }
    }
    Ok(acc * (-8.0 * PI * m_gas / (HBAR * HBAR)))
}
