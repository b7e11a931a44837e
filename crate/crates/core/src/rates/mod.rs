//! Decoherence rates: series sums, orientation and thermal averages,
//! closed-form dipole/quadrupole rates.

mod series;
mod thermal;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::coefficients::rotation_factor;
use crate::constants::{HBAR, K_B, MU_0};
use crate::potential::{MultipoleTerm, Orientation, Preset};
use crate::quad::GaussLegendre;
use crate::{Error, Result};

pub use series::{
    born_sq_amplitude, delta_f_series, integrated_sq_amplitude, outer_weights,
    translational_sq_amplitude, CouplingTable, RadialModel, SeriesOptions, SeriesValue,
};
pub use thermal::{maxwell_boltzmann_density, thermal_average, thermal_moment, Environment};

use series::rotating_terms;

/// The two superposition kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Superposition {
    /// Rotation by `omega` radians about the z axis.
    Rotational { omega: f64 },
    /// Displacement by `z` meters.
    Translational { z: f64 },
}

/// What produces the interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RateSource {
    /// A named potential with its two couplings (γ₁, γ₂ or μ₁, μ₂),
    /// averaged over the orientation it carries.
    Preset {
        preset: Preset,
        coupling1: f64,
        coupling2: f64,
    },
    /// Explicit terms at fixed orientation.
    Terms(Vec<MultipoleTerm>),
}

impl RateSource {
    pub fn preset(preset: Preset, coupling1: f64, coupling2: f64) -> Result<Self> {
        for (name, c) in [("coupling1", coupling1), ("coupling2", coupling2)] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {c}")));
            }
        }
        Ok(RateSource::Preset {
            preset,
            coupling1,
            coupling2,
        })
    }

    fn describe(&self) -> String {
        match self {
            RateSource::Preset {
                preset,
                coupling1,
                coupling2,
            } => format!("{preset}({coupling1:e}, {coupling2:e})"),
            RateSource::Terms(t) => format!("terms[{}]", t.len()),
        }
    }
}

/// Echo of the inputs a rate was computed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub source: String,
    pub environment: Environment,
    pub superposition: Superposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Decoherence rate [1/s].
    pub lambda: f64,
    pub l_max_used: u32,
    /// Relative series tail.
    pub tail_estimate: f64,
    pub inputs: RateInputs,
    pub warning: Option<String>,
}

/// Dimensionless constants of the dipole and quadrupole closed forms,
/// obtained from orientation-averaged series sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConstants {
    /// Dipole rotational series constant.
    pub sigma: f64,
    pub alpha: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta_t: f64,
    pub l_max_used: u32,
    pub tail_estimate: f64,
}

const COVARIANCE_NODES: usize = 8;

/// `⟨d̃_t conj(d̃_t')⟩` over the orientation carried by the preset, unit
/// couplings, row-major in preset term order.
pub fn orientation_covariance(preset: Preset) -> Result<Vec<Complex64>> {
    let n = COVARIANCE_NODES;
    let rule = GaussLegendre::cached(n);
    let n_phi = 2 * n;
    let mut acc: Option<Vec<Complex64>> = None;
    for (&c, &w) in rule.nodes.iter().zip(&rule.weights) {
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            let o = Orientation::new(c.acos(), phi)?;
            let amps: Vec<Complex64> = preset.terms(1.0, 1.0, o)?.iter().map(|t| t.amplitude()).collect();
            let outer = outer_weights(&amps);
            let weight = w * (2.0 * PI / n_phi as f64) / (4.0 * PI);
            match acc.as_mut() {
                None => acc = Some(outer.iter().map(|x| x * weight).collect()),
                Some(a) => a.iter_mut().zip(&outer).for_each(|(a, x)| *a += x * weight),
            }
        }
    }
    Ok(acc.expect("non-empty quadrature"))
}

fn sub_matrix(full: &[Complex64], n: usize, keep: &[usize]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(keep.len() * keep.len());
    for &a in keep {
        for &b in keep {
            out.push(full[a * n + b]);
        }
    }
    out
}

fn phase_weights(cov: &[Complex64], terms: &[MultipoleTerm], omega: f64) -> Vec<Complex64> {
    let phases: Vec<Complex64> = terms.iter().map(|t| rotation_factor(t.m_pp(), omega)).collect();
    let n = terms.len();
    let mut w = cov.to_vec();
    for a in 0..n {
        for b in 0..n {
            w[a * n + b] *= phases[a] * phases[b].conj();
        }
    }
    w
}

/// Orientation-averaged tables for one preset at `k = 1`, unit couplings.
struct PresetTables {
    rot_terms: Vec<MultipoleTerm>,
    rot_cov: Vec<Complex64>,
    rot: CouplingTable,
    all_cov: Vec<Complex64>,
    all: CouplingTable,
}

impl PresetTables {
    fn new(preset: Preset, opts: &SeriesOptions) -> Result<Self> {
        let terms = preset.terms(1.0, 1.0, Orientation::z_axis())?;
        let cov = orientation_covariance(preset)?;
        let keep: Vec<usize> = (0..terms.len()).filter(|&i| terms[i].m_pp() != 0).collect();
        let rot_terms: Vec<MultipoleTerm> = keep.iter().map(|&i| terms[i]).collect();
        Ok(PresetTables {
            rot_cov: sub_matrix(&cov, terms.len(), &keep),
            rot: CouplingTable::new(&rot_terms, 1.0, opts.radial, opts.quad_tol)?,
            rot_terms,
            all: CouplingTable::new(&terms, 1.0, opts.radial, opts.quad_tol)?,
            all_cov: cov,
        })
    }

    /// `⟨Σ|R G(ω)|²⟩` at k = 1.
    fn rotational(&mut self, omega: f64, opts: &SeriesOptions) -> Result<SeriesValue> {
        let w = phase_weights(&self.rot_cov, &self.rot_terms, omega);
        self.rot.sum(&w, opts)
    }

    /// `⟨Σ|R G̃|²⟩` at k = 1.
    fn translational(&mut self, opts: &SeriesOptions) -> Result<SeriesValue> {
        self.all.sum(&self.all_cov, opts)
    }
}

fn merge(acc: &mut (u32, f64), s: &SeriesValue) {
    acc.0 = acc.0.max(s.l_max_used);
    acc.1 = acc.1.max(s.tail_estimate);
}

/// The dipole rotational series constant Σ alone, from unit `d̃_{1,±1}` at ω = π.
pub fn sigma_constant(opts: &SeriesOptions) -> Result<SeriesValue> {
    opts.validate()?;
    let unit: Vec<MultipoleTerm> = [-1, 1]
        .iter()
        .map(|&m| crate::potential::make_power_law_term(1, m, Complex64::new(1.0, 0.0), 3.0, 0.0))
        .collect::<Result<_>>()?;
    let mut unit_table = CouplingTable::new(&unit, 1.0, opts.radial, opts.quad_tol)?;
    let phases: Vec<Complex64> = unit.iter().map(|t| rotation_factor(t.m_pp(), PI)).collect();
    Ok(unit_table.sum(&outer_weights(&phases), opts)?.scaled(PI.powi(3) / 24.0))
}

/// Computes the constants from scratch.
pub fn compute_engine_constants(opts: &SeriesOptions) -> Result<EngineConstants> {
    opts.validate()?;
    let mut meta = (0u32, 0.0f64);

    let s_sigma = sigma_constant(opts)?;
    merge(&mut meta, &s_sigma);
    let sigma = s_sigma.value;

    let mut dip = PresetTables::new(Preset::Dipole, opts)?;
    let s_pi = dip.rotational(PI, opts)?;
    let t_dip = dip.translational(opts)?;
    merge(&mut meta, &s_pi);
    merge(&mut meta, &t_dip);
    let alpha = MU_0 * MU_0 / (64.0 * PI * PI * s_pi.value);
    let alpha1 = MU_0 * MU_0 / (32.0 * PI * PI * t_dip.value);

    let mut quad = PresetTables::new(Preset::Quadrupole, opts)?;
    let q_pi = quad.rotational(PI, opts)?;
    let q_half = quad.rotational(0.5 * PI, opts)?;
    let t_quad = quad.translational(opts)?;
    for s in [&q_pi, &q_half, &t_quad] {
        merge(&mut meta, s);
    }
    let beta1 = 64.0 * PI * PI * q_pi.value;
    let beta2 = 64.0 * PI * PI * q_half.value - 0.5 * beta1;
    let beta_t = 32.0 * PI * PI * t_quad.value * 12.0 * 2f64.sqrt() / PI.powf(1.5);

    Ok(EngineConstants {
        sigma,
        alpha,
        alpha1,
        beta1,
        beta2,
        beta_t,
        l_max_used: meta.0,
        tail_estimate: meta.1,
    })
}

type OptionsKey = (u32, u32, u64, RadialModel, u64);

static CONSTANTS: Lazy<Mutex<HashMap<OptionsKey, EngineConstants>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Memoised [`compute_engine_constants`]; safe to call from many threads.
pub fn engine_constants(opts: &SeriesOptions) -> Result<EngineConstants> {
    let key = (
        opts.l_max,
        opts.l_start,
        opts.tail_tol.to_bits(),
        opts.radial,
        opts.quad_tol.to_bits(),
    );
    if let Some(c) = CONSTANTS.lock().expect("constants cache poisoned").get(&key) {
        return Ok(*c);
    }
    let c = compute_engine_constants(opts)?;
    CONSTANTS.lock().expect("constants cache poisoned").insert(key, c);
    Ok(c)
}

fn sin2(x: f64) -> f64 {
    let s = x.sin();
    s * s
}

/// Orientation-averaged `∫∫|Δf^ω|²` from the closed forms and engine constants.
pub fn orientation_averaged_amplitude(
    preset: Preset,
    omega: f64,
    k: f64,
    m_gas: f64,
    coupling1: f64,
    coupling2: f64,
    opts: &SeriesOptions,
) -> Result<f64> {
    let c = engine_constants(opts)?;
    let mm = (m_gas / (HBAR * HBAR)).powi(2);
    let cc = (coupling1 * coupling2).powi(2);
    Ok(match preset {
        Preset::Dipole => mm * MU_0 * MU_0 * cc / c.alpha * sin2(0.5 * omega),
        Preset::Quadrupole => mm * cc * k * k * (c.beta1 * sin2(0.5 * omega) + c.beta2 * sin2(omega)),
    })
}

/// Orientation-averaged `∫∫|Δf^ω|²` summed directly from the series.
pub fn orientation_averaged_series(
    preset: Preset,
    omega: f64,
    k: f64,
    m_gas: f64,
    coupling1: f64,
    coupling2: f64,
    opts: &SeriesOptions,
) -> Result<SeriesValue> {
    let mut tables = PresetTables::new(preset, opts)?;
    let s = tables.rotational(omega, opts)?;
    let p = match preset {
        Preset::Dipole => 3.0,
        Preset::Quadrupole => 4.0,
    };
    let factor = 64.0 * PI * PI * (m_gas / (HBAR * HBAR)).powi(2) * (coupling1 * coupling2).powi(2) * k.powf(2.0 * (p - 3.0));
    Ok(s.scaled(factor))
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("rotation angle is not finite"))
    }
}

fn check_z(z: f64) -> Result<()> {
    if z >= 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("distance z = {z} must be >= 0")))
    }
}

// The closed forms below are regrouped into factors of moderate magnitude
// ((c m/ħ²)², σ² = m k_B T/ħ², √(k_B T/m)) so that the SI products do not
// pass through the subnormal range.

fn coupling_scale(c: f64, m: f64) -> f64 {
    (c * m / (HBAR * HBAR)).powi(2)
}

fn thermal_speed(env: &Environment) -> f64 {
    (K_B * env.temperature / env.gas_mass).sqrt()
}

/// Dipole `Λ_R` closed form.
pub fn lambda_rotational_dipole(c: &EngineConstants, gamma1: f64, gamma2: f64, env: &Environment, omega: f64) -> f64 {
    coupling_scale(MU_0 * gamma1 * gamma2, env.gas_mass) * env.density * thermal_speed(env) * sin2(0.5 * omega)
        / ((2.0 * PI).powf(1.5) * c.alpha)
}

/// Quadrupole `Λ_R` closed form.
pub fn lambda_rotational_quadrupole(c: &EngineConstants, mu1: f64, mu2: f64, env: &Environment, omega: f64) -> f64 {
    2f64.sqrt() / PI.powf(1.5)
        * coupling_scale(mu1 * mu2, env.gas_mass)
        * env.k_variance()
        * thermal_speed(env)
        * env.density
        * (c.beta1 * sin2(0.5 * omega) + c.beta2 * sin2(omega))
}

/// Dipole `Λ_T` closed form (short-distance limit).
pub fn lambda_translational_dipole(c: &EngineConstants, gamma1: f64, gamma2: f64, env: &Environment, z: f64) -> f64 {
    (2.0 / PI).powf(1.5) / c.alpha1
        * coupling_scale(MU_0 * gamma1 * gamma2, env.gas_mass)
        * (env.k_variance() * z * z)
        * thermal_speed(env)
        * env.density
}

/// Quadrupole `Λ_T` closed form (short-distance limit).
pub fn lambda_translational_quadrupole(c: &EngineConstants, mu1: f64, mu2: f64, env: &Environment, z: f64) -> f64 {
    let s2 = env.k_variance();
    c.beta_t * coupling_scale(mu1 * mu2, env.gas_mass) * (s2 * z * z) * s2 * thermal_speed(env) * env.density
}

fn inputs(source: &RateSource, env: &Environment, superposition: Superposition) -> RateInputs {
    RateInputs {
        source: source.describe(),
        environment: *env,
        superposition,
    }
}

/// Rotational decoherence rate.
///
/// Presets use the closed forms with the engine constants; explicit terms
/// go through the series and the thermal quadrature.
pub fn lambda_rotational(source: &RateSource, env: &Environment, omega: f64, opts: &SeriesOptions) -> Result<RateReport> {
    check_omega(omega)?;
    let (lambda, l_max_used, tail_estimate) = match source {
        RateSource::Preset {
            preset,
            coupling1,
            coupling2,
        } => {
            let c = engine_constants(opts)?;
            let l = match preset {
                Preset::Dipole => lambda_rotational_dipole(&c, *coupling1, *coupling2, env, omega),
                Preset::Quadrupole => lambda_rotational_quadrupole(&c, *coupling1, *coupling2, env, omega),
            };
            (l, c.l_max_used, c.tail_estimate)
        }
        RateSource::Terms(terms) => {
            let s = generic_rate(terms, env, Branch::Rotational(omega), opts)?;
            (s.value, s.l_max_used, s.tail_estimate)
        }
    };
    Ok(RateReport {
        lambda: lambda.max(0.0),
        l_max_used,
        tail_estimate,
        inputs: inputs(source, env, Superposition::Rotational { omega }),
        warning: None,
    })
}

/// Translational decoherence rate in the short-distance limit.
pub fn lambda_translational(source: &RateSource, env: &Environment, z: f64, opts: &SeriesOptions) -> Result<RateReport> {
    check_z(z)?;
    let (lambda, l_max_used, tail_estimate) = match source {
        RateSource::Preset {
            preset,
            coupling1,
            coupling2,
        } => {
            let c = engine_constants(opts)?;
            let l = match preset {
                Preset::Dipole => lambda_translational_dipole(&c, *coupling1, *coupling2, env, z),
                Preset::Quadrupole => lambda_translational_quadrupole(&c, *coupling1, *coupling2, env, z),
            };
            (l, c.l_max_used, c.tail_estimate)
        }
        RateSource::Terms(terms) => {
            let s = generic_rate(terms, env, Branch::Translational(z), opts)?;
            (s.value, s.l_max_used, s.tail_estimate)
        }
    };
    let kz = env.mean_k() * z;
    let warning = (kz > 0.1).then(|| format!("k_thermal*z = {kz:.3e} exceeds 0.1; short-distance limit not valid"));
    Ok(RateReport {
        lambda: lambda.max(0.0),
        l_max_used,
        tail_estimate,
        inputs: inputs(source, env, Superposition::Translational { z }),
        warning,
    })
}

/// `Λ_R / Λ_T`.
pub fn rate_ratio(source: &RateSource, env: &Environment, omega: f64, z: f64, opts: &SeriesOptions) -> Result<f64> {
    check_omega(omega)?;
    check_z(z)?;
    if z == 0.0 {
        return Err(Error::DivisionDomain("rate ratio at z = 0".into()));
    }
    match source {
        RateSource::Preset { preset, .. } => {
            let c = engine_constants(opts)?;
            let mkt = env.gas_mass * K_B * env.temperature;
            Ok(match preset {
                Preset::Dipole => c.alpha1 / c.alpha * HBAR * HBAR / (8.0 * mkt) * sin2(0.5 * omega) / (z * z),
                Preset::Quadrupole => {
                    2f64.sqrt() * HBAR * HBAR / (PI.powf(1.5) * mkt)
                        * (c.beta1 * sin2(0.5 * omega) + c.beta2 * sin2(omega))
                        / (z * z * c.beta_t)
                }
            })
        }
        RateSource::Terms(_) => {
            let r = lambda_rotational(source, env, omega, opts)?.lambda;
            let t = lambda_translational(source, env, z, opts)?.lambda;
            if t == 0.0 {
                return Err(Error::DivisionDomain("translational rate vanishes".into()));
            }
            Ok(r / t)
        }
    }
}

/// `z √(m k_B T) / ħ`.
pub fn dimensionless_distance(env: &Environment, z: f64) -> f64 {
    z / env.thermal_length()
}

/// `ρ(t) = ρ(0) e^{-Λt}`.
pub fn coherence_decay(rho0: Complex64, lam: f64, t: f64) -> Result<Complex64> {
    if !(lam >= 0.0) || !(t >= 0.0) {
        return Err(Error::invalid(format!("need rate >= 0 and time >= 0, got {lam}, {t}")));
    }
    if lam == 0.0 || t == 0.0 {
        return Ok(rho0);
    }
    Ok(rho0 * (-lam * t).exp())
}

#[derive(Clone, Copy)]
enum Branch {
    Rotational(f64),
    Translational(f64),
}

/// Series + thermal quadrature for explicit terms; returns Λ as `value`.
fn generic_rate(terms: &[MultipoleTerm], env: &Environment, branch: Branch, opts: &SeriesOptions) -> Result<SeriesValue> {
    let (used, amps, prefactor, extra_k): (Vec<MultipoleTerm>, Vec<Complex64>, f64, i32) = match branch {
        Branch::Rotational(omega) => {
            let rot = rotating_terms(terms);
            let amps = rot.iter().map(|t| t.amplitude() * rotation_factor(t.m_pp(), omega)).collect();
            // n (ħ/m) (1/8π) (64π² m²/ħ⁴)
            (rot, amps, env.density * 8.0 * PI * env.gas_mass / HBAR.powi(3), 0)
        }
        Branch::Translational(z) => {
            check_z(z)?;
            if z == 0.0 {
                return Ok(SeriesValue::zero());
            }
            let amps = terms.iter().map(|t| t.amplitude()).collect();
            // n (ħ/m) (1/4π) (32π² m² z²/ħ⁴), with the k² of the short-distance form
            (terms.to_vec(), amps, env.density * 8.0 * PI * env.gas_mass * z * z / HBAR.powi(3), 2)
        }
    };
    let w = outer_weights(&amps);
    if used.is_empty() || w.iter().all(|x| *x == Complex64::new(0.0, 0.0)) {
        return Ok(SeriesValue::zero());
    }
    let n = used.len();
    if used.iter().any(|t| t.has_cutoff()) || opts.radial == RadialModel::Numeric {
        let mut acc = 0.0;
        let mut meta = (0u32, 0.0f64);
        for (k, wk) in thermal::thermal_nodes(env) {
            let mut table = CouplingTable::new(&used, k, opts.radial, opts.quad_tol)?;
            let s = table.sum(&w, opts)?;
            merge(&mut meta, &s);
            acc += wk * k.powi(1 + extra_k) * s.value;
        }
        return Ok(SeriesValue {
            value: prefactor * acc,
            l_max_used: meta.0,
            tail_estimate: meta.1,
        });
    }
    // cutoff-free: M(k) = k^{p_a+p_b-6} M(1), so the thermal average moves into the weights
    let mut weighted = w.clone();
    for a in 0..n {
        for b in 0..n {
            let e = 1.0 + extra_k as f64 + used[a].exponent() + used[b].exponent() - 6.0;
            let kf = thermal_average(env, |k| Ok(k.powf(e)))?;
            weighted[a * n + b] *= kf;
        }
    }
    let mut table = CouplingTable::new(&used, 1.0, opts.radial, opts.quad_tol)?;
    Ok(table.sum(&weighted, opts)?.scaled(prefactor))
}
