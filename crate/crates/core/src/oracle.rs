//! Brute-force reference path: Born amplitudes by direct integration,
//! double-sphere product quadrature of `|Δf^ω|²`, and Monte Carlo
//! orientation averages.
//!
//! Nothing here uses Bessel functions, 3-j symbols or the coefficient
//! module. The Born integral `∫d³r V(r) e^{-iq·r}` is done in a frame whose
//! polar axis is `q̂`: the azimuthal average of the potential's angular
//! factor is projected onto Legendre polynomials (both by exact quadrature),
//! and the remaining two-dimensional kernel
//! `K_n = ∫ dx x^{2-p} ∫ dc P_n(c) e^{-ixc}` is integrated numerically and
//! memoised per `(n, p)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::potential::{MultipoleTerm, Orientation};
use crate::quad::{integrate_panels, GaussLegendre, Tolerance};
use crate::specfun::{harmonic_index, spherical_harmonics_upto};
use crate::{Error, Result};

const KERNEL_TOL: f64 = 1e-11;
const MAX_KERNEL_PANELS: usize = 1 << 14;
const AVERAGING_DEPTH: usize = 12;
const MAX_SPHERE_NODES: usize = 128;

fn legendre(n: usize, c: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, c);
    if n == 0 {
        return p0;
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * c * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `∫_{-1}^{1} P_n(c) e^{-ixc} dc` by Gauss–Legendre with enough nodes to
/// resolve the oscillation.
fn plane_wave_moment(n: usize, x: f64) -> Complex64 {
    let nodes = (30 + n + (0.75 * x).ceil() as usize).next_multiple_of(8);
    let rule = GaussLegendre::cached(nodes);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&c, &w)| Complex64::from_polar(w * legendre(n, c), -x * c))
        .sum()
}

/// Repeated pairwise averaging of the last partial sums.
fn averaged_limit(partials: &[Complex64]) -> Complex64 {
    let depth = AVERAGING_DEPTH.min(partials.len() - 1);
    let mut row: Vec<Complex64> = partials[partials.len() - 1 - depth..].to_vec();
    while row.len() > 1 {
        row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    row[0]
}

/// `∫_{x_min}^∞ x^{2-p} ∫_{-1}^{1} P_n(c) e^{-ixc} dc dx`, or `None` if it
/// diverges at the origin.
fn radial_kernel_uncached(n: usize, p: f64, x_min: f64, tol: f64) -> Result<Option<Complex64>> {
    if x_min == 0.0 && 2.0 - p + n as f64 <= -1.0 {
        return Ok(None);
    }
    let integrand = |x: f64| {
        if x == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        plane_wave_moment(n, x) * x.powf(2.0 - p)
    };
    let panel_tol = Tolerance {
        abs: 1e-3 * tol * x_min.max(1.0).powf(2.0 - p).min(1.0),
        rel: 0.1 * tol,
        max_segments: 200,
    };
    let mut partials: Vec<Complex64> = Vec::new();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut panels = 64usize;
    let mut last: Option<Complex64> = None;
    loop {
        while partials.len() < panels {
            let a = x_min + PI * partials.len() as f64;
            acc += integrate_panels(integrand, &[a, a + PI], panel_tol)?.value;
            partials.push(acc);
        }
        let est = averaged_limit(&partials);
        if let Some(prev) = last {
            if (est - prev).norm() <= 0.25 * tol * est.norm().max(1e-300) {
                return Ok(Some(est));
            }
        }
        if panels >= MAX_KERNEL_PANELS {
            return Err(Error::ToleranceNotReached {
                requested: tol,
                value: est.norm(),
                error: last.map_or(f64::INFINITY, |p| (est - p).norm()),
            });
        }
        last = Some(est);
        panels *= 2;
    }
}

static KERNELS: Lazy<Mutex<HashMap<(usize, u64), Option<Complex64>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn radial_kernel(n: usize, p: f64, x_min: f64, tol: f64) -> Result<Option<Complex64>> {
    if x_min > 0.0 {
        return radial_kernel_uncached(n, p, x_min, tol);
    }
    let key = (n, p.to_bits());
    if let Some(v) = KERNELS.lock().expect("kernel cache poisoned").get(&key) {
        return Ok(*v);
    }
    let v = radial_kernel_uncached(n, p, 0.0, KERNEL_TOL)?;
    KERNELS.lock().expect("kernel cache poisoned").insert(key, v);
    Ok(v)
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn angles(v: [f64; 3]) -> (f64, f64) {
    let r = norm3(v);
    ((v[2] / r).clamp(-1.0, 1.0).acos(), v[1].atan2(v[0]))
}

/// Orthonormal frame with `e3 = q̂`.
fn frame(qhat: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if qhat[0].abs() < 0.6 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = helper[0] * qhat[0] + helper[1] * qhat[1] + helper[2] * qhat[2];
    let mut e1 = [helper[0] - d * qhat[0], helper[1] - d * qhat[1], helper[2] - d * qhat[2]];
    let n1 = norm3(e1);
    e1.iter_mut().for_each(|x| *x /= n1);
    let e2 = [
        qhat[1] * e1[2] - qhat[2] * e1[1],
        qhat[2] * e1[0] - qhat[0] * e1[2],
        qhat[0] * e1[1] - qhat[1] * e1[0],
    ];
    (e1, e2)
}

/// Born amplitude `f(q) = -(m/2πħ²) ∫d³r V(r) e^{-iq·r}` for momentum transfer `q`.
///
/// Returns 0 at `q = 0`, where the direction is undefined.
pub fn born_amplitude_direct(terms: &[MultipoleTerm], q: [f64; 3], m_gas: f64, rel_tol: f64) -> Result<Complex64> {
    let qn = norm3(q);
    if terms.is_empty() || qn == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let qhat = [q[0] / qn, q[1] / qn, q[2] / qn];
    let (e1, e2) = frame(qhat);
    let l_top = terms.iter().map(|t| t.l_pp()).max().unwrap_or(0);
    let n_nodes = l_top as usize + 1;
    let rule = GaussLegendre::cached(n_nodes);

    // azimuthal averages ȳ_t(c_i) in the q-aligned frame
    let mut ybar = vec![vec![Complex64::new(0.0, 0.0); n_nodes]; terms.len()];
    for (i, &c) in rule.nodes.iter().enumerate() {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for j in 0..n_nodes {
            let phi = 2.0 * PI * j as f64 / n_nodes as f64;
            let (sp, cp) = phi.sin_cos();
            let x = [
                s * (cp * e1[0] + sp * e2[0]) + c * qhat[0],
                s * (cp * e1[1] + sp * e2[1]) + c * qhat[1],
                s * (cp * e1[2] + sp * e2[2]) + c * qhat[2],
            ];
            let (th, ph) = angles(x);
            let y = spherical_harmonics_upto(l_top, th, ph);
            for (t, term) in terms.iter().enumerate() {
                ybar[t][i] += y[harmonic_index(term.l_pp(), term.m_pp())] / n_nodes as f64;
            }
        }
    }

    let mut total = Complex64::new(0.0, 0.0);
    for (t, term) in terms.iter().enumerate() {
        if term.amplitude() == Complex64::new(0.0, 0.0) {
            continue;
        }
        let p = term.exponent();
        let l_pp = term.l_pp() as usize;
        let b: Vec<Complex64> = (0..=l_pp)
            .map(|n| {
                let s: Complex64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .zip(&ybar[t])
                    .map(|((&c, &w), &y)| y * (w * legendre(n, c)))
                    .sum();
                s * (0.5 * (2 * n + 1) as f64)
            })
            .collect();
        let scale: f64 = b.iter().map(|x| x.norm()).sum();
        let x_min = qn * term.cutoff();
        let mut angular = Complex64::new(0.0, 0.0);
        for (n, bn) in b.iter().enumerate() {
            match radial_kernel(n, p, x_min, rel_tol)? {
                Some(kn) => angular += bn * kn,
                // harmonics are O(1), so 1e-12 absolute is rounding noise
                None if bn.norm() <= 1e-12 + 1e-10 * scale => {}
                None => {
                    return Err(Error::ConvergenceViolation(format!(
                        "Born integral of term (l''={}, p={p}) diverges at r -> 0 (|b_{n}| = {:e} of {:e})",
                        term.l_pp(), bn.norm(), scale
                    )))
                }
            }
        }
        total += term.amplitude() * qn.powf(p - 3.0) * 2.0 * PI * angular;
    }
    Ok(total * (-m_gas / (2.0 * PI * HBAR * HBAR)))
}

/// `R_z(-ω) v`: the rotation whose phase convention matches the series.
fn rotate(v: [f64; 3], omega: f64) -> [f64; 3] {
    let (s, c) = omega.sin_cos();
    [c * v[0] + s * v[1], -s * v[0] + c * v[1], v[2]]
}

fn transfer(k: f64, kv: [f64; 3], pv: [f64; 3]) -> [f64; 3] {
    [k * (kv[0] - pv[0]), k * (kv[1] - pv[1]), k * (kv[2] - pv[2])]
}

fn delta_f_vectors(
    terms: &[MultipoleTerm],
    k: f64,
    kv: [f64; 3],
    pv: [f64; 3],
    omega: f64,
    m_gas: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    if omega == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let f = born_amplitude_direct(terms, transfer(k, kv, pv), m_gas, rel_tol)?;
    let fw = born_amplitude_direct(terms, transfer(k, rotate(kv, omega), rotate(pv, omega)), m_gas, rel_tol)?;
    Ok(f - fw)
}

/// `f(k k̂', k p̂') - f^ω(k k̂', k p̂')` with both directions rotated about z.
pub fn delta_f_direct(
    terms: &[MultipoleTerm],
    k: f64,
    khat: Orientation,
    phat: Orientation,
    omega: f64,
    m_gas: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    delta_f_vectors(terms, k, khat.unit_vector(), phat.unit_vector(), omega, m_gas, rel_tol)
}

/// Result of an adaptive sphere quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    /// Gauss–Legendre order in cos θ of the accepted pass (φ uses twice as many).
    pub nodes_used: usize,
    /// Relative change against the previous pass.
    pub last_change: f64,
}

fn sphere_nodes(n: usize, shift: f64) -> Vec<([f64; 3], f64)> {
    let rule = GaussLegendre::cached(n);
    let n_phi = 2 * n;
    let mut out = Vec::with_capacity(n * n_phi);
    for (&c, &w) in rule.nodes.iter().zip(&rule.weights) {
        let s = (1.0 - c * c).sqrt();
        for j in 0..n_phi {
            let phi = 2.0 * PI * (j as f64 + shift) / n_phi as f64;
            out.push(([s * phi.cos(), s * phi.sin(), c], w * 2.0 * PI / n_phi as f64));
        }
    }
    out
}

/// `∫dk̂ ∫dp̂ F(k̂, p̂)` by product quadrature, refining the order by 1.5×
/// until the change drops below `rel_tol/4`.
fn adaptive_double_sphere<F>(nodes: usize, rel_tol: f64, mut integrand: F) -> Result<OracleValue>
where
    F: FnMut([f64; 3], [f64; 3]) -> Result<f64>,
{
    if nodes < 2 {
        return Err(Error::invalid("sphere quadrature needs at least 2 nodes"));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::invalid("rel_tol must be positive"));
    }
    let mut n = nodes;
    let mut previous: Option<f64> = None;
    loop {
        // staggered azimuths keep k̂ = p̂ (q = 0) off the grid
        let k_grid = sphere_nodes(n, 0.5);
        let p_grid = sphere_nodes(n, 0.0);
        let mut acc = 0.0;
        for &(kv, wk) in &k_grid {
            for &(pv, wp) in &p_grid {
                acc += wk * wp * integrand(kv, pv)?;
            }
        }
        if let Some(prev) = previous {
            let change = (acc - prev).abs();
            if change <= 0.25 * rel_tol * acc.abs() || (acc == 0.0 && prev == 0.0) {
                return Ok(OracleValue {
                    value: acc,
                    nodes_used: n,
                    last_change: if acc == 0.0 { 0.0 } else { change / acc.abs() },
                });
            }
            if n >= MAX_SPHERE_NODES {
                return Err(Error::ToleranceNotReached {
                    requested: rel_tol,
                    value: acc,
                    error: change,
                });
            }
        }
        previous = Some(acc);
        n = (n * 3).div_ceil(2);
    }
}

/// `∫dk̂' ∫dp̂' |Δf^ω|²` by direct quadrature; `nodes` is the starting order.
pub fn sphere_integral_sq_amplitude(
    terms: &[MultipoleTerm],
    k: f64,
    omega: f64,
    m_gas: f64,
    nodes: usize,
    rel_tol: f64,
) -> Result<OracleValue> {
    if omega == 0.0 {
        return Ok(OracleValue {
            value: 0.0,
            nodes_used: 0,
            last_change: 0.0,
        });
    }
    adaptive_double_sphere(nodes, rel_tol, |kv, pv| {
        Ok(delta_f_vectors(terms, k, kv, pv, omega, m_gas, rel_tol)?.norm_sqr())
    })
}

/// `∫dk̂' ∫dp̂' |f|²` by direct quadrature.
pub fn sphere_integral_born_sq(
    terms: &[MultipoleTerm],
    k: f64,
    m_gas: f64,
    nodes: usize,
    rel_tol: f64,
) -> Result<OracleValue> {
    adaptive_double_sphere(nodes, rel_tol, |kv, pv| {
        Ok(born_amplitude_direct(terms, transfer(k, kv, pv), m_gas, rel_tol)?.norm_sqr())
    })
}

/// Uniform-sphere Monte Carlo mean and standard error of `f`; deterministic
/// for a given seed.
pub fn mc_orientation_average<F>(mut f: F, samples: usize, seed: u64) -> Result<(f64, f64)>
where
    F: FnMut(Orientation) -> f64,
{
    if samples < 100 {
        return Err(Error::invalid(format!("need at least 100 samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let c: f64 = rng.gen_range(-1.0..=1.0);
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let v = f(Orientation {
            theta: c.acos(),
            phi,
        });
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}
