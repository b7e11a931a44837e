use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// An (l, m) pair with the flat index `l² + l + m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngularIndex {
    pub l: i32,
    pub m: i32,
}

impl AngularIndex {
    pub fn new(l: i32, m: i32) -> Self {
        AngularIndex { l, m }
    }

    pub fn index(self) -> usize {
        harmonic_index(self.l, self.m)
    }

    /// All pairs with `l <= lmax` in flat-index order.
    pub fn upto(lmax: i32) -> impl Iterator<Item = AngularIndex> {
        (0..=lmax).flat_map(|l| (-l..=l).map(move |m| AngularIndex { l, m }))
    }
}

/// Flat index `l² + l + m` used by [`spherical_harmonics_upto`].
pub fn harmonic_index(l: i32, m: i32) -> usize {
    debug_assert!(l >= 0 && m.abs() <= l);
    (l * l + l + m) as usize
}

/// Orthonormal spherical harmonic `Y_lm(θ, φ)` with the Condon–Shortley phase.
pub fn spherical_harmonic(l: i32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if l < 0 {
        return Err(Error::invalid(format!("spherical harmonic with negative l = {l}")));
    }
    if m.abs() > l {
        return Err(Error::invalid(format!(
            "spherical harmonic with |m| = {} > l = {l}",
            m.abs()
        )));
    }
    let ma = m.abs();
    let p = normalized_legendre_column(l, ma, theta.cos(), theta.sin())[(l - ma) as usize];
    Ok(with_phase(p, m, phi))
}

/// Every `Y_lm(θ, φ)` with `l <= lmax`, stored at [`harmonic_index`].
pub fn spherical_harmonics_upto(lmax: i32, theta: f64, phi: f64) -> Vec<Complex64> {
    let lmax = lmax.max(0);
    let (x, s) = (theta.cos(), theta.sin());
    let mut out = vec![Complex64::new(0.0, 0.0); ((lmax + 1) * (lmax + 1)) as usize];
    for ma in 0..=lmax {
        let col = normalized_legendre_column(lmax, ma, x, s);
        for (offset, &p) in col.iter().enumerate() {
            let l = ma + offset as i32;
            out[harmonic_index(l, ma)] = with_phase(p, ma, phi);
            if ma > 0 {
                out[harmonic_index(l, -ma)] = with_phase(p, -ma, phi);
            }
        }
    }
    out
}

fn with_phase(p: f64, m: i32, phi: f64) -> Complex64 {
    // p is the m >= 0 normalised Legendre value; Y_{l,-m} = (-1)^m conj(Y_lm)
    let y = Complex64::from_polar(p, m.abs() as f64 * phi);
    if m >= 0 {
        y
    } else if m % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Normalised associated Legendre values for fixed `m >= 0` and `l = m..=lmax`,
/// i.e. `Y_lm(θ, 0)`.
fn normalized_legendre_column(lmax: i32, m: i32, x: f64, s: f64) -> Vec<f64> {
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    let mut col = Vec::with_capacity((lmax - m + 1) as usize);
    col.push(pmm);
    if lmax == m {
        return col;
    }
    let mf = m as f64;
    col.push((2.0 * mf + 3.0).sqrt() * x * pmm);
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lm1 = lf - 1.0;
        let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
        let n = col.len();
        col.push(a * (x * col[n - 1] - b * col[n - 2]));
    }
    col
}
