//! Closed-form rows of the published dipole and quadrupole coefficient tables.

// each including target uses a different subset
#![allow(dead_code)]

use std::f64::consts::PI;

use rotdecoh::coefficients::CoeffKey;
use rotdecoh::specfun::recip_gamma;
use rotdecoh::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn fact(n: i32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `1/x!` for half-integer or integer `x`, including negative half-integers.
fn recip_fact(x: f64) -> f64 {
    recip_gamma(x + 1.0)
}

fn theta(x: i32) -> bool {
    x >= 0
}

fn csqrt(x: f64) -> Complex64 {
    Complex64::new(x, 0.0).sqrt()
}

pub fn key(l: i32, m: i32, s: i32, l_pp: i32, m_pp: i32) -> CoeffKey {
    CoeffKey::new(l, m, l + s, m + m_pp, l_pp, m_pp)
}

/// Dipole rows: `G_{l,m,l+s,m+m'',1,m''}`, or `None` where the row's guards vanish.
pub fn table_one(l: i32, m: i32, s: i32, m_pp: i32, omega: f64) -> Option<Complex64> {
    let (lf, mf) = (l as f64, m as f64);
    let e = Complex64::from_polar(1.0, omega);
    let head = Complex64::new(1.0, 0.0) - e;
    let v = match (s, m_pp) {
        (-1, -1) if theta(l + m - 2) && theta(l - 1) => {
            0.5 * I * (3.0 * (lf + mf - 1.0) * (lf + mf) / (2.0 * PI * (4.0 * lf * lf - 1.0))).sqrt()
        }
        (-1, 1) if theta(l - m - 2) && theta(l - 1) => {
            -0.5 * I / e * (3.0 * (lf - mf - 1.0) * (lf - mf) / (2.0 * PI * (4.0 * lf * lf - 1.0))).sqrt()
        }
        (1, -1) => 0.5 * I * (3.0 * (lf - mf + 1.0) * (lf - mf + 2.0) / (2.0 * PI * (4.0 * lf * (lf + 2.0) + 3.0))).sqrt(),
        (1, 1) => {
            -0.5 * I / e * (3.0 * (lf + mf + 1.0) * (lf + mf + 2.0) / (2.0 * PI * (4.0 * lf * (lf + 2.0) + 3.0))).sqrt()
        }
        (_, 0) => Complex64::new(0.0, 0.0),
        _ => return None,
    };
    Some(head * v)
}

/// Which factorial the `s = +2, m'' = +1, +2` rows carry under the root.
#[derive(Clone, Copy, PartialEq)]
pub enum Variant {
    /// `(l + 5/2)!`, required by the 3-j evaluation.
    Corrected,
    /// `(5/2 - l)!` as printed.
    Printed,
}

/// Quadrupole rows: `(-1)^{l+1} G_{l,m,l+s,m+m'',2,m''}`.
pub fn table_two(l: i32, m: i32, s: i32, m_pp: i32, omega: f64, variant: Variant) -> Option<Complex64> {
    let (lf, mf) = (l as f64, m as f64);
    let e = Complex64::from_polar(1.0, omega);
    let one = Complex64::new(1.0, 0.0);
    let f = |n: i32| fact(n);
    let q = PI.powf(0.25) * 15f64.sqrt();
    match s {
        -2 => {
            if l < 2 {
                return None;
            }
            let a = q * 2f64.powi(l - 6) * recip_fact(1.5 - lf);
            let b = q * 2f64.powi(l - 5) * recip_fact(1.5 - lf);
            let d = (2.0 * lf.powi(3) - 3.0 * lf * lf + lf) / recip_fact(lf + 0.5) * f(2 * l - 4);
            match m_pp {
                -2 if theta(l + m - 4) => Some((one - e * e) * a * csqrt(f(l) * f(l + m) / (d * f(l + m - 4)))),
                -1 if theta(l + m - 3) && theta(l - m - 1) => Some(
                    -(one - e) * b * csqrt(f(l) * f(l - m) * f(l + m) / (d * f(l - m - 1) * f(l + m - 3))),
                ),
                1 if theta(l - m - 3) && theta(l + m - 1) => Some(
                    -(one - e.inv()) * b * csqrt(f(l) * f(l - m) * f(l + m) / (d * f(l - m - 3) * f(l + m - 1))),
                ),
                2 if theta(l - m - 4) => Some((one - e.powi(-2)) * a * csqrt(f(l) * f(l - m) / (d * f(l - m - 4)))),
                0 => Some(Complex64::new(0.0, 0.0)),
                _ => None,
            }
        }
        0 => {
            if l < 1 {
                return None;
            }
            let c = (15.0 / (2.0 * PI)).sqrt() / (8.0 * lf * (lf + 1.0) - 6.0);
            let sg = if l % 2 == 0 { 1.0 } else { -1.0 };
            match m_pp {
                -2 if theta(l + m - 2) => Some(
                    (one - e * e) * c * sg * ((lf - mf + 1.0) * (lf - mf + 2.0) * (lf + mf - 1.0) * (lf + mf)).sqrt(),
                ),
                -1 if theta(l + m - 1) => Some((one - e) * c * sg * (2.0 * mf - 1.0) * ((lf - mf + 1.0) * (lf + mf)).sqrt()),
                1 if theta(l - m - 1) => Some((one - e.inv()) * c * -sg * (2.0 * mf + 1.0) * ((lf - mf) * (lf + mf + 1.0)).sqrt()),
                2 if theta(l - m - 2) => Some(
                    (one - e.powi(-2)) * c * sg * ((lf - mf - 1.0) * (lf - mf) * (lf + mf + 1.0) * (lf + mf + 2.0)).sqrt(),
                ),
                0 => Some(Complex64::new(0.0, 0.0)),
                _ => None,
            }
        }
        2 => {
            let a = q * 2f64.powi(l - 4) * recip_fact(-lf - 0.5);
            let b = q * 2f64.powi(l - 3) * recip_fact(-lf - 0.5);
            let g52 = match variant {
                Variant::Corrected => recip_fact(lf + 2.5),
                Variant::Printed => recip_fact(2.5 - lf),
            };
            let r52 = recip_fact(lf + 2.5);
            let pre = (2.0 * lf + 3.0) * f(2 * l);
            match m_pp {
                -2 => Some(
                    (one - e * e)
                        * a
                        * csqrt(
                            f(l + 2) * f(l - m + 4) * r52
                                / ((2.0 * lf.powi(3) + 9.0 * lf * lf + 13.0 * lf + 6.0) * f(2 * l) * f(l - m)),
                        ),
                ),
                -1 => Some(
                    (one - e)
                        * b
                        * csqrt(f(l) * (lf - mf + 1.0) * (lf - mf + 2.0) * (lf - mf + 3.0) * (lf + mf + 1.0) * r52 / pre),
                ),
                1 => Some(
                    (one - e.inv())
                        * b
                        * csqrt(f(l) * (lf - mf + 1.0) * (lf + mf + 1.0) * (lf + mf + 2.0) * (lf + mf + 3.0) * g52 / pre),
                ),
                2 => Some(
                    (one - e.powi(-2))
                        * b
                        * 0.5
                        * csqrt(f(l) * (lf + mf + 1.0) * (lf + mf + 2.0) * (lf + mf + 3.0) * (lf + mf + 4.0) * g52 / pre),
                ),
                0 => Some(Complex64::new(0.0, 0.0)),
                _ => None,
            }
        }
        _ => Some(Complex64::new(0.0, 0.0)),
    }
}
