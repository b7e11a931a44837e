use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use rotdecoh::quad::GaussLegendre;
use rotdecoh::specfun::{
    spherical_bessel_j, spherical_bessel_j_array, spherical_harmonic, wigner3j, wigner3j_unchecked,
};

fn big_fact(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Racah's formula in exact rational arithmetic: the square of the symbol
/// is rational, so only the final square root is rounded.
fn wigner3j_exact(l1: i64, l2: i64, l3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || l3 > l1 + l2 || l3 < (l1 - l2).abs() {
        return 0.0;
    }
    if m1.abs() > l1 || m2.abs() > l2 || m3.abs() > l3 {
        return 0.0;
    }
    let tri = BigRational::new(
        big_fact(l1 + l2 - l3) * big_fact(l1 - l2 + l3) * big_fact(-l1 + l2 + l3),
        big_fact(l1 + l2 + l3 + 1),
    );
    let pre = tri
        * BigRational::from_integer(
            big_fact(l1 + m1)
                * big_fact(l1 - m1)
                * big_fact(l2 + m2)
                * big_fact(l2 - m2)
                * big_fact(l3 + m3)
                * big_fact(l3 - m3),
        );
    let k_min = 0.max(l2 - l3 - m1).max(l1 - l3 + m2);
    let k_max = (l1 + l2 - l3).min(l1 - m1).min(l2 + m2);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = big_fact(k)
            * big_fact(l3 - l2 + k + m1)
            * big_fact(l3 - l1 + k - m2)
            * big_fact(l1 + l2 - l3 - k)
            * big_fact(l1 - k - m1)
            * big_fact(l2 - k + m2);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let sq = pre * &sum * &sum;
    let mut v = sq.to_f64().unwrap().sqrt();
    if sum.is_negative() {
        v = -v;
    }
    if (l1 - l2 - m3).rem_euclid(2) == 1 {
        v = -v;
    }
    v
}

#[test]
fn wigner_reference_values() {
    let v = wigner3j(1, 1, 0, 0, 0, 0).unwrap();
    assert!((v + 1.0 / 3f64.sqrt()).abs() < 1e-15);
    let v = wigner3j(1, 1, 2, 0, 0, 0).unwrap();
    assert!((v - (2.0f64 / 15.0).sqrt()).abs() < 1e-15);
    assert_eq!(wigner3j(1, 1, 0, 1, 0, 0).unwrap(), 0.0);
    assert_eq!(wigner3j(1, 5, 1, 0, 0, 0).unwrap(), 0.0);
    assert!(wigner3j(2, 1, 1, -2, 1, 1).unwrap() != 0.0);
    assert!(wigner3j(1, 1, 1, 2, 0, -2).is_err());
    assert!(wigner3j(-1, 1, 1, 0, 0, 0).is_err());
}

#[test]
fn wigner_matches_exact_rational_oracle() {
    for l1 in 0..=8i32 {
        for l2 in 0..=8i32 {
            for l3 in (l1 - l2).abs()..=(l1 + l2) {
                for m1 in -l1..=l1 {
                    for m2 in -l2..=l2 {
                        let m3 = -m1 - m2;
                        if m3.abs() > l3 {
                            continue;
                        }
                        let exact = wigner3j_exact(l1 as i64, l2 as i64, l3 as i64, m1 as i64, m2 as i64, m3 as i64);
                        let got = wigner3j(l1, l2, l3, m1, m2, m3).unwrap();
                        assert!(
                            (got - exact).abs() <= 1e-13 * exact.abs() + 1e-14,
                            "({l1},{l2},{l3};{m1},{m2},{m3}) {got} vs {exact}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn wigner_large_degree_against_oracle() {
    // symbols with a small third degree, as used by the coupling sums
    for &(l1, l2, l3, m1, m2) in &[(60, 60, 2, 0, 0), (200, 201, 1, 17, -16), (500, 498, 2, -120, 121), (90, 91, 1, 0, 0)] {
        let exact = wigner3j_exact(l1, l2, l3, m1, m2, -m1 - m2);
        let got = wigner3j(l1 as i32, l2 as i32, l3 as i32, m1 as i32, m2 as i32, (-m1 - m2) as i32).unwrap();
        assert!((got - exact).abs() <= 1e-12 * exact.abs(), "{got} vs {exact}");
    }
    // three large degrees: the alternating sum cancels
    for &(l1, l2, l3, m1, m2) in &[(40, 37, 25, 3, -7), (30, 31, 59, 12, -4), (45, 50, 20, -5, 9)] {
        let exact = wigner3j_exact(l1, l2, l3, m1, m2, -m1 - m2);
        let got = wigner3j(l1 as i32, l2 as i32, l3 as i32, m1 as i32, m2 as i32, (-m1 - m2) as i32).unwrap();
        assert!((got - exact).abs() <= 1e-7 * exact.abs(), "{got} vs {exact}");
    }
}

#[test]
fn wigner_orthogonality_up_to_six() {
    for l1 in 0..=6 {
        for l2 in 0..=6 {
            for l3 in (l1 - l2).abs()..=(l1 + l2) {
                for m3 in -l3..=l3 {
                    let mut s = 0.0;
                    for m1 in -l1..=l1 {
                        let m2 = -m1 - m3;
                        if m2.abs() > l2 {
                            continue;
                        }
                        let w = wigner3j(l1, l2, l3, m1, m2, m3).unwrap();
                        s += w * w;
                    }
                    let s = (2 * l3 + 1) as f64 * s;
                    assert!((s - 1.0).abs() <= 1e-12, "({l1},{l2},{l3}) m3={m3} -> {s}");
                }
                // distinct l3 are orthogonal
                for l4 in (l1 - l2).abs()..=(l1 + l2) {
                    if l4 == l3 {
                        continue;
                    }
                    let mut s = 0.0;
                    for m1 in -l1..=l1 {
                        for m2 in -l2..=l2 {
                            let m3 = -m1 - m2;
                            if m3.abs() > l3.min(l4) {
                                continue;
                            }
                            s += wigner3j(l1, l2, l3, m1, m2, m3).unwrap() * wigner3j(l1, l2, l4, m1, m2, m3).unwrap();
                        }
                    }
                    assert!(s.abs() <= 1e-12);
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn wigner_odd_permutation_symmetry(l1 in 0i32..20, l2 in 0i32..20, dl in 0i32..40, m1f in 0.0f64..1.0, m2f in 0.0f64..1.0) {
        let l3 = ((l1 - l2).abs() + dl).min(l1 + l2);
        let m1 = (m1f * (2 * l1 + 1) as f64).floor() as i32 - l1;
        let m2 = (m2f * (2 * l2 + 1) as f64).floor() as i32 - l2;
        let m3 = -m1 - m2;
        prop_assume!(m3.abs() <= l3);
        let a = wigner3j(l1, l2, l3, m1, m2, m3).unwrap();
        let b = wigner3j(l2, l1, l3, m2, m1, m3).unwrap();
        let c = wigner3j(l1, l3, l2, m1, m3, m2).unwrap();
        let sign = if (l1 + l2 + l3) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((b - sign * a).abs() <= 1e-14);
        prop_assert!((c - sign * a).abs() <= 1e-14);
        let flipped = wigner3j(l1, l2, l3, -m1, -m2, -m3).unwrap();
        prop_assert!((flipped - sign * a).abs() <= 1e-14);
    }

    #[test]
    fn wigner_m_selection(l1 in 0i32..10, l2 in 0i32..10, l3 in 0i32..20, u in any::<[u16; 3]>()) {
        let pick = |l: i32, r: u16| r as i32 % (2 * l + 1) - l;
        let (m1, m2, m3) = (pick(l1, u[0]), pick(l2, u[1]), pick(l3, u[2]));
        let w = wigner3j_unchecked(l1, l2, l3, m1, m2, m3);
        if m1 + m2 + m3 != 0 || l3 > l1 + l2 || l3 < (l1 - l2).abs() {
            prop_assert_eq!(w, 0.0);
        }
    }
}

#[test]
fn harmonic_reference_values() {
    let y = spherical_harmonic(0, 0, 0.3, 1.1).unwrap();
    assert!((y.re - 0.5 / PI.sqrt()).abs() < 1e-15 && y.im == 0.0);
    let y = spherical_harmonic(1, 0, 0.0, 0.0).unwrap();
    assert!((y.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
    let y = spherical_harmonic(1, 1, PI / 2.0, 0.0).unwrap();
    assert!((y.re + (3.0 / (8.0 * PI)).sqrt()).abs() < 1e-15);
    assert!(spherical_harmonic(1, 2, 0.1, 0.0).is_err());
}

#[test]
fn harmonic_explicit_formulas() {
    for &(t, p) in &[(0.3, 0.2), (1.2, 2.5), (2.9, 5.9)] {
        let (st, ct) = (f64::sin(t), f64::cos(t));
        let e = |m: f64| num_complex::Complex64::from_polar(1.0, m * p);
        let y21 = -(15.0 / (8.0 * PI)).sqrt() * st * ct * e(1.0);
        let y22 = 0.25 * (15.0 / (2.0 * PI)).sqrt() * st * st * e(2.0);
        let y30 = 0.25 * (7.0 / PI).sqrt() * (5.0 * ct.powi(3) - 3.0 * ct);
        assert!((spherical_harmonic(2, 1, t, p).unwrap() - y21).norm() < 1e-14);
        assert!((spherical_harmonic(2, 2, t, p).unwrap() - y22).norm() < 1e-14);
        assert!((spherical_harmonic(3, 0, t, p).unwrap().re - y30).abs() < 1e-14);
        let ym = spherical_harmonic(2, -1, t, p).unwrap();
        assert!((ym + y21.conj()).norm() < 1e-14);
    }
}

#[test]
fn harmonic_orthonormality_up_to_eight() {
    let rule = GaussLegendre::new(12);
    let n_phi = 24;
    let mut pts = Vec::new();
    for (&c, &w) in rule.nodes.iter().zip(&rule.weights) {
        for j in 0..n_phi {
            pts.push((c.acos(), 2.0 * PI * j as f64 / n_phi as f64, w * 2.0 * PI / n_phi as f64));
        }
    }
    let mut ys = Vec::new();
    for l in 0..=8 {
        for m in -l..=l {
            let v: Vec<_> = pts.iter().map(|&(t, p, _)| spherical_harmonic(l, m, t, p).unwrap()).collect();
            ys.push(((l, m), v));
        }
    }
    for (a, ya) in &ys {
        for (b, yb) in &ys {
            let s: num_complex::Complex64 = ya.iter().zip(yb).zip(&pts).map(|((x, y), p)| x * y.conj() * p.2).sum();
            let expect = if a == b { 1.0 } else { 0.0 };
            assert!((s - expect).norm() < 1e-10, "{a:?} {b:?} {s}");
        }
    }
}

fn j_closed(l: u32, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    match l {
        0 => s / x,
        1 => s / (x * x) - c / x,
        2 => (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x),
        _ => unreachable!(),
    }
}

/// Power series summed until terms stop changing the sum.
fn j_series(l: u32, x: f64) -> f64 {
    let mut ln_pre = l as f64 * x.ln();
    for k in 0..=l {
        ln_pre -= ((2 * k + 1) as f64).ln();
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        term *= y / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    ln_pre.exp() * sum
}

#[test]
fn bessel_reference_values() {
    assert_eq!(spherical_bessel_j(0, 0.0), 1.0);
    assert_eq!(spherical_bessel_j(1, 0.0), 0.0);
    assert!((spherical_bessel_j(2, 1.0) - 0.062_035_052_011_373_86).abs() < 1e-15);
}

#[test]
fn bessel_low_orders_match_closed_forms() {
    let mut x = 0.5;
    while x <= 100.0 {
        for l in 0..=2 {
            let got = spherical_bessel_j(l, x);
            let want = j_closed(l, x);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-2), "l={l} x={x}: {got} vs {want}");
        }
        x += 0.173;
    }
    // the closed forms cancel catastrophically for small x; the series is the reference there
    for i in 1..200 {
        let x = 0.5 * i as f64 / 200.0;
        for l in 0..=2 {
            let got = spherical_bessel_j(l, x);
            let want = j_series(l, x);
            assert!((got - want).abs() <= 1e-13 * want.abs(), "l={l} x={x}");
        }
    }
}

#[test]
fn bessel_small_argument_series_up_to_200() {
    for l in [3u32, 10, 50, 120, 200] {
        for &x in &[1e-4, 0.01, 0.7, 3.0, (l as f64).sqrt()] {
            let got = spherical_bessel_j_array(l, x)[l as usize];
            let want = j_series(l, x);
            if want == 0.0 {
                assert!(got.abs() < 1e-300);
                continue;
            }
            assert!((got - want).abs() <= 1e-10 * want.abs(), "l={l} x={x}: {got} vs {want}");
        }
    }
}

/// `j_l y_{l-1} - j_{l-1} y_l = 1/x²` with `y_l` from its stable upward recurrence.
#[test]
fn bessel_cross_product_identity_up_to_200() {
    let xs: Vec<f64> = (0..60).map(|i| 10f64.powf(i as f64 / 59.0 * 3.0)).collect();
    for &x in &xs {
        let j = spherical_bessel_j_array(200, x);
        let (s, c) = x.sin_cos();
        let mut y = vec![-c / x, -c / (x * x) - s / x];
        for l in 1..200usize {
            let next = (2 * l + 1) as f64 / x * y[l] - y[l - 1];
            if !next.is_finite() || next.abs() > 1e250 {
                break;
            }
            y.push(next);
        }
        for l in 1..y.len() {
            let a = x * x * j[l] * y[l - 1];
            let b = x * x * j[l - 1] * y[l];
            let scale = 1f64.max(a.abs()).max(b.abs());
            assert!(((a - b) - 1.0).abs() <= 1e-10 * scale, "l={l} x={x}: {}", a - b);
        }
    }
}

#[test]
fn bessel_scalar_matches_array() {
    for l in [0u32, 1, 7, 40, 150] {
        for &x in &[0.3, 5.0, 60.0, 900.0] {
            let a = spherical_bessel_j(l, x);
            let b = spherical_bessel_j_array(l, x)[l as usize];
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-300, "l={l} x={x}");
        }
    }
}

proptest! {
    #[test]
    fn bessel_three_term_recurrence(l in 1u32..150, x in 0.05f64..1000.0) {
        let j = spherical_bessel_j_array(l + 1, x);
        let (a, b, c) = (j[l as usize - 1], j[l as usize], j[l as usize + 1]);
        let lhs = a + c;
        let rhs = (2 * l + 1) as f64 / x * b;
        let scale = a.abs().max(c.abs()).max(1e-300);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale);
    }
}
