use super::factorial::ln_factorial;
use crate::{Error, Result};

/// Wigner 3-j symbol
/// ```text
/// ( l1 l2 l3 )
/// ( m1 m2 m3 )
/// ```
/// for integer arguments.
///
/// Exactly zero when `m1 + m2 + m3 != 0` or the triangle rule fails.
/// Negative `l` or `|m| > l` are rejected.
pub fn wigner3j(l1: i32, l2: i32, l3: i32, m1: i32, m2: i32, m3: i32) -> Result<f64> {
    for (l, m) in [(l1, m1), (l2, m2), (l3, m3)] {
        if l < 0 {
            return Err(Error::invalid(format!("3-j symbol with negative l = {l}")));
        }
        if m.abs() > l {
            return Err(Error::invalid(format!("3-j symbol with |m| = {} > l = {l}", m.abs())));
        }
    }
    Ok(wigner3j_unchecked(l1, l2, l3, m1, m2, m3))
}

/// [`wigner3j`] without argument validation; out-of-range `m` gives 0.
///
/// Racah's single-sum formula evaluated in log-factorial space. The
/// alternating sum is accumulated relative to its largest term; when all
/// three degrees are large (tens) and comparable, cancellation costs a few
/// digits. Arguments are first brought to a canonical column order and
/// m-sign, so the permutation and sign-flip symmetries hold bit-for-bit.
pub fn wigner3j_unchecked(l1: i32, l2: i32, l3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || m1.abs() > l1 || m2.abs() > l2 || m3.abs() > l3 {
        return 0.0;
    }
    if l3 > l1 + l2 || l3 < (l1 - l2).abs() {
        return 0.0;
    }
    if m1 == 0 && m2 == 0 && (l1 + l2 + l3) % 2 == 1 {
        return 0.0;
    }
    let (cols, odd) = canonical([(l1, m1), (l2, m2), (l3, m3)]);
    if (l1 + l2 + l3) % 2 == 1 && (cols[0] == cols[1] || cols[1] == cols[2]) {
        // odd under a swap that leaves it unchanged
        return 0.0;
    }
    let v = racah(cols);
    if odd && (l1 + l2 + l3) % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Columns sorted in descending `(l, m)` order, choosing the m-sign whose
/// sorted form is larger. Returns whether an odd number of odd operations
/// (column swaps, m-flip) was applied.
fn canonical(cols: [(i32, i32); 3]) -> ([(i32, i32); 3], bool) {
    let sort = |mut c: [(i32, i32); 3]| {
        let mut swaps = 0;
        for i in 0..2 {
            for j in 0..2 - i {
                if c[j] < c[j + 1] {
                    c.swap(j, j + 1);
                    swaps += 1;
                }
            }
        }
        (c, swaps % 2 == 1)
    };
    let (a, pa) = sort(cols);
    let (b, pb) = sort(cols.map(|(l, m)| (l, -m)));
    if b > a {
        (b, !pb)
    } else {
        (a, pa)
    }
}

fn racah(cols: [(i32, i32); 3]) -> f64 {
    let [(l1, m1), (l2, m2), (l3, m3)] = cols;
    let lf = |n: i32| ln_factorial(n as u32);

    let ln_delta = lf(l1 + l2 - l3) + lf(l1 - l2 + l3) + lf(-l1 + l2 + l3) - lf(l1 + l2 + l3 + 1);
    let ln_norm = 0.5
        * (ln_delta
            + lf(l1 + m1)
            + lf(l1 - m1)
            + lf(l2 + m2)
            + lf(l2 - m2)
            + lf(l3 + m3)
            + lf(l3 - m3));

    let t_min = 0.max(l2 - l3 - m1).max(l1 - l3 + m2);
    let t_max = (l1 + l2 - l3).min(l1 - m1).min(l2 + m2);
    if t_min > t_max {
        return 0.0;
    }

    let ln_terms: Vec<f64> = (t_min..=t_max)
        .map(|t| {
            -(lf(t)
                + lf(l3 - l2 + t + m1)
                + lf(l3 - l1 + t - m2)
                + lf(l1 + l2 - l3 - t)
                + lf(l1 - t - m1)
                + lf(l2 - t + m2))
        })
        .collect();
    let peak = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = ln_terms
        .iter()
        .zip(t_min..)
        .map(|(&ln_t, t)| {
            let mag = (ln_t - peak).exp();
            if t % 2 == 0 {
                mag
            } else {
                -mag
            }
        })
        .sum();

    let phase = if (l1 - l2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * sum * (ln_norm + peak).exp()
}
