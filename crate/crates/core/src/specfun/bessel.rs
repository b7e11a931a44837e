use num_complex::Complex64;


/// The power series is used for `j_l(x)` when `x² <= SERIES_SWITCH·(2l + 3)`.
pub const SERIES_SWITCH: f64 = 1.0;

/// Spherical Bessel function of the first kind `j_l(x)`.
pub fn spherical_bessel_j(l: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = spherical_bessel_j(l, -x);
        return if l % 2 == 0 { v } else { -v };
    }
    if x * x <= SERIES_SWITCH * (2.0 * l as f64 + 3.0) {
        return series(l, x);
    }
    *spherical_bessel_j_array(l, x).last().expect("non-empty")
}

/// `j_0(x) ..= j_lmax(x)`.
pub fn spherical_bessel_j_array(lmax: u32, x: f64) -> Vec<f64> {
    let n = lmax as usize + 1;
    if x == 0.0 {
        let mut out = vec![0.0; n];
        out[0] = 1.0;
        return out;
    }
    if x < 0.0 {
        let mut out = spherical_bessel_j_array(lmax, -x);
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
        return out;
    }
    let (j0, j1) = low_orders(x);
    if lmax == 0 {
        return vec![j0];
    }
    if x > lmax as f64 {
        // forward recurrence is stable while l < x
        let mut out = Vec::with_capacity(n);
        out.push(j0);
        out.push(j1);
        for l in 1..lmax as usize {
            let next = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
            out.push(next);
        }
        return out;
    }
    miller(lmax, x, j0, j1)
}

fn low_orders(x: f64) -> (f64, f64) {
    if x < 1e-3 {
        let x2 = x * x;
        let j0 = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
        let j1 = x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0));
        return (j0, j1);
    }
    let (s, c) = x.sin_cos();
    (s / x, s / (x * x) - c / x)
}

fn miller(lmax: u32, x: f64, j0: f64, j1: f64) -> Vec<f64> {
    const RESCALE: f64 = 1e-250;
    let top = lmax.max(x.ceil() as u32);
    let start = top as usize + 30 + (40.0 * top as f64).sqrt() as usize;
    let n = lmax as usize + 1;
    // stored values keep the rescale count at which they were recorded
    let mut out = vec![(0.0, 0i32); n];
    let mut rescales = 0i32;
    let mut upper = 0.0f64;
    let mut current = 1e-300f64;
    for l in (1..=start).rev() {
        if l < n {
            out[l] = (current, rescales);
        }
        let lower = (2 * l + 1) as f64 / x * current - upper;
        upper = current;
        current = lower;
        if current.abs() > 1e250 {
            current *= RESCALE;
            upper *= RESCALE;
            rescales += 1;
        }
    }
    out[0] = (current, rescales);
    let (ref_val, ref_idx) = if j0.abs() >= j1.abs() { (j0, 0) } else { (j1, 1) };
    let (ref_raw, ref_scale) = out[ref_idx];
    let ln_unit = RESCALE.ln();
    out.iter()
        .map(|&(v, r)| {
            if v == 0.0 {
                return 0.0;
            }
            if r == ref_scale {
                return v / ref_raw * ref_val;
            }
            let sign = v.signum() * ref_raw.signum() * ref_val.signum();
            let ln_mag = v.abs().ln() - ref_raw.abs().ln() + ref_val.abs().ln() + ln_unit * (ref_scale - r) as f64;
            sign * ln_mag.exp()
        })
        .collect()
}

fn series(l: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    // x^l / (2l+1)!! as a direct product; after its peak it decreases
    // monotonically, so it only underflows when the result does
    let lf = l as f64;
    let mut pref = 1.0;
    for k in 1..=l {
        pref *= x / (2 * k + 1) as f64;
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= y / (kf * (2.0 * lf + 2.0 * kf + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum * pref
}

/// Spherical Hankel function `h_l^(1)(z) = j_l(z) + i y_l(z)` for complex `z != 0`.
pub fn spherical_hankel1(l: u32, z: Complex64) -> Complex64 {
    *spherical_hankel1_array(l, z).last().expect("non-empty")
}

/// `h_0^(1)(z) ..= h_lmax^(1)(z)` by upward recurrence.
pub fn spherical_hankel1_array(lmax: u32, z: Complex64) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let e = (i * z).exp();
    let h0 = -i * e / z;
    let mut out = Vec::with_capacity(lmax as usize + 1);
    out.push(h0);
    if lmax == 0 {
        return out;
    }
    out.push(e * (-1.0 / z - i / (z * z)));
    for l in 1..lmax as usize {
        let next = out[l] * ((2 * l + 1) as f64) / z - out[l - 1];
        out.push(next);
    }
    out
}
