use once_cell::sync::Lazy;

const TABLE_SIZE: usize = 4096;

static LN_FACTORIAL: Lazy<Vec<f64>> = Lazy::new(|| {
    let mut table = Vec::with_capacity(TABLE_SIZE);
    let mut acc = 0.0f64;
    table.push(0.0);
    for k in 1..TABLE_SIZE {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
});

/// ln(n!)
pub fn ln_factorial(n: u32) -> f64 {
    match LN_FACTORIAL.get(n as usize) {
        Some(&v) => v,
        None => ln_gamma(n as f64 + 1.0),
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// 1/Γ(x) for any real x, exactly zero at the poles x = 0, -1, -2, ...
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        // reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π
        let pi = std::f64::consts::PI;
        return (pi * x).sin() * statrs::function::gamma::gamma(1.0 - x) / pi;
    }
    1.0 / statrs::function::gamma::gamma(x)
}
