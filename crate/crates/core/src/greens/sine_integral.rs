//! Sine integral `Si(x) = ∫_0^x sin t / t dt` and the step-function
//! approximation of `Si(nπ + a) - Si(nπ - a)`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

const SERIES_LIMIT: f64 = 4.0;

/// Sine integral, accurate to ~1e-15 absolute.
///
/// Maclaurin series for `|x| <= 4`; beyond that `Si = π/2 - f cos x - g sin x`
/// with the auxiliary functions taken from the continued fraction of `E1(ix)`.
pub fn si(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return -si(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return FRAC_PI_2;
    }
    if x <= SERIES_LIMIT {
        series(x)
    } else {
        continued_fraction(x)
    }
}

fn series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x; // x^{2k+1} / (2k+1)!
    let mut sum = x;
    let mut k = 0u32;
    loop {
        k += 1;
        let a = (2 * k) as f64;
        let b = (2 * k + 1) as f64;
        term *= -x2 / (a * b);
        let contrib = term / b;
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn continued_fraction(x: f64) -> f64 {
    // E1(ix) = e^{-ix} / (ix + 1 - 1/(ix + 3 - 4/(ix + 5 - ...))), Lentz.
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..10_000u32 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).norm() < 1e-15 {
            break;
        }
    }
    // h * e^{-ix} = E1(ix) = -Ci(x) + i (Si(x) - π/2)
    let e1 = h * Complex64::new(x.cos(), -x.sin());
    e1.im + FRAC_PI_2
}

/// Step approximation of `Si(nπ + a) - Si(nπ - a)` built from the integer
/// part `k = ⌊a/π⌋` and fractional part `ε` of `a/π`:
///
/// `π/2 - π/2 Θ(n - k) + π/2 Θ(k - n) + πε δ_{n,k}` with `Θ(0) = 0`.
pub fn si_pair_approx(n: u64, a: f64) -> f64 {
    let ratio = a / PI;
    let k = ratio.floor();
    let eps = ratio - k;
    let k = k as i64;
    let n = n as i64;
    let theta = |v: i64| if v > 0 { 1.0 } else { 0.0 };
    let mut value = FRAC_PI_2 - FRAC_PI_2 * theta(n - k) + FRAC_PI_2 * theta(k - n);
    if n == k {
        value += PI * eps;
    }
    value
}
