//! Small numeric helpers shared across modules.

use std::f64::consts::{PI, TAU};

/// Wrap an angle to the interval (-pi, pi].
pub fn wrap_angle(phi: f64) -> f64 {
    let mut x = phi.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    x
}

/// Absolute distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Cumulative trapezoid integral of `y` over `x`; output has the same length
/// with a leading zero.
pub fn cumtrapz(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
        out.push(acc);
    }
    out
}

/// Evenly spaced grid of `n` points covering `[a, b]` inclusive, with the
/// endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    out[n - 1] = b;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_stays_in_range() {
        for k in -20..20 {
            let phi = 0.3 + k as f64 * PI;
            let w = wrap_angle(phi);
            assert!(w > -PI - 1e-12 && w <= PI + 1e-12);
            assert!((phi - w).rem_euclid(TAU) < 1e-9 || (phi - w).rem_euclid(TAU) > TAU - 1e-9);
        }
    }

    #[test]
    fn cumtrapz_linear_exact() {
        let x = linspace(0.0, 2.0, 21);
        let y: Vec<f64> = x.iter().map(|&t| 3.0 * t).collect();
        let c = cumtrapz(&x, &y);
        assert!((c.last().unwrap() - 6.0).abs() < 1e-12);
    }
}
