//! Gamma function and sphere areas.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gamma function (Lanczos approximation).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Surface area `|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)` of the unit sphere in `R^n`.
///
/// `|S^0| = 2` counts the two points `{-1, 1}`.
pub fn sphere_area(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension(n));
    }
    let h = n as f64 / 2.0;
    Ok(2.0 * PI.powf(h) / gamma(h))
}

/// `int_0^{pi/2} sin^m(t) dt`, the Wallis integral.
pub fn wallis(m: usize) -> f64 {
    // int_0^{pi/2} sin^m = sqrt(pi)/2 * Gamma((m+1)/2) / Gamma(m/2 + 1)
    let mut acc = if m % 2 == 0 { PI / 2.0 } else { 1.0 };
    let mut k = if m % 2 == 0 { 2 } else { 3 };
    while k <= m {
        acc *= (k - 1) as f64 / k as f64;
        k += 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_factorials() {
        let mut f = 1.0;
        for n in 1..15 {
            assert!((gamma(n as f64) - f).abs() <= 1e-13 * f);
            f *= n as f64;
        }
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn low_dimensional_spheres() {
        assert!((sphere_area(1).unwrap() - 2.0).abs() < 1e-14);
        assert!((sphere_area(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        assert!(sphere_area(0).is_err());
    }

    #[test]
    fn wallis_values() {
        assert!((wallis(0) - PI / 2.0).abs() < 1e-15);
        assert!((wallis(1) - 1.0).abs() < 1e-15);
        assert!((wallis(2) - PI / 4.0).abs() < 1e-15);
        assert!((wallis(3) - 2.0 / 3.0).abs() < 1e-15);
    }
}
