//! Linear response functions `Phi_d`, `Psi_d` and the one-dimensional weights.
//!
//! All arguments are the rescaled momentum `|k| / sqrt(mu)`, except for the
//! one-dimensional weights which take the physical `k` and `mu`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadResult, Tolerance};
use crate::special::{sphere_area, wallis};

const INNER_TOL: Tolerance = Tolerance::new(1e-13, 1e-13);
const OUTER_TOL: Tolerance = Tolerance::new(1e-12, 1e-12);
const MAX_PANELS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseSample {
    pub k: f64,
    pub value: f64,
    pub abs_error: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    Recursion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    /// The value itself blows up logarithmically.
    LogDivergence,
    /// Finite value, unbounded one-sided derivative.
    InfiniteDerivative,
}

/// Marks a singular point of a response function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceFlag {
    pub function: &'static str,
    pub at: f64,
    pub kind: DivergenceKind,
}

fn log_divergence(function: &'static str, at: f64) -> Response {
    Response::Divergent(DivergenceFlag { function, at, kind: DivergenceKind::LogDivergence })
}

/// `Psi_d` for `d >= 2` is finite at `k = 2` but has an infinite derivative there.
pub fn derivative_anomaly(k: f64, d: usize) -> Option<DivergenceFlag> {
    (d >= 2 && k == 2.0).then_some(DivergenceFlag { function: "psi_d", at: k, kind: DivergenceKind::InfiniteDerivative })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Response {
    Value(ResponseSample),
    Divergent(DivergenceFlag),
}

impl Response {
    pub fn value(&self) -> Option<f64> {
        match self {
            Response::Value(s) => Some(s.value),
            Response::Divergent(_) => None,
        }
    }

    pub fn abs_error(&self) -> Option<f64> {
        match self {
            Response::Value(s) => Some(s.abs_error),
            Response::Divergent(_) => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Response::Divergent(_))
    }
}

fn closed(k: f64, value: f64) -> Response {
    Response::Value(ResponseSample { k, value, abs_error: 8.0 * f64::EPSILON * value.abs(), method: Method::ClosedForm })
}

fn quad_sample(k: f64, r: QuadResult, scale: f64, method: Method) -> Result<Response> {
    let r = r.require_converged()?;
    Ok(Response::Value(ResponseSample { k, value: scale * r.value, abs_error: scale.abs() * r.abs_error, method }))
}

fn check_arg(function: &'static str, k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Domain { function, arg: k });
    }
    Ok(())
}

fn check_dim(d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

/// `log((2 + x) / |2 - x|)` for `x >= 0`, accurate for small `x`.
fn log_ratio(x: f64) -> f64 {
    let diff = 2.0 - x;
    if diff > 0.0 {
        (2.0 * x / diff).ln_1p()
    } else {
        (4.0 / -diff).ln_1p()
    }
}

/// `1 - sin(t)` without cancellation near `t = pi/2`.
fn one_minus_sin(t: f64) -> f64 {
    let s = (FRAC_PI_4 - 0.5 * t).sin();
    2.0 * s * s
}

/// `Phi_1` given `x` and `x - 2` separately, so that arguments close to the
/// singular point keep their relative accuracy.
fn phi1_core(x: f64, xm2: f64) -> QuadResult {
    if xm2 < 0.0 {
        // v = (x-2)/2 + (x/2) sin t sweeps [-1, x-1]
        let h = 0.5 * x;
        integrate(
            |t| {
                let s = one_minus_sin(t);
                1.0 / ((-xm2 + h * s) * (2.0 + h * s)).sqrt()
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            &[],
            INNER_TOL,
            MAX_PANELS,
        )
    } else {
        // v = sin t sweeps [-1, 1]
        integrate(
            |t| {
                let s = one_minus_sin(t);
                1.0 / ((xm2 + s) * (x + s)).sqrt()
            },
            -FRAC_PI_2,
            FRAC_PI_2,
            &[],
            INNER_TOL,
            MAX_PANELS,
        )
    }
}

/// `Phi_1(x) = int_{-1}^{min(1, x-1)} dv / (sqrt(1-v^2) sqrt((v-x)^2 - 1))`.
pub fn phi1(x: f64) -> Result<Response> {
    check_arg("phi1", x)?;
    if x == 2.0 {
        return Ok(log_divergence("phi1", x));
    }
    quad_sample(x, phi1_core(x, x - 2.0), 1.0, Method::Quadrature)
}

/// `Phi_3` on `[0, 2]` through its one-dimensional integral representation.
pub fn phi3_closed(k: f64) -> Result<Response> {
    check_arg("phi3_closed", k)?;
    if k > 2.0 {
        return Err(Error::Domain { function: "phi3_closed", arg: k });
    }
    if k == 0.0 {
        return Ok(closed(k, PI * PI));
    }
    let r = integrate(
        |u| {
            let num = u * (2.0 - k * u);
            let den = 2.0 + k * (1.0 - 2.0 * u);
            (num / den).clamp(0.0, 1.0).sqrt().asin()
        },
        0.0,
        1.0,
        &[],
        OUTER_TOL,
        MAX_PANELS,
    )
    .require_converged()?;
    let value = PI * PI + 2.0 * PI * k * (r.value - FRAC_PI_4);
    Ok(Response::Value(ResponseSample { k, value, abs_error: 2.0 * PI * k * r.abs_error, method: Method::Quadrature }))
}

/// `Phi_d(k)` for `d >= 1`, by the radial reduction to `Phi_1`.
pub fn phi_d(k: f64, d: usize) -> Result<Response> {
    check_dim(d, 1)?;
    check_arg("phi_d", k)?;
    if d == 1 {
        return phi1(k);
    }
    if k == 0.0 {
        // Phi_1(0) = pi/2
        let value = sphere_area(d - 1)? * FRAC_PI_2 * wallis(d - 2);
        return Ok(closed(k, value));
    }
    let s = sphere_area(d - 1)?;
    let pow = (d - 2) as i32;
    // r = cos t; the singular point is at sin t = k/2.
    let t_star = if k < 2.0 { (0.5 * k).asin() } else { FRAC_PI_2 };
    let r = integrate(
        |t| {
            let sin = t.sin();
            let x = k / sin;
            // x - 2 = (k - 2 sin t) / sin t, with k = 2 sin t*
            let xm2 = if k < 2.0 {
                -4.0 * (0.5 * (t + t_star)).cos() * (0.5 * (t - t_star)).sin() / sin
            } else {
                (k - 2.0) / sin + 2.0 * one_minus_sin(t) / sin
            };
            t.cos().powi(pow) * phi1_core(x, xm2).value
        },
        0.0,
        FRAC_PI_2,
        &[t_star],
        OUTER_TOL,
        MAX_PANELS,
    );
    quad_sample(k, r, s, Method::Recursion)
}

/// `Psi_1(k) = (1/(4 pi k)) log((2+k)/|2-k|)`.
pub fn psi1(k: f64) -> Result<Response> {
    check_arg("psi1", k)?;
    if k == 2.0 {
        return Ok(log_divergence("psi1", k));
    }
    if k == 0.0 {
        return Ok(closed(k, 1.0 / (4.0 * PI)));
    }
    Ok(closed(k, log_ratio(k) / (4.0 * PI * k)))
}

/// `Psi_2(k) = (1 - sqrt((1 - 4/k^2)_+)) / (8 pi)`.
pub fn psi2(k: f64) -> Result<Response> {
    check_arg("psi2", k)?;
    let inner = if k > 2.0 { (1.0 - 4.0 / (k * k)).sqrt() } else { 0.0 };
    Ok(closed(k, (1.0 - inner) / (8.0 * PI)))
}

/// `Psi_3(k) = (1 + (1/k)(1 - k^2/4) log((2+k)/|2-k|)) / (16 pi^2)`.
pub fn psi3(k: f64) -> Result<Response> {
    check_arg("psi3", k)?;
    if k == 0.0 {
        return Ok(closed(k, 1.0 / (8.0 * PI * PI)));
    }
    if k == 2.0 {
        return Ok(closed(k, 1.0 / (16.0 * PI * PI)));
    }
    let v = (1.0 + (1.0 - 0.25 * k * k) * log_ratio(k) / k) / (16.0 * PI * PI);
    Ok(closed(k, v))
}

/// `Psi_d(k)` by its defining radial quadrature (`d >= 2`) or closed form (`d = 1`).
pub fn psi_d(k: f64, d: usize) -> Result<Response> {
    check_dim(d, 1)?;
    check_arg("psi_d", k)?;
    if d == 1 {
        return psi1(k);
    }
    let s = sphere_area(d - 1)?;
    let two_pi_d = (2.0 * PI).powi(d as i32);
    if k == 0.0 {
        return Ok(closed(k, s / (2.0 * two_pi_d) * wallis(d - 2)));
    }
    let pow = (d - 2) as i32;
    // r = sin t, sqrt(1 - r^2) = cos t; log singularity at cos t = k/2.
    let t_star = if k < 2.0 { (0.5 * k).acos() } else { 0.0 };
    let r = integrate(
        |t| {
            let c = t.cos();
            let diff = if k <= 2.0 {
                // 2 cos t - k = 2 (cos t - cos t*)
                -4.0 * (0.5 * (t + t_star)).sin() * (0.5 * (t - t_star)).sin()
            } else {
                2.0 * c - k
            };
            let lg = if diff > 0.0 {
                (2.0 * k / diff).ln_1p()
            } else {
                (-4.0 * c / diff).ln_1p()
            };
            lg * t.sin().powi(pow) * c
        },
        0.0,
        FRAC_PI_2,
        &[t_star],
        OUTER_TOL,
        MAX_PANELS,
    );
    quad_sample(k, r, s / (2.0 * k * two_pi_d), Method::Quadrature)
}

/// `Psi_d(k)` for `d >= 3` through the reduction to `Psi_2` on two-dimensional slices.
pub fn psi_d_via_psi2(k: f64, d: usize) -> Result<Response> {
    check_dim(d, 3)?;
    check_arg("psi_d_via_psi2", k)?;
    let s = sphere_area(d - 2)?;
    let pre = s / (2.0 * PI).powi(d as i32 - 2);
    let pow = (d - 3) as i32;
    let t_star = if k < 2.0 { (0.5 * k).acos() } else { 0.0 };
    let r = integrate(
        |t| {
            let c = t.cos();
            let x = k / c;
            let p2 = if x > 2.0 { (1.0 - (1.0 - 4.0 / (x * x)).sqrt()) / (8.0 * PI) } else { 1.0 / (8.0 * PI) };
            t.sin().powi(pow) * c * p2
        },
        0.0,
        FRAC_PI_2,
        &[t_star],
        OUTER_TOL,
        MAX_PANELS,
    );
    quad_sample(k, r, pre, Method::Recursion)
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParameter(format!("chemical potential must be > 0, got {mu}")));
    }
    Ok(())
}

/// One-dimensional density weight
/// `w(k) = sqrt(mu)|k| / ((sqrt(mu)+|k|) log((2 sqrt(mu)+|k|)/|2 sqrt(mu)-|k||))`.
pub fn weight_density_1d(k: f64, mu: f64) -> Result<Response> {
    check_mu(mu)?;
    if !k.is_finite() {
        return Err(Error::Domain { function: "weight_density_1d", arg: k });
    }
    let sm = mu.sqrt();
    let x = k.abs() / sm;
    if x == 0.0 {
        return Ok(closed(k, sm));
    }
    if x == 2.0 {
        return Ok(closed(k, 0.0));
    }
    Ok(closed(k, sm * x / ((1.0 + x) * log_ratio(x))))
}

/// One-dimensional potential weight `F_1(k) = 1 / w(k)`.
pub fn weight_potential_1d(k: f64, mu: f64) -> Result<Response> {
    check_mu(mu)?;
    if !k.is_finite() {
        return Err(Error::Domain { function: "weight_potential_1d", arg: k });
    }
    let sm = mu.sqrt();
    let x = k.abs() / sm;
    if x == 0.0 {
        return Ok(closed(k, 1.0 / sm));
    }
    if x == 2.0 {
        return Ok(log_divergence("weight_potential_1d", k));
    }
    Ok(closed(k, (1.0 + x) * log_ratio(x) / (sm * x)))
}

/// The response functions available for tabulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ResponseFunction {
    Phi { d: usize },
    Phi3Closed,
    Psi { d: usize },
    PsiViaPsi2 { d: usize },
    WeightDensity1d { mu: f64 },
    WeightPotential1d { mu: f64 },
}

impl ResponseFunction {
    pub fn eval(&self, k: f64) -> Result<Response> {
        match *self {
            ResponseFunction::Phi { d } => phi_d(k, d),
            ResponseFunction::Phi3Closed => phi3_closed(k),
            ResponseFunction::Psi { d } => psi_d(k, d),
            ResponseFunction::PsiViaPsi2 { d } => psi_d_via_psi2(k, d),
            ResponseFunction::WeightDensity1d { mu } => weight_density_1d(k, mu),
            ResponseFunction::WeightPotential1d { mu } => weight_potential_1d(k, mu),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ResponseFunction::Phi { d } => format!("phi_{d}"),
            ResponseFunction::Phi3Closed => "phi3_closed".into(),
            ResponseFunction::Psi { d } => format!("psi_{d}"),
            ResponseFunction::PsiViaPsi2 { d } => format!("psi_{d}_via_psi2"),
            ResponseFunction::WeightDensity1d { .. } => "weight_density_1d".into(),
            ResponseFunction::WeightPotential1d { .. } => "weight_potential_1d".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseTable {
    pub function: String,
    pub rows: Vec<Response>,
}

/// Evaluates `f` on every grid point, preserving grid order.
pub fn tabulate(f: ResponseFunction, grid: &[f64]) -> Result<ResponseTable> {
    let rows = grid.iter().map(|&k| f.eval(k)).collect::<Result<Vec<_>>>()?;
    Ok(ResponseTable { function: f.label(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi1_limits() {
        assert!((phi1(0.0).unwrap().value().unwrap() - FRAC_PI_2).abs() < 1e-13);
        assert!(phi1(2.0).unwrap().is_divergent());
        assert!(phi1(-0.1).is_err());
        let big = 1e6;
        assert!((phi1(big).unwrap().value().unwrap() * big / PI - 1.0).abs() < 1e-6);
    }

    #[test]
    fn psi_closed_forms_at_zero() {
        assert!((psi1(0.0).unwrap().value().unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((psi1(1e-9).unwrap().value().unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-12);
        assert!((psi3(1e-9).unwrap().value().unwrap() - 1.0 / (8.0 * PI * PI)).abs() < 1e-12);
        assert!(psi1(2.0).unwrap().is_divergent());
    }

    #[test]
    fn weights_at_special_points() {
        assert_eq!(weight_density_1d(0.0, 4.0).unwrap().value(), Some(2.0));
        assert_eq!(weight_density_1d(4.0, 4.0).unwrap().value(), Some(0.0));
        assert!(weight_potential_1d(-4.0, 4.0).unwrap().is_divergent());
        assert!(weight_density_1d(1.0, 0.0).is_err());
    }
}
