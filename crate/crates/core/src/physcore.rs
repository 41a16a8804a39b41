//! Free Fermi gas and semiclassical constants in units `hbar = 2m = 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::sphere_area;

/// Physical parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub d: usize,
    /// Spin degeneracy.
    pub q: u32,
    /// Chemical potential.
    pub mu: f64,
    /// Temperature, `None` means the ground state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

impl PhysicsParams {
    pub fn new(d: usize, q: u32, mu: f64) -> Result<Self> {
        let p = Self { d, q, mu, temperature: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_temperature(mut self, t: f64) -> Result<Self> {
        self.temperature = Some(t);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidDimension(self.d));
        }
        if self.q == 0 {
            return Err(Error::InvalidParameter("spin degeneracy q must be >= 1".into()));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidParameter(format!("chemical potential must be > 0, got {}", self.mu)));
        }
        if let Some(t) = self.temperature {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParameter(format!("temperature must be > 0, got {t}")));
            }
        }
        Ok(())
    }

    pub fn rho0(&self) -> f64 {
        rho0(self.mu, self.d, self.q).expect("validated")
    }
}

fn check(d: usize, q: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if q == 0 {
        return Err(Error::InvalidParameter("spin degeneracy q must be >= 1".into()));
    }
    Ok(())
}

fn two_pi_pow(d: usize) -> f64 {
    (2.0 * PI).powi(d as i32)
}

/// Semiclassical kinetic constant `K_sc`.
pub fn k_sc(d: usize, q: u32) -> Result<f64> {
    check(d, q)?;
    let df = d as f64;
    let s = sphere_area(d)?;
    Ok(df / (df + 2.0) * (df * two_pi_pow(d) / (q as f64 * s)).powf(2.0 / df))
}

/// Semiclassical Lieb-Thirring constant `L_sc` for the exponent 1.
pub fn l_sc(d: usize, q: u32) -> Result<f64> {
    check(d, q)?;
    let df = d as f64;
    let s = sphere_area(d)?;
    Ok(2.0 * q as f64 * s / (df * (df + 2.0) * two_pi_pow(d)))
}

/// `(p L_sc)^{p'} (p' K_sc)^p` with `p = 1 + d/2`, `p' = 1 + 2/d`; equal to 1.
pub fn duality_product(d: usize, q: u32) -> Result<f64> {
    let df = d as f64;
    let p = 1.0 + df / 2.0;
    let pp = 1.0 + 2.0 / df;
    Ok((p * l_sc(d, q)?).powf(pp) * (pp * k_sc(d, q)?).powf(p))
}

/// Free-gas density at chemical potential `mu`.
pub fn rho0(mu: f64, d: usize, q: u32) -> Result<f64> {
    check(d, q)?;
    if !(mu >= 0.0) {
        return Err(Error::Domain { function: "rho0", arg: mu });
    }
    let s = sphere_area(d)?;
    Ok(q as f64 * s * mu.powf(d as f64 / 2.0) / (d as f64 * two_pi_pow(d)))
}

/// Chemical potential of the free gas at density `rho`.
pub fn mu_from_rho0(rho: f64, d: usize, q: u32) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Domain { function: "mu_from_rho0", arg: rho });
    }
    let df = d as f64;
    Ok((2.0 + df) / df * k_sc(d, q)? * rho.powf(2.0 / df))
}

/// Kinetic energy density `(d/2) L_sc mu^{1+d/2}` of the free gas.
pub fn kinetic_density(mu: f64, d: usize, q: u32) -> Result<f64> {
    let df = d as f64;
    Ok(df / 2.0 * l_sc(d, q)? * mu.powf(1.0 + df / 2.0))
}

/// Semiclassical relative kinetic energy density
/// `dT(rho) = (rho0 + rho)_+^{1+2/d} - rho0^{1+2/d} - ((d+2)/d) rho0^{2/d} rho`.
///
/// Below `-rho0` the positive part is zero and the expression is affine.
pub fn delta_t_with_rho0(rho: f64, rho0: f64, d: usize) -> f64 {
    let df = d as f64;
    let e = 1.0 + 2.0 / df;
    if rho0 > 0.0 && rho > -rho0 {
        // rho0^e ((1+x)^e - 1 - e x) with x = rho / rho0, without cancellation for small x
        let x = rho / rho0;
        return rho0.powf(e) * ((e * x.ln_1p()).exp_m1() - e * x);
    }
    let shifted = (rho0 + rho).max(0.0);
    shifted.powf(e) - rho0.powf(e) - e * rho0.powf(2.0 / df) * rho
}

/// `dT_mu(rho)` with `rho0 = rho0(mu)` taken from `params`.
pub fn delta_t(rho: f64, params: &PhysicsParams) -> Result<f64> {
    params.validate()?;
    if !rho.is_finite() {
        return Err(Error::Domain { function: "delta_t", arg: rho });
    }
    Ok(delta_t_with_rho0(rho, params.rho0(), params.d))
}

/// Exponents `(a, b)` with `dT_mu(rho) = mu^a dT_1(rho mu^b)`.
pub fn delta_t_scaling_exponents(d: usize) -> (f64, f64) {
    let df = d as f64;
    (1.0 + df / 2.0, -df / 2.0)
}

/// Legendre dual constant `L(K) = (2/(d+2)) (d/((d+2)K))^{d/2}`.
pub fn legendre_dual_constant(k: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if !(k > 0.0) {
        return Err(Error::Domain { function: "legendre_dual_constant", arg: k });
    }
    let df = d as f64;
    Ok(2.0 / (df + 2.0) * (df / ((df + 2.0) * k)).powf(df / 2.0))
}

/// Pointwise integrand `(V - mu)_-^{1+d/2} - mu^{1+d/2} + ((2+d)/2) mu^{d/2} V`.
pub fn sc_potential_integrand(v: f64, mu: f64, d: usize) -> f64 {
    let df = d as f64;
    let neg = (mu - v).max(0.0);
    neg.powf(1.0 + df / 2.0) - mu.powf(1.0 + df / 2.0) + (2.0 + df) / 2.0 * mu.powf(df / 2.0) * v
}

/// Quadrature of the semiclassical potential functional: `sum_i w_i g(V_i)`.
pub fn sc_potential_functional(values: &[f64], weights: &[f64], params: &PhysicsParams) -> Result<f64> {
    params.validate()?;
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values vs {} weights",
            values.len(),
            weights.len()
        )));
    }
    if let Some(&bad) = values.iter().chain(weights).find(|x| !x.is_finite()) {
        return Err(Error::Domain { function: "sc_potential_functional", arg: bad });
    }
    Ok(values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| w * sc_potential_integrand(v, params.mu, params.d))
        .sum())
}
