use serde::{Deserialize, Serialize};

use super::basis::BoxSpec;
use super::potential::FourierPotential;
use super::spectral::Spectrum;
use crate::error::{Error, Result};
use crate::physcore::PhysicsParams;
use crate::quad::{integrate, Tolerance};

/// `f_{T,mu}(x) = -T log(1 + exp(-(x - mu)/T))`.
pub fn fermi_f(x: f64, mu: f64, t: f64) -> f64 {
    let z = -(x - mu) / t;
    -t * (z.max(0.0) + (-z.abs()).exp().ln_1p())
}

/// `f'_{T,mu}(x) = 1 / (1 + exp((x - mu)/T))`, the Fermi-Dirac occupation.
pub fn fermi_f_prime(x: f64, mu: f64, t: f64) -> f64 {
    let y = (x - mu) / t;
    if y > 0.0 {
        let e = (-y).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + y.exp())
    }
}

/// `f''_{T,mu}(x) = -exp(y) / (T (1 + exp(y))^2)` with `y = (x - mu)/T`.
pub fn fermi_f_second(x: f64, mu: f64, t: f64) -> f64 {
    let y = ((x - mu) / t).abs();
    let e = (-y).exp();
    -e / (t * (1.0 + e) * (1.0 + e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyT {
    pub temperature: f64,
    /// Direct spectral sum.
    pub free_energy: f64,
    /// `-int E_box(lambda) f''(lambda) d lambda`.
    pub lambda_quadrature: f64,
}

fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("temperature must be > 0, got {t}")));
    }
    Ok(())
}

/// `q sum f(lambda_i^V) - q sum f(p^2) - q c_0 sum f'(p^2)`.
pub fn free_energy_t(b: &BoxSpec, v: &FourierPotential, params: &PhysicsParams, t: f64) -> Result<f64> {
    params.validate()?;
    check_t(t)?;
    let sp = Spectrum::compute(b, v)?;
    Ok(free_energy_from_spectrum(&sp, v.c0(), params, t))
}

pub fn free_energy_from_spectrum(sp: &Spectrum, c0: f64, params: &PhysicsParams, t: f64) -> f64 {
    let mu = params.mu;
    let q = params.q as f64;
    let pert: f64 = sp.eig.values.iter().map(|&l| fermi_f(l, mu, t)).sum();
    let free: f64 = sp.kinetic_sorted.iter().map(|&e| fermi_f(e, mu, t)).sum();
    let occ: f64 = sp.kinetic.iter().map(|&e| fermi_f_prime(e, mu, t)).sum();
    q * pert - q * free - q * c0 * occ
}

/// Both evaluations of the positive-temperature relative free energy.
pub fn free_energy_t_both(b: &BoxSpec, v: &FourierPotential, params: &PhysicsParams, t: f64) -> Result<FreeEnergyT> {
    params.validate()?;
    check_t(t)?;
    let sp = Spectrum::compute(b, v)?;
    let c0 = v.c0();
    let direct = free_energy_from_spectrum(&sp, c0, params, t);
    let mu = params.mu;
    let (lo, hi) = (mu - 40.0 * t, mu + 40.0 * t);
    let breaks: Vec<f64> = sp.eig.values.iter().chain(&sp.kinetic).copied().filter(|&x| x > lo && x < hi).collect();
    let r = integrate(
        |lam| sp.relative_energy_box(lam, params.q, c0) * fermi_f_second(lam, mu, t),
        lo,
        hi,
        &breaks,
        Tolerance::new(1e-13, 1e-12),
        20000,
    )
    .require_converged()?;
    Ok(FreeEnergyT { temperature: t, free_energy: direct, lambda_quadrature: -r.value })
}
