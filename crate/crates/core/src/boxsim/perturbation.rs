use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::basis::{fermi_sea, norm2};
use super::potential::FourierPotential;
use crate::error::{Error, Result};
use crate::physcore::PhysicsParams;
use crate::quad::{integrate, Tolerance};
use crate::response::psi_d;

/// Fails if a lattice kinetic energy lies within `1e-10` of `mu`.
pub fn check_fermi_level(d: usize, l: f64, mu: f64) -> Result<()> {
    let u = (2.0 * PI / l).powi(2);
    let r = (mu / u).sqrt().floor() as i64 + 1;
    // |n|^2 is an integer; only the two integers around mu / u can be close.
    let target = mu / u;
    for s in [target.floor() as i64, target.ceil() as i64] {
        let e = u * s as f64;
        if (e - mu).abs() < 1e-10 && is_sum_of_squares(s, d, r) {
            return Err(Error::Degenerate(format!("mu = {mu} is a lattice eigenvalue in a box of side {l}")));
        }
    }
    Ok(())
}

fn is_sum_of_squares(s: i64, d: usize, r: i64) -> bool {
    if d == 0 {
        return s == 0;
    }
    (0..=r).any(|a| a * a <= s && is_sum_of_squares(s - a * a, d - 1, r))
}

/// Discrete second-order coefficient
/// `-q sum_{p^2 <= mu} sum_{p'^2 > mu} |c_{p'-p}|^2 / (p'^2 - p^2)`.
///
/// The outer sum runs over the support of `V` in lexicographic order and the
/// inner one over the Fermi sea in lexicographic order.
pub fn second_order_box(v: &FourierPotential, params: &PhysicsParams) -> Result<f64> {
    params.validate()?;
    if params.d != v.d {
        return Err(Error::DimensionMismatch(format!("params d = {}, potential d = {}", params.d, v.d)));
    }
    let mu = params.mu;
    check_fermi_level(v.d, v.l, mu)?;
    let u = (2.0 * PI / v.l).powi(2);
    let sea = fermi_sea(v.d, v.l, mu);
    let sea_n2: Vec<i64> = sea.iter().map(|n| norm2(n)).collect();
    let mut total = 0.0;
    for (k, c) in &v.coeffs {
        let w = c.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (p, &p2) in sea.iter().zip(&sea_n2) {
            let mut pp2 = 0i64;
            for (a, b) in p.iter().zip(k) {
                pp2 += (a + b) * (a + b);
            }
            if u * pp2 as f64 > mu {
                inner += 1.0 / (u * (pp2 - p2) as f64);
            }
        }
        total += w * inner;
    }
    Ok(-(params.q as f64) * total)
}

/// Continuum second-order coefficient in `d = 1`:
/// `-q mu^{-1/2} int Psi_1(|k|/sqrt(mu)) |V^(k)|^2 dk` for a unitary transform `vhat`.
pub fn second_order_continuum_1d<F: Fn(f64) -> f64>(vhat_sq: F, params: &PhysicsParams, kmax: f64) -> Result<f64> {
    if params.d != 1 {
        return Err(Error::InvalidDimension(params.d));
    }
    let sm = params.mu.sqrt();
    let r = integrate(
        |k| {
            let psi = psi_d(k / sm, 1).ok().and_then(|r| r.value()).unwrap_or(0.0);
            psi * vhat_sq(k)
        },
        0.0,
        kmax,
        &[2.0 * sm],
        Tolerance::new(1e-14, 1e-11),
        4000,
    )
    .require_converged()?;
    // even integrand: int over R is twice the half line
    Ok(-(params.q as f64) * 2.0 * r.value / sm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeierlsLevel {
    pub width: f64,
    pub l: f64,
    pub second_order: f64,
    pub v_l2_sq: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeierlsScan {
    pub levels: Vec<PeierlsLevel>,
    /// Least-squares slope of the ratio against `log(1/width)`.
    pub slope: f64,
    /// `slope * 2 sqrt(mu) / 3`, comparable with `q / (12 pi)` in `d = 1`.
    pub implied_l1_prime: f64,
}

/// Box side with lattice spacing at most `width / resolution`, nudged off
/// Fermi-level degeneracies.
pub fn peierls_box_length(d: usize, mu: f64, width: f64, resolution: f64) -> Result<f64> {
    let sm = mu.sqrt();
    let m = (resolution * sm / width).ceil();
    let mut frac = 0.37;
    for _ in 0..50 {
        let l = 2.0 * PI * (m + frac) / sm;
        if check_fermi_level(d, l, mu).is_ok() {
            return Ok(l);
        }
        frac += 0.013;
    }
    Err(Error::Degenerate("no off-resonant box length found".into()))
}

/// Ratios `|second_order_box(V_j)| / int V_j^2` for packets concentrated at
/// `|k| = 2 sqrt(mu)` with the given widths.
pub fn peierls_scan(params: &PhysicsParams, widths: &[f64], resolution: f64) -> Result<PeierlsScan> {
    params.validate()?;
    if !(1..=2).contains(&params.d) {
        return Err(Error::InvalidDimension(params.d));
    }
    let center = 2.0 * params.mu.sqrt();
    let mut levels = Vec::with_capacity(widths.len());
    for &w in widths {
        let l = peierls_box_length(params.d, params.mu, w, resolution)?;
        let v = FourierPotential::peierls_packet(l, params.d, 1.0, center, w)?;
        let s2 = second_order_box(&v, params)?;
        let norm = v.l2_norm_sq();
        levels.push(PeierlsLevel { width: w, l, second_order: s2, v_l2_sq: norm, ratio: s2.abs() / norm });
    }
    let xs: Vec<f64> = levels.iter().map(|l| -l.width.ln()).collect();
    let ys: Vec<f64> = levels.iter().map(|l| l.ratio).collect();
    let slope = linear_slope(&xs, &ys);
    Ok(PeierlsScan { levels, slope, implied_l1_prime: slope * 2.0 * params.mu.sqrt() / 3.0 })
}

pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
