//! Rumin-type integrals and lattice point counting in Fermi shells.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physcore::delta_t_with_rho0;
use crate::quad::{bisect, golden_section_min, integrate, Tolerance};
use crate::special::sphere_area;

/// `(2 pi)^{-d} |{p : |p^2 - mu| <= e}|` per spin state.
pub fn shell_volume(e: f64, d: usize, mu: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if !(e >= 0.0 && e.is_finite()) {
        return Err(Error::Domain { function: "shell_volume", arg: e });
    }
    let h = d as f64 / 2.0;
    let c = sphere_area(d)? / (d as f64 * (2.0 * PI).powi(d as i32));
    Ok(c * ((mu + e).powf(h) - (mu - e).max(0.0).powf(h)))
}

/// Continuum shell function at `mu = 1`.
pub fn f_continuum(e: f64, d: usize) -> Result<f64> {
    shell_volume(e, d, 1.0)
}

/// Density scale used with the Rumin integral, `|S^{d-1}| / (d (2 pi)^d)`.
pub fn rumin_rho0(d: usize) -> Result<f64> {
    Ok(sphere_area(d)? / (d as f64 * (2.0 * PI).powi(d as i32)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuminValue {
    pub rho: f64,
    pub value: f64,
    pub abs_error: f64,
}

/// `R_d(rho) = int_0^inf (sqrt(rho) - sqrt(f(e)))_+^2 de`.
pub fn rumin_r(rho: f64, d: usize) -> Result<RuminValue> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::Domain { function: "rumin_r", arg: rho });
    }
    if rho == 0.0 {
        return Ok(RuminValue { rho, value: 0.0, abs_error: 0.0 });
    }
    let f = |e: f64| f_continuum(e, d).expect("validated");
    // f is continuous and increasing from 0; find f(e*) = rho.
    let mut hi = 1.0;
    while f(hi) < rho {
        hi *= 2.0;
    }
    let e_star = bisect(|e| f(e) - rho, 0.0, hi);
    let sr = rho.sqrt();
    let r = integrate(
        |e| {
            let g = sr - f(e).sqrt();
            if g > 0.0 {
                g * g
            } else {
                0.0
            }
        },
        0.0,
        e_star,
        &[1.0],
        Tolerance::new(0.0, 1e-10),
        4000,
    )
    .require_converged()?;
    Ok(RuminValue { rho, value: r.value, abs_error: r.abs_error })
}

/// `R_d` on a logarithmic grid together with the infimum of `R_d / dT_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuminProfile {
    pub d: usize,
    pub rho_grid: Vec<f64>,
    pub r_values: Vec<f64>,
    pub khat: f64,
    pub argmin_rho: f64,
}

/// `inf_rho R_d(rho) / dT_1(rho)` over a logarithmic grid on `[rho_min, rho_max]`,
/// refined by golden-section search around the best grid point.
pub fn khat_with_grid(d: usize, rho_min: f64, rho_max: f64, points: usize) -> Result<RuminProfile> {
    if points < 3 || !(rho_min > 0.0 && rho_max > rho_min) {
        return Err(Error::InvalidParameter("khat grid".into()));
    }
    let r0 = rumin_rho0(d)?;
    let ratio = |ln_rho: f64| -> f64 {
        let rho = ln_rho.exp();
        let r = rumin_r(rho, d).map(|v| v.value).unwrap_or(f64::NAN);
        r / delta_t_with_rho0(rho, r0, d)
    };
    let (a, b) = (rho_min.ln(), rho_max.ln());
    let step = (b - a) / (points - 1) as f64;
    let mut rho_grid = Vec::with_capacity(points);
    let mut r_values = Vec::with_capacity(points);
    let mut best = (0, f64::INFINITY);
    for i in 0..points {
        let rho = (a + step * i as f64).exp();
        let r = rumin_r(rho, d)?.value;
        let v = r / delta_t_with_rho0(rho, r0, d);
        rho_grid.push(rho);
        r_values.push(r);
        if v < best.1 {
            best = (i, v);
        }
    }
    let lo = a + step * best.0.saturating_sub(1) as f64;
    let hi = (a + step * (best.0 + 1) as f64).min(b);
    let (x, v) = golden_section_min(ratio, lo, hi, 1e-10);
    let (x, v) = if v < best.1 { (x, v) } else { (a + step * best.0 as f64, best.1) };
    Ok(RuminProfile { d, rho_grid, r_values, khat: v, argmin_rho: x.exp() })
}

/// `khat` on the default grid: 400 points on `[1e-6, 1e8]`.
pub fn khat(d: usize) -> Result<RuminProfile> {
    khat_with_grid(d, 1e-6, 1e8, 400)
}

/// Number of integer points `n` in `Z^d` with `|n|^2 <= bound`.
pub fn count_sq_le(bound: i64, d: usize) -> u64 {
    if bound < 0 {
        return 0;
    }
    if d == 0 {
        return 1;
    }
    let m = isqrt(bound as u64) as i64;
    if d == 1 {
        return (2 * m + 1) as u64;
    }
    let mut total = count_sq_le(bound, d - 1);
    for n in 1..=m {
        total += 2 * count_sq_le(bound - n * n, d - 1);
    }
    total
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Work estimate for counting the ball of squared radius `bound`.
fn count_cost(bound: f64, d: usize) -> f64 {
    (2.0 * bound.max(0.0).sqrt() + 1.0).powi(d.saturating_sub(1) as i32)
}

/// `#{n in Z^d : |n| <= r}`.
pub fn lattice_count_ball(r: f64, d: usize) -> Result<u64> {
    lattice_count_ball_budget(r, d, crate::budget_from_env(crate::DEFAULT_BUDGET))
}

pub fn lattice_count_ball_budget(r: f64, d: usize, budget: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if !(r.is_finite()) {
        return Err(Error::Domain { function: "lattice_count_ball", arg: r });
    }
    if r < 0.0 {
        return Ok(0);
    }
    let r2 = r * r;
    let cost = count_cost(r2, d);
    if cost > budget as f64 {
        return Err(Error::BudgetExceeded { needed: cost as u64, budget });
    }
    Ok(count_sq_le(r2.floor() as i64, d))
}

/// Lattice momenta in a Fermi shell, `count / L^d = density`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeCount {
    pub l: f64,
    pub mu: f64,
    pub e: f64,
    pub count: u64,
    pub density: f64,
}

/// `L^{-d} #{p in (2 pi Z / L)^d : |p^2 - mu| <= e}` per spin state.
pub fn f_lattice(e: f64, d: usize, mu: f64, l: f64) -> Result<LatticeCount> {
    f_lattice_budget(e, d, mu, l, crate::budget_from_env(crate::DEFAULT_BUDGET))
}

pub fn f_lattice_budget(e: f64, d: usize, mu: f64, l: f64, budget: u64) -> Result<LatticeCount> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    if !(e >= 0.0 && e.is_finite()) {
        return Err(Error::Domain { function: "f_lattice", arg: e });
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("box length must be > 0, got {l}")));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("chemical potential must be >= 0, got {mu}")));
    }
    // p^2 = (2 pi / L)^2 |n|^2, so the shell is lo <= |n|^2 <= hi.
    let scale = (l / (2.0 * PI)).powi(2);
    let hi = (mu + e) * scale;
    let lo = (mu - e) * scale;
    let cost = count_cost(hi, d);
    if cost > budget as f64 {
        return Err(Error::BudgetExceeded { needed: cost as u64, budget });
    }
    let upper = count_sq_le(hi.floor() as i64, d);
    let lower = if lo > 0.0 { count_sq_le(lo.ceil() as i64 - 1, d) } else { 0 };
    let count = upper - lower;
    Ok(LatticeCount { l, mu, e, count, density: count as f64 / l.powi(d as i32) })
}

/// Shape of the lattice shell bound
/// `mu^{(d-1)/2}/L + mu^{d/2-1} e 1(e <= mu) + e^{d/2} 1(e >= mu)`.
pub fn lattice_bound_shape(e: f64, d: usize, mu: f64, l: f64) -> f64 {
    let df = d as f64;
    let mut s = mu.powf((df - 1.0) / 2.0) / l;
    if e <= mu {
        s += mu.powf(df / 2.0 - 1.0) * e;
    }
    if e >= mu {
        s += e.powf(df / 2.0);
    }
    s
}

/// A point of a lattice-shell sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellPoint {
    pub e: f64,
    pub mu: f64,
    pub l: f64,
}

/// Smallest constant `C` with `f_lattice <= C * shape` over the sweep.
pub fn fit_lattice_bound_constant(d: usize, sweep: &[ShellPoint]) -> Result<f64> {
    let mut c: f64 = 0.0;
    for p in sweep {
        let f = f_lattice(p.e, d, p.mu, p.l)?.density;
        let s = lattice_bound_shape(p.e, d, p.mu, p.l);
        if s > 0.0 {
            c = c.max(f / s);
        }
    }
    Ok(c)
}
