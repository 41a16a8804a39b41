use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::BoxSpec;
use super::spectral::relative_kinetic;
use crate::error::{Error, Result};
use crate::physcore::{k_sc, PhysicsParams};

/// Axis-aligned sub-box `prod_a [lo_a, hi_a)` of `[-L/2, L/2)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SubBox {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    fn check(&self, b: &BoxSpec) -> Result<()> {
        let half = 0.5 * b.l;
        if self.lo.len() != b.d || self.hi.len() != b.d {
            return Err(Error::DimensionMismatch("sub-box dimension".into()));
        }
        for (a, c) in self.lo.iter().zip(&self.hi) {
            if !(*a >= -half && c <= &half && a <= c) {
                return Err(Error::InvalidParameter(format!("sub-box [{a}, {c}) outside the box")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiYauRecord {
    /// `tr D^{1/2} 1_Omega D^{1/2}` with `D = (-Delta - mu)_-`, as a matrix trace.
    pub lhs: f64,
    /// `(|Omega| / L^d) q sum_p (p^2 - mu)_-`.
    pub rhs_discrete: f64,
    /// `(2/d) K_sc rho0^{1+2/d} |Omega|`.
    pub rhs_continuum: f64,
    /// Relative kinetic energy of `1_{Omega^c} Pi^- 1_{Omega^c} - Pi^-` in the basis.
    pub relative_kinetic: f64,
}

/// Matrix of the multiplication by `1_Omega` in the plane-wave basis.
pub fn indicator_matrix(b: &BoxSpec, omega: &SubBox) -> DMatrix<Complex64> {
    let n = b.size();
    let basis = b.basis();
    let h = b.spacing();
    let factor = |m: i64, lo: f64, hi: f64| -> Complex64 {
        if m == 0 {
            return Complex64::new((hi - lo) / b.l, 0.0);
        }
        // (1/L) int_lo^hi exp(-i k x) dx
        let k = h * m as f64;
        let e = |x: f64| Complex64::from_polar(1.0, -k * x);
        (e(hi) - e(lo)) / Complex64::new(0.0, -k * b.l)
    };
    DMatrix::from_fn(n, n, |i, j| {
        let mut z = Complex64::new(1.0, 0.0);
        for a in 0..b.d {
            z *= factor(basis[i][a] - basis[j][a], omega.lo[a], omega.hi[a]);
        }
        z
    })
}

pub fn li_yau_check(b: &BoxSpec, omega: &SubBox, params: &PhysicsParams) -> Result<LiYauRecord> {
    params.validate()?;
    omega.check(b)?;
    let mu = params.mu;
    let q = params.q as f64;
    let kin = b.kinetic();
    let n = b.size();
    let ind = indicator_matrix(b, omega);
    let sqrt_d: Vec<f64> = kin.iter().map(|&e| (mu - e).max(0.0).sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| ind[(i, j)] * (sqrt_d[i] * sqrt_d[j]));
    let lhs = q * m.trace().re;
    let rhs_discrete = omega.volume() / b.volume() * q * kin.iter().map(|&e| (mu - e).max(0.0)).sum::<f64>();
    let d = params.d as f64;
    let rhs_continuum = 2.0 / d * k_sc(params.d, params.q)? * params.rho0().powf(1.0 + 2.0 / d) * omega.volume();
    // gamma = 1_{Omega^c} Pi^- 1_{Omega^c}; Pi^- lies inside the basis.
    let mut comp = -ind;
    for i in 0..n {
        comp[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let pi = DMatrix::from_fn(n, n, |i, j| {
        if i == j && kin[i] <= mu {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let gamma = &comp * &pi * comp.adjoint();
    let qm = gamma - &pi;
    let relative_kinetic = relative_kinetic(b, &qm, params)?;
    Ok(LiYauRecord { lhs, rhs_discrete, rhs_continuum, relative_kinetic })
}
