use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Budget;

/// Periodic box `[-L/2, L/2)^d` with plane waves `p = 2 pi n / L`, `|n|_inf <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub d: usize,
    pub l: f64,
    pub n_max: i64,
}

impl BoxSpec {
    pub fn new(d: usize, l: f64, n_max: i64) -> Result<Self> {
        Self::with_cap(d, l, n_max, Budget::from_env().basis)
    }

    pub fn with_cap(d: usize, l: f64, n_max: i64, cap: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidDimension(d));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter(format!("box length must be > 0, got {l}")));
        }
        if n_max < 1 {
            return Err(Error::InvalidParameter(format!("n_max must be >= 1, got {n_max}")));
        }
        let side = (2 * n_max + 1) as f64;
        let size = side.powi(d as i32);
        if size > cap as f64 {
            return Err(Error::BudgetExceeded { needed: size as u64, budget: cap as u64 });
        }
        Ok(Self { d, l, n_max })
    }

    /// Momentum lattice spacing `2 pi / L`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// `(2 pi / L)^2`, the unit of kinetic energy on the lattice.
    pub fn energy_unit(&self) -> f64 {
        self.spacing().powi(2)
    }

    /// Kinetic energy at the edge of the basis, `(2 pi n_max / L)^2`.
    pub fn cutoff_energy(&self) -> f64 {
        (self.spacing() * self.n_max as f64).powi(2)
    }

    pub fn side(&self) -> usize {
        (2 * self.n_max + 1) as usize
    }

    pub fn size(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(self.d as i32)
    }

    /// Lattice vector of basis element `i`, lexicographic order.
    pub fn index_to_n(&self, mut i: usize) -> Vec<i64> {
        let side = self.side();
        let mut n = vec![0; self.d];
        for a in (0..self.d).rev() {
            n[a] = (i % side) as i64 - self.n_max;
            i /= side;
        }
        n
    }

    /// Basis index of `n`, if it lies in the basis.
    pub fn n_to_index(&self, n: &[i64]) -> Option<usize> {
        let side = self.side();
        let mut i = 0;
        for &c in n {
            if c.abs() > self.n_max {
                return None;
            }
            i = i * side + (c + self.n_max) as usize;
        }
        Some(i)
    }

    pub fn basis(&self) -> Vec<Vec<i64>> {
        (0..self.size()).map(|i| self.index_to_n(i)).collect()
    }

    /// `|p|^2` for every basis element.
    pub fn kinetic(&self) -> Vec<f64> {
        let u = self.energy_unit();
        self.basis().iter().map(|n| u * norm2(n) as f64).collect()
    }

    /// Whether `n` sits on the outermost shell `|n|_inf = n_max`.
    pub fn on_boundary(&self, n: &[i64]) -> bool {
        n.iter().any(|c| c.abs() == self.n_max)
    }
}

pub fn norm2(n: &[i64]) -> i64 {
    n.iter().map(|c| c * c).sum()
}

/// Lattice vectors with `|n|^2 (2 pi / L)^2 <= mu`, lexicographic order.
pub fn fermi_sea(d: usize, l: f64, mu: f64) -> Vec<Vec<i64>> {
    let u = (2.0 * PI / l).powi(2);
    let r = (mu / u).sqrt().floor() as i64 + 1;
    let mut out = Vec::new();
    let mut n = vec![-r; d];
    loop {
        if u * norm2(&n) as f64 <= mu {
            out.push(n.clone());
        }
        let mut a = d;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            if n[a] < r {
                n[a] += 1;
                break;
            }
            n[a] = -r;
        }
    }
}
