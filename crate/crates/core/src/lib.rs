//! Numerics for Lieb-Thirring type inequalities for Fermi gases at positive
//! density: semiclassical constants, linear response functions, Rumin-type
//! integrals, exact diagonalisation in a periodic box and finite-dimensional
//! checks of the underlying trace inequalities.

pub mod boxsim;
pub mod error;
pub mod matoracle;
pub mod physcore;
pub mod quad;
pub mod response;
pub mod rumin;
pub mod special;

pub use error::{Error, Result};
pub use physcore::PhysicsParams;

/// Default number of candidate lattice points a counting routine may visit.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Default maximal plane-wave basis size.
pub const DEFAULT_BASIS_CAP: usize = 4096;

/// Resource caps. `LTLAB_BUDGET` holds either `N` (enumeration budget) or
/// `N,M` (enumeration budget and basis-size cap).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub enumeration: u64,
    pub basis: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { enumeration: DEFAULT_BUDGET, basis: DEFAULT_BASIS_CAP }
    }
}

impl Budget {
    pub fn parse(s: &str) -> Option<Self> {
        let mut b = Self::default();
        let mut parts = s.split(',');
        let first = parts.next()?.trim();
        if !first.is_empty() {
            b.enumeration = parse_count(first)? as u64;
        }
        if let Some(second) = parts.next() {
            b.basis = parse_count(second.trim())? as usize;
        }
        if parts.next().is_some() {
            return None;
        }
        Some(b)
    }

    pub fn from_env() -> Self {
        std::env::var("LTLAB_BUDGET")
            .ok()
            .and_then(|s| Self::parse(&s))
            .unwrap_or_default()
    }
}

fn parse_count(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    (v.is_finite() && v >= 1.0).then_some(v.floor())
}

/// Enumeration budget from the environment, falling back to `default`.
pub fn budget_from_env(default: u64) -> u64 {
    match std::env::var("LTLAB_BUDGET").ok().and_then(|s| Budget::parse(&s)) {
        Some(b) => b.enumeration,
        None => default,
    }
}
