use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::basis::{norm2, BoxSpec};
use crate::error::{Error, Result};

/// Relative size below which Gaussian tails are dropped.
const TAIL: f64 = 1e-17;

/// Band-limited periodic potential `V(x) = sum_n c_n exp(i 2 pi n.x / L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPotential {
    pub l: f64,
    pub d: usize,
    pub coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl FourierPotential {
    /// Checks `c_{-n} = conj(c_n)` up to `1e-14` relative to the largest coefficient.
    pub fn new(l: f64, d: usize, coeffs: BTreeMap<Vec<i64>, Complex64>) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter(format!("box length must be > 0, got {l}")));
        }
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        let scale = coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        for (n, c) in &coeffs {
            if n.len() != d {
                return Err(Error::DimensionMismatch(format!("mode {n:?} in dimension {d}")));
            }
            let m: Vec<i64> = n.iter().map(|x| -x).collect();
            let partner = coeffs.get(&m).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > 1e-14 * scale {
                return Err(Error::NonHermitianPotential(n.clone()));
            }
        }
        Ok(Self { l, d, coeffs })
    }

    pub fn zero(l: f64, d: usize) -> Result<Self> {
        Self::new(l, d, BTreeMap::new())
    }

    /// Fills in `c_{-n} = conj(c_n)` for modes given on one side only.
    /// Modes given on both sides must already agree.
    pub fn from_half_spectrum(l: f64, d: usize, modes: &[(Vec<i64>, Complex64)]) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (n, c) in modes {
            if coeffs.insert(n.clone(), *c).is_some() {
                return Err(Error::InvalidParameter(format!("mode {n:?} given twice")));
            }
        }
        let given: Vec<(Vec<i64>, Complex64)> = coeffs.iter().map(|(n, c)| (n.clone(), *c)).collect();
        for (n, c) in given {
            let m: Vec<i64> = n.iter().map(|x| -x).collect();
            coeffs.entry(m).or_insert(c.conj());
        }
        Self::new(l, d, coeffs)
    }

    /// `a cos(2 pi n.x / L)`.
    pub fn cosine(l: f64, d: usize, amplitude: f64, mode: &[i64]) -> Result<Self> {
        if mode.len() != d || mode.iter().all(|&c| c == 0) {
            return Err(Error::InvalidParameter(format!("cosine mode {mode:?} in dimension {d}")));
        }
        let half = Complex64::new(amplitude / 2.0, 0.0);
        let m: Vec<i64> = mode.iter().map(|x| -x).collect();
        let coeffs = BTreeMap::from([(mode.to_vec(), half), (m, half)]);
        Self::new(l, d, coeffs)
    }

    /// Periodisation of `a exp(-|x|^2 / (2 sigma^2))`, with Fourier tails below
    /// `1e-17` relative dropped.
    pub fn gaussian_bump(l: f64, d: usize, amplitude: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
        }
        let h = 2.0 * PI / l;
        let c0 = amplitude * (2.0 * PI * sigma * sigma).powf(d as f64 / 2.0) / l.powi(d as i32);
        let kmax = (-2.0 * TAIL.ln()).sqrt() / sigma;
        let nmax = (kmax / h).ceil() as i64;
        let mut coeffs = BTreeMap::new();
        for n in cube(d, nmax) {
            let k2 = h * h * norm2(&n) as f64;
            let w = (-0.5 * sigma * sigma * k2).exp();
            if w >= TAIL {
                coeffs.insert(n, Complex64::new(c0 * w, 0.0));
            }
        }
        Self::new(l, d, coeffs)
    }

    /// Real packet with `c_n = a exp(-(|k_n| - center)^2 / (4 width^2))`, so that
    /// `|c_n|^2` is a Gaussian of standard deviation `width` in `|k|`.
    pub fn peierls_packet(l: f64, d: usize, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && center >= 0.0) {
            return Err(Error::InvalidParameter("peierls packet needs width > 0 and center >= 0".into()));
        }
        let h = 2.0 * PI / l;
        let reach = 2.0 * width * (-TAIL.ln()).sqrt();
        let nmax = ((center + reach) / h).ceil() as i64;
        let mut coeffs = BTreeMap::new();
        for n in cube(d, nmax) {
            let k = h * (norm2(&n) as f64).sqrt();
            let dk = k - center;
            if dk.abs() <= reach {
                coeffs.insert(n, Complex64::new(amplitude * (-dk * dk / (4.0 * width * width)).exp(), 0.0));
            }
        }
        Self::new(l, d, coeffs)
    }

    /// Zero-mean potential with `n_modes` random modes in `0 < |n|_inf <= bandwidth`
    /// and coefficients of modulus at most `amplitude`.
    pub fn random<R: Rng>(rng: &mut R, l: f64, d: usize, n_modes: usize, bandwidth: i64, amplitude: f64) -> Result<Self> {
        if bandwidth < 1 {
            return Err(Error::InvalidParameter(format!("bandwidth must be >= 1, got {bandwidth}")));
        }
        let available = ((2 * bandwidth + 1).pow(d as u32) - 1) / 2;
        if n_modes as i64 > available {
            return Err(Error::InvalidParameter(format!("{n_modes} modes requested, {available} available")));
        }
        let mut modes: Vec<(Vec<i64>, Complex64)> = Vec::new();
        while modes.len() < n_modes {
            let n: Vec<i64> = (0..d).map(|_| rng.gen_range(-bandwidth..=bandwidth)).collect();
            let m: Vec<i64> = n.iter().map(|x| -x).collect();
            if n.iter().all(|&c| c == 0) || modes.iter().any(|(k, _)| *k == n || *k == m) {
                continue;
            }
            let c = Complex64::from_polar(amplitude * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
            modes.push((n, c));
        }
        Self::from_half_spectrum(l, d, &modes)
    }

    pub fn c0(&self) -> f64 {
        self.coeffs.get(&vec![0; self.d]).map(|c| c.re).unwrap_or(0.0)
    }

    /// Largest `|n|_inf` in the support.
    pub fn bandwidth(&self) -> i64 {
        self.coeffs.keys().map(|n| n.iter().map(|c| c.abs()).max().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn is_real_coeffs(&self) -> bool {
        self.coeffs.values().all(|c| c.im == 0.0)
    }

    /// `V(x)` from the Fourier series.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let h = 2.0 * PI / self.l;
        let mut s = 0.0;
        for (n, c) in &self.coeffs {
            let phase: f64 = n.iter().zip(x).map(|(&ni, &xi)| h * ni as f64 * xi).sum();
            s += c.re * phase.cos() - c.im * phase.sin();
        }
        s
    }

    /// `int V^2 = L^d sum |c_n|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.l.powi(self.d as i32) * self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Unitary Fourier transform at `k_n`: `(2 pi)^{-d/2} L^d c_n`.
    pub fn unitary_hat(&self, n: &[i64]) -> Complex64 {
        let c = self.coeffs.get(n).copied().unwrap_or_default();
        c * (self.l.powi(self.d as i32) / (2.0 * PI).powf(self.d as f64 / 2.0))
    }

    /// Checks that the potential fits the given box.
    pub fn check_compatible(&self, b: &BoxSpec) -> Result<()> {
        if self.d != b.d {
            return Err(Error::DimensionMismatch(format!("potential d = {}, box d = {}", self.d, b.d)));
        }
        if (self.l - b.l).abs() > 1e-12 * b.l {
            return Err(Error::InvalidParameter(format!("potential L = {} differs from box L = {}", self.l, b.l)));
        }
        if let Some(n) = self.coeffs.keys().find(|n| n.iter().any(|c| c.abs() > b.n_max)) {
            return Err(Error::ModeOutsideBasis(n.clone()));
        }
        Ok(())
    }

    /// Multiplies every coefficient by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            l: self.l,
            d: self.d,
            coeffs: self.coeffs.iter().map(|(n, c)| (n.clone(), c * t)).collect(),
        }
    }
}

/// All `n` with `|n|_inf <= r`, lexicographic order.
pub fn cube(d: usize, r: i64) -> Vec<Vec<i64>> {
    let side = (2 * r + 1) as usize;
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut i| {
            let mut n = vec![0; d];
            for a in (0..d).rev() {
                n[a] = (i % side) as i64 - r;
                i /= side;
            }
            n
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_is_hermitian_and_evaluates() {
        let v = FourierPotential::cosine(10.0, 1, 0.6, &[2]).unwrap();
        let x = 1.3;
        assert!((v.eval(&[x]) - 0.6 * (2.0 * PI * 2.0 * x / 10.0).cos()).abs() < 1e-15);
        assert_eq!(v.bandwidth(), 2);
        assert_eq!(v.c0(), 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let coeffs = BTreeMap::from([(vec![1], Complex64::new(1.0, 0.0))]);
        assert!(FourierPotential::new(1.0, 1, coeffs).is_err());
    }

    #[test]
    fn half_spectrum_completion() {
        let v = FourierPotential::from_half_spectrum(5.0, 2, &[(vec![1, 2], Complex64::new(0.1, 0.3))]).unwrap();
        assert_eq!(v.coeffs[&vec![-1, -2]], Complex64::new(0.1, -0.3));
    }

    #[test]
    fn gaussian_bump_matches_real_space() {
        let v = FourierPotential::gaussian_bump(30.0, 1, 1.5, 1.2).unwrap();
        for &x in &[0.0f64, 0.7, 2.5, 6.0] {
            let exact = 1.5 * (-x * x / (2.0 * 1.2 * 1.2)).exp();
            assert!((v.eval(&[x]) - exact).abs() < 1e-13, "{x}");
        }
    }
}
