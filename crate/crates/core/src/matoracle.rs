//! Finite-dimensional checks of the variational principle and of the
//! constraint algebra `-Pi^- <= Q <= Pi^+`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::boxsim::{eigh, hermitian_deviation, BoxSpec, Eigh};
use crate::error::{Error, Result};
use crate::physcore::{delta_t, PhysicsParams};

pub type CMat = DMatrix<Complex64>;

const HERM_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-10;

fn check_hermitian(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix", m.nrows(), m.ncols())));
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let dev = hermitian_deviation(m);
    if dev > HERM_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Unperturbed matrix `A` and perturbation `B` of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPair {
    pub a: CMat,
    pub b: CMat,
}

impl MatrixPair {
    pub fn new(a: CMat, b: CMat) -> Result<Self> {
        check_hermitian(&a)?;
        check_hermitian(&b)?;
        if a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch(format!("A is {}, B is {}", a.nrows(), b.nrows())));
        }
        Ok(Self { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn sum(&self) -> CMat {
        &self.a + &self.b
    }

    /// `(U A U*, U B U*)`.
    pub fn conjugated(&self, u: &CMat) -> Self {
        Self { a: u * &self.a * u.adjoint(), b: u * &self.b * u.adjoint() }
    }
}

/// `tr M_- = sum_i max(-lambda_i, 0)`.
pub fn neg_part_trace(m: &CMat) -> Result<f64> {
    check_hermitian(m)?;
    Ok(eigh(m)?.values.iter().map(|&l| (-l).max(0.0)).sum())
}

fn spectral_projection(e: &Eigh, pred: impl Fn(f64) -> bool) -> CMat {
    let n = e.values.len();
    let mut p = CMat::zeros(n, n);
    for (c, &l) in e.values.iter().enumerate() {
        if pred(l) {
            let v = e.vectors.column(c);
            p += &v * v.adjoint();
        }
    }
    p
}

fn trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s.re
}

/// Gaussian Hermitian matrix `(G + G*) / 2`.
pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    (&g + g.adjoint()) * Complex64::new(0.5 * scale, 0.0)
}

/// Unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the phases so the distribution does not depend on QR conventions
    let mut q = q;
    for c in 0..n {
        let d = r[(c, c)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for rr in 0..n {
            q[(rr, c)] *= ph;
        }
    }
    q
}

/// `U diag(values) U*`.
pub fn with_spectrum(u: &CMat, values: &[f64]) -> CMat {
    let n = values.len();
    let d = CMat::from_fn(n, n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    u * d * u.adjoint()
}

/// Random `0 <= gamma <= 1` with uniform eigenvalues in a random basis.
pub fn random_density_matrix<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let u = random_unitary(rng, n);
    let vals: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    with_spectrum(&u, &vals)
}

/// Random orthogonal projection of rank `rank`.
pub fn random_projection<R: Rng>(rng: &mut R, n: usize, rank: usize) -> CMat {
    let u = random_unitary(rng, n);
    let vals: Vec<f64> = (0..n).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    with_spectrum(&u, &vals)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random pair of dimension `n` with Gaussian entries.
pub fn random_pair<R: Rng>(rng: &mut R, n: usize) -> MatrixPair {
    MatrixPair { a: random_hermitian(rng, n, 1.0), b: random_hermitian(rng, n, 0.7) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalRecord {
    /// `-tr(A+B)_-`.
    pub analytic: f64,
    /// `tr (A+B) 1(A+B < 0)`.
    pub attained: f64,
    pub sampled_min: f64,
    pub gap: f64,
}

/// Compares `-tr(A+B)_-` with `tr (A+B) gamma` over random `0 <= gamma <= 1`.
pub fn variational_min_check(pair: &MatrixPair, n_samples: usize, seed: u64) -> Result<VariationalRecord> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let h = pair.sum();
    let e = eigh(&h)?;
    let analytic = -e.values.iter().map(|&l| (-l).max(0.0)).sum::<f64>();
    let gamma_star = spectral_projection(&e, |l| l < 0.0);
    let attained = trace_product(&h, &gamma_star);
    let mut rng = seeded_rng(seed);
    let mut sampled_min = f64::INFINITY;
    for _ in 0..n_samples {
        let g = random_density_matrix(&mut rng, pair.dim());
        sampled_min = sampled_min.min(trace_product(&h, &g));
    }
    Ok(VariationalRecord { analytic, attained, sampled_min, gap: sampled_min - analytic })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceIdentityRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
    pub degenerate: bool,
}

/// `tr (A+B)(Pi_B^- - Pi^-)` against `-tr |A+B| (Pi_B^- - Pi^-)^2`.
pub fn relative_trace_identity(pair: &MatrixPair) -> Result<TraceIdentityRecord> {
    let h = pair.sum();
    let ea = eigh(&pair.a)?;
    let eh = eigh(&h)?;
    let degenerate = ea.values.iter().chain(&eh.values).any(|l| l.abs() < DEGENERACY_TOL);
    let pi = spectral_projection(&ea, |l| l <= 0.0);
    let pib = spectral_projection(&eh, |l| l <= 0.0);
    let diff = &pib - &pi;
    let lhs = trace_product(&h, &diff);
    let abs_h = with_spectrum(&eh.vectors, &eh.values.iter().map(|l| l.abs()).collect::<Vec<_>>());
    let rhs = -trace_product(&abs_h, &(&diff * &diff));
    Ok(TraceIdentityRecord { lhs, rhs, deviation: (lhs - rhs).abs(), degenerate })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    /// Smallest eigenvalue of `Q^{++} - Q^{--} - Q^2`.
    pub min_eigenvalue: f64,
    /// Hilbert-Schmidt norm of `Q^{++} - Q^{--} - Q^2`.
    pub difference_norm: f64,
    /// Hilbert-Schmidt norm of `gamma^2 - gamma`.
    pub projection_defect: f64,
    /// `Q^2 <= Q^{++} - Q^{--}` holds to `1e-10`.
    pub equiv_holds: bool,
    /// Equality (to `1e-9`) exactly when `gamma` is a projection (to `1e-9`).
    pub equality_iff_projection: bool,
}

fn hs_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// With `Q = gamma - Pi^-`, checks `Q^2 <= Q^{++} - Q^{--}`.
pub fn constraint_q2_check(gamma: &CMat, pi_minus: &CMat) -> Result<ConstraintRecord> {
    check_hermitian(gamma)?;
    check_hermitian(pi_minus)?;
    let n = gamma.nrows();
    if pi_minus.nrows() != n {
        return Err(Error::DimensionMismatch("gamma and Pi^- differ in size".into()));
    }
    let eg = eigh(gamma)?;
    for &l in &eg.values {
        if !(-1e-10..=1.0 + 1e-10).contains(&l) {
            return Err(Error::ConstraintViolation(l));
        }
    }
    if hs_norm(&(pi_minus * pi_minus - pi_minus)) > 1e-10 {
        return Err(Error::InvalidParameter("Pi^- is not a projection".into()));
    }
    let id = CMat::identity(n, n);
    let pi_plus = &id - pi_minus;
    let q = gamma - pi_minus;
    let qpp = &pi_plus * &q * &pi_plus;
    let qmm = pi_minus * &q * pi_minus;
    let diff = qpp - qmm - &q * &q;
    let diff = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eigenvalue = eigh(&diff)?.values[0];
    let difference_norm = hs_norm(&diff);
    let projection_defect = hs_norm(&(gamma * gamma - gamma));
    let equiv_holds = min_eigenvalue >= -1e-10;
    let equality_iff_projection = (difference_norm <= 1e-9) == (projection_defect <= 1e-9);
    Ok(ConstraintRecord { min_eigenvalue, difference_norm, projection_defect, equiv_holds, equality_iff_projection })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevRecord {
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub l2_norm_sq: f64,
}

/// `sum |p^2 - mu| |phi^(p)|^2 / int dT_mu(|phi|^2)` for `phi(x) = L^{-d/2} sum phi^(p) e^{ipx}`.
///
/// `phi_hat` is indexed like the plane-wave basis of `b`.
pub fn sobolev_mu_ratio(b: &BoxSpec, phi_hat: &[Complex64], params: &PhysicsParams) -> Result<SobolevRecord> {
    params.validate()?;
    if phi_hat.len() != b.size() {
        return Err(Error::DimensionMismatch(format!("{} amplitudes for a basis of {}", phi_hat.len(), b.size())));
    }
    let l2: f64 = phi_hat.iter().map(|z| z.norm_sqr()).sum();
    if l2 > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!("phi must satisfy int |phi|^2 <= 1, got {l2}")));
    }
    let kin = b.kinetic();
    let numerator: f64 = kin.iter().zip(phi_hat).map(|(&e, z)| (e - params.mu).abs() * z.norm_sqr()).sum();
    let m = 4 * b.side();
    let d = b.d;
    let basis = b.basis();
    let h = b.spacing();
    let norm = b.volume().sqrt().recip();
    let dx = (b.l / m as f64).powi(d as i32);
    let mut x = vec![0.0; d];
    let mut denominator = 0.0;
    for g in 0..m.pow(d as u32) {
        let mut r = g;
        for a in (0..d).rev() {
            x[a] = -0.5 * b.l + (r % m) as f64 * b.l / m as f64;
            r /= m;
        }
        let phi: Complex64 = basis
            .iter()
            .zip(phi_hat)
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(n, z)| {
                let ph: f64 = n.iter().zip(&x).map(|(&ni, &xi)| h * ni as f64 * xi).sum();
                z * Complex64::from_polar(norm, ph)
            })
            .sum();
        denominator += delta_t(phi.norm_sqr(), params)? * dx;
    }
    if !(denominator > 0.0) {
        return Err(Error::Degenerate(format!("semiclassical denominator is {denominator}")));
    }
    Ok(SobolevRecord { numerator, denominator, ratio: numerator / denominator, l2_norm_sq: l2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> CMat {
        with_spectrum(&CMat::identity(v.len(), v.len()), v)
    }

    #[test]
    fn neg_part_examples() {
        assert_eq!(neg_part_trace(&diag(&[-2.0, 3.0])).unwrap(), 2.0);
        assert_eq!(neg_part_trace(&diag(&[0.0, 3.0])).unwrap(), 0.0);
        let mut m = diag(&[1.0, 2.0]);
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(neg_part_trace(&m).is_err());
    }

    #[test]
    fn half_identity_is_strict() {
        let mut rng = seeded_rng(3);
        let pi = random_projection(&mut rng, 4, 2);
        let gamma = CMat::identity(4, 4) * Complex64::new(0.5, 0.0);
        let r = constraint_q2_check(&gamma, &pi).unwrap();
        assert!(r.equiv_holds);
        assert!(r.difference_norm > 0.1);
        assert!(r.equality_iff_projection);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded_rng(1);
        let u = random_unitary(&mut rng, 5);
        assert!(hs_norm(&(&u * u.adjoint() - CMat::identity(5, 5))) < 1e-13);
    }
}
