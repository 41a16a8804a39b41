use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::BoxSpec;
use super::potential::FourierPotential;
use crate::error::{Error, Result};
use crate::physcore::{l_sc, sc_potential_integrand, PhysicsParams};

/// Eigenvalues closer than this to `mu` mark the run as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Occupied eigenvectors may carry at most this weight on the outermost shell.
pub const BOUNDARY_WEIGHT_TOL: f64 = 1e-12;

/// `H[p, p'] = |p|^2 delta + c_{n - n'}` in the plane-wave basis of `b`.
pub fn build_hamiltonian(b: &BoxSpec, v: &FourierPotential) -> Result<DMatrix<Complex64>> {
    v.check_compatible(b)?;
    let n = b.size();
    let kin = b.kinetic();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = Complex64::new(kin[i], 0.0);
    }
    let basis = b.basis();
    for (m, c) in &v.coeffs {
        for (i, ni) in basis.iter().enumerate() {
            let nj: Vec<i64> = ni.iter().zip(m).map(|(a, b)| a - b).collect();
            if let Some(j) = b.n_to_index(&nj) {
                h[(i, j)] += c;
            }
        }
    }
    Ok(h)
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

pub fn hermitian_deviation(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            dev = dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Dense Hermitian eigensolver. Real symmetric input takes the real path.
pub fn eigh(h: &DMatrix<Complex64>) -> Result<Eigh> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix", n, h.ncols())));
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let dev = hermitian_deviation(h);
    if dev > 1e-12 * scale {
        return Err(Error::NotHermitian(dev));
    }
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || h[(i, j)] == Complex64::new(0.0, 0.0)));
    let (values, vectors) = if diagonal {
        ((0..n).map(|i| h[(i, i)].re).collect::<Vec<_>>(), DMatrix::identity(n, n))
    } else if h.iter().all(|z| z.im == 0.0) {
        let re = h.map(|z| z.re);
        let e = re.symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let e = h.clone().symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors)
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(Eigh { values: sorted_values, vectors: sorted_vectors })
}

/// `sum_i (lambda_i - mu)_-`, i.e. `tr (H - mu)_-`.
pub fn neg_riesz_sum(eigs: &[f64], mu: f64) -> f64 {
    eigs.iter().map(|&l| (mu - l).max(0.0)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunOptions {
    /// Also compute the density of `Q_V` on a real-space grid.
    pub density_grid: bool,
    /// Skip the check that occupied states stay away from the cutoff shell.
    pub skip_boundary_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    /// Points per axis.
    pub m: usize,
    /// Row-major values of `rho_{Q_V}` at `x = -L/2 + j L/m`.
    pub values: Vec<f64>,
    /// `sum rho dx`.
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralOutcome {
    pub eigenvalues: Vec<f64>,
    pub occupied_perturbed: usize,
    pub occupied_free: usize,
    /// `-q tr(H_V - mu)_- + q tr(H_0 - mu)_- - rho0 L^d c_0` with the continuum `rho0`.
    pub relative_energy: f64,
    /// Same with the box density `q N_free / L^d` in place of `rho0`.
    pub relative_energy_box_density: f64,
    /// `-L_sc int g(V)` on a real-space grid.
    pub sc_rhs: f64,
    pub rho0_used: f64,
    pub box_density: f64,
    /// Some eigenvalue (perturbed or free) lies within `1e-10` of `mu`.
    pub degenerate: bool,
    /// Largest weight of an occupied eigenvector on the outermost shell.
    pub boundary_weight: f64,
    pub density_grid: Option<DensityGrid>,
}

/// Per-run spectral data reused by the derived quantities.
pub struct Spectrum {
    pub b: BoxSpec,
    /// `|p|^2` in basis order.
    pub kinetic: Vec<f64>,
    /// `|p|^2` ascending, so free and perturbed sums share a summation order.
    pub kinetic_sorted: Vec<f64>,
    pub eig: Eigh,
}

impl Spectrum {
    pub fn compute(b: &BoxSpec, v: &FourierPotential) -> Result<Self> {
        let h = build_hamiltonian(b, v)?;
        Ok(Self::from_parts(b, eigh(&h)?))
    }

    pub fn from_parts(b: &BoxSpec, eig: Eigh) -> Self {
        let kinetic = b.kinetic();
        let mut kinetic_sorted = kinetic.clone();
        kinetic_sorted.sort_by(f64::total_cmp);
        Self { b: *b, kinetic, kinetic_sorted, eig }
    }

    pub fn occupied(&self, mu: f64) -> usize {
        self.eig.values.iter().filter(|&&l| l <= mu).count()
    }

    pub fn occupied_free(&self, mu: f64) -> usize {
        self.kinetic.iter().filter(|&&e| e <= mu).count()
    }

    /// Box relative energy at chemical potential `lambda` with the box density.
    pub fn relative_energy_box(&self, lambda: f64, q: u32, c0: f64) -> f64 {
        let q = q as f64;
        -q * neg_riesz_sum(&self.eig.values, lambda) + q * neg_riesz_sum(&self.kinetic_sorted, lambda)
            - q * c0 * self.occupied_free(lambda) as f64
    }

    /// Largest weight of an occupied eigenvector on the outermost shell.
    pub fn boundary_weight(&self, mu: f64) -> f64 {
        let occ = self.occupied(mu);
        let shell: Vec<usize> = (0..self.b.size()).filter(|&i| self.b.on_boundary(&self.b.index_to_n(i))).collect();
        (0..occ)
            .map(|c| shell.iter().map(|&r| self.eig.vectors[(r, c)].norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `Q_V = Pi_V^- - Pi^-` in the momentum basis.
    pub fn q_matrix(&self, mu: f64) -> DMatrix<Complex64> {
        let n = self.b.size();
        let occ = self.occupied(mu);
        let vo = self.eig.vectors.columns(0, occ);
        let mut q = &vo * vo.adjoint();
        for i in 0..n {
            if self.kinetic[i] <= mu {
                q[(i, i)] -= Complex64::new(1.0, 0.0);
            }
        }
        q
    }

    /// Smallest grid resolving `V rho_{Q_V}` exactly.
    pub fn grid_points(&self, v: &FourierPotential) -> usize {
        let nv = v.bandwidth() as usize;
        (4 * nv).max(2 * self.b.n_max as usize + nv + 1)
    }

    /// `rho_{Q_V}(x) = q (sum_occ |psi_i(x)|^2 - N_free / L^d)` on an `m^d` grid.
    pub fn density(&self, mu: f64, q: u32, m: usize) -> DensityGrid {
        let b = &self.b;
        let d = b.d;
        let occ = self.occupied(mu);
        let free = self.occupied_free(mu) as f64 / b.volume();
        let side = b.side();
        // phase[j][n] = exp(i 2 pi n x_j / L) for x_j = -L/2 + j L / m
        let phase: Vec<Vec<Complex64>> = (0..m)
            .map(|j| {
                let x = -0.5 * b.l + j as f64 * b.l / m as f64;
                (0..side)
                    .map(|s| {
                        let n = s as i64 - b.n_max;
                        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * n as f64 * x / b.l)
                    })
                    .collect()
            })
            .collect();
        let total = m.pow(d as u32);
        let norm = 1.0 / b.volume();
        let basis: Vec<Vec<usize>> = (0..b.size())
            .map(|i| b.index_to_n(i).iter().map(|&c| (c + b.n_max) as usize).collect())
            .collect();
        let mut values = vec![0.0; total];
        let mut gidx = vec![0usize; d];
        for (g, val) in values.iter_mut().enumerate() {
            let mut r = g;
            for a in (0..d).rev() {
                gidx[a] = r % m;
                r /= m;
            }
            let waves: Vec<Complex64> = basis
                .iter()
                .map(|s| s.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (a, &sa)| acc * phase[gidx[a]][sa]))
                .collect();
            let mut rho = 0.0;
            for c in 0..occ {
                let col = self.eig.vectors.column(c);
                let psi: Complex64 = col.iter().zip(&waves).map(|(v, w)| v * w).sum();
                rho += psi.norm_sqr();
            }
            *val = q as f64 * (rho * norm - free);
        }
        let dx = (b.l / m as f64).powi(d as i32);
        let integral = values.iter().sum::<f64>() * dx;
        DensityGrid { m, values, integral }
    }
}

/// Values of `V` on the `m^d` grid `x = -L/2 + j L / m`.
pub fn potential_on_grid(v: &FourierPotential, m: usize) -> Vec<f64> {
    let d = v.d;
    let total = m.pow(d as u32);
    let mut x = vec![0.0; d];
    (0..total)
        .map(|g| {
            let mut r = g;
            for a in (0..d).rev() {
                x[a] = -0.5 * v.l + (r % m) as f64 * v.l / m as f64;
                r /= m;
            }
            v.eval(&x)
        })
        .collect()
}

fn sc_rhs(v: &FourierPotential, params: &PhysicsParams) -> Result<f64> {
    let m = (8 * v.bandwidth() as usize + 16).max(32);
    let dx = (v.l / m as f64).powi(v.d as i32);
    let s: f64 = potential_on_grid(v, m).iter().map(|&x| sc_potential_integrand(x, params.mu, params.d)).sum();
    Ok(-l_sc(params.d, params.q)? * s * dx)
}

/// Relative ground-state energy of the perturbed Fermi sea in the box.
pub fn relative_energy(b: &BoxSpec, v: &FourierPotential, params: &PhysicsParams) -> Result<SpectralOutcome> {
    relative_energy_with(b, v, params, RunOptions::default())
}

pub fn relative_energy_with(
    b: &BoxSpec,
    v: &FourierPotential,
    params: &PhysicsParams,
    opts: RunOptions,
) -> Result<SpectralOutcome> {
    params.validate()?;
    if params.d != b.d {
        return Err(Error::DimensionMismatch(format!("params d = {}, box d = {}", params.d, b.d)));
    }
    let mu = params.mu;
    if mu > 0.8 * b.cutoff_energy() {
        return Err(Error::CutoffInsufficient(format!(
            "mu = {mu} exceeds 0.8 x cutoff energy {}",
            b.cutoff_energy()
        )));
    }
    let sp = Spectrum::compute(b, v)?;
    outcome_from_spectrum(&sp, v, params, opts)
}

pub fn outcome_from_spectrum(
    sp: &Spectrum,
    v: &FourierPotential,
    params: &PhysicsParams,
    opts: RunOptions,
) -> Result<SpectralOutcome> {
    let b = &sp.b;
    let mu = params.mu;
    let q = params.q as f64;
    let boundary_weight = sp.boundary_weight(mu);
    if !opts.skip_boundary_check && boundary_weight > BOUNDARY_WEIGHT_TOL {
        return Err(Error::CutoffInsufficient(format!(
            "occupied states carry weight {boundary_weight:e} on the cutoff shell"
        )));
    }
    let occupied_perturbed = sp.occupied(mu);
    let occupied_free = sp.occupied_free(mu);
    let degenerate = sp.eig.values.iter().chain(&sp.kinetic).any(|&l| (l - mu).abs() < DEGENERACY_TOL);
    let rho0 = params.rho0();
    let c0 = v.c0();
    let pert = neg_riesz_sum(&sp.eig.values, mu);
    let free = neg_riesz_sum(&sp.kinetic_sorted, mu);
    let relative_energy = -q * pert + q * free - rho0 * b.volume() * c0;
    let box_density = q * occupied_free as f64 / b.volume();
    let relative_energy_box_density = -q * pert + q * free - q * occupied_free as f64 * c0;
    let density_grid = opts.density_grid.then(|| sp.density(mu, params.q, sp.grid_points(v)));
    Ok(SpectralOutcome {
        eigenvalues: sp.eig.values.clone(),
        occupied_perturbed,
        occupied_free,
        relative_energy,
        relative_energy_box_density,
        sc_rhs: sc_rhs(v, params)?,
        rho0_used: rho0,
        box_density,
        degenerate,
        boundary_weight,
        density_grid,
    })
}

/// Terms of `tr(H_V - mu) Q_V = tr(H_0 - mu) Q_V + int V rho_{Q_V}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRelation {
    pub lhs: f64,
    pub kinetic_term: f64,
    pub potential_term: f64,
    pub deviation: f64,
    pub grid_points: usize,
}

pub fn trace_relation_check(b: &BoxSpec, v: &FourierPotential, params: &PhysicsParams) -> Result<f64> {
    Ok(trace_relation_terms(b, v, params, None)?.deviation)
}

/// As [`trace_relation_check`], optionally on a finer real-space grid.
pub fn trace_relation_terms(
    b: &BoxSpec,
    v: &FourierPotential,
    params: &PhysicsParams,
    grid: Option<usize>,
) -> Result<TraceRelation> {
    params.validate()?;
    let mu = params.mu;
    let q = params.q as f64;
    let h = build_hamiltonian(b, v)?;
    let sp = Spectrum::from_parts(b, eigh(&h)?);
    let qm = sp.q_matrix(mu);
    let n = b.size();
    // tr (H_V - mu) Q as a full matrix trace
    let mut lhs = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let hij = if i == j { h[(i, j)] - mu } else { h[(i, j)] };
            lhs += hij * qm[(j, i)];
        }
    }
    let kinetic_term: f64 = (0..n).map(|i| (sp.kinetic[i] - mu) * qm[(i, i)].re).sum();
    let m = grid.unwrap_or_else(|| sp.grid_points(v)).max(sp.grid_points(v));
    let rho = sp.density(mu, params.q, m);
    let vg = potential_on_grid(v, m);
    let dx = (b.l / m as f64).powi(b.d as i32);
    let potential_term: f64 = vg.iter().zip(&rho.values).map(|(a, r)| a * r).sum::<f64>() * dx;
    let lhs = q * lhs.re;
    let kinetic_term = q * kinetic_term;
    let deviation = (lhs - kinetic_term - potential_term).abs();
    Ok(TraceRelation { lhs, kinetic_term, potential_term, deviation, grid_points: m })
}

/// `tr |H_0 - mu|^{1/2} (Q^{++} - Q^{--}) |H_0 - mu|^{1/2}`, times `q`.
pub fn relative_kinetic(b: &BoxSpec, qm: &DMatrix<Complex64>, params: &PhysicsParams) -> Result<f64> {
    params.validate()?;
    let n = b.size();
    if qm.nrows() != n || qm.ncols() != n {
        return Err(Error::DimensionMismatch(format!("Q is {}x{}, basis has {n}", qm.nrows(), qm.ncols())));
    }
    let mu = params.mu;
    let kin = b.kinetic();
    // -Pi^- <= Q <= Pi^+  <=>  0 <= Q + Pi^- <= 1
    let mut gamma = qm.clone();
    for i in 0..n {
        if kin[i] <= mu {
            gamma[(i, i)] += Complex64::new(1.0, 0.0);
        }
    }
    let e = eigh(&gamma)?;
    let lo = e.values.first().copied().unwrap_or(0.0);
    let hi = e.values.last().copied().unwrap_or(0.0);
    if lo < -1e-10 {
        return Err(Error::ConstraintViolation(lo));
    }
    if hi > 1.0 + 1e-10 {
        return Err(Error::ConstraintViolation(hi));
    }
    // Only the diagonal blocks reach the diagonal; on the hole block the
    // sign of |p^2 - mu| flips together with Q^{--}.
    let t: f64 = (0..n).map(|i| (kin[i] - mu) * qm[(i, i)].re).sum();
    Ok(params.q as f64 * t)
}
