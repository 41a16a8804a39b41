//! The table-producing commands and `box-run`.

use std::f64::consts::PI;
use std::str::FromStr;

use ltlab_core::boxsim::{
    free_energy_t_both, relative_energy, relative_energy_with, trace_relation_terms, BoxSpec, FourierPotential,
    RunOptions, SpectralOutcome,
};
use ltlab_core::matoracle::{
    constraint_q2_check, random_density_matrix, random_pair, random_projection, relative_trace_identity,
    seeded_rng, variational_min_check,
};
use ltlab_core::physcore::{duality_product, k_sc, l_sc, rho0};
use ltlab_core::response::{
    derivative_anomaly, phi_d, psi_d, weight_density_1d, weight_potential_1d, DivergenceKind, Response,
};
use ltlab_core::rumin::{khat_with_grid, rumin_r, rumin_rho0};
use ltlab_core::special::sphere_area;
use ltlab_core::{physcore::delta_t_with_rho0, Error, PhysicsParams};
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{tolerances, ExperimentConfig, NMax, PotentialSpec};
use crate::error::{exit, CliError, CliResult};
use crate::report::{plot_data, Assertion, Cell, RunReport, Sink, Table};

/// Inclusive integer range written `a..b`, `a..=b` or `a`. `b < a` is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeArg {
    pub lo: u64,
    pub hi: u64,
}

impl RangeArg {
    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.lo..=self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

impl FromStr for RangeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad range bound {t:?}"));
        if let Some((a, b)) = s.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            Ok(Self { lo: parse(a)?, hi: parse(b)? })
        } else {
            let v = parse(s)?;
            Ok(Self { lo: v, hi: v })
        }
    }
}

/// `start:stop:count`, evenly spaced and inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridArg {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridArg {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

impl FromStr for GridArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:count, got {s:?}"));
        }
        let f = |t: &str| t.parse::<f64>().map_err(|_| format!("bad number {t:?}"));
        let count = parts[2].parse::<usize>().map_err(|_| format!("bad count {:?}", parts[2]))?;
        Ok(Self { start: f(parts[0])?, stop: f(parts[1])?, count })
    }
}

pub fn constants(d: RangeArg, q: RangeArg, mu: f64) -> CliResult<Table> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(CliError::Config(format!("mu must be >= 0, got {mu}")));
    }
    if !d.is_empty() && d.lo == 0 {
        return Err(CliError::Config("d must be >= 1".into()));
    }
    if !q.is_empty() && q.lo == 0 {
        return Err(CliError::Config("q must be >= 1".into()));
    }
    let mut t = Table::new(&["d", "q", "k_sc", "l_sc", "rho0", "duality_residual"]);
    for dd in d.iter() {
        for qq in q.iter() {
            let (dd, qq) = (dd as usize, qq as u32);
            t.push(vec![
                dd.into(),
                qq.into(),
                k_sc(dd, qq)?.into(),
                l_sc(dd, qq)?.into(),
                rho0(mu, dd, qq)?.into(),
                (duality_product(dd, qq)? - 1.0).abs().into(),
            ]);
        }
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ResponseKind {
    Phi,
    Psi,
    Weight1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum WeightKind {
    Density,
    Potential,
}

fn flag_name(kind: DivergenceKind) -> &'static str {
    match kind {
        DivergenceKind::LogDivergence => "log_divergence",
        DivergenceKind::InfiniteDerivative => "infinite_derivative",
    }
}

/// Returns the function label and the `(k, value, abs_error, flag)` table.
pub fn response(
    kind: ResponseKind,
    d: Option<usize>,
    ks: &[f64],
    mu: Option<f64>,
    weight: WeightKind,
) -> CliResult<(String, Table)> {
    let label = match kind {
        ResponseKind::Phi | ResponseKind::Psi => {
            let d = d.ok_or_else(|| CliError::Config("--d is required for phi and psi".into()))?;
            if d == 0 {
                return Err(CliError::Config("d must be >= 1".into()));
            }
            format!("{}_{d}", if kind == ResponseKind::Phi { "phi" } else { "psi" })
        }
        ResponseKind::Weight1d => {
            if matches!(d, Some(x) if x != 1) {
                return Err(CliError::Config("weight1d exists only in d = 1".into()));
            }
            if mu.is_some_and(|m| !(m.is_finite() && m > 0.0)) {
                return Err(CliError::Config("mu must be > 0".into()));
            }
            match weight {
                WeightKind::Density => "weight_density_1d".to_string(),
                WeightKind::Potential => "weight_potential_1d".to_string(),
            }
        }
    };
    let mu = mu.unwrap_or(1.0);
    let rows: Vec<CliResult<Vec<Cell>>> = ks
        .par_iter()
        .map(|&k| {
            let r = match kind {
                ResponseKind::Phi => phi_d(k, d.unwrap())?,
                ResponseKind::Psi => psi_d(k, d.unwrap())?,
                ResponseKind::Weight1d => match weight {
                    WeightKind::Density => weight_density_1d(k, mu)?,
                    WeightKind::Potential => weight_potential_1d(k, mu)?,
                },
            };
            Ok(match r {
                Response::Value(s) => {
                    let flag = match kind {
                        ResponseKind::Psi => derivative_anomaly(k, d.unwrap()).map(|f| flag_name(f.kind)),
                        _ => None,
                    };
                    vec![k.into(), s.value.into(), s.abs_error.into(), flag.unwrap_or("").into()]
                }
                Response::Divergent(f) => vec![k.into(), Cell::Empty, Cell::Empty, flag_name(f.kind).into()],
            })
        })
        .collect();
    let mut t = Table::new(&["k", "value", "abs_error", "flag"]);
    for r in rows {
        t.push(r?);
    }
    Ok((label, t))
}

/// Points of a `(k, value, ...)` table with a numeric value column.
pub fn curve(t: &Table, x: usize, y: usize) -> Vec<(f64, f64)> {
    t.rows
        .iter()
        .filter_map(|r| match (&r[x], &r[y]) {
            (Cell::F(a), Cell::F(b)) => Some((*a, *b)),
            _ => None,
        })
        .collect()
}

/// Rumin profile table plus the summary report.
pub fn rumin(d: usize, points: usize, rho_min: f64, rho_max: f64, seed: u64) -> CliResult<(Table, RunReport)> {
    if !(1..=3).contains(&d) {
        return Err(CliError::Config(format!("rumin supports d = 1..3, got {d}")));
    }
    let prof = khat_with_grid(d, rho_min, rho_max, points)?;
    let r0 = rumin_rho0(d)?;
    let mut t = Table::new(&["rho", "r", "delta_t1", "ratio"]);
    for (&rho, &r) in prof.rho_grid.iter().zip(&prof.r_values) {
        let dt = delta_t_with_rho0(rho, r0, d);
        t.push(vec![rho.into(), r.into(), dt.into(), (r / dt).into()]);
    }
    let (small, large) = rumin_asymptotic_ratios(d)?;
    let ksc = k_sc(d, 1)?;
    let mut rep = RunReport::new(
        "rumin",
        seed,
        json!({ "d": d, "points": points, "rho_min": rho_min, "rho_max": rho_max }),
    );
    rep.results = json!({ "khat": prof.khat, "argmin_rho": prof.argmin_rho, "k_sc": ksc,
        "small_rho_ratio": small, "large_rho_ratio": large });
    rep.tolerances = tolerances(&[("asymptotic_ratio", 0.01)]);
    rep.assertions = vec![
        Assertion::le("small_rho_ratio_deviation", (small - 1.0).abs(), 0.01),
        Assertion::le("large_rho_ratio_deviation", (large - 1.0).abs(), 0.01),
        Assertion::holds("khat_in_range", prof.khat > 0.0 && prof.khat <= ksc * (1.0 + 1e-9)),
    ];
    Ok((t, rep.finish()))
}

/// `R_d(rho)` against its two asymptotic laws, at `rho = 1e-6` and `rho = 1e8`;
/// both ratios tend to one.
pub fn rumin_asymptotic_ratios(d: usize) -> CliResult<(f64, f64)> {
    let df = d as f64;
    let small: f64 = 1e-6;
    let want_small = (2.0 * PI).powi(d as i32) / (6.0 * sphere_area(d)?);
    let s = rumin_r(small, d)?.value / (small * small) / want_small;
    let big: f64 = 1e8;
    let want_big = df / (df + 4.0) * k_sc(d, 1)?;
    let b = rumin_r(big, d)?.value / big.powf(1.0 + 2.0 / df) / want_big;
    Ok((s, b))
}

/// Chooses `n_max` for `"auto"`: the smallest cutoff on a geometric ladder for
/// which no occupied state leans on the cutoff shell.
pub fn auto_box(d: usize, l: f64, v: &FourierPotential, params: &PhysicsParams, opts: RunOptions) -> CliResult<(BoxSpec, SpectralOutcome)> {
    let h = 2.0 * PI / l;
    let mut n = (v.bandwidth().max(1)).max(((params.mu / 0.8).sqrt() / h).ceil() as i64 + 1).max(4);
    loop {
        let b = BoxSpec::new(d, l, n).map_err(|e| match e {
            Error::BudgetExceeded { .. } => CliError::Resource(format!("automatic cutoff selection: {e}")),
            e => e.into(),
        })?;
        match relative_energy_with(&b, v, params, opts) {
            Ok(o) => return Ok((b, o)),
            Err(Error::CutoffInsufficient(_)) => n += (n / 2).max(2),
            Err(e) => return Err(e.into()),
        }
    }
}

/// Output of `box-run`: the report and the exit code it calls for.
pub struct BoxRunOutcome {
    pub report: RunReport,
    pub density: Option<Table>,
    pub spectrum: Vec<(f64, f64)>,
    pub density_curve: Vec<(f64, f64)>,
    pub exit_code: i32,
}

pub fn box_run(cfg: &ExperimentConfig, strict: bool, seed: u64) -> CliResult<BoxRunOutcome> {
    let phys = cfg.physics()?;
    let params = phys.params()?;
    let bx = cfg.box_section()?;
    let (d, l) = (phys.d, bx.l);
    let spec = cfg.potential.clone().unwrap_or(PotentialSpec::Zero {});
    let v = spec.expand(l, d)?;
    let opts = RunOptions { density_grid: cfg.output.density_csv, ..Default::default() };
    let (b, out) = match bx.n_max {
        NMax::Fixed(n) => {
            let b = BoxSpec::new(d, l, n)?;
            let out = relative_energy_with(&b, &v, &params, opts)?;
            (b, out)
        }
        NMax::Auto => auto_box(d, l, &v, &params, opts)?,
    };
    let tr = trace_relation_terms(&b, &v, &params, None)?;

    let mut rep = RunReport::new("box-run", seed, cfg.echo(Some(&v)));
    rep.tolerances = tolerances(&[
        ("relative_energy", 1e-9),
        ("trace_relation", 1e-9),
        ("density_normalization", 1e-8),
        ("cutoff_doubling", 1e-8),
        ("temperature_quadrature", 1e-6),
    ]);
    let mut asserts = vec![
        Assertion::le("relative_energy_nonpositive", out.relative_energy, 1e-9),
        Assertion::le("trace_relation", tr.deviation, 1e-9),
    ];
    let q = params.q as f64;
    let dn = q * (out.occupied_perturbed as f64 - out.occupied_free as f64);
    if let Some(g) = &out.density_grid {
        asserts.push(Assertion::le("density_normalization", (g.integral - dn).abs(), 1e-8));
    }

    let verify = bx.verify_cutoff.unwrap_or(d == 1);
    let cutoff = if verify {
        match BoxSpec::new(d, l, 2 * b.n_max) {
            Ok(b2) => {
                let e2 = relative_energy(&b2, &v, &params)?.relative_energy;
                let change = (e2 - out.relative_energy).abs();
                asserts.push(Assertion::le("cutoff_doubling", change, 1e-8));
                json!({ "n_max": b2.n_max, "relative_energy": e2, "change": change })
            }
            Err(Error::BudgetExceeded { needed, budget }) => {
                json!({ "skipped": format!("doubled basis of {needed} exceeds the cap {budget}") })
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        serde_json::Value::Null
    };

    let temperature = match phys.temperature {
        Some(t) => {
            let f = free_energy_t_both(&b, &v, &params, t)?;
            asserts.push(Assertion::le("temperature_quadrature", (f.free_energy - f.lambda_quadrature).abs(), 1e-6));
            asserts.push(Assertion::le("free_energy_nonpositive", f.free_energy, 1e-9));
            json!(f)
        }
        None => serde_json::Value::Null,
    };
    let ratio = if out.sc_rhs != 0.0 { Some(out.relative_energy / out.sc_rhs) } else { None };
    rep.results = json!({
        "n_max": b.n_max,
        "basis_size": b.size(),
        "relative_energy": out.relative_energy,
        "relative_energy_box_density": out.relative_energy_box_density,
        "sc_rhs": out.sc_rhs,
        "energy_ratio": ratio,
        "rho0": out.rho0_used,
        "box_density": out.box_density,
        "occupied_perturbed": out.occupied_perturbed,
        "occupied_free": out.occupied_free,
        "degenerate": out.degenerate,
        "boundary_weight": out.boundary_weight,
        "density_integral": out.density_grid.as_ref().map(|g| g.integral),
        "trace_relation": tr,
        "cutoff_check": cutoff,
        "temperature": temperature,
    });
    rep.assertions = asserts;
    rep.authoritative = !out.degenerate;
    let rep = rep.finish();

    let density = out.density_grid.as_ref().map(|g| {
        let header: &[&'static str] = match d {
            1 => &["x", "rho"],
            2 => &["x", "y", "rho"],
            _ => &["x", "y", "z", "rho"],
        };
        let mut t = Table::new(header);
        for (i, &val) in g.values.iter().enumerate() {
            let mut row: Vec<Cell> = grid_point(i, g.m, d, l).into_iter().map(Cell::F).collect();
            row.push(val.into());
            t.push(row);
        }
        t
    });
    let density_curve = match (&out.density_grid, d) {
        (Some(g), 1) => g.values.iter().enumerate().map(|(i, &r)| (grid_point(i, g.m, 1, l)[0], r)).collect(),
        _ => Vec::new(),
    };
    let spectrum = out.eigenvalues.iter().enumerate().map(|(i, &e)| (i as f64, e)).collect();
    let exit_code = if strict && out.degenerate { exit::DEGENERATE } else { exit::SUCCESS };
    Ok(BoxRunOutcome { report: rep, density, spectrum, density_curve, exit_code })
}

/// Coordinates of point `i` of the row-major `m^d` grid `x = -L/2 + j L / m`.
fn grid_point(mut i: usize, m: usize, d: usize, l: f64) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for a in (0..d).rev() {
        x[a] = -0.5 * l + (i % m) as f64 * l / m as f64;
        i /= m;
    }
    x
}

pub fn write_box_run(o: &BoxRunOutcome, cfg: &ExperimentConfig, sink: &Sink) -> CliResult<()> {
    sink.primary("report.json", &o.report.to_bytes())?;
    if let Some(t) = &o.density {
        sink.secondary("density.csv", &t.to_csv()?)?;
    }
    if cfg.output.plots {
        sink.secondary("spectrum.dat", &plot_data("index", "eigenvalue", &o.spectrum))?;
        if !o.density_curve.is_empty() {
            sink.secondary("density.dat", &plot_data("x", "rho", &o.density_curve))?;
        }
    }
    Ok(())
}

/// Inputs of one matrix-oracle trial, drawn sequentially from one stream.
struct Trial {
    pair: ltlab_core::matoracle::MatrixPair,
    gamma: ltlab_core::matoracle::CMat,
    projection: ltlab_core::matoracle::CMat,
    pi: ltlab_core::matoracle::CMat,
}

pub struct MatrixOracleSummary {
    pub table: Table,
    pub assertions: Vec<Assertion>,
    pub excluded_degenerate: usize,
}

/// The randomized matrix identities over `pairs` trials with dimensions in `dims`.
pub fn matrix_oracle(seed: u64, pairs: usize, samples: usize, dims: (usize, usize)) -> CliResult<MatrixOracleSummary> {
    if samples == 0 {
        return Err(CliError::Config("--samples must be >= 1".into()));
    }
    if dims.0 < 1 || dims.1 < dims.0 {
        return Err(CliError::Config(format!("bad dimension range {}..{}", dims.0, dims.1)));
    }
    let mut rng = seeded_rng(seed);
    let trials: Vec<Trial> = (0..pairs)
        .map(|_| {
            let n = rng.gen_range(dims.0..=dims.1);
            let pair = random_pair(&mut rng, n);
            let gamma = random_density_matrix(&mut rng, n);
            let rank = rng.gen_range(0..=n);
            let pi = random_projection(&mut rng, n, rank);
            let rank = rng.gen_range(0..=n);
            let projection = random_projection(&mut rng, n, rank);
            Trial { pair, gamma, projection, pi }
        })
        .collect();
    let rows: Vec<CliResult<_>> = trials
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let v = variational_min_check(&t.pair, samples, seed.wrapping_add(i as u64))?;
            let tr = relative_trace_identity(&t.pair)?;
            let c = constraint_q2_check(&t.gamma, &t.pi)?;
            let p = constraint_q2_check(&t.projection, &t.pi)?;
            Ok((t.pair.dim(), v, tr, c, p))
        })
        .collect();
    let mut table = Table::new(&[
        "trial",
        "dim",
        "analytic",
        "attained",
        "sampled_min",
        "gap",
        "trace_lhs",
        "trace_rhs",
        "trace_deviation",
        "degenerate",
        "q2_min_eigenvalue",
        "q2_equiv",
        "q2_equality_detected",
        "projection_equality_detected",
    ]);
    let (mut min_gap, mut max_attain, mut max_dev, mut max_lhs) = (f64::INFINITY, 0f64, 0f64, f64::NEG_INFINITY);
    let (mut equiv, mut detect, mut excluded) = (true, true, 0);
    for (i, r) in rows.into_iter().enumerate() {
        let (dim, v, tr, c, p) = r?;
        min_gap = min_gap.min(v.gap);
        max_attain = max_attain.max((v.attained - v.analytic).abs());
        if tr.degenerate {
            excluded += 1;
        } else {
            max_dev = max_dev.max(tr.deviation);
            max_lhs = max_lhs.max(tr.lhs);
        }
        equiv &= c.equiv_holds && p.equiv_holds;
        detect &= c.equality_iff_projection && p.equality_iff_projection && p.difference_norm <= 1e-9;
        table.push(vec![
            i.into(),
            dim.into(),
            v.analytic.into(),
            v.attained.into(),
            v.sampled_min.into(),
            v.gap.into(),
            tr.lhs.into(),
            tr.rhs.into(),
            tr.deviation.into(),
            tr.degenerate.into(),
            c.min_eigenvalue.into(),
            c.equiv_holds.into(),
            c.equality_iff_projection.into(),
            p.equality_iff_projection.into(),
        ]);
    }
    if max_lhs == f64::NEG_INFINITY {
        max_lhs = 0.0;
    }
    let assertions = vec![
        Assertion::ge("variational_gap", min_gap, -1e-10),
        Assertion::le("spectral_projection_attains", max_attain, 1e-10),
        Assertion::le("trace_identity_deviation", max_dev, 1e-9),
        Assertion::le("trace_identity_lhs", max_lhs, 1e-10),
        Assertion::holds("q2_equivalence", equiv),
        Assertion::holds("projection_equality_detection", detect),
        Assertion::info("excluded_degenerate", excluded as f64),
    ];
    Ok(MatrixOracleSummary { table, assertions, excluded_degenerate: excluded })
}
