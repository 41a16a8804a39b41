//! `sweep` kinds. Levels run in parallel and are reported in input order; a
//! failing level is recorded in its row and makes the command exit nonzero.

use std::f64::consts::PI;

use ltlab_core::boxsim::{
    free_energy_t_both, li_yau_check, linear_slope, n_max_for_cutoff, peierls_scan, relative_energy,
    second_order_box, second_order_continuum_1d, thermo_sweep, BoxSpec, FourierPotential, SubBox,
};
use ltlab_core::physcore::k_sc;
use ltlab_core::rumin::khat;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::commands::{auto_box, rumin_asymptotic_ratios};
use crate::config::{
    tolerances, BoxSection, ExperimentConfig, Mode, NMax, PhysicsSection, PotentialSpec, SweepSection,
};
use crate::error::{exit, CliError, CliResult};
use crate::report::{Assertion, Cell, RunReport, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepKind {
    Thermo,
    Peierls,
    SecondOrder,
    LiYau,
    Rumin,
    Temperature,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Thermo => "thermo",
            SweepKind::Peierls => "peierls",
            SweepKind::SecondOrder => "second-order",
            SweepKind::LiYau => "li-yau",
            SweepKind::Rumin => "rumin",
            SweepKind::Temperature => "temperature",
        }
    }
}

pub struct SweepOutcome {
    pub report: RunReport,
    pub levels: Table,
    pub summary: Table,
    pub plot: Option<(String, Vec<(f64, f64)>)>,
    pub exit_code: i32,
}

/// The config with every default made explicit, so the report echoes what ran.
pub fn resolve(kind: SweepKind, cfg: &ExperimentConfig) -> CliResult<ExperimentConfig> {
    let mut c = cfg.clone();
    let default_phys = PhysicsSection { d: 1, q: 1, mu: 1.0, temperature: None };
    let phys = *c.physics.get_or_insert(default_phys);
    let sw = c.sweep.get_or_insert_with(SweepSection::default);
    let two = |a: i32, b: i32| -> Vec<f64> { (a..=b).map(|j| 2f64.powi(-j)).collect() };
    match kind {
        SweepKind::Thermo => {
            sw.levels.get_or_insert_with(|| (0..4).map(|j| 2.0 * PI * (3.0 + 1.0 / 3.0) * 2f64.powi(j)).collect());
            sw.p_cut.get_or_insert(12.0);
            c.potential.get_or_insert(PotentialSpec::GaussianBump { amplitude: 0.5, sigma: 1.0 });
        }
        SweepKind::Peierls => {
            sw.levels.get_or_insert_with(|| if phys.d == 1 { two(3, 7) } else { two(4, 7) });
            sw.resolution.get_or_insert(1.0);
        }
        SweepKind::SecondOrder => {
            sw.levels.get_or_insert_with(|| vec![20.37, 40.37, 80.37, 160.37, 320.37]);
            sw.kmax.get_or_insert(40.0);
            c.potential.get_or_insert(PotentialSpec::GaussianBump { amplitude: 1.0, sigma: 1.0 });
        }
        SweepKind::LiYau => {
            sw.levels.get_or_insert_with(|| vec![20.0, 40.0, 60.0]);
            sw.p_cut.get_or_insert(2.0 * PI * 200.0 / 60.0);
            sw.omega.get_or_insert_with(|| SubBox { lo: vec![-0.5; phys.d], hi: vec![0.5; phys.d] });
        }
        SweepKind::Rumin => {
            sw.levels.get_or_insert_with(|| vec![1.0, 2.0, 3.0]);
        }
        SweepKind::Temperature => {
            sw.levels.get_or_insert_with(|| vec![1e-4, 1e-2, 0.1, 0.5]);
            c.box_.get_or_insert(BoxSection { l: 2.0 * PI * 5.5, n_max: NMax::Fixed(40), verify_cutoff: None });
            c.potential.get_or_insert(PotentialSpec::Modes {
                modes: vec![Mode { n: vec![1], re: 0.2, im: 0.1 }, Mode { n: vec![3], re: -0.1, im: 0.05 }],
            });
        }
    }
    Ok(c)
}

fn levels_of(c: &ExperimentConfig) -> Vec<f64> {
    c.sweep.as_ref().and_then(|s| s.levels.clone()).unwrap_or_default()
}

/// Runs `f` on every level in parallel; results keep the level order.
fn run_levels<T: Send>(levels: &[f64], f: impl Fn(f64) -> CliResult<T> + Sync) -> Vec<CliResult<T>> {
    levels.par_iter().map(|&x| f(x)).collect()
}

/// Appends the level rows; failed levels get empty cells and the error as status.
fn fill<T>(
    table: &mut Table,
    levels: &[f64],
    results: &[CliResult<T>],
    row: impl Fn(&T) -> Vec<Cell>,
) -> Option<i32> {
    let width = table.header.len();
    let mut code = None;
    for (i, (x, r)) in levels.iter().zip(results).enumerate() {
        let mut cells: Vec<Cell> = vec![i.into(), (*x).into()];
        match r {
            Ok(v) => {
                cells.extend(row(v));
                cells.push("ok".into());
            }
            Err(e) => {
                code.get_or_insert(e.exit_code());
                cells.resize(width - 1, Cell::Empty);
                cells.push(e.to_string().into());
            }
        }
        table.push(cells);
    }
    code
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::F(x) => json!(x),
        Cell::I(n) => json!(n),
        Cell::B(b) => json!(b),
        Cell::S(s) => json!(s),
        Cell::Empty => Value::Null,
    }
}

/// Rows of a table as JSON objects keyed by column name.
pub fn table_json(t: &Table) -> Value {
    Value::Array(
        t.rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = t.header.iter().zip(r).map(|(h, c)| (h.to_string(), cell_json(c))).collect();
                Value::Object(m)
            })
            .collect(),
    )
}

fn summary_table(pairs: Vec<(&'static str, Cell)>) -> Table {
    let header: Vec<&'static str> = pairs.iter().map(|(h, _)| *h).collect();
    let mut t = Table::new(&header);
    t.push(pairs.into_iter().map(|(_, c)| c).collect());
    t
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.len() >= 2 && v.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.len() >= 2 && v.windows(2).all(|w| w[1] > w[0])
}

fn oks<T: Clone>(r: &[CliResult<T>]) -> Vec<T> {
    r.iter().filter_map(|x| x.as_ref().ok().cloned()).collect()
}

pub fn sweep(kind: SweepKind, cfg: &ExperimentConfig, seed: u64) -> CliResult<SweepOutcome> {
    let c = resolve(kind, cfg)?;
    let phys = c.physics()?;
    let params = phys.params()?;
    let levels = levels_of(&c);
    let sw = c.sweep.clone().unwrap_or_default();
    let mut rep = RunReport::new(&format!("sweep {}", kind.name()), seed, c.echo(None));
    let mut asserts = Vec::new();
    let (table, summary, plot, code) = match kind {
        SweepKind::Thermo => {
            let profile = c.potential.as_ref().expect("resolved").profile()?;
            let p_cut = sw.p_cut.expect("resolved");
            let res = run_levels(&levels, |l| Ok(thermo_sweep(&profile, &params, &[l], p_cut)?.levels.remove(0)));
            let mut t = Table::new(&[
                "level",
                "l",
                "n_max",
                "relative_energy",
                "relative_energy_box_density",
                "gap",
                "degenerate",
                "status",
            ]);
            // gap to the previous level, when both ran
            let mut prev: Option<f64> = None;
            let mut gaps = Vec::new();
            let mut with_gap = Vec::with_capacity(res.len());
            for r in res {
                match r {
                    Ok(lv) => {
                        let g = prev.map(|p| (lv.relative_energy - p).abs());
                        gaps.extend(g);
                        prev = Some(lv.relative_energy);
                        with_gap.push(Ok((lv, g)));
                    }
                    Err(e) => {
                        prev = None;
                        with_gap.push(Err(e));
                    }
                }
            }
            let code = fill(&mut t, &levels, &with_gap, |(lv, g)| {
                vec![
                    lv.n_max.into(),
                    lv.relative_energy.into(),
                    lv.relative_energy_box_density.into(),
                    (*g).into(),
                    lv.degenerate.into(),
                ]
            });
            let ok = oks(&with_gap);
            let dec = strictly_decreasing(&gaps);
            asserts.push(Assertion::holds("gaps_strictly_decreasing", dec));
            let plot = ok.iter().map(|(lv, _)| (lv.l, lv.relative_energy)).collect();
            let summary = summary_table(vec![
                ("levels", levels.len().into()),
                ("failed", (levels.len() - ok.len()).into()),
                ("gaps_decreasing", dec.into()),
                ("last_gap", gaps.last().copied().into()),
                ("final_relative_energy", ok.last().map(|(lv, _)| lv.relative_energy).into()),
            ]);
            (t, summary, Some(("thermo_energy.dat".to_string(), plot)), code)
        }
        SweepKind::Peierls => {
            let resolution = sw.resolution.expect("resolved");
            let res = run_levels(&levels, |w| Ok(peierls_scan(&params, &[w], resolution)?.levels[0]));
            let mut t = Table::new(&["level", "width", "l", "second_order", "v_l2_sq", "ratio", "status"]);
            let code = fill(&mut t, &levels, &res, |lv| {
                vec![lv.l.into(), lv.second_order.into(), lv.v_l2_sq.into(), lv.ratio.into()]
            });
            let ok = oks(&res);
            let ratios: Vec<f64> = ok.iter().map(|l| l.ratio).collect();
            let xs: Vec<f64> = ok.iter().map(|l| -l.width.ln()).collect();
            let slope = linear_slope(&xs, &ratios);
            let implied = slope * 2.0 * params.mu.sqrt() / 3.0;
            let inc = strictly_increasing(&ratios);
            let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let band = max / min;
            let verdict = if inc && band > 1.1 { "divergent" } else { "bounded" };
            asserts.push(Assertion::info("slope", slope));
            asserts.push(Assertion::info("band", band));
            let summary = summary_table(vec![
                ("levels", levels.len().into()),
                ("failed", (levels.len() - ok.len()).into()),
                ("slope", slope.into()),
                ("implied_l1_prime", implied.into()),
                ("reference_l1_prime", (params.q as f64 / (12.0 * PI)).into()),
                ("strictly_increasing", inc.into()),
                ("band", band.into()),
                ("verdict", verdict.into()),
            ]);
            let plot = xs.iter().copied().zip(ratios.iter().copied()).collect();
            (t, summary, Some(("peierls_ratio.dat".to_string(), plot)), code)
        }
        SweepKind::SecondOrder => {
            if phys.d != 1 {
                return Err(CliError::Config("the second-order sweep compares with the d = 1 continuum".into()));
            }
            let (a, sigma) = match c.potential {
                Some(PotentialSpec::GaussianBump { amplitude, sigma }) => (amplitude, sigma),
                _ => return Err(CliError::Config("the second-order sweep needs a gaussian-bump potential".into())),
            };
            // unitary transform of a exp(-x^2 / (2 sigma^2)) is a sigma exp(-sigma^2 k^2 / 2)
            let cont = second_order_continuum_1d(
                |k| {
                    let h = a * sigma * (-0.5 * sigma * sigma * k * k).exp();
                    h * h
                },
                &params,
                sw.kmax.expect("resolved"),
            )?;
            let res = run_levels(&levels, |l| {
                let v = FourierPotential::gaussian_bump(l, 1, a, sigma)?;
                Ok(second_order_box(&v, &params)?)
            });
            let mut t = Table::new(&["level", "l", "second_order_box", "continuum", "relative_deviation", "status"]);
            let code = fill(&mut t, &levels, &res, |s| vec![(*s).into(), cont.into(), (s / cont - 1.0).into()]);
            let pts: Vec<(f64, f64)> =
                levels.iter().zip(&res).filter_map(|(l, r)| r.as_ref().ok().map(|s| (*l, *s))).collect();
            let last = pts.last().map(|(_, s)| (s / cont - 1.0).abs());
            if let Some(dev) = last {
                asserts.push(Assertion::le("final_relative_deviation", dev, 0.03));
            }
            let summary = summary_table(vec![
                ("levels", levels.len().into()),
                ("failed", (levels.len() - pts.len()).into()),
                ("continuum", cont.into()),
                ("final_relative_deviation", last.into()),
            ]);
            (t, summary, Some(("second_order.dat".to_string(), pts)), code)
        }
        SweepKind::LiYau => {
            let omega = sw.omega.clone().expect("resolved");
            let p_cut = sw.p_cut.expect("resolved");
            let res = run_levels(&levels, |l| {
                let n = n_max_for_cutoff(l, p_cut);
                let b = BoxSpec::new(params.d, l, n)?;
                Ok((n, li_yau_check(&b, &omega, &params)?))
            });
            let mut t = Table::new(&[
                "level",
                "l",
                "n_max",
                "lhs",
                "rhs_discrete",
                "rhs_continuum",
                "relative_kinetic",
                "identity_deviation",
                "kinetic_ratio",
                "status",
            ]);
            let code = fill(&mut t, &levels, &res, |(n, r)| {
                vec![
                    (*n).into(),
                    r.lhs.into(),
                    r.rhs_discrete.into(),
                    r.rhs_continuum.into(),
                    r.relative_kinetic.into(),
                    (r.lhs - r.rhs_discrete).abs().into(),
                    (r.relative_kinetic / r.rhs_continuum).into(),
                ]
            });
            let ok = oks(&res);
            let max_dev = ok.iter().map(|(_, r)| (r.lhs - r.rhs_discrete).abs()).fold(0.0, f64::max);
            let ratios: Vec<f64> = ok.iter().map(|(_, r)| r.relative_kinetic / r.rhs_continuum).collect();
            asserts.push(Assertion::le("identity_deviation", max_dev, 1e-10));
            if let Some(&last) = ratios.last() {
                asserts.push(Assertion::ge("final_kinetic_ratio", last, 0.95));
            }
            let pts = levels.iter().zip(&res).filter_map(|(l, r)| r.as_ref().ok().map(|(_, r)| (*l, r.relative_kinetic / r.rhs_continuum))).collect();
            let summary = summary_table(vec![
                ("levels", levels.len().into()),
                ("failed", (levels.len() - ok.len()).into()),
                ("max_identity_deviation", max_dev.into()),
                ("min_kinetic_ratio", ratios.iter().copied().reduce(f64::min).into()),
            ]);
            (t, summary, Some(("li_yau_ratio.dat".to_string(), pts)), code)
        }
        SweepKind::Rumin => {
            let res = run_levels(&levels, |x| {
                if x.fract() != 0.0 || !(1.0..=3.0).contains(&x) {
                    return Err(CliError::Config(format!("rumin levels are dimensions 1..3, got {x}")));
                }
                let d = x as usize;
                let p = khat(d)?;
                let (small, large) = rumin_asymptotic_ratios(d)?;
                Ok((p.khat, p.argmin_rho, k_sc(d, 1)?, small, large))
            });
            let mut t = Table::new(&[
                "level",
                "d",
                "khat",
                "argmin_rho",
                "k_sc",
                "small_rho_ratio",
                "large_rho_ratio",
                "status",
            ]);
            let code = fill(&mut t, &levels, &res, |r| {
                vec![r.0.into(), r.1.into(), r.2.into(), r.3.into(), r.4.into()]
            });
            let ok = oks(&res);
            let worst = ok.iter().map(|r| (r.3 - 1.0).abs().max((r.4 - 1.0).abs())).fold(0.0, f64::max);
            asserts.push(Assertion::le("asymptotic_ratio_deviation", worst, 0.01));
            asserts.push(Assertion::holds("khat_in_range", ok.iter().all(|r| r.0 > 0.0 && r.0 <= r.2 * (1.0 + 1e-9))));
            let pts = levels.iter().zip(&res).filter_map(|(d, r)| r.as_ref().ok().map(|r| (*d, r.0))).collect();
            let summary = summary_table(vec![
                ("levels", levels.len().into()),
                ("failed", (levels.len() - ok.len()).into()),
                ("max_asymptotic_deviation", worst.into()),
            ]);
            (t, summary, Some(("khat.dat".to_string(), pts)), code)
        }
        SweepKind::Temperature => {
            let bx = c.box_section()?;
            let v = c.potential.as_ref().expect("resolved").expand(bx.l, phys.d)?;
            let b = match bx.n_max {
                NMax::Fixed(n) => BoxSpec::new(phys.d, bx.l, n)?,
                NMax::Auto => auto_box(phys.d, bx.l, &v, &params, Default::default())?.0,
            };
            let e0 = relative_energy(&b, &v, &params)?.relative_energy;
            rep.config = c.echo(Some(&v));
            let res = run_levels(&levels, |t| Ok(free_energy_t_both(&b, &v, &params, t)?));
            let mut t = Table::new(&[
                "level",
                "temperature",
                "free_energy",
                "lambda_quadrature",
                "deviation",
                "zero_t_difference",
                "status",
            ]);
            let code = fill(&mut t, &levels, &res, |f| {
                vec![
                    f.free_energy.into(),
                    f.lambda_quadrature.into(),
                    (f.free_energy - f.lambda_quadrature).abs().into(),
                    (f.free_energy - e0).into(),
                ]
            });
            let ok = oks(&res);
            let max_dev = ok.iter().map(|f| (f.free_energy - f.lambda_quadrature).abs()).fold(0.0, f64::max);
            let max_f = ok.iter().map(|f| f.free_energy).fold(f64::NEG_INFINITY, f64::max);
            asserts.push(Assertion::le("quadrature_deviation", max_dev, 1e-6));
            if !ok.is_empty() {
                asserts.push(Assertion::le("free_energy_nonpositive", max_f, 1e-9));
            }
            let pts = ok.iter().map(|f| (f.temperature, f.free_energy)).collect();
            let summary = summary_table(vec![
                ("levels", levels.len().into()),
                ("failed", (levels.len() - ok.len()).into()),
                ("zero_t_relative_energy", e0.into()),
                ("max_quadrature_deviation", max_dev.into()),
            ]);
            (t, summary, Some(("free_energy.dat".to_string(), pts)), code)
        }
    };
    rep.tolerances = match kind {
        SweepKind::Thermo | SweepKind::Peierls => tolerances(&[]),
        SweepKind::SecondOrder => tolerances(&[("relative_deviation", 0.03)]),
        SweepKind::LiYau => tolerances(&[("identity_deviation", 1e-10), ("kinetic_ratio", 0.95)]),
        SweepKind::Rumin => tolerances(&[("asymptotic_ratio", 0.01)]),
        SweepKind::Temperature => tolerances(&[("quadrature_deviation", 1e-6)]),
    };
    if code.is_some() {
        asserts.push(Assertion::holds("all_levels_ran", false));
    }
    rep.results = json!({ "levels": table_json(&table), "summary": table_json(&summary)[0] });
    rep.assertions = asserts;
    let rep = rep.finish();
    Ok(SweepOutcome { report: rep, levels: table, summary, plot, exit_code: code.unwrap_or(exit::SUCCESS) })
}
