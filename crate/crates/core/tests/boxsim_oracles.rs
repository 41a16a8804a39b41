use std::f64::consts::PI;

use ltlab_core::boxsim::*;
use ltlab_core::physcore::{k_sc, PhysicsParams};
use ltlab_core::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(d: usize, mu: f64) -> PhysicsParams {
    PhysicsParams::new(d, 1, mu).unwrap()
}

/// Small random admissible run: zero-mean V, Fermi level off the lattice.
fn random_run(rng: &mut ChaCha8Rng, d: usize) -> (BoxSpec, FourierPotential, PhysicsParams) {
    loop {
        let l = rng.gen_range(6.0..12.0);
        let mu = rng.gen_range(0.5..2.0);
        if check_fermi_level(d, l, mu).is_err() {
            continue;
        }
        let n_max = if d == 1 { 40 } else { 11 };
        let b = BoxSpec::new(d, l, n_max).unwrap();
        let v = FourierPotential::random(rng, l, d, 3, 4 - d as i64, 0.4).unwrap();
        return (b, v, p(d, mu));
    }
}

#[test]
fn hamiltonian_structure() {
    let b = BoxSpec::new(1, 10.0, 4).unwrap();
    let h0 = build_hamiltonian(&b, &FourierPotential::zero(10.0, 1).unwrap()).unwrap();
    let kin = b.kinetic();
    for i in 0..b.size() {
        for j in 0..b.size() {
            let want = if i == j { kin[i] } else { 0.0 };
            assert_eq!(h0[(i, j)], Complex64::new(want, 0.0));
        }
    }
    let v = FourierPotential::cosine(10.0, 1, 0.6, &[1]).unwrap();
    let h = build_hamiltonian(&b, &v).unwrap();
    for i in 0..b.size() {
        for j in 0..b.size() {
            let want = match i.abs_diff(j) {
                0 => kin[i],
                1 => 0.3,
                _ => 0.0,
            };
            assert_eq!(h[(i, j)], Complex64::new(want, 0.0));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b2 = BoxSpec::new(2, 7.0, 3).unwrap();
    let v2 = FourierPotential::random(&mut rng, 7.0, 2, 4, 2, 1.0).unwrap();
    assert_eq!(hermitian_deviation(&build_hamiltonian(&b2, &v2).unwrap()), 0.0);
}

#[test]
fn incompatible_inputs_rejected() {
    let b = BoxSpec::new(1, 10.0, 2).unwrap();
    let v = FourierPotential::cosine(10.0, 1, 1.0, &[3]).unwrap();
    assert!(matches!(build_hamiltonian(&b, &v), Err(Error::ModeOutsideBasis(_))));
    let w = FourierPotential::cosine(11.0, 1, 1.0, &[1]).unwrap();
    assert!(build_hamiltonian(&b, &w).is_err());
    assert!(BoxSpec::new(4, 1.0, 1).is_err());
    assert!(matches!(BoxSpec::with_cap(3, 1.0, 10, 4096), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn eigensolver_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b = BoxSpec::new(2, 8.0, 5).unwrap();
    let v = FourierPotential::random(&mut rng, 8.0, 2, 5, 3, 1.0).unwrap();
    let h = build_hamiltonian(&b, &v).unwrap();
    let e = eigh(&h).unwrap();
    assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    let norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let lam = DMatrix::from_fn(b.size(), b.size(), |i, j| {
        if i == j {
            Complex64::new(e.values[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let res = &h * &e.vectors - &e.vectors * lam;
    let r = res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(r <= 1e-10 * norm, "{r}");
}

#[test]
fn riesz_sum_examples() {
    assert_eq!(neg_riesz_sum(&[-1.0, 0.0, 3.0], 1.0), 3.0);
    assert_eq!(neg_riesz_sum(&[2.0, 3.0], 1.0), 0.0);
}

#[test]
fn second_order_matches_all_pairs_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cases: Vec<(FourierPotential, PhysicsParams)> = vec![
        (FourierPotential::cosine(40.0, 1, 1.0, &[3]).unwrap(), p(1, 1.0)),
        (FourierPotential::random(&mut rng, 13.3, 1, 4, 6, 1.0).unwrap(), p(1, 2.2)),
        (FourierPotential::random(&mut rng, 9.1, 2, 6, 3, 1.0).unwrap(), p(2, 1.7)),
    ];
    for (v, params) in cases {
        let u = (2.0 * PI / v.l).powi(2);
        let r = (params.mu / u).sqrt() as i64 + 2;
        // every (p, p') pair, p in the sea, p' = p + k outside it
        let mut total = 0.0;
        for (k, c) in &v.coeffs {
            let mut inner = 0.0;
            for pn in cube(v.d, r) {
                let p2: i64 = pn.iter().map(|x| x * x).sum();
                if u * p2 as f64 > params.mu {
                    continue;
                }
                let pp2: i64 = pn.iter().zip(k).map(|(a, b)| (a + b) * (a + b)).sum();
                if u * pp2 as f64 > params.mu {
                    inner += 1.0 / (u * (pp2 - p2) as f64);
                }
            }
            total += c.norm_sqr() * inner;
        }
        let oracle = -(params.q as f64) * total;
        assert_eq!(second_order_box(&v, &params).unwrap(), oracle);
    }
    let zero = FourierPotential::zero(40.0, 1).unwrap();
    assert_eq!(second_order_box(&zero, &p(1, 1.0)).unwrap(), 0.0);
}

#[test]
fn second_order_rejects_resonant_fermi_level() {
    let l = 2.0 * PI * 3.0;
    let v = FourierPotential::cosine(l, 1, 1.0, &[1]).unwrap();
    assert!(matches!(second_order_box(&v, &p(1, 1.0)), Err(Error::Degenerate(_))));
}

#[test]
fn small_coupling_matches_second_order() {
    let params = p(1, 1.0);
    let v = FourierPotential::cosine(40.0, 1, 1.0, &[3]).unwrap();
    let b = BoxSpec::new(1, 40.0, 64).unwrap();
    let t = 1e-3;
    let e = relative_energy(&b, &v.scaled(t), &params).unwrap();
    let s2 = second_order_box(&v, &params).unwrap();
    assert!((e.relative_energy / (t * t) / s2 - 1.0).abs() < 5e-3);
}

#[test]
fn second_order_converges_to_continuum() {
    let params = p(1, 1.0);
    let sigma = 1.0;
    let cont = second_order_continuum_1d(
        |k| {
            let h = sigma * (-0.5 * sigma * sigma * k * k).exp();
            h * h
        },
        &params,
        40.0,
    )
    .unwrap();
    let l = 320.37;
    let v = FourierPotential::gaussian_bump(l, 1, 1.0, sigma).unwrap();
    // unitary transform of the bump is sigma exp(-sigma^2 k^2 / 2)
    let n = [3];
    let kn = 2.0 * PI * 3.0 / l;
    assert!((v.unitary_hat(&n).re - sigma * (-0.5 * sigma * sigma * kn * kn).exp()).abs() < 1e-12);
    let s2 = second_order_box(&v, &params).unwrap();
    assert!((s2 / cont - 1.0).abs() < 0.03);
}

#[test]
fn zero_potential_is_exactly_zero() {
    for d in 1..=2 {
        let b = BoxSpec::new(d, 9.3, 6).unwrap();
        let v = FourierPotential::zero(9.3, d).unwrap();
        let params = p(d, 1.1);
        let out = relative_energy_with(&b, &v, &params, RunOptions { density_grid: true, ..Default::default() }).unwrap();
        assert_eq!(out.relative_energy, 0.0);
        assert_eq!(out.sc_rhs, 0.0);
        assert_eq!(trace_relation_check(&b, &v, &params).unwrap(), 0.0);
        assert_eq!(free_energy_t(&b, &v, &params, 0.1).unwrap(), 0.0);
        let sp = Spectrum::compute(&b, &v).unwrap();
        assert_eq!(relative_kinetic(&b, &sp.q_matrix(1.1), &params).unwrap(), 0.0);
    }
}

#[test]
fn random_runs_satisfy_exact_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..8 {
        let d = 1 + i % 2;
        let (b, v, params) = random_run(&mut rng, d);
        let out = relative_energy_with(&b, &v, &params, RunOptions { density_grid: true, ..Default::default() }).unwrap();
        assert!(out.relative_energy <= 1e-9, "{out:?}");
        assert!(out.relative_energy_box_density <= 1e-9);
        let grid = out.density_grid.as_ref().unwrap();
        let dn = params.q as f64 * (out.occupied_perturbed as f64 - out.occupied_free as f64);
        assert!((grid.integral - dn).abs() < 1e-8);
        let tr = trace_relation_terms(&b, &v, &params, None).unwrap();
        assert!(tr.deviation <= 1e-9, "{tr:?}");
        let finer = trace_relation_terms(&b, &v, &params, Some(tr.grid_points + 7)).unwrap();
        assert!((finer.potential_term - tr.potential_term).abs() < 1e-9);
        // cutoff doubling
        let b2 = BoxSpec::new(d, b.l, 2 * b.n_max).unwrap();
        if d == 1 {
            let out2 = relative_energy(&b2, &v, &params).unwrap();
            assert!((out2.relative_energy - out.relative_energy).abs() <= 1e-8);
        }
    }
}

#[test]
fn projection_difference_kinetic_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (b, v, params) = random_run(&mut rng, 1);
    let sp = Spectrum::compute(&b, &v).unwrap();
    let q = sp.q_matrix(params.mu);
    let t = relative_kinetic(&b, &q, &params).unwrap();
    assert!(t >= 0.0);
    let kin = b.kinetic();
    // || Q |H_0 - mu|^{1/2} ||_HS^2
    let mut hs = 0.0;
    for i in 0..b.size() {
        for j in 0..b.size() {
            hs += q[(i, j)].norm_sqr() * (kin[j] - params.mu).abs();
        }
    }
    assert!((t - hs).abs() < 1e-9);
    // Q^2 = Q^{++} - Q^{--}
    let n = b.size();
    let sign = |i: usize| if kin[i] <= params.mu { -1.0 } else { 1.0 };
    let q2 = &q * &q;
    for i in 0..n {
        for j in 0..n {
            let block = if sign(i) == sign(j) { q[(i, j)] * sign(i) } else { Complex64::new(0.0, 0.0) };
            assert!((q2[(i, j)] - block).norm() < 1e-10);
        }
    }
    // outside the admissible set
    let bad = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(2.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    assert!(matches!(relative_kinetic(&b, &bad, &params), Err(Error::ConstraintViolation(_))));
}

#[test]
fn cutoff_touching_states_are_reported() {
    let b = BoxSpec::new(1, 20.0, 4).unwrap();
    let v = FourierPotential::cosine(20.0, 1, 3.0, &[2]).unwrap();
    assert!(matches!(relative_energy(&b, &v, &p(1, 0.7)), Err(Error::CutoffInsufficient(_))));
}

#[test]
fn li_yau_identity_and_bound() {
    let params = p(1, 1.0);
    let b = BoxSpec::new(1, 60.0, 200).unwrap();
    let om = SubBox { lo: vec![-0.5], hi: vec![0.5] };
    let r = li_yau_check(&b, &om, &params).unwrap();
    assert!((r.lhs - r.rhs_discrete).abs() <= 1e-10);
    let want = 2.0 * k_sc(1, 1).unwrap() * params.rho0().powi(3);
    assert!((r.rhs_continuum - want).abs() < 1e-14);
    assert!(r.relative_kinetic >= 0.95 * r.rhs_continuum);
    let empty = SubBox { lo: vec![0.3], hi: vec![0.3] };
    let z = li_yau_check(&b, &empty, &params).unwrap();
    assert_eq!((z.lhs, z.rhs_discrete, z.rhs_continuum), (0.0, 0.0, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let b2 = BoxSpec::new(2, 9.0, 6).unwrap();
    for _ in 0..3 {
        let lo: Vec<f64> = (0..2).map(|_| rng.gen_range(-4.5..0.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|&a| a + rng.gen_range(0.1..4.0)).collect();
        let r = li_yau_check(&b2, &SubBox { lo, hi }, &p(2, 1.3)).unwrap();
        assert!((r.lhs - r.rhs_discrete).abs() <= 1e-10);
    }
    assert!(li_yau_check(&b, &SubBox { lo: vec![-40.0], hi: vec![0.0] }, &params).is_err());
}

#[test]
fn temperature_against_integral_formula() {
    let l = 2.0 * PI * 5.5;
    let params = p(1, 1.0);
    let b = BoxSpec::new(1, l, 40).unwrap();
    let v = FourierPotential::from_half_spectrum(
        l,
        1,
        &[(vec![1], Complex64::new(0.2, 0.1)), (vec![3], Complex64::new(-0.1, 0.05))],
    )
    .unwrap();
    let e0 = relative_energy(&b, &v, &params).unwrap().relative_energy;
    let cold = free_energy_t_both(&b, &v, &params, 1e-4).unwrap();
    assert!((cold.free_energy - e0).abs() < 1e-3);
    for t in [1e-2, 0.1, 0.5] {
        let f = free_energy_t_both(&b, &v, &params, t).unwrap();
        assert!((f.free_energy - f.lambda_quadrature).abs() < 1e-6, "{f:?}");
        assert!(f.free_energy <= 1e-12);
    }
    assert!(free_energy_t(&b, &v, &params, 0.0).is_err());
}

#[test]
fn fermi_dirac_helpers() {
    let (mu, t) = (1.0, 0.05);
    let h = 1e-5;
    for x in [0.5, 0.97, 1.0, 1.2] {
        let d1 = (fermi_f(x + h, mu, t) - fermi_f(x - h, mu, t)) / (2.0 * h);
        assert!((d1 - fermi_f_prime(x, mu, t)).abs() < 1e-6);
        let d2 = (fermi_f_prime(x + h, mu, t) - fermi_f_prime(x - h, mu, t)) / (2.0 * h);
        assert!((d2 - fermi_f_second(x, mu, t)).abs() < 1e-4);
    }
    assert!(fermi_f(1e6, mu, t).abs() < 1e-300);
    assert!((fermi_f(-1e6, mu, t) - (-1e6 - mu)).abs() < 1e-6);
}

#[test]
fn thermodynamic_sweep_converges() {
    let params = p(1, 1.0);
    let prof = Profile::GaussianBump { amplitude: 0.5, sigma: 1.0 };
    let ls: Vec<f64> = (0..4).map(|j| 2.0 * PI * (3.0 + 1.0 / 3.0) * 2f64.powi(j)).collect();
    let sw = thermo_sweep(&prof, &params, &ls, 12.0).unwrap();
    assert!(sw.gaps.windows(2).all(|w| w[1] < w[0]), "{:?}", sw.gaps);
    let other = thermo_sweep(&prof, &params, &ls, 16.0).unwrap();
    for (a, b) in sw.levels.iter().zip(&other.levels) {
        assert!((a.relative_energy - b.relative_energy).abs() < 1e-8);
    }
    let zero = thermo_sweep(&Profile::Zero, &params, &ls[..2], 12.0).unwrap();
    assert!(zero.levels.iter().all(|l| l.relative_energy == 0.0));
}

#[test]
fn peierls_contrast() {
    let widths: Vec<f64> = (3..8).map(|j| 2f64.powi(-j)).collect();
    let one = peierls_scan(&p(1, 1.0), &widths, 1.0).unwrap();
    assert!(one.levels.windows(2).all(|w| w[1].ratio > w[0].ratio));
    let target = 1.0 / (12.0 * PI);
    assert!((one.implied_l1_prime / target - 1.0).abs() < 0.25);
    let two = peierls_scan(&p(2, 1.0), &widths[1..3], 1.0).unwrap();
    assert!(two.levels.iter().all(|l| l.ratio < 1.0 / (8.0 * PI)));
}
