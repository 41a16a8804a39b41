use std::f64::consts::PI;

use ltlab_core::physcore::{delta_t_with_rho0, k_sc};
use ltlab_core::rumin::*;
use ltlab_core::special::sphere_area;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_ball(r: f64, d: usize) -> u64 {
    let m = r.floor() as i64;
    let r2 = r * r;
    let mut count = 0;
    let side = 2 * m + 1;
    for i in 0..side.pow(d as u32) {
        let mut j = i;
        let mut s = 0i64;
        for _ in 0..d {
            let c = j % side - m;
            j /= side;
            s += c * c;
        }
        if s as f64 <= r2 {
            count += 1;
        }
    }
    count
}

#[test]
fn ball_counts_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..50 {
        let d = 1 + i % 3;
        let r: f64 = rng.gen_range(0.0..30.0);
        assert_eq!(lattice_count_ball(r, d).unwrap(), brute_ball(r, d), "r={r} d={d}");
    }
    assert_eq!(lattice_count_ball(0.0, 2).unwrap(), 1);
    assert_eq!(lattice_count_ball(1.5, 2).unwrap(), 9);
}

#[test]
fn ball_counts_approach_volume() {
    for d in [2, 3] {
        let r: f64 = 200.0;
        let vol = sphere_area(d).unwrap() / d as f64 * r.powi(d as i32);
        let c = lattice_count_ball(r, d).unwrap() as f64;
        assert!((c / vol - 1.0).abs() < 0.01, "d={d}");
    }
}

#[test]
fn shell_counts_match_double_loop() {
    for &l in &[3.0, 5.5, 7.0, 10.0] {
        for &mu in &[0.3, 1.0, 2.7] {
            for &e in &[0.0, 0.2, 0.9, 3.0] {
                let h = 2.0 * PI / l;
                let m = (((mu + e) / (h * h)).sqrt().ceil() as i64) + 1;
                let mut one = 0u64;
                let mut two = 0u64;
                for a in -m..=m {
                    let pa = h * a as f64;
                    if (pa * pa - mu).abs() <= e {
                        one += 1;
                    }
                    for b in -m..=m {
                        let pb = h * b as f64;
                        if (pa * pa + pb * pb - mu).abs() <= e {
                            two += 1;
                        }
                    }
                }
                assert_eq!(f_lattice(e, 1, mu, l).unwrap().count, one, "d=1 L={l} mu={mu} e={e}");
                assert_eq!(f_lattice(e, 2, mu, l).unwrap().count, two, "d=2 L={l} mu={mu} e={e}");
            }
        }
    }
}

#[test]
fn shell_density_approaches_continuum() {
    let got = f_lattice(0.5, 2, 1.0, 200.0).unwrap();
    let want = shell_volume(0.5, 2, 1.0).unwrap();
    assert!((got.density / want - 1.0).abs() < 0.02);
    assert!((got.density - got.count as f64 / 200f64.powi(2)).abs() < 1e-18);
}

#[test]
fn shell_bound_constant_is_finite() {
    let mut sweep = Vec::new();
    for &l in &[10.0, 20.0, 40.0, 80.0] {
        for &mu in &[0.5, 1.0, 2.0] {
            for &e in &[0.01, 0.1, 0.5, 2.0, 5.0] {
                sweep.push(ShellPoint { e, mu, l });
            }
        }
    }
    let c = fit_lattice_bound_constant(2, &sweep).unwrap();
    assert!(c.is_finite() && c > 0.0);
}

#[test]
fn continuum_shell_examples() {
    assert_eq!(f_continuum(0.0, 3).unwrap(), 0.0);
    assert!((f_continuum(1.0, 3).unwrap() - 2f64.powf(1.5) / (6.0 * PI * PI)).abs() < 1e-15);
    let vals: Vec<f64> = (0..50).map(|i| f_continuum(0.1 * i as f64, 3).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn rumin_asymptotics() {
    let small = 1e-6;
    for d in 1..=3 {
        let want = (2.0 * PI).powi(d as i32) / (6.0 * sphere_area(d).unwrap());
        let got = rumin_r(small, d).unwrap().value / (small * small);
        assert!((got / want - 1.0).abs() < 0.01, "d={d}: {got} vs {want}");
    }
    let big = 1e8;
    let got = rumin_r(big, 3).unwrap().value / big.powf(5.0 / 3.0);
    let want = 3.0 / 7.0 * k_sc(3, 1).unwrap();
    assert!((got / want - 1.0).abs() < 0.01, "{got} vs {want}");
    assert_eq!(rumin_r(0.0, 3).unwrap().value, 0.0);
}

#[test]
fn rumin_convex_and_nondecreasing() {
    for d in 1..=3 {
        let grid: Vec<f64> = (0..60).map(|i| 0.05 * i as f64).collect();
        let r: Vec<f64> = grid.iter().map(|&x| rumin_r(x, d).unwrap().value).collect();
        assert!(r.windows(2).all(|w| w[1] >= w[0]));
        assert!(r.windows(3).all(|w| w[1] <= 0.5 * (w[0] + w[2]) + 1e-12));
    }
}

#[test]
fn khat_bounds_and_stability() {
    for d in 1..=3 {
        let p = khat(d).unwrap();
        assert_eq!(p.rho_grid.len(), 400);
        assert!(p.r_values.windows(2).all(|w| w[1] >= w[0]));
        let ksc = k_sc(d, 1).unwrap();
        assert!(p.khat > 0.0 && p.khat <= ksc * (1.0 + 1e-9), "d={d}");
        let fine = khat_with_grid(d, 1e-6, 1e8, 800).unwrap();
        assert!((fine.khat / p.khat - 1.0).abs() < 1e-3, "d={d}");
        // the infimum holds on a grid it was not computed on
        let r0 = rumin_rho0(d).unwrap();
        for i in 0..97 {
            let rho = 10f64.powf(-5.9 + 0.14 * i as f64);
            let r = rumin_r(rho, d).unwrap().value;
            assert!(p.khat * delta_t_with_rho0(rho, r0, d) <= r * (1.0 + 1e-9), "d={d} rho={rho}");
        }
    }
    // delta T_1 is exactly rho^2 in d = 2, so the small-rho ratio bounds khat.
    assert!(khat(2).unwrap().khat <= PI / 3.0 * (1.0 + 1e-9));
}
