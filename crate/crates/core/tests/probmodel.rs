use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use largesets::lattice::{dual_basis, lattice_of};
use largesets::probmodel::{
    char_fn_X, covariance, gaussian_char, norm_constant_M, norms, r_norm, sample_into, statistic_X, Assignment,
};
use largesets::setsys::{build_incidence, IncidenceSystem};

/// Systems used for the norm inequalities, all with entries in {0, 1}.
fn small_systems() -> Vec<(u32, u32, u32)> {
    vec![(4, 2, 1), (5, 2, 1), (6, 3, 2), (7, 3, 2), (6, 3, 1)]
}

fn random_theta(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-scale..=scale)).collect()
}

/// Random nonzero points of the dual lattice of the product lattice.
fn dual_point(sys: &IncidenceSystem, l: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dual = dual_basis(&lattice_of(sys)).unwrap();
    let a = sys.cols();
    loop {
        let mut v = vec![0.0; (l as usize - 1) * a];
        let mut nonzero = false;
        for block in v.chunks_mut(a) {
            for i in 0..a {
                let c = rng.random_range(-2i32..=2);
                nonzero |= c != 0;
                for (x, r) in block.iter_mut().zip(dual.row(i)) {
                    *x += c as f64 * r.to_f64().unwrap();
                }
            }
        }
        if nonzero {
            return v;
        }
    }
}

#[test]
fn norm_comparison_holds_at_unit_constant() {
    // with C_M = 1, M already exceeds sqrt(|B|), which bounds max by root-mean-square
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (n, k, t) in small_systems() {
        let sys = build_incidence(n, k, t).unwrap();
        let m = norm_constant_M(sys.cols(), 1.0, 1.0);
        assert!(m >= (sys.rows() as f64).sqrt(), "n={n} k={k} t={t}: M={m}");
        for l in [2u64, 3] {
            let d = (l as usize - 1) * sys.cols();
            for i in 0..1000 {
                let scale = if i % 2 == 0 { 2.0 } else { 0.05 };
                let th = random_theta(&mut rng, d, scale);
                let r = norms(&th, &sys, l).unwrap();
                assert!(r.ii_inf <= m * r.ii_2 * (1.0 + 1e-12));
                assert!(r.iii_inf <= m * r.iii_2 * (1.0 + 1e-12));
                assert!(r.iii_inf <= 0.5 && r.iii_2 <= r.ii_2 + 1e-12);
            }
        }
    }
}

#[test]
fn dual_lattice_points_are_far_from_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for (n, k, t) in small_systems() {
        let sys = build_incidence(n, k, t).unwrap();
        let m = norm_constant_M(sys.cols(), 1.0, 1.0);
        for l in [2u64, 3] {
            for _ in 0..100 {
                let th = dual_point(&sys, l, &mut rng);
                let r = norms(&th, &sys, l).unwrap();
                assert!(r.ii_inf >= 1.0 - 1e-9, "pairings of a dual point are integers, not all zero");
                assert!(r_norm(&th, &sys, l).unwrap() >= 1.0 / m);
            }
        }
    }
}

#[test]
fn reduced_norms_are_periodic() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let sys = build_incidence(6, 3, 2).unwrap();
    let d = 2 * sys.cols();
    for _ in 0..50 {
        let th = random_theta(&mut rng, d, 1.0);
        let shift = dual_point(&sys, 3, &mut rng);
        let moved: Vec<f64> = th.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let (a, b) = (norms(&th, &sys, 3).unwrap(), norms(&moved, &sys, 3).unwrap());
        assert!((a.iii_inf - b.iii_inf).abs() < 1e-9 && (a.iii_2 - b.iii_2).abs() < 1e-9);
    }
}

#[test]
fn characteristic_function_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for (n, k, t) in small_systems() {
        let sys = build_incidence(n, k, t).unwrap();
        for l in [2u64, 3, 4] {
            let d = (l as usize - 1) * sys.cols();
            for _ in 0..200 {
                let v = char_fn_X(&random_theta(&mut rng, d, 3.0), &sys, l).unwrap();
                assert!(v.norm() <= 1.0 + 1e-12);
            }
        }
    }
}

fn samples(sys: &IncidenceSystem, l: u64, trials: usize, seed: u64) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tau = Assignment { l, bins: vec![0; sys.rows()] };
    (0..trials)
        .map(|_| {
            sample_into(&mut rng, l, &mut tau.bins);
            statistic_X(&tau, sys).unwrap()
        })
        .collect()
}

#[test]
fn characteristic_function_matches_sampling() {
    let sys = build_incidence(4, 2, 1).unwrap();
    let l = 3;
    let trials = 40_000;
    let xs = samples(&sys, l, trials, 35);
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for _ in 0..5 {
        let th = random_theta(&mut rng, 8, 0.5);
        let emp: Complex64 = xs
            .iter()
            .map(|x| {
                let p: f64 = x.iter().zip(&th).map(|(&a, b)| a as f64 * b).sum();
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * p)
            })
            .sum::<Complex64>()
            / trials as f64;
        let exact = char_fn_X(&th, &sys, l).unwrap();
        // each component has variance at most 1
        let tol = 5.0 / (trials as f64).sqrt();
        assert!((emp.re - exact.re).abs() <= tol && (emp.im - exact.im).abs() <= tol, "{emp} vs {exact}");
    }
}

#[test]
fn sample_mean_and_covariance() {
    // K5 edges with four bins: |B| = 10, dimension 15
    let sys = build_incidence(5, 2, 1).unwrap();
    let l = 4;
    let mom = covariance(&sys, l).unwrap();
    let trials = 50_000;
    let xs: Vec<Vec<f64>> =
        samples(&sys, l, trials, 37).into_iter().map(|x| x.into_iter().map(|v| v as f64).collect()).collect();
    let d = mom.dim();
    let nf = trials as f64;
    let mean: Vec<f64> = (0..d).map(|i| xs.iter().map(|x| x[i]).sum::<f64>() / nf).collect();
    for i in 0..d {
        let want = mom.mean_x[i].to_f64().unwrap();
        let sd = mom.sigma_entry(i, i).to_f64().unwrap().sqrt();
        assert!((mean[i] - want).abs() <= 5.0 * sd / nf.sqrt(), "mean {i}: {} vs {want}", mean[i]);
        for j in 0..d {
            let prods: Vec<f64> = xs.iter().map(|x| (x[i] - mean[i]) * (x[j] - mean[j])).collect();
            let cov = prods.iter().sum::<f64>() / (nf - 1.0);
            let var = prods.iter().map(|p| (p - cov).powi(2)).sum::<f64>() / (nf - 1.0);
            let want = mom.sigma_entry(i, j).to_f64().unwrap();
            assert!((cov - want).abs() <= 5.0 * (var / nf).sqrt(), "cov ({i},{j}): {cov} vs {want}");
        }
    }
}

#[test]
fn gaussian_comparison_is_third_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    for (n, l) in [(4u32, 3u64), (5, 2), (5, 4)] {
        let sys = build_incidence(n, 2, 1).unwrap();
        let mom = covariance(&sys, l).unwrap();
        for _ in 0..20 {
            let dir = random_theta(&mut rng, mom.dim(), 1.0);
            let gap = |s: f64| {
                let th: Vec<f64> = dir.iter().map(|x| x * s).collect();
                (char_fn_X(&th, &sys, l).unwrap() - gaussian_char(&th, &mom).unwrap()).norm()
            };
            let (far, near) = (gap(0.01), gap(0.005));
            assert!(near <= far / 6.0 + 1e-14, "n={n} l={l}: {near:e} vs {far:e}");
        }
    }
}
