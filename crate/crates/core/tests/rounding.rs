mod common;

use std::f64::consts::FRAC_PI_2;

use grothnorm::gram::{convex_rank, gamma_d, GramFactor, OptConfig};
use grothnorm::rng::RngStream;
use grothnorm::rounding::*;
use grothnorm::special::{alpha_gw, density_f, moments_closed_form, phi};
use grothnorm::{Field, SymMatrix, C64};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn unit(v: &[f64]) -> Vec<C64> {
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| c(x / r)).collect()
}

fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

#[test]
fn one_dimensional_real_sphere_is_a_fair_coin() {
    let mut r = rng(1);
    let n = 20_000;
    let plus = (0..n)
        .filter(|_| {
            let x = sample_sphere(1, Field::Real, &mut r);
            assert_eq!(x[0].re.abs(), 1.0);
            x[0].re > 0.0
        })
        .count();
    let z = (plus as f64 - n as f64 / 2.0) / (n as f64 / 4.0).sqrt();
    assert!(z.abs() < 4.0, "z = {z}");
}

#[test]
fn sphere_samples_are_centered_and_isotropic() {
    for field in [Field::Real, Field::Complex] {
        let mut r = rng(2);
        let dim = 3;
        let n = 100_000;
        let mut mean = vec![C64::new(0.0, 0.0); dim];
        let mut second = vec![0.0; dim];
        for _ in 0..n {
            let x = sample_sphere(dim, field, &mut r);
            let norm: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            for k in 0..dim {
                mean[k] += x[k] / n as f64;
                second[k] += x[k].norm_sqr() / n as f64;
            }
        }
        assert!(mean.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() <= 0.02);
        for s in second {
            assert!((s - 1.0 / dim as f64).abs() < 0.01);
        }
    }
}

#[test]
fn squared_inner_product_at_dimension_four() {
    for field in [Field::Real, Field::Complex] {
        let est = moments_mc(3, 2.0, field, 100_000, RngStream::new(3, 0)).unwrap();
        assert!(est.z_score(c(0.25)) < 3.0, "{est:?}");
        assert!((moments_closed_form(3, 2.0, field).unwrap() - 0.25).abs() < 1e-12);
    }
}

#[test]
fn moments_match_closed_forms() {
    for field in [Field::Real, Field::Complex] {
        for n in 1..=6 {
            for alpha in [1.0, 2.0, 3.0] {
                let stream = RngStream::new(4, (n * 10) as u64 + alpha as u64);
                let est = moments_mc(n, alpha, field, 50_000, stream).unwrap();
                let expected = moments_closed_form(n, alpha, field).unwrap();
                assert!(est.z_score(c(expected)) < 4.0, "{field:?} n={n} alpha={alpha}: {est:?} vs {expected}");
            }
        }
    }
}

#[test]
fn inner_product_histogram_matches_density() {
    let n = 3;
    let samples = inner_product_samples(n, Field::Real, 1_000_000, RngStream::new(5, 0));
    assert!(samples.iter().all(|t| t.im == 0.0 && t.re.abs() <= 1.0));
    let bins = 40;
    let mut counts = vec![0usize; bins];
    for t in &samples {
        let b = (((t.re + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = samples.len() as f64;
    let mut chi2 = 0.0;
    for (b, &k) in counts.iter().enumerate() {
        let lo = -1.0 + 2.0 * b as f64 / bins as f64;
        let hi = lo + 2.0 / bins as f64;
        let p = quadrature::double_exponential::integrate(|t| density_f(c(t), n, Field::Real).unwrap(), lo, hi, 1e-12)
            .integral;
        let e = p * total;
        chi2 += (k as f64 - e).powi(2) / e;
    }
    let p_value = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    assert!(p_value > 0.001, "chi2 = {chi2}, p = {p_value}");
}

#[test]
fn identity_examples() {
    for field in [Field::Real, Field::Complex] {
        let u = unit(&[1.0, 0.0, 0.0]);
        let v = unit(&[0.0, 1.0, 0.0]);
        let rep = mc_identities(&u, &v, field, 100_000, RngStream::new(6, 0)).unwrap();
        let sign_sign = rep.checks.iter().find(|c| c.name == "sign-sign").unwrap();
        assert_eq!(sign_sign.expected, c(0.0));
        assert!(sign_sign.z_score < 3.0);

        let rep = mc_identities(&u, &u, field, 10_000, RngStream::new(6, 1)).unwrap();
        let sign_sign = rep.checks.iter().find(|c| c.name == "sign-sign").unwrap();
        assert!((sign_sign.estimate.mean - c(1.0)).norm() < 1e-12);
    }
    let u = unit(&[1.0, 0.0]);
    let v = unit(&[0.5, 0.75f64.sqrt()]);
    let rep = mc_identities(&u, &v, Field::Real, 200_000, RngStream::new(6, 2)).unwrap();
    let sign_sign = rep.checks.iter().find(|c| c.name == "sign-sign").unwrap();
    assert!((sign_sign.expected.re - 1.0 / 3.0).abs() < 1e-15);
    assert!(sign_sign.z_score < 3.0);
    assert!(mc_identities(&u, &[c(2.0), c(0.0)], Field::Real, 10, RngStream::new(0, 0)).is_err());
}

#[test]
fn identities_hold_for_random_pairs() {
    let mut r = rng(7);
    for field in [Field::Real, Field::Complex] {
        for k in 0..4 {
            let u = sample_sphere(4, field, &mut r);
            let v = sample_sphere(4, field, &mut r);
            let rep = mc_identities(&u, &v, field, 100_000, RngStream::new(7, k)).unwrap();
            assert!(rep.all_within(4.0), "{rep:?}");
        }
    }
}

#[test]
fn phi_defining_integral() {
    let mut r = rng(8);
    for field in [Field::Real, Field::Complex] {
        for d in 1..=3 {
            let u = sample_sphere(3, field, &mut r);
            let v = sample_sphere(3, field, &mut r);
            let x = dot(&u, &v);
            let x = if field == Field::Real { c(x.re) } else { x };
            let est = phi_mc(x, d, field, 200_000, RngStream::new(8, d as u64)).unwrap();
            let exact = phi(x, d, field).unwrap();
            assert!(est.z_score(exact) < 4.0, "{field:?} d={d}: {est:?} vs {exact}");
        }
    }
    let est = phi_mc(c(0.3), 2, Field::Real, 1_000_000, RngStream::new(8, 9)).unwrap();
    assert!(est.z_score(phi(c(0.3), 2, Field::Real).unwrap()) < 3.0);
}

#[test]
fn mc_is_reproducible_per_stream() {
    let a = phi_mc(c(0.4), 2, Field::Complex, 30_000, RngStream::new(9, 1)).unwrap();
    let b = phi_mc(c(0.4), 2, Field::Complex, 30_000, RngStream::new(9, 1)).unwrap();
    let other = phi_mc(c(0.4), 2, Field::Complex, 30_000, RngStream::new(9, 2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.mean, other.mean);
}

fn random_unit_factor(n: usize, d: usize, field: Field, seed: u64) -> GramFactor {
    let mut r = rng(seed);
    GramFactor {
        n,
        d,
        field,
        constraint: grothnorm::gram::Constraint::UnitSphere,
        vectors: (0..n).flat_map(|_| sample_sphere(d, field, &mut r)).collect(),
    }
}

#[test]
fn rounding_average_converges_to_phi_sum() {
    for field in [Field::Real, Field::Complex] {
        for seed in 0..4 {
            let a = random_sym(5, field, &mut rng(100 + seed));
            let xs = random_unit_factor(5, 3, field, 200 + seed);
            let est = rounding_average(&a, &xs, 100_000, RngStream::new(10, seed)).unwrap();
            let exact = rounding_expectation(&a, &xs).unwrap();
            assert!(est.z_score(c(exact)) < 4.0, "{field:?}: {est:?} vs {exact}");
        }
    }
}

#[test]
fn rounded_vectors_have_unit_modulus() {
    for field in [Field::Real, Field::Complex] {
        let xs = random_unit_factor(7, 4, field, 11);
        let mut r = rng(12);
        for _ in 0..200 {
            let delta = gaussian_sign_round(&xs, &mut r).unwrap();
            assert!(delta.iter().all(|t| (t.norm() - 1.0).abs() < 1e-15));
            if field == Field::Real {
                assert!(delta.iter().all(|t| t.im == 0.0 && t.re.abs() == 1.0));
            }
        }
    }
}

#[test]
fn laplacian_rounding_keeps_the_gw_fraction() {
    let alpha = alpha_gw(Field::Real);
    for seed in 0..5 {
        let l = random_weights(8, 0.6, &mut rng(300 + seed)).laplacian_of().unwrap();
        let est = gamma_d(&l, convex_rank(8, Field::Real), &OptConfig::default().quick());
        let xs = &est.certificate;
        let expectation = rounding_expectation(&l, xs).unwrap();
        assert!(expectation >= alpha * est.value - 1e-9, "{expectation} vs {}", est.value);
        let avg = rounding_average(&l, xs, 20_000, RngStream::new(13, seed)).unwrap();
        assert!(avg.mean.re >= alpha * est.value - 4.0 * avg.std_err);
    }
}

#[test]
fn sharpness_examples() {
    let cfg = SharpnessConfig::default();
    let rep = sharpness_experiment(2, 512, Field::Real, RngStream::new(14, 0), &cfg).unwrap();
    assert!((1.10..=1.30).contains(&rep.ratio_estimate), "{rep:?}");
    assert!((rep.finite_n_bound - std::f64::consts::PI.powi(2) / 8.0).abs() < 1e-12);
    let mf = rep.m as f64;
    let mean = 1.0 / mf + (1.0 - 1.0 / mf) / 2.0;
    assert!((rep.gamma_lower - mean).abs() < 5.0 * rep.mc_std, "{rep:?}");
    assert!(sharpness_experiment(3, 2, Field::Real, RngStream::new(0, 0), &cfg).is_err());
    assert!(sharpness_experiment(1, 5, Field::Real, RngStream::new(0, 0), &cfg).is_err());
}

#[test]
fn sharpness_complex_runs() {
    let rep = sharpness_experiment(3, 256, Field::Complex, RngStream::new(15, 0), &SharpnessConfig::default()).unwrap();
    assert!(!rep.theta_exact);
    assert!(rep.ratio_estimate > 1.0);
    assert!(rep.theta_estimate <= rep.gamma_lower + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_sharpness_ratio_obeys_the_psd_bound(seed in 0u64..10_000, n in 2usize..5, m in 6usize..17) {
        let rep = sharpness_experiment(n, m, Field::Real, RngStream::new(seed, 0), &SharpnessConfig::default()).unwrap();
        prop_assert!(rep.theta_exact);
        prop_assert!(rep.ratio_estimate <= FRAC_PI_2 + 1e-9);
    }

    #[test]
    fn heuristic_theta_is_below_exact_theta(seed in 0u64..10_000, m in 6usize..15) {
        let exact = sharpness_experiment(3, m, Field::Real, RngStream::new(seed, 0), &SharpnessConfig::default()).unwrap();
        let cfg = SharpnessConfig { exact_max_m: 0, ..SharpnessConfig::default() };
        let heur = sharpness_experiment(3, m, Field::Real, RngStream::new(seed, 0), &cfg).unwrap();
        prop_assert_eq!(exact.gamma_lower, heur.gamma_lower);
        prop_assert!(heur.theta_estimate <= exact.theta_estimate * (1.0 + 1e-12));
    }

    #[test]
    fn sign_vec_has_unit_norm(v in prop::collection::vec(-3.0f64..3.0, 1..6)) {
        let s = sign_vec(&v.iter().map(|&x| c(x)).collect::<Vec<_>>());
        let norm: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn identity_matrix_rounding_is_deterministic() {
    // δ*Iδ = n for every draw.
    let xs = random_unit_factor(6, 3, Field::Complex, 16);
    let est = rounding_average(&SymMatrix::identity(6, Field::Complex), &xs, 5_000, RngStream::new(17, 0)).unwrap();
    assert!((est.mean.re - 6.0).abs() < 1e-9);
    assert!(est.std_err < 1e-9);
}
