mod common;

use grothnorm::gram::*;
use grothnorm::{Field, RectMatrix, SymMatrix};
use proptest::prelude::*;

use common::*;

fn cfg() -> OptConfig {
    OptConfig::default().quick()
}

fn check_certificate(a: &SymMatrix, est: &NormEstimate) {
    let x = &est.certificate;
    assert_eq!(x.n, a.n());
    for r in x.column_norms() {
        match x.constraint {
            Constraint::UnitSphere => assert!((r - 1.0).abs() <= 1e-12, "column norm {r}"),
            Constraint::UnitBall => assert!(r <= 1.0 + 1e-12, "column norm {r}"),
        }
    }
    let raw = x.objective(a);
    assert!((raw.abs() - est.value).abs() <= 1e-9 * (1.0 + est.value), "{raw} vs {}", est.value);
    assert_eq!(raw >= 0.0 || raw.abs() < 1e-12, est.sign == 1);
}

#[test]
fn gamma_examples() {
    let ones = SymMatrix::real_from_fn(2, |_, _| 1.0);
    assert!((gamma_d(&ones, 1, &cfg()).value - 4.0).abs() < 1e-9);
    for d in 1..4 {
        assert!(gamma_d(&SymMatrix::diag(&[1.0, -1.0]), d, &cfg()).value.abs() < 1e-9);
    }
    let a = SymMatrix::from_real(3, &[1.0, -2.0, 0.0, -2.0, 1.0, 3.0, 0.0, 3.0, 1.0]).unwrap();
    let est = gamma_d(&a, 3, &cfg());
    assert!((est.value - 13.0).abs() < 1e-6);
    assert_eq!(est.kind, CertificateKind::ExactConvexRegime);
    check_certificate(&a, &est);
}

#[test]
fn big_gamma_examples() {
    assert!((big_gamma_d(&SymMatrix::diag(&[1.0, -1.0]), 1, &cfg()).value - 1.0).abs() < 1e-9);
    assert!((big_gamma_d(&SymMatrix::diag(&[1.0, -1.0]), 2, &cfg()).value - 1.0).abs() < 1e-6);
    assert_eq!(big_gamma_d(&SymMatrix::zeros(3, Field::Real), 2, &cfg()).value, 0.0);
    assert_eq!(big_gamma_d(&SymMatrix::zeros(3, Field::Complex), 2, &cfg()).value, 0.0);
}

#[test]
fn g_examples() {
    let b = RectMatrix::from_real(2, 2, &[1.0, -1.0, 1.0, 1.0]).unwrap();
    assert!((g_d_rect(&b, 1, &cfg()).value - 2.0).abs() < 1e-6);
    let est = g_d_rect(&b, 2, &OptConfig::default());
    assert!((est.value - 2.0 * 2f64.sqrt()).abs() < 1e-6);
    assert!(est.warning.is_none(), "{:?}", est.warning);
    let diag = RectMatrix::from_real(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.5, 0.0, 0.0, 0.0, 0.5]).unwrap();
    for d in [1, 2, 4] {
        assert!((g_d_rect(&diag, d, &cfg()).value - 4.0).abs() < 1e-6);
    }
}

#[test]
fn signed_examples() {
    let a = SymMatrix::diag(&[1.0, -1.0]);
    assert!(r_signed(&a, Variant::Eq, &cfg()).value.abs() < 1e-9);
    assert!((r_signed(&a, Variant::Le, &cfg()).value - 1.0).abs() < 1e-6);
    assert!((r_signed(&SymMatrix::identity(4, Field::Real), Variant::Eq, &cfg()).value - 4.0).abs() < 1e-9);
    assert!(spread(&a, &cfg()).abs() < 1e-6);
    let swap = SymMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
    assert!((spread(&swap, &cfg()) - 4.0).abs() < 1e-6);
}

#[test]
fn complex_via_real_examples() {
    let b = RectMatrix::from_real(2, 2, &[1.0, -1.0, 1.0, 1.0]).unwrap().embed();
    let via = complex_norm_via_real(&b, 1, Which::Gamma, &cfg()).unwrap();
    assert!((via.value - gamma_d(&b, 2, &cfg()).value).abs() < 1e-9);
    assert!((via.value - 4.0 * 2f64.sqrt()).abs() < 1e-6);
    let ones = SymMatrix::real_from_fn(2, |_, _| 1.0);
    for d in 1..4 {
        for which in [Which::Gamma, Which::BigGamma] {
            assert!((complex_norm_via_real(&ones, d, which, &cfg()).unwrap().value - 4.0).abs() < 1e-9);
        }
        assert!((gamma_d(&ones.to_complex(), d, &cfg()).value - 4.0).abs() < 1e-9);
    }
    assert!(complex_norm_via_real(&ones.to_complex(), 1, Which::Gamma, &cfg()).is_err());
}

#[test]
fn convex_regime_thresholds() {
    assert_eq!(convex_rank(4, Field::Real), 3);
    assert_eq!(convex_rank(3, Field::Complex), 2);
    assert_eq!(convex_rank(1, Field::Real), 1);
    assert!(!is_convex_regime(6, 3, Field::Real));
    assert!(is_convex_regime(5, 3, Field::Real));
    assert!(!is_convex_regime(4, 2, Field::Complex));
    assert!(is_convex_regime(4, 4, Field::Complex));
    let a = random_sym(6, Field::Real, &mut rng(1));
    assert_eq!(gamma_d(&a, 3, &cfg()).kind, CertificateKind::HeuristicLowerBound);
    assert_eq!(gamma_d(&a, 4, &cfg()).kind, CertificateKind::ExactConvexRegime);
    assert_eq!(gamma_d(&a, 1, &cfg()).kind, CertificateKind::ExactEnumeration);
}

#[test]
fn d_is_clamped_to_n() {
    let a = random_sym(3, Field::Complex, &mut rng(2));
    let est = gamma_d(&a, 10, &cfg());
    assert!(est.d_effective <= 3);
    assert!((est.value - gamma_d(&a, 3, &cfg()).value).abs() < 1e-6);
}

#[test]
fn runs_are_deterministic_per_seed() {
    let a = random_sym(7, Field::Complex, &mut rng(3));
    let c = cfg().with_seed(42);
    assert_eq!(gamma_d(&a, 2, &c).value, gamma_d(&a, 2, &c).value);
    assert_eq!(big_gamma_d(&a, 3, &c).value, big_gamma_d(&a, 3, &c).value);
}

#[test]
fn cross_check_reports_agreement() {
    let a = random_psd(6, 3, Field::Real, &mut rng(4));
    let est = gamma_d(&a, 4, &OptConfig::default());
    assert!(est.cross_check_gap.unwrap() <= 1e-5);
    assert!(est.warning.is_none());
}

#[test]
fn zero_diagonal_ball_matches_sphere() {
    for seed in 0..8 {
        let a = random_zero_diag(6, &mut rng(seed));
        for d in [2, 4] {
            let big = big_gamma_d(&a, d, &cfg());
            assert!((big.value - gamma_d(&a, d, &cfg()).value).abs() < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificates_attain_their_values(seed in 0u64..10_000, n in 1usize..8, d in 1usize..5, complex in any::<bool>()) {
        let field = if complex { Field::Complex } else { Field::Real };
        let a = random_sym(n, field, &mut rng(seed));
        check_certificate(&a, &gamma_d(&a, d, &cfg()));
        check_certificate(&a, &big_gamma_d(&a, d, &cfg()));
    }

    #[test]
    fn monotone_in_d(seed in 0u64..10_000) {
        let a = random_sym(6, Field::Real, &mut rng(seed));
        let vals: Vec<f64> = (1..=6).map(|d| gamma_d(&a, d, &cfg()).value).collect();
        for w in vals.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-7, "{:?}", vals);
        }
        let vals: Vec<f64> = (1..=6).map(|d| big_gamma_d(&a, d, &cfg()).value).collect();
        for w in vals.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-7, "{:?}", vals);
        }
    }

    #[test]
    fn stabilizes_in_convex_regime(seed in 0u64..10_000) {
        let a = random_sym(4, Field::Real, &mut rng(seed));
        prop_assert!((gamma_d(&a, 3, &cfg()).value - gamma_d(&a, 4, &cfg()).value).abs() <= 1e-5);
        let c = random_sym(3, Field::Complex, &mut rng(seed));
        prop_assert!((gamma_d(&c, 2, &cfg()).value - gamma_d(&c, 3, &cfg()).value).abs() <= 1e-5);
    }

    #[test]
    fn sandwich(seed in 0u64..10_000, n in 2usize..6, complex in any::<bool>()) {
        let field = if complex { Field::Complex } else { Field::Real };
        let a = random_sym(n, field, &mut rng(seed));
        let big = big_gamma_d(&a, n, &cfg()).value;
        let g = g_d_sym(&a, 2 * n, &cfg()).value;
        prop_assert!(big <= g + 1e-6);
        prop_assert!(g <= 2.0 * big + 1e-6);
        prop_assert!(gamma_d(&a, n, &cfg()).value <= big + 1e-6);
    }

    #[test]
    fn psd_collapse(seed in 0u64..10_000, n in 2usize..6, complex in any::<bool>()) {
        let field = if complex { Field::Complex } else { Field::Real };
        let a = random_psd(n, 2, field, &mut rng(seed));
        let d = n;
        let g = gamma_d(&a, d, &cfg()).value;
        let big = big_gamma_d(&a, d, &cfg()).value;
        let gg = g_d_sym(&a, 2 * n, &cfg()).value;
        prop_assert!((g - big).abs() <= 1e-6 * (1.0 + g));
        prop_assert!((big - gg).abs() <= 1e-6 * (1.0 + g));
    }

    #[test]
    fn psd_monotone_dominance(seed in 0u64..10_000, t in -1.0f64..1.0) {
        let a = random_psd(4, 3, Field::Real, &mut rng(seed));
        let b = a.scale(t);
        prop_assert!(g_d_sym(&b, 8, &cfg()).value <= g_d_sym(&a, 8, &cfg()).value + 1e-6);
    }

    #[test]
    fn conjugation_invariance(seed in 0u64..10_000, n in 2usize..6) {
        let mut r = rng(seed);
        let a = random_sym(n, Field::Complex, &mut r);
        let b = a.congruence_diag(&unit_phases(n, &mut r));
        for d in [2, n] {
            prop_assert!((gamma_d(&a, d, &cfg()).value - gamma_d(&b, d, &cfg()).value).abs() <= 1e-6);
        }
    }

    #[test]
    fn complex_path_matches_real_doubling(seed in 0u64..10_000, n in 2usize..6) {
        let a = random_sym(n, Field::Real, &mut rng(seed));
        let d = convex_rank(n, Field::Complex);
        let direct = gamma_d(&a.to_complex(), d, &cfg()).value;
        let via = complex_norm_via_real(&a, d, Which::Gamma, &cfg()).unwrap().value;
        prop_assert!((direct - via).abs() <= 1e-6 * (1.0 + direct));
        let direct = big_gamma_d(&a.to_complex(), d, &cfg()).value;
        let via = complex_norm_via_real(&a, d, Which::BigGamma, &cfg()).unwrap().value;
        prop_assert!((direct - via).abs() <= 1e-6 * (1.0 + direct));
    }

    #[test]
    fn real_and_complex_agree_at_full_rank(seed in 0u64..10_000, n in 2usize..6) {
        let a = random_sym(n, Field::Real, &mut rng(seed));
        prop_assert!((gamma_d(&a, n, &cfg()).value - gamma_d(&a.to_complex(), n, &cfg()).value).abs() <= 1e-6);
    }

    #[test]
    fn spread_is_shift_invariant(seed in 0u64..10_000, n in 2usize..6, alpha in -3.0f64..3.0) {
        let a = random_sym(n, Field::Real, &mut rng(seed));
        prop_assert!((spread(&a, &cfg()) - spread(&a.shift(alpha), &cfg())).abs() <= 1e-6);
    }
}
