use dualstat::distributions::{dual_gamma_cdf, dual_gamma_pdf, poisson_pmf, NormalModel, PoissonModel};
use dualstat::identities::{normal_partition, poisson_coverage, poisson_gamma_exchange};
use dualstat::intervals::{interval_mass_residual, poisson_interval, Policy};
use dualstat::special::{gamma_quantile, reg_inc_beta, reg_lower_inc_gamma, reg_upper_inc_gamma};
use proptest::prelude::*;

fn policy() -> impl Strategy<Value = Policy> {
    prop_oneof![Just(Policy::Central), Just(Policy::Shortest), Just(Policy::UpperLimit), Just(Policy::LowerLimit)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inc_gamma_halves_sum_to_one(a in 0.05f64..200.0, x in 0.0f64..400.0) {
        let p = reg_lower_inc_gamma(a, x).unwrap();
        let q = reg_upper_inc_gamma(a, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p + q - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn inc_gamma_monotone_in_x(a in 0.05f64..100.0, x in 0.0f64..200.0, dx in 0.0f64..5.0) {
        let lo = reg_lower_inc_gamma(a, x).unwrap();
        let hi = reg_lower_inc_gamma(a, x + dx).unwrap();
        prop_assert!(hi >= lo - 1e-15);
    }

    #[test]
    fn inc_beta_reflection(a in 0.1f64..50.0, b in 0.1f64..50.0, x in 0.0f64..=1.0) {
        let left = reg_inc_beta(a, b, x).unwrap();
        let right = reg_inc_beta(b, a, 1.0 - x).unwrap();
        prop_assert!((left + right - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn gamma_quantile_inverts_cdf(a in 0.1f64..150.0, q in 1e-6f64..0.999999) {
        let x = gamma_quantile(a, q).unwrap();
        let back = reg_lower_inc_gamma(a, x).unwrap();
        prop_assert!((back - q).abs() <= 1e-10 * q.max(1e-2));
    }

    #[test]
    fn dual_pdf_is_the_pmf(n in 0u64..300, mu in 0.0f64..400.0) {
        let pmf = poisson_pmf(n, &PoissonModel::new(mu).unwrap());
        prop_assert_eq!(dual_gamma_pdf(mu, n).unwrap().to_bits(), pmf.to_bits());
    }

    #[test]
    fn dual_cdf_monotone(n in 0u64..100, mu in 0.0f64..200.0, dmu in 0.0f64..3.0) {
        prop_assert!(dual_gamma_cdf(mu + dmu, n).unwrap() >= dual_gamma_cdf(mu, n).unwrap());
    }

    #[test]
    fn normal_is_symmetric_in_its_arguments(x in -50.0f64..50.0, a in -50.0f64..50.0, sigma in 0.01f64..20.0) {
        let forward = NormalModel::new(a, sigma).unwrap().pdf(x);
        let backward = NormalModel::new(x, sigma).unwrap().pdf(a);
        prop_assert_eq!(forward.to_bits(), backward.to_bits());
    }

    #[test]
    fn exchange_identity_holds(mu1 in 0.0f64..30.0, width in 0.0f64..30.0, n in 0u64..40, gap in 1u64..40) {
        let r = poisson_gamma_exchange(mu1, mu1 + width, n, n + gap).unwrap();
        prop_assert!(r.residual.abs() <= 1e-10, "{:?}", r);
    }

    #[test]
    fn coverage_identity_holds(mu1 in 0.0f64..40.0, width in 0.0f64..40.0, n in 0u64..60) {
        let r = poisson_coverage(mu1, mu1 + width, n).unwrap();
        prop_assert!(r.residual.abs() <= 1e-10, "{:?}", r);
    }

    #[test]
    fn normal_partition_holds(x in -20.0f64..20.0, c in -5.0f64..5.0, w in 0.0f64..10.0, sigma in 0.1f64..5.0) {
        let r = normal_partition(x, c, c + w, sigma).unwrap();
        prop_assert!(r.residual.abs() <= 1e-10, "{:?}", r);
    }

    #[test]
    fn intervals_carry_their_mass(n in 0u64..200, level in 0.05f64..0.995, p in policy()) {
        let ci = poisson_interval(n, level, p).unwrap();
        prop_assert!(ci.lower >= 0.0 && ci.lower <= ci.upper);
        prop_assert!(interval_mass_residual(&ci, n).unwrap().abs() <= 1e-8);
    }
}
