use nestocc::occupancy::{occupancy_counts, throw_balls_lazy, throw_balls_tree};
use nestocc::rng::stream;
use nestocc::spectral::RegimeLabel;
use nestocc::{EnvironmentSpec, SpectralProfile, StickLaw, WeightedTree};
use proptest::prelude::*;

fn env_strategy() -> impl Strategy<Value = EnvironmentSpec> {
    prop_oneof![
        Just(EnvironmentSpec::uniform_sieve()),
        (0.5f64..3.0, 0.5f64..3.0).prop_map(|(a, b)| EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a, b })),
        (2usize..5, 0.3f64..4.0).prop_map(|(m, alpha)| EnvironmentSpec::DirichletSplit { m, alpha }),
    ]
}

fn closed_form_env() -> impl Strategy<Value = EnvironmentSpec> {
    prop_oneof![
        Just(EnvironmentSpec::uniform_sieve()),
        (2usize..6, 0.3f64..5.0).prop_map(|(m, alpha)| EnvironmentSpec::DirichletSplit { m, alpha }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tree_levels_conserve_mass(env in env_strategy(), seed in any::<u64>(), depth in 1usize..5) {
        let tree = WeightedTree::materialize(&env, depth, 1e-3, seed).unwrap();
        tree.check_invariants().unwrap();
        for j in 0..=depth {
            let lvl = tree.level(j);
            let total: f64 = lvl.weight.iter().sum::<f64>() + lvl.residual_mass;
            prop_assert!((total - 1.0).abs() < 1e-9, "level {} total {}", j, total);
            prop_assert!(lvl.weight.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn tree_first_allocation_is_consistent(env in env_strategy(), seed in any::<u64>(), n in 1u64..400) {
        let tree = WeightedTree::materialize(&env, 4, 1e-4, seed).unwrap();
        let alloc = throw_balls_tree(&tree, n, &mut stream(seed, &[1]));
        alloc.check_consistency().unwrap();
        for j in 0..=4 {
            let c = occupancy_counts(&alloc, j, 4, Some(&tree)).unwrap();
            let balls: u64 = c.k.iter().sum::<u64>() + c.beyond;
            prop_assert_eq!(balls + c.overflow, n);
            prop_assert!(c.k.windows(2).all(|w| w[0] >= w[1]));
            if let (Some(l), Some(z)) = (c.l, c.z) {
                prop_assert_eq!(l + c.k[0], z);
            }
        }
    }

    #[test]
    fn lazy_allocation_is_consistent(env in env_strategy(), seed in any::<u64>(), n in 1u64..2000) {
        let alloc = throw_balls_lazy(&env, n, 6, &mut stream(seed, &[2])).unwrap();
        alloc.check_consistency().unwrap();
        let mut prev = 0;
        for j in 0..=6 {
            let c = occupancy_counts(&alloc, j, 3, None).unwrap();
            prop_assert_eq!(c.k.iter().sum::<u64>() + c.beyond + c.overflow, n);
            prop_assert!(c.k[0] >= prev, "occupied boxes shrank at level {}", j);
            prev = c.k[0];
        }
    }

    #[test]
    fn slope_inversion_round_trips(env in closed_form_env(), u in 0.02f64..0.98) {
        let p = SpectralProfile::build(&env, None).unwrap();
        let c = p.critical_constants().unwrap();
        let lo = c.slope_at_zero.unwrap_or(0.0).max(1e-3);
        let hi = c.a_c * 4.0;
        let a = lo + u * (hi - lo);
        let theta = p.solve_theta_for_slope(a).unwrap();
        prop_assert!((-p.dlambda(theta) - a).abs() < 1e-7 * a.max(1.0));
    }

    #[test]
    fn identities_hold(env in closed_form_env()) {
        let p = SpectralProfile::build(&env, None).unwrap();
        let c = p.critical_constants().unwrap();
        let ts = c.theta_star;
        prop_assert!((ts * p.dlambda(ts) - p.lambda(ts)).abs() < 1e-8);
        prop_assert!((c.v + p.lambda(ts) / ts).abs() < 1e-9);
        prop_assert!((c.v + p.dlambda(ts)).abs() < 1e-7);
        prop_assert!(p.lambda(1.0).abs() < 1e-12);
        prop_assert!(c.a_star <= c.a_c + 1e-12);
        prop_assert!(c.v <= c.a_c + 1e-12);
    }

    #[test]
    fn classification_is_stable(env in closed_form_env(), u in 0.05f64..0.95, eps in -1e-12f64..1e-12) {
        let p = SpectralProfile::build(&env, None).unwrap();
        let c = p.critical_constants().unwrap();
        let a = 0.05 + u * 3.0;
        let x = p.classify_regime(&c, a).unwrap();
        let y = p.classify_regime(&c, a * (1.0 + eps)).unwrap();
        prop_assert!(!x.labels.is_empty());
        prop_assert!(!x.labels.contains(&RegimeLabel::OutOfRange) || x.labels.len() == 1);
        let near_boundary = [c.a_star, c.v, c.a_c, c.slope_at_two]
            .iter()
            .chain(c.slope_at_zero.iter())
            .chain(c.a_bar_minus.iter())
            .any(|b| (a - b).abs() < 1e-8);
        if !near_boundary {
            prop_assert_eq!(x.labels, y.labels);
        }
    }
}
