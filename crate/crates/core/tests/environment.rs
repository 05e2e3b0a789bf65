use gremk::env::{
    generate_environment, read_environment, write_environment, AlphaSchedule, Environment, GapRule, NodePath,
};
use gremk::error::Error;
use gremk::seed::RandomSeedPlan;
use proptest::prelude::*;

#[test]
fn file_round_trip_is_byte_identical() {
    let s = AlphaSchedule::from_alphas(vec![0.4, 0.7, 0.9]).unwrap();
    let env = generate_environment(&s, 2, 6, RandomSeedPlan::new(5)).unwrap();
    let text = write_environment(&env);
    let back = read_environment(&text).unwrap();
    assert_eq!(write_environment(&back), text);
    assert_eq!(back.level_marks(2), env.level_marks(2));
}

#[test]
fn family_schedule_round_trip_keeps_tiny_gaps() {
    let s = AlphaSchedule::from_rule(GapRule::DoubleExponential, 8).unwrap();
    let env = generate_environment(&s, 3, 3, RandomSeedPlan::new(1)).unwrap();
    let back = read_environment(&write_environment(&env)).unwrap();
    assert_eq!(back.schedule().gaps(), s.gaps());
}

#[test]
fn node_budget_is_enforced() {
    let s = AlphaSchedule::from_alphas(vec![0.5, 0.8, 0.9]).unwrap();
    let r = Environment::generate(&s, 2, 100, RandomSeedPlan::new(1), 0, 500);
    assert!(matches!(r, Err(Error::BudgetExceeded(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn same_seed_same_environment(seed in any::<u64>()) {
        let s = AlphaSchedule::from_alphas(vec![0.5, 0.8, 0.9]).unwrap();
        let a = generate_environment(&s, 2, 4, RandomSeedPlan::new(seed)).unwrap();
        let b = generate_environment(&s, 2, 4, RandomSeedPlan::new(seed)).unwrap();
        prop_assert_eq!(write_environment(&a), write_environment(&b));
    }

    #[test]
    fn marks_descend_and_products_multiply(seed in 0u64..1000) {
        let s = AlphaSchedule::from_alphas(vec![0.5, 0.8, 0.9]).unwrap();
        let env = generate_environment(&s, 2, 5, RandomSeedPlan::new(seed)).unwrap();
        for k in 1..=2 {
            for block in env.level_marks(k).chunks(5) {
                prop_assert!(block.windows(2).all(|w| w[0] >= w[1] && w[1] > 0.0));
            }
        }
        let node = NodePath::new(vec![2, 3]).unwrap();
        let i = env.index_of(&node).unwrap();
        let parent = env.index_of(&NodePath::new(vec![2]).unwrap()).unwrap();
        let expect = env.gbar(1, parent) * env.gamma(2, i);
        prop_assert!((env.gbar(2, i) - expect).abs() <= 1e-15 * expect);
    }
}
