use gremk::env::AlphaSchedule;
use gremk::seed::RandomSeedPlan;
use gremk::verify::{check_environment_laplace, check_stable_sampler, check_z_martingale, Report};

#[test]
fn standard_errors_shrink_like_root_n() {
    let s = AlphaSchedule::from_alphas(vec![0.5, 0.8]).unwrap();
    let plan = RandomSeedPlan::new(17);
    let se: Vec<f64> = [1000, 2000, 4000, 8000]
        .iter()
        .map(|&n| check_environment_laplace(&s, 0, 1, &[1.0], n, 20, plan, 3.0).unwrap()[0].observed.std_error)
        .collect();
    for w in se.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.6..=0.85).contains(&ratio), "ladder {se:?}");
    }
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let s = AlphaSchedule::from_alphas(vec![0.4, 0.7, 0.9]).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut rep = Report::new("t");
            rep.extend(check_z_martingale(&s, &[1, 2], 500, 8, RandomSeedPlan::new(3), 3.0).unwrap());
            rep.extend(check_stable_sampler(0.4, &[1.0], 0.2, 500, RandomSeedPlan::new(3), 3.0).unwrap());
            (rep.to_text(), rep.to_csv())
        })
    };
    let one = run(1);
    assert_eq!(one, run(1));
    assert_eq!(one, run(3));
    assert_eq!(one.1.lines().count(), 1 + 2 + 2);
}

#[test]
fn different_seeds_differ() {
    let s = AlphaSchedule::from_alphas(vec![0.5, 0.8]).unwrap();
    let a = check_environment_laplace(&s, 0, 1, &[1.0], 200, 10, RandomSeedPlan::new(1), 3.0).unwrap();
    let b = check_environment_laplace(&s, 0, 1, &[1.0], 200, 10, RandomSeedPlan::new(2), 3.0).unwrap();
    assert_ne!(a[0].observed.mean, b[0].observed.mean);
}
