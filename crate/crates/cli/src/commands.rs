use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gremk::analytics::classify_schedule;
use gremk::clocks::{Dynamics, WField};
use gremk::env::{read_environment, write_environment, AlphaSchedule, Environment, GapRule, NodePath};
use gremk::kprocess::{occupation_report, pi_formula, top_cylinders};
use gremk::seed::RandomSeedPlan;
use gremk::verify::{
    check_adjusted_martingale, check_adjusted_mean, check_clock_convergence, check_conditional_laplace, check_cycles,
    check_environment_laplace, check_occupation, check_stable_sampler, check_state_clock_laplace, check_subordinator,
    check_w_composition, check_w_truncation, check_z_martingale, ComparisonResult, Report, StatEstimate, Verdict,
};

use crate::config::RunConfig;
use crate::CliError;

const LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

/// What a command wrote and printed. `failed` is set when a check failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
    pub failed: bool,
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    files.push(path);
    Ok(())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))
}

/// Generates an environment and writes `environment.txt`.
pub fn cmd_env(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let schedule = cfg.schedule()?;
    let plan = RandomSeedPlan::new(cfg.seed);
    let env = Environment::generate(&schedule, cfg.depth, cfg.breadth, plan, cfg.replicate, cfg.node_budget)?;
    let mut files = Vec::new();
    write_file(&cfg.out, "environment.txt", &write_environment(&env), &mut files)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "schedule {}", schedule.describe());
    let _ = writeln!(summary, "level sum_gbar tail_mass");
    for k in 1..=env.depth() {
        let tail: f64 = env.level_tail(k).iter().sum();
        let _ = writeln!(summary, "{k} {:.10e} {:.10e}", env.sum_gbar(k), tail);
    }
    Ok(Outcome {
        summary,
        files,
        failed: false,
    })
}

/// Simulates X_n on [0, horizon] in a stored environment and writes the
/// trajectory, the clocks Ξ_1..Ξ_n and the depth-1 occupation fractions.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let path = cfg
        .env
        .as_ref()
        .ok_or_else(|| CliError::Config("simulate needs an environment file (--env or `env =`)".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let env = read_environment(&text)?;
    if cfg.depth > env.depth() {
        return Err(CliError::Config(format!(
            "depth {} exceeds the environment depth {}",
            cfg.depth,
            env.depth()
        )));
    }
    let n = cfg.depth;
    let mut dynamics = Dynamics::with_plan(&env, n, RandomSeedPlan::new(cfg.seed), cfg.replicate)?.with_budget(cfg.event_budget);
    let traj = dynamics.trajectory(n, cfg.horizon)?;
    let mut files = Vec::new();
    write_file(&cfg.out, "trajectory.txt", &traj.dump("trajectory"), &mut files)?;
    for k in 1..=n {
        let clock = dynamics.xi_path(k, false)?;
        write_file(&cfg.out, &format!("clock_level{k}.txt"), &clock.dump(&format!("clock level={k}")), &mut files)?;
    }
    let cylinders: Vec<NodePath> = (1..=env.breadth() as u32)
        .map(|x| NodePath::new(vec![x]))
        .collect::<Result<_, _>>()?;
    let summary = if cfg.horizon > 0.0 {
        let report = occupation_report(&traj, &cylinders)?;
        write_file(&cfg.out, "occupation.txt", &report, &mut files)?;
        report
    } else {
        "# empty trajectory\n".to_string()
    };
    Ok(Outcome {
        summary,
        files,
        failed: false,
    })
}

fn flag_row(name: String, value: f64, reference: f64, verdict: Verdict) -> ComparisonResult {
    ComparisonResult {
        verdict,
        ..ComparisonResult::new(
            name,
            StatEstimate {
                mean: value,
                std_error: 0.0,
                replicas: 0,
            },
            reference,
            0.0,
            1.0,
        )
    }
}

fn run_suite(name: &str, cfg: &RunConfig, schedule: &AlphaSchedule, report: &mut Report) -> Result<(), CliError> {
    let plan = RandomSeedPlan::new(cfg.seed);
    let n = cfg.depth;
    let count = cfg.replicas;
    let thr = cfg.threshold;
    let env = || Environment::generate(schedule, n, cfg.breadth, plan, 0, cfg.node_budget);
    let skip = |report: &mut Report, why: &str| report.note(format!("{name}: skipped, {why}"));
    match name {
        "laplace" => {
            if n < 2 {
                skip(report, "needs depth >= 2");
                return Ok(());
            }
            let env = env()?;
            for k in 1..n {
                report.extend(check_conditional_laplace(&env, k, n, 1.0, &LAMBDAS, count, thr)?);
            }
        }
        "environment" => {
            for k in 1..=n {
                for j in 0..k {
                    report.extend(check_environment_laplace(schedule, j, k, &LAMBDAS, count, cfg.breadth, plan, thr)?);
                }
            }
        }
        "martingale" => {
            let depths: Vec<usize> = (1..=n).collect();
            report.extend(check_z_martingale(schedule, &depths, count, cfg.breadth, plan, thr)?);
        }
        "stable" => {
            let alpha = schedule.alpha(1);
            report.extend(check_stable_sampler(alpha, &LAMBDAS, alpha / 2.0, count, plan, thr)?);
        }
        "composition" => {
            report.extend(check_w_composition(schedule, 0, &LAMBDAS, count, cfg.breadth, plan, thr)?);
            report.extend(check_w_truncation(schedule, 0, &LAMBDAS, count, cfg.breadth, 2 * cfg.breadth, plan, thr)?);
        }
        "subordinator" => {
            report.extend(check_subordinator(&env()?, n, &LAMBDAS, count, 0.01, thr)?);
        }
        "adjusted" => {
            let env = env()?;
            let field = WField::StableLeaves { depth: n };
            report.extend(check_adjusted_mean(&env, n, field, 1.0, count, thr)?);
            if n >= 2 {
                report.extend([check_adjusted_martingale(&env, n - 1, field, 1.0, count, thr)?]);
            }
        }
        "occupation" => {
            let env = env()?;
            let cylinders = top_cylinders(&env, n, 3)?;
            let (rows, cycles) = check_occupation(&env, n, &cylinders, cfg.horizon, count, 0.05)?;
            report.extend(rows);
            let total: f64 = (1..=cfg.breadth as u32)
                .map(|x| pi_formula(&env, &NodePath::new(vec![x])?, n))
                .sum::<gremk::error::Result<f64>>()?;
            report.note(format!("occupation: pi sums to {total:.15}, fewest complete cycles {cycles:?}"));
        }
        "cycles" => {
            let env = env()?;
            let largest = top_cylinders(&env, n, 1)?;
            report.extend(check_cycles(&env, n, &largest[0], cfg.horizon, count, thr)?);
        }
        "convergence" => {
            if n < 3 {
                skip(report, "needs depth >= 3");
                return Ok(());
            }
            let env = env()?;
            let levels: Vec<usize> = (1..=n).filter(|l| (n - l) % 2 == 0).collect();
            let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
            let rep = check_clock_convergence(&env, 1, &levels, &grid, count, WField::StableLeaves { depth: n })?;
            let ok = |b: bool| if b { Verdict::Pass } else { Verdict::Fail };
            let first = |v: &[f64]| v.first().copied().unwrap_or(0.0);
            let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
            report.extend([
                flag_row(
                    format!("convergence_sup_gap levels={levels:?}"),
                    last(&rep.sup_gap_medians),
                    first(&rep.sup_gap_medians),
                    ok(rep.sup_gap_decreasing()),
                ),
                flag_row(
                    format!("convergence_adjustment levels={levels:?}"),
                    last(&rep.adjustment_medians),
                    first(&rep.adjustment_medians),
                    ok(rep.adjustment_decreasing()),
                ),
            ]);
            report.note(format!(
                "convergence: sup-gap medians {:?}, adjustment medians {:?}",
                rep.sup_gap_medians, rep.adjustment_medians
            ));
        }
        "state" => {
            if n < 2 {
                skip(report, "needs depth >= 2");
                return Ok(());
            }
            let env = env()?;
            report.extend(check_state_clock_laplace(&env, &NodePath::new(vec![1])?, n, 1.0, &LAMBDAS, count, thr)?);
        }
        other => return Err(CliError::Config(format!("unknown check `{other}`"))),
    }
    Ok(())
}

/// Runs the selected suites and writes `report.txt` and `report.csv`.
/// Inconclusive rows are flagged in the report but do not fail the run.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.checks.is_empty() {
        return Err(CliError::Config("empty check selection".into()));
    }
    let schedule = cfg.schedule()?;
    let mut report = Report::new("gremk verification report");
    report.field("schedule", schedule.describe());
    report.field("depth", cfg.depth);
    report.field("breadth", cfg.breadth);
    report.field("horizon", cfg.horizon);
    report.field("replicas", cfg.replicas);
    report.field("seed", cfg.seed);
    report.field("threshold", cfg.threshold);
    report.field("checks", cfg.checks.join(","));
    pool(cfg.workers)?.install(|| {
        cfg.checks
            .iter()
            .try_for_each(|name| run_suite(name, cfg, &schedule, &mut report))
    })?;
    let inconclusive = report.count(Verdict::Inconclusive);
    if inconclusive > 0 {
        report.note(format!(
            "{inconclusive} row(s) INCONCLUSIVE: the truncation half-width exceeds the statistical tolerance"
        ));
    }
    let mut files = Vec::new();
    let text = report.to_text();
    write_file(&cfg.out, "report.txt", &text, &mut files)?;
    write_file(&cfg.out, "report.csv", &report.to_csv(), &mut files)?;
    Ok(Outcome {
        summary: text,
        files,
        failed: report.any_failed(),
    })
}

/// Classifies a gap family and writes `regime.txt`.
pub fn cmd_classify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg
        .family
        .as_deref()
        .ok_or_else(|| CliError::Config("classify needs a family (--family or `family =`)".into()))?;
    let rule = GapRule::parse(spec)?;
    let report = classify_schedule(rule, cfg.classify_horizon);
    let mut files = Vec::new();
    write_file(&cfg.out, "regime.txt", &report.to_text(), &mut files)?;
    Ok(Outcome {
        summary: format!("{} {}\n", report.family, report.classification),
        files,
        failed: false,
    })
}
