//! Subcommand bodies. Each writes `<experiment>.json` and its series into the
//! output directory and returns the summary record.

use std::path::Path;

use rangewalk::estimators::blocks::{sample_blocks, ConstantEstimates};
use rangewalk::estimators::d4::{
    growth_summary, smallest_lambda, GrowthRow, WindowQuantity, TARGET_COVERAGE,
};
use rangewalk::estimators::experiments::{
    ball_statistics, ball_violations, cut_time_growth_run, displacement, heat_kernel, path_stats,
    scaling_samples, window_run,
};
use rangewalk::estimators::fit::{
    dimension_fit, dyadic, spectral_dimension, walk_dimension, FitModel,
};
use rangewalk::estimators::ks::scaling_limit_test;
use rangewalk::estimators::stats::mean_stderr;
use rangewalk::rng::task_seed;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{emit_series, Cell, Reported, ResultRecord};

#[derive(Debug)]
pub enum RunError {
    Compute(rangewalk::Error),
    Io(std::io::Error),
}

impl From<rangewalk::Error> for RunError {
    fn from(e: rangewalk::Error) -> Self {
        RunError::Compute(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

type Out = Result<ResultRecord, RunError>;

/// Smallest dyadic level used in fits.
const FIT_FROM: u64 = 64;
/// Smallest ball radius used in fits.
const BALL_FIT_FROM: u32 = 8;

pub fn run(cfg: &ExperimentConfig) -> Out {
    std::fs::create_dir_all(&cfg.out)?;
    let dir = cfg.out.as_path();
    let rec = match cfg.experiment {
        Experiment::Constants => constants(cfg, dir)?,
        Experiment::Heatkernel => heatkernel(cfg, dir)?,
        Experiment::Displacement => displacement_cmd(cfg, dir)?,
        Experiment::ExitTimes => balls(cfg, dir, true)?,
        Experiment::Volume => balls(cfg, dir, false)?,
        Experiment::ScalingTest => scaling(cfg, dir)?,
        Experiment::Cuttimes => cuttimes(cfg, dir)?,
        Experiment::D4Diagnostics => d4(cfg, dir)?,
    };
    Ok(rec)
}

fn constants(cfg: &ExperimentConfig, dir: &Path) -> Out {
    let set = sample_blocks(cfg.dim, cfg.envs, cfg.horizon, cfg.seed, cfg.mode)?;
    let c = ConstantEstimates::from_samples(&set)?;
    let mut rec = ResultRecord::new(cfg);
    for (k, v) in [
        ("tau", c.tau),
        ("delta", c.delta),
        ("rho", c.rho),
        ("nu", c.nu),
        ("eta", c.eta),
        ("kappa1", c.kappa1),
        ("kappa2", c.kappa2),
    ] {
        rec.value(k, v);
    }
    rec.detail("blocks", set.num_blocks());
    rec.invariant_violations = c.ordering_violations(cfg.dim, 3.0);
    let bad = set.iter().filter(|b| !b.is_consistent(cfg.dim)).count();
    if bad > 0 {
        rec.invariant_violations
            .push(format!("{bad} block samples violate 1 <= R <= d <= T"));
    }
    let rows: Vec<Vec<Cell>> = set
        .per_env
        .iter()
        .enumerate()
        .map(|(e, b)| {
            let n = b.len().max(1) as f64;
            let mean = |f: &dyn Fn(&rangewalk::estimators::BlockSample) -> f64| {
                b.iter().map(f).sum::<f64>() / n
            };
            vec![
                Cell::from(e as u64),
                Cell::from(b.len() as u64),
                mean(&|s| s.duration as f64).into(),
                mean(&|s| s.distance as f64).into(),
                mean(&|s| s.resistance).into(),
                mean(&|s| s.weight).into(),
                mean(&|s| s.eh1).into(),
            ]
        })
        .collect();
    emit_series(
        dir,
        "constants_per_env.csv",
        &[
            "env",
            "blocks",
            "mean_duration",
            "mean_distance",
            "mean_resistance",
            "mean_weight",
            "mean_eh1",
        ],
        &rows,
    )?;
    Ok(rec)
}

fn heatkernel(cfg: &ExperimentConfig, dir: &Path) -> Out {
    let run = heat_kernel(cfg.dim, cfg.envs, cfg.nmax as u32, cfg.seed, cfg.mode)?;
    let mean = run.mean_series();
    let rows: Vec<Vec<Cell>> = mean
        .iter()
        .enumerate()
        .step_by(2)
        .map(|(n, e)| vec![Cell::from(n as u64), e.value.into(), e.stderr.into()])
        .collect();
    emit_series(dir, "heatkernel.csv", &["n", "p_return", "stderr"], &rows)?;
    let levels = run.dyadic_levels(FIT_FROM);
    let mut rec = ResultRecord::new(cfg);
    if let Ok(plain) = run.fit(&levels, FitModel::Plain) {
        rec.value("spectral_dimension", spectral_dimension(&plain));
        rec.detail("plain_fit", &plain);
    }
    if let Ok(log) = run.fit(&levels, FitModel::LogCorrected { p: -0.5 }) {
        rec.value("gamma", log.fitted());
        rec.detail("log_corrected_fit", &log);
    }
    let flat = run.flatness(&levels);
    rec.value(
        "flat_fraction_le_3",
        Reported::exact(flat.iter().filter(|&&r| r <= 3.0).count() as f64 / flat.len() as f64),
    );
    rec.detail("flatness_per_env", &flat);
    rec.detail("fit_levels", &levels);
    if run.non_bipartite > 0 {
        rec.invariant_violations
            .push(format!("{} non-bipartite environments", run.non_bipartite));
    }
    let odd = run
        .per_env
        .iter()
        .filter(|s| s.iter().skip(1).step_by(2).any(|&p| p != 0.0))
        .count();
    if odd > 0 {
        rec.invariant_violations
            .push(format!("{odd} environments with odd-time returns"));
    }
    Ok(rec)
}

fn displacement_cmd(cfg: &ExperimentConfig, dir: &Path) -> Out {
    let levels: Vec<u64> = dyadic(1, 62)
        .into_iter()
        .filter(|&n| n <= cfg.nmax)
        .collect();
    let run = displacement(
        cfg.dim, cfg.envs, cfg.nmax, cfg.trials, cfg.seed, cfg.mode, &levels,
    )?;
    let rows: Vec<Vec<Cell>> = run
        .rows
        .iter()
        .map(|r| {
            vec![
                Cell::from(r.n),
                r.mean_sq_disp.value.into(),
                r.mean_graph_dist.value.into(),
                r.mean_sq_disp.stderr.into(),
                r.mean_graph_dist.stderr.into(),
            ]
        })
        .collect();
    emit_series(
        dir,
        "displacement.csv",
        &[
            "n",
            "mean_sq_disp",
            "mean_graph_dist",
            "stderr_sq",
            "stderr_gd",
        ],
        &rows,
    )?;
    let mut rec = ResultRecord::new(cfg);
    rec.censored = run.censored;
    let fit_rows: Vec<_> = run
        .rows
        .iter()
        .filter(|r| r.n >= FIT_FROM.min(cfg.nmax / 16))
        .collect();
    let n: Vec<f64> = fit_rows.iter().map(|r| r.n as f64).collect();
    let sq: Vec<f64> = fit_rows.iter().map(|r| r.mean_sq_disp.value).collect();
    let gd2: Vec<f64> = fit_rows
        .iter()
        .map(|r| r.mean_sq_graph_dist.value)
        .collect();
    if let Ok(f) = dimension_fit(&n, &sq, FitModel::Plain) {
        rec.value("walk_dimension", walk_dimension(&f));
        rec.detail("euclidean_fit", &f);
    }
    if let Ok(f) = dimension_fit(&n, &gd2, FitModel::Plain) {
        rec.value("graph_walk_dimension", walk_dimension(&f));
        rec.detail("graph_distance_fit", &f);
    }
    if let Some(top) = run.rows.last() {
        let k = top.mean_sq_graph_dist;
        let nf = top.n as f64;
        rec.value(
            "kappa1_direct",
            rangewalk::estimators::Estimate::new(k.value / nf, k.stderr / nf),
        );
    }
    Ok(rec)
}

fn balls(cfg: &ExperimentConfig, dir: &Path, exit: bool) -> Out {
    let radii: Vec<u32> = dyadic(0, 31)
        .into_iter()
        .filter(|&r| r <= cfg.nmax)
        .map(|r| r as u32)
        .collect();
    let stats = ball_statistics(cfg.dim, cfg.envs, &radii, cfg.seed, cfg.mode, exit)?;
    let col = |i: usize, f: &dyn Fn(&rangewalk::estimators::experiments::BallStats) -> f64| {
        mean_stderr(&stats.iter().map(|s| f(&s[i])).collect::<Vec<_>>())
    };
    let mut rows = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        let vol = col(i, &|s| s.volume);
        let res = col(i, &|s| s.resistance);
        let mut row = vec![Cell::from(r as u64)];
        if exit {
            let t = col(i, &|s| s.exit_time.unwrap());
            row.extend([t.value.into(), t.stderr.into()]);
        }
        row.extend([
            vol.value.into(),
            vol.stderr.into(),
            res.value.into(),
            res.stderr.into(),
        ]);
        rows.push(row);
    }
    let mut rec = ResultRecord::new(cfg);
    let big: Vec<usize> = (0..radii.len())
        .filter(|&i| radii[i] >= BALL_FIT_FROM)
        .collect();
    let n: Vec<f64> = big.iter().map(|&i| radii[i] as f64).collect();
    if exit {
        emit_series(
            dir,
            "exit_times.csv",
            &[
                "n",
                "mean_exit_time",
                "stderr",
                "mean_volume",
                "stderr_volume",
                "mean_resistance",
                "stderr_resistance",
            ],
            &rows,
        )?;
        let t: Vec<f64> = big
            .iter()
            .map(|&i| col(i, &|s| s.exit_time.unwrap()).value)
            .collect();
        if let Ok(f) = dimension_fit(&n, &t, FitModel::Plain) {
            rec.value("exit_time_exponent", f.exponent);
            rec.detail("exit_time_fit", &f);
        }
    } else {
        emit_series(
            dir,
            "volume.csv",
            &[
                "n",
                "mean_volume",
                "stderr",
                "mean_resistance",
                "stderr_resistance",
            ],
            &rows,
        )?;
        let v: Vec<f64> = big.iter().map(|&i| col(i, &|s| s.volume).value).collect();
        if let Ok(f) = dimension_fit(&n, &v, FitModel::Plain) {
            rec.value("volume_exponent", f.exponent);
            rec.detail("volume_fit", &f);
        }
        let r: Vec<f64> = big
            .iter()
            .map(|&i| col(i, &|s| s.resistance).value)
            .collect();
        if let Ok(f) = dimension_fit(&n, &r, FitModel::Plain) {
            rec.value("resistance_exponent", f.exponent);
            rec.detail("resistance_fit", &f);
        }
    }
    rec.invariant_violations = ball_violations(&stats, cfg.mode);
    Ok(rec)
}

fn scaling(cfg: &ExperimentConfig, dir: &Path) -> Out {
    // constants come from environments independent of the walker ones
    let kseed = task_seed(cfg.seed, u64::MAX);
    let set = sample_blocks(cfg.dim, cfg.kappa_envs, cfg.horizon, kseed, cfg.mode)?;
    let c = ConstantEstimates::from_samples(&set)?;
    let s = scaling_samples(cfg.dim, cfg.envs, cfg.nmax, cfg.seed, cfg.mode)?;
    let t = scaling_limit_test(
        &s.scaled_distance,
        c.kappa1.value,
        Some((&s.scaled_coordinate, c.kappa2.value, cfg.dim)),
        100_000,
    )?;
    let mut rec = ResultRecord::new(cfg);
    rec.censored = s.censored;
    rec.value("kappa1", c.kappa1);
    rec.value("kappa2", c.kappa2);
    rec.value("quenched_ks", Reported::exact(t.quenched.statistic));
    rec.value("quenched_p", Reported::exact(t.quenched.p_value));
    let a = t.annealed.expect("annealed test requested");
    rec.value("annealed_ks", Reported::exact(a.statistic));
    rec.value("annealed_p", Reported::exact(a.p_value));
    let rows = vec![
        vec![
            Cell::from("quenched"),
            t.quenched.statistic.into(),
            t.quenched.p_value.into(),
            Cell::from(t.quenched.n1 as u64),
            Cell::from(t.quenched.n2 as u64),
        ],
        vec![
            Cell::from("annealed"),
            a.statistic.into(),
            a.p_value.into(),
            Cell::from(a.n1 as u64),
            Cell::from(a.n2 as u64),
        ],
    ];
    emit_series(
        dir,
        "scaling_test.csv",
        &["test", "statistic", "p_value", "n1", "n2"],
        &rows,
    )?;
    let samples: Vec<Vec<Cell>> = (0..s.distance.len())
        .map(|i| {
            vec![
                Cell::from(i as u64),
                Cell::from(s.distance[i] as u64),
                Cell::Int(s.coordinate[i] as i64),
                s.scaled_distance[i].into(),
                s.scaled_coordinate[i].into(),
            ]
        })
        .collect();
    emit_series(
        dir,
        "scaling_samples.csv",
        &[
            "walker",
            "distance",
            "coordinate",
            "scaled_distance",
            "scaled_coordinate",
        ],
        &samples,
    )?;
    Ok(rec)
}

fn growth_rows(rows: &[GrowthRow]) -> Vec<Vec<Cell>> {
    rows.iter()
        .map(|r| {
            vec![
                Cell::from(r.n),
                r.linear.value.into(),
                r.linear.stderr.into(),
                r.log_corrected.value.into(),
                r.log_corrected.stderr.into(),
                r.linear_median.into(),
                (r.linear_median / (r.n as f64).ln().sqrt()).into(),
            ]
        })
        .collect()
}

const GROWTH_HEADER: [&str; 7] = [
    "n",
    "tn_over_n",
    "stderr",
    "tn_over_n_sqrt_log_n",
    "stderr_log",
    "median_tn_over_n",
    "median_tn_over_n_sqrt_log_n",
];

/// Smallest dyadic level used for drift summaries of `T_n`.
const GROWTH_FROM: u64 = 1024;

fn record_growth(rec: &mut ResultRecord, rows: &[GrowthRow]) {
    let Some(g) = growth_summary(rows, GROWTH_FROM) else {
        return;
    };
    rec.value("top_level", Reported::exact(g.top_level as f64));
    for (k, v) in [
        ("drift_linear_top2", g.drift_linear_top2),
        ("drift_linear", g.drift_linear),
        ("drift_log_corrected", g.drift_log_corrected),
        ("fitted_drift_linear", g.fitted_drift_linear),
        ("fitted_drift_log_corrected", g.fitted_drift_log_corrected),
        ("max_min_top3_log_corrected", g.max_min_top3_log_corrected),
    ] {
        rec.value(k, Reported::exact(v));
    }
}

fn cuttimes(cfg: &ExperimentConfig, dir: &Path) -> Out {
    let rows = cut_time_growth_run(cfg.dim, cfg.envs, cfg.horizon, cfg.seed)?;
    emit_series(dir, "cuttimes.csv", &GROWTH_HEADER, &growth_rows(&rows))?;
    let mut rec = ResultRecord::new(cfg);
    record_growth(&mut rec, &rows);
    Ok(rec)
}

fn d4(cfg: &ExperimentConfig, dir: &Path) -> Out {
    let ns = [cfg.nmax];
    let run = window_run(cfg.dim, cfg.envs, &ns, cfg.seed, cfg.mode, &cfg.lambda_grid)?;
    let rows: Vec<Vec<Cell>> = run
        .rows
        .iter()
        .map(|r| {
            vec![
                Cell::from(r.quantity.name()),
                Cell::from(r.n),
                r.lambda.into(),
                r.coverage.into(),
            ]
        })
        .collect();
    emit_series(
        dir,
        "windows.csv",
        &["quantity", "n", "lambda", "coverage"],
        &rows,
    )?;
    let mut rec = ResultRecord::new(cfg);
    rec.censored = run.censored;
    for q in WindowQuantity::ALL {
        let qrows: Vec<_> = run
            .rows
            .iter()
            .filter(|r| r.quantity == q)
            .cloned()
            .collect();
        let lam = smallest_lambda(&qrows, TARGET_COVERAGE);
        rec.detail(&format!("smallest_lambda_{}", q.name()), lam);
    }
    let growth = cut_time_growth_run(
        cfg.dim,
        cfg.envs.min(20),
        cfg.horizon,
        task_seed(cfg.seed, 1 << 40),
    )?;
    emit_series(dir, "cuttimes.csv", &GROWTH_HEADER, &growth_rows(&growth))?;
    record_growth(&mut rec, &growth);
    let paths = path_stats(
        cfg.dim,
        cfg.envs.min(20),
        cfg.horizon,
        task_seed(cfg.seed, 1 << 41),
    )?;
    rec.value("range_density", Reported::from(paths.range_density));
    rec.value("erased_fraction", Reported::from(paths.erased_fraction));
    rec.value("erased_fraction_log", Reported::from(paths.erased_fraction_log));
    let near = paths
        .retained_ratio
        .iter()
        .filter(|r| (0.9..=1.1).contains(*r))
        .count();
    rec.detail("path_stats_n", paths.n);
    rec.detail("retained_ratio", &paths.retained_ratio);
    rec.detail(
        "retained_ratio_within_10pct",
        near as f64 / paths.retained_ratio.len().max(1) as f64,
    );
    Ok(rec)
}
