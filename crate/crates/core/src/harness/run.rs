use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::bench::{bench_bounds, write_timing_csv, TimingRow};
use super::config::{BoundMethod, ExperimentConfig};
use super::gnuplot;
use super::instance::{Instance, TaskSource};
use super::report::{
    csv_writer, write_bounds_csv, write_curves, write_json, write_manifest, write_run, BoundRow,
};
use super::HarnessError;
use crate::model::{Cell, GridConfig};
use crate::reachability::{mc_hit_histogram, BoundKind, BoundTable};
use crate::switching::{certify, train, Mode, TrainConfig, TrainError, TrainOutput};

/// Seed of run `index` derived from the experiment seed.
pub fn run_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone, Serialize)]
pub struct McRow {
    pub p0: usize,
    pub cell: String,
    pub fsa_state: usize,
    pub k: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub lb_closed: Option<f64>,
    pub lb_recursive: Option<f64>,
    pub valid: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainingSummary {
    pub runs: u64,
    pub episodes_per_run: u64,
    pub certified_with: Option<&'static str>,
    pub pooled_satisfaction: f64,
    pub go_fraction: f64,
    pub mean_reward_first_100: f64,
    pub mean_reward_last_100: f64,
    pub per_run_satisfaction: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub horizon: u64,
    pub fsa_states: usize,
    pub product_states: usize,
    pub delta_max: u32,
    pub assumption_violations: usize,
    pub closed_form_available: bool,
    pub bounds: Vec<BoundRow>,
    pub training: Option<TrainingSummary>,
    pub mc_validation: Vec<McRow>,
    #[serde(skip)]
    pub timing: Vec<TimingRow>,
    #[serde(skip)]
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub gnuplot: bool,
    /// Skip the timing sweep, for quick runs.
    pub skip_timing: bool,
}

struct Tables {
    closed: Option<BoundTable>,
    recursive: Option<BoundTable>,
}

fn bound_tables(inst: &Instance, method: BoundMethod) -> Result<Tables, HarnessError> {
    let want_closed = matches!(method, BoundMethod::Closed | BoundMethod::Both);
    let want_rec = matches!(method, BoundMethod::Recursive | BoundMethod::Both);
    let closed = if want_closed {
        match inst.bounds(BoundKind::Closed) {
            Ok(t) => Some(t),
            Err(e) if method == BoundMethod::Both => {
                log::warn!("closed-form bound skipped: {e}");
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let recursive = if want_rec {
        Some(inst.bounds(BoundKind::Recursive)?)
    } else {
        None
    };
    Ok(Tables { closed, recursive })
}

fn report_states(cfg: &ExperimentConfig, inst: &Instance) -> Result<Vec<usize>, HarnessError> {
    if cfg.report_cells.is_empty() {
        return Ok(inst.product.initial_states().to_vec());
    }
    cfg.report_cells
        .iter()
        .map(|c| {
            let cell: Cell = c.parse().map_err(HarnessError::Config)?;
            let s = inst
                .world
                .state(cell)
                .ok_or_else(|| HarnessError::Config(format!("cell {cell} is not a free cell")))?;
            Ok(inst.product.initial_for(s))
        })
        .collect()
}

fn bound_rows(
    cfg: &ExperimentConfig,
    inst: &Instance,
    tables: &Tables,
) -> Result<Vec<BoundRow>, HarnessError> {
    let states = report_states(cfg, inst)?;
    let ks = if cfg.report_k.is_empty() {
        vec![inst.horizon]
    } else {
        cfg.report_k.clone()
    };
    let mut rows = Vec::new();
    for table in [&tables.closed, &tables.recursive].into_iter().flatten() {
        for &k in &ks {
            for &p in &states {
                let (s, q) = inst.product.split(p);
                rows.push(BoundRow {
                    method: table.kind().name(),
                    k,
                    state_cell: inst.world.cell(s).to_string(),
                    fsa_state: q,
                    lb: table.get(k, p),
                });
            }
        }
    }
    Ok(rows)
}

fn train_runs(
    cfg: &ExperimentConfig,
    inst: &Instance,
    tables: &Tables,
) -> Result<(Vec<TrainOutput>, Option<&'static str>), HarnessError> {
    let start = inst.world.start_state();
    // either bound certifies
    let mut certificate = None;
    let mut last_err = None;
    if !cfg.force {
        for table in [&tables.recursive, &tables.closed].into_iter().flatten() {
            match certify(&inst.product, table, start, inst.horizon, cfg.pr_des) {
                Ok(()) => {
                    certificate = Some(table);
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        if certificate.is_none() {
            return Err(last_err.unwrap_or(TrainError::NoCertificate).into());
        }
    }
    let outputs: Result<Vec<TrainOutput>, TrainError> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut tc = TrainConfig::new(
                cfg.pr_des,
                cfg.episodes,
                inst.horizon,
                start,
                run_seed(cfg.seed, run),
            );
            tc.n_sample = cfg.n_sample;
            tc.z = cfg.z;
            tc.count_rl_episodes = cfg.count_rl_episodes;
            tc.force = cfg.force;
            train(&inst.mdp, &inst.product, &inst.analysis.policy, certificate, &tc)
        })
        .collect();
    Ok((outputs?, certificate.map(|t| t.kind().name())))
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn training_summary(
    runs: &[TrainOutput],
    episodes: u64,
    certified_with: Option<&'static str>,
) -> TrainingSummary {
    let all = || runs.iter().flat_map(|r| r.episodes.iter());
    let head = (episodes as usize).min(100);
    TrainingSummary {
        runs: runs.len() as u64,
        episodes_per_run: episodes,
        certified_with,
        pooled_satisfaction: mean(all().map(|e| f64::from(u8::from(e.satisfied)))),
        go_fraction: mean(all().map(|e| f64::from(u8::from(e.mode == Mode::Go)))),
        mean_reward_first_100: mean(
            runs.iter()
                .flat_map(|r| r.episodes.iter().take(head))
                .map(|e| e.reward),
        ),
        mean_reward_last_100: mean(runs.iter().flat_map(|r| {
            let n = r.episodes.len();
            r.episodes[n.saturating_sub(100)..].iter().map(|e| e.reward)
        })),
        per_run_satisfaction: runs
            .iter()
            .map(|r| mean(r.episodes.iter().map(|e| f64::from(u8::from(e.satisfied)))))
            .collect(),
    }
}

/// Monte-Carlo check of both bounds from every initial state at budgets
/// `T/4`, `T/2` and `T`.
pub fn mc_validation(
    inst: &Instance,
    closed: Option<&BoundTable>,
    recursive: Option<&BoundTable>,
    trials: u64,
    seed: u64,
) -> Vec<McRow> {
    let t = inst.horizon;
    let ks = [t / 4, t / 2, t];
    let mut rows = Vec::new();
    for &p0 in inst.product.initial_states() {
        let hist = mc_hit_histogram(
            &inst.mdp,
            &inst.product,
            &inst.analysis.policy,
            p0,
            t,
            trials,
            run_seed(seed, p0 as u64 + (1 << 32)),
        );
        let (s, q) = inst.product.split(p0);
        for &k in &ks {
            let est = hist.estimate(k);
            let lb_closed = closed.map(|c| c.get(k, p0));
            let lb_recursive = recursive.map(|r| r.get(k, p0));
            let ok = |lb: Option<f64>| lb.is_none_or(|lb| est.probability >= lb - 3.0 * est.stderr);
            rows.push(McRow {
                p0,
                cell: inst.world.cell(s).to_string(),
                fsa_state: q,
                k,
                estimate: est.probability,
                stderr: est.stderr,
                lb_closed,
                lb_recursive,
                valid: ok(lb_closed) && ok(lb_recursive),
            });
        }
    }
    rows
}

fn write_mc_csv(path: &Path, rows: &[McRow]) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "p0",
        "cell",
        "fsa_state",
        "k",
        "estimate",
        "stderr",
        "lb_closed",
        "lb_recursive",
        "valid",
    ])?;
    let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
    for r in rows {
        w.write_record([
            r.p0.to_string(),
            r.cell.clone(),
            r.fsa_state.to_string(),
            r.k.to_string(),
            r.estimate.to_string(),
            r.stderr.to_string(),
            opt(r.lb_closed),
            opt(r.lb_recursive),
            u8::from(r.valid).to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn sweep_instances(
    cfg: &ExperimentConfig,
    grid: &GridConfig,
) -> Result<Vec<(String, Instance)>, HarnessError> {
    cfg.sweep
        .iter()
        .map(|entry| {
            let g = match &entry.grid {
                Some(path) => GridConfig::load(&cfg.resolve(path))?,
                None => grid.clone(),
            };
            let inst = Instance::build(
                &g,
                &TaskSource::Formula(entry.formula.clone()),
                Some(cfg.epsilon_agent),
            )?;
            Ok((entry.name.clone(), inst))
        })
        .collect()
}

/// Runs every stage of an experiment and writes its artifacts into `out`.
///
/// On failure the artifacts written so far are listed in a `MANIFEST` that
/// names the failed stage.
pub fn run_case(cfg: &ExperimentConfig, out: &Path, opts: RunOptions) -> Result<CaseReport, HarnessError> {
    let mut artifacts = Vec::new();
    let mut stage = "setup";
    let result = run_stages(cfg, out, opts, &mut artifacts, &mut stage);
    match result {
        Ok(mut report) => {
            let manifest = write_manifest(out, &artifacts, None)?;
            artifacts.push(manifest);
            report.artifacts = artifacts;
            Ok(report)
        }
        Err(e) => {
            let msg = e.to_string();
            if out.is_dir() {
                write_manifest(out, &artifacts, Some((stage, &msg)))?;
            }
            Err(HarnessError::Stage {
                stage: stage.to_string(),
                source: Box::new(e),
            })
        }
    }
}

fn run_stages(
    cfg: &ExperimentConfig,
    out: &Path,
    opts: RunOptions,
    artifacts: &mut Vec<PathBuf>,
    stage: &mut &'static str,
) -> Result<CaseReport, HarnessError> {
    std::fs::create_dir_all(out).map_err(|e| HarnessError::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    cfg.check_files()?;
    *stage = "instance";
    let grid = cfg.grid_config()?;
    let inst = Instance::build(&grid, &cfg.task(), Some(cfg.epsilon_agent))?;

    *stage = "bounds";
    let tables = bound_tables(&inst, cfg.bound_method)?;
    let bounds = bound_rows(cfg, &inst, &tables)?;
    let path = out.join("bounds.csv");
    write_bounds_csv(&path, &bounds)?;
    artifacts.push(path);

    let mut training = None;
    if cfg.train {
        *stage = "train";
        let (runs, certified_with) = train_runs(cfg, &inst, &tables)?;
        for (i, run) in runs.iter().enumerate() {
            let dir = out.join(format!("run_{i:02}"));
            artifacts.extend(write_run(&dir, run, cfg.window)?);
        }
        let path = out.join("curves.csv");
        write_curves(&path, &runs, cfg.window)?;
        artifacts.push(path);
        training = Some(training_summary(&runs, cfg.episodes, certified_with));
    }

    let mut mc = Vec::new();
    if cfg.mc_validation {
        *stage = "mc_validation";
        mc = mc_validation(
            &inst,
            tables.closed.as_ref(),
            tables.recursive.as_ref(),
            cfg.mc_trials,
            cfg.seed,
        );
        let path = out.join("mc_validation.csv");
        write_mc_csv(&path, &mc)?;
        artifacts.push(path);
    }

    let mut timing = Vec::new();
    if !opts.skip_timing {
        *stage = "timing";
        let sweep = sweep_instances(cfg, &grid)?;
        let mut named: Vec<(&str, &Instance)> = vec![(cfg.name.as_str(), &inst)];
        named.extend(sweep.iter().map(|(n, i)| (n.as_str(), i)));
        timing = bench_bounds(named)?;
        let path = out.join("timing.csv");
        write_timing_csv(&path, &timing)?;
        artifacts.push(path);
    }

    *stage = "report";
    let report = CaseReport {
        name: cfg.name.clone(),
        horizon: inst.horizon,
        fsa_states: inst.fsa.num_states(),
        product_states: inst.product.num_states(),
        delta_max: inst.analysis.delta_max.value,
        assumption_violations: inst.analysis.delta_max.violations.len(),
        closed_form_available: tables.closed.is_some(),
        bounds,
        training,
        mc_validation: mc,
        timing,
        artifacts: Vec::new(),
    };
    let path = out.join("report.json");
    write_json(&path, &report)?;
    artifacts.push(path);

    if opts.gnuplot {
        artifacts.extend(gnuplot::write_scripts(out, cfg.train, !opts.skip_timing)?);
    }
    Ok(report)
}
