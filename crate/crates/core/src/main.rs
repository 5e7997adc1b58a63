use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tlswitch::harness::{
    mc_validation, run_case, BoundMethod, ExperimentConfig, HarnessError,
    Instance, RunOptions, TaskSource,
};
use tlswitch::model::{build_gridworld, Cell, GridConfig};
use tlswitch::reachability::BoundKind;
use tlswitch::twtl::{parse_twtl, save_fsa_json, translate_to_fsa};

#[derive(Parser)]
#[command(name = "tlswitch", version, about = "Switching-based RL under time-window temporal logic tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TaskArgs {
    /// TWTL formula.
    #[arg(long, conflicts_with = "fsa")]
    formula: Option<String>,
    /// Automaton JSON instead of a formula; needs --horizon.
    #[arg(long, requires = "horizon")]
    fsa: Option<PathBuf>,
    /// Episode length for --fsa.
    #[arg(long)]
    horizon: Option<u64>,
}

impl TaskArgs {
    fn source(&self) -> Result<TaskSource, HarnessError> {
        match (&self.formula, &self.fsa, self.horizon) {
            (Some(f), None, _) => Ok(TaskSource::Formula(f.clone())),
            (None, Some(p), Some(h)) => Ok(TaskSource::Fsa {
                path: p.clone(),
                horizon: h,
            }),
            _ => Err(HarnessError::Config(
                "give --formula, or --fsa with --horizon".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Closed,
    Recursive,
    Both,
}

impl From<Method> for BoundMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Closed => BoundMethod::Closed,
            Method::Recursive => BoundMethod::Recursive,
            Method::Both => BoundMethod::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Translate a formula into an automaton.
    Translate {
        #[arg(long)]
        formula: String,
        /// Write the automaton as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a Graphviz rendering.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Grid world utilities.
    Env {
        #[command(subcommand)]
        command: EnvCommand,
    },
    /// Product MDP utilities.
    Product {
        #[command(subcommand)]
        command: ProductCommand,
    },
    /// Lower bounds on satisfying the task in time.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        /// Product state as `x:y,q`; defaults to every initial state.
        #[arg(long)]
        state: Vec<String>,
        /// Step budget; defaults to the episode length.
        #[arg(long)]
        k: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo check of the bounds under the go policy.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Switching-based training runs.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long, default_value_t = 0.7)]
        prdes: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        episodes: u64,
        #[arg(long, default_value_t = 10)]
        runs: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        nsample: u64,
        #[arg(long, default_value_t = 2.58)]
        z: f64,
        /// Moving-window width for the summaries.
        #[arg(long, default_value_t = 50)]
        window: usize,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        /// Train even if the bounds do not certify the target.
        #[arg(long)]
        force: bool,
        /// Count RL-mode episodes in the switching statistics too.
        #[arg(long)]
        count_rl_episodes: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a bundled experiment.
    Case {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write gnuplot scripts.
        #[arg(long)]
        gnuplot: bool,
        #[arg(long)]
        skip_timing: bool,
    },
}

#[derive(Subcommand)]
enum EnvCommand {
    /// Print the grid.
    Show {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum ProductCommand {
    /// Size and reachability of the product.
    Stats {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long)]
        eps: Option<f64>,
    },
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| HarnessError::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn instance(config: &Path, task: &TaskArgs, eps: Option<f64>) -> Result<Instance, HarnessError> {
    let grid = GridConfig::load(config)?;
    Instance::build(&grid, &task.source()?, eps)
}

fn parse_state(inst: &Instance, text: &str) -> Result<usize, HarnessError> {
    let (cell, q) = text
        .rsplit_once(',')
        .ok_or_else(|| HarnessError::Config(format!("expected x:y,q, got {text:?}")))?;
    let cell: Cell = cell.parse().map_err(HarnessError::Config)?;
    let q: usize = q
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("bad automaton state in {text:?}")))?;
    let s = inst
        .world
        .state(cell)
        .ok_or_else(|| HarnessError::Config(format!("cell {cell} is not a free cell")))?;
    if q >= inst.fsa.num_states() {
        return Err(HarnessError::Config(format!("automaton state {q} out of range")));
    }
    Ok(inst.product.index(s, q))
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Translate { formula, out, dot } => {
            let ast = parse_twtl(&formula)?;
            let fsa = translate_to_fsa(&ast)?;
            println!(
                "states={} accepting={} time_bound={}",
                fsa.num_states(),
                fsa.accepting_states().count(),
                ast.time_bound()
            );
            if let Some(p) = out {
                write_or_print(Some(&p), &save_fsa_json(&fsa))?;
            }
            if let Some(p) = dot {
                write_or_print(Some(&p), &fsa.to_dot())?;
            }
        }
        Command::Env {
            command: EnvCommand::Show { config },
        } => {
            let grid = GridConfig::load(&config)?;
            let (world, mdp, _) = build_gridworld(&grid)?;
            println!("{}", world.render());
            println!("states={} actions={}", mdp.num_states(), mdp.num_actions());
        }
        Command::Product {
            command: ProductCommand::Stats { config, task, eps },
        } => {
            let inst = instance(&config, &task, eps)?;
            let st = inst.product.stats();
            let dm = &inst.analysis.delta_max;
            println!("fsa_states={}", inst.fsa.num_states());
            println!("product_states={}", st.states);
            println!("initial={}", st.initial);
            println!("accepting={}", st.accepting);
            println!("reachable={}", st.reachable);
            println!("fsa_states_reached={}", st.fsa_states_reached);
            println!("horizon={}", inst.horizon);
            println!("delta_max={}", dm.value);
            println!("assumption_violations={}", dm.violations.len());
            for w in inst.product.warnings() {
                println!("warning: {w}");
            }
        }
        Command::Bounds {
            config,
            task,
            eps,
            method,
            state,
            k,
            out,
        } => {
            let inst = instance(&config, &task, eps)?;
            let states = if state.is_empty() {
                inst.product.initial_states().to_vec()
            } else {
                state
                    .iter()
                    .map(|s| parse_state(&inst, s))
                    .collect::<Result<_, _>>()?
            };
            let ks = if k.is_empty() { vec![inst.horizon] } else { k };
            let kinds: &[BoundKind] = match method {
                Method::Closed => &[BoundKind::Closed],
                Method::Recursive => &[BoundKind::Recursive],
                Method::Both => &[BoundKind::Closed, BoundKind::Recursive],
            };
            let horizon = inst.horizon.max(ks.iter().copied().max().unwrap_or(0));
            let mut text = String::from("method,k,state_cell,fsa_state,lb\n");
            for &kind in kinds {
                let table = match inst.analysis.bounds(&inst.product, kind, horizon) {
                    Ok(t) => t,
                    Err(e) if matches!(method, Method::Both) => {
                        eprintln!("{} bound skipped: {e}", kind.name());
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                for &kk in &ks {
                    for &p in &states {
                        let (s, q) = inst.product.split(p);
                        text.push_str(&format!(
                            "{},{},{},{},{}\n",
                            kind.name(),
                            kk,
                            inst.world.cell(s),
                            q,
                            table.get(kk, p)
                        ));
                    }
                }
            }
            write_or_print(out.as_deref(), &text)?;
        }
        Command::Verify {
            config,
            task,
            eps,
            trials,
            seed,
            out,
        } => {
            let inst = instance(&config, &task, eps)?;
            let closed = inst.bounds(BoundKind::Closed).ok();
            let recursive = inst.bounds(BoundKind::Recursive)?;
            let rows = mc_validation(&inst, closed.as_ref(), Some(&recursive), trials, seed);
            let mut text =
                String::from("p0,cell,fsa_state,k,estimate,stderr,lb_closed,lb_recursive,valid\n");
            let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
            for r in &rows {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.p0,
                    r.cell,
                    r.fsa_state,
                    r.k,
                    r.estimate,
                    r.stderr,
                    opt(r.lb_closed),
                    opt(r.lb_recursive),
                    u8::from(r.valid)
                ));
            }
            write_or_print(out.as_deref(), &text)?;
            let bad = rows.iter().filter(|r| !r.valid).count();
            eprintln!("{} checks, {} below a bound", rows.len(), bad);
        }
        Command::Train {
            config,
            task,
            prdes,
            eps,
            episodes,
            runs,
            seed,
            nsample,
            z,
            window,
            method,
            force,
            count_rl_episodes,
            out,
        } => {
            let grid = GridConfig::load(&config)?;
            let epsilon_agent = eps.unwrap_or(grid.epsilon_agent);
            let (formula, fsa, horizon) = match task.source()? {
                TaskSource::Formula(f) => (Some(f), None, None),
                TaskSource::Fsa { path, horizon } => (None, Some(path), Some(horizon)),
            };
            let cfg = ExperimentConfig {
                name: "train".into(),
                description: String::new(),
                grid: std::path::absolute(&config).map_err(|e| HarnessError::Io {
                    path: config.clone(),
                    source: e,
                })?,
                formula,
                fsa,
                horizon,
                pr_des: prdes,
                epsilon_agent,
                z,
                episodes,
                n_sample: nsample,
                runs,
                seed,
                bound_method: method.into(),
                output: Some(out.clone()),
                window,
                train: true,
                force,
                count_rl_episodes,
                mc_validation: false,
                mc_trials: 0,
                report_cells: Vec::new(),
                report_k: Vec::new(),
                sweep: Vec::new(),
                base_dir: PathBuf::from("."),
            };
            cfg.validate()?;
            let report = run_case(
                &cfg,
                &out,
                RunOptions {
                    gnuplot: false,
                    skip_timing: true,
                },
            )?;
            if let Some(t) = report.training {
                println!(
                    "runs={} pooled_satisfaction={:.4} go_fraction={:.4} reward_first_100={:.3} reward_last_100={:.3}",
                    t.runs,
                    t.pooled_satisfaction,
                    t.go_fraction,
                    t.mean_reward_first_100,
                    t.mean_reward_last_100
                );
            }
        }
        Command::Case {
            config,
            out,
            gnuplot,
            skip_timing,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| cfg.output_dir());
            let report = run_case(&cfg, &out, RunOptions { gnuplot, skip_timing })?;
            println!(
                "{}: T={} product_states={} closed_form={} artifacts={}",
                report.name,
                report.horizon,
                report.product_states,
                report.closed_form_available,
                report.artifacts.len()
            );
            if let Some(t) = &report.training {
                println!(
                    "pooled_satisfaction={:.4} go_fraction={:.4} reward_first_100={:.3} reward_last_100={:.3}",
                    t.pooled_satisfaction, t.go_fraction, t.mean_reward_first_100, t.mean_reward_last_100
                );
            }
            let invalid = report.mc_validation.iter().filter(|r| !r.valid).count();
            if !report.mc_validation.is_empty() {
                println!("mc_checks={} below_bound={invalid}", report.mc_validation.len());
            }
            for r in &report.timing {
                println!(
                    "timing {}: pairs={} closed={} recursive={:.6}s",
                    r.instance,
                    r.pairs,
                    r.closed_seconds.map_or("NA".into(), |s| format!("{s:.6}s")),
                    r.recursive_seconds
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
