use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use chainrace::analysis::ledger_report;
use chainrace::montecarlo::{
    depth_key, estimate_attack_success, estimate_brw, estimate_nakamoto_frequency,
    estimate_window_gaps, passage_key, sweep_csv, sz_dominance_check, tail_key, window_key,
    brw_tail_levels, DominanceConfig, DominanceMode, ExperimentResult,
};
use chainrace::mining::chia_tail_bound;
use chainrace::thresholds::{comparison_curves, curves_csv, parse_grid};
use chainrace::{
    parse_replay, replay_simulation, run_simulation, Error, Model, SimulationConfig, StrategySpec,
    Trace,
};

#[derive(Parser)]
#[command(name = "chainrace", version, about = "Longest-chain attack simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one trace and report its ledger analysis.
    Simulate(SimulateArgs),
    /// Run a strategy against a replay file.
    Replay(ReplayArgs),
    /// Estimate attack success, optionally over a parameter sweep.
    Attack(AttackArgs),
    /// Nakamoto-candidate frequency and window-gap estimates.
    Nakamoto(NakamotoArgs),
    /// Threshold and comparison curves.
    Thresholds(ThresholdArgs),
    /// Branching-random-walk growth, tail and first-passage statistics.
    Brw(BrwArgs),
    /// Check that the pre-mining attack dominates exhaustive search on small schedules.
    Dominance(DominanceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ModelArg {
    Pow,
    Ps,
    Chia,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum StrategyArg {
    Null,
    Private,
    Sz,
    Balance,
    Nas,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ModeArg {
    Persistence,
    Liveness,
    Both,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SweepParam {
    Beta,
    K,
    Delta,
    LambdaA,
}

#[derive(Args, Clone)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Clone)]
struct SimArgs {
    #[arg(long, conflicts_with_all = ["lambda", "beta"])]
    lambda_h: Option<f64>,
    #[arg(long, conflicts_with_all = ["lambda", "beta"])]
    lambda_a: Option<f64>,
    /// Total mining rate; use with --beta.
    #[arg(long, requires = "beta")]
    lambda: Option<f64>,
    /// Adversary fraction of the total rate; use with --lambda.
    #[arg(long, requires = "lambda")]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, value_enum, default_value = "pow")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "null")]
    strategy: StrategyArg,
    /// Targeted honest block (or root block for the Chia attack).
    #[arg(long, default_value_t = 1)]
    target_j: usize,
    /// Confirmation depth.
    #[arg(long, default_value_t = 6)]
    k: usize,
    /// Pre-mining attack aims at liveness instead of persistence.
    #[arg(long)]
    liveness: bool,
    /// Run length; for replays, defaults to the last event time.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 4)]
    nodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SimArgs {
    fn rates(&self) -> (f64, f64) {
        match (self.lambda, self.beta) {
            (Some(l), Some(b)) => ((1.0 - b) * l, b * l),
            _ => (self.lambda_h.unwrap_or(1.0), self.lambda_a.unwrap_or(0.0)),
        }
    }

    fn config(&self) -> Result<SimulationConfig, Error> {
        if let Some(b) = self.beta {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::InvalidArgument(format!("beta = {b} outside [0, 1]")));
            }
        }
        let (lh, la) = self.rates();
        let model = match self.model {
            ModelArg::Pow => Model::Pow,
            ModelArg::Ps => Model::Ps,
            ModelArg::Chia => Model::Chia,
        };
        let (j, k) = (self.target_j, self.k);
        let strategy = match self.strategy {
            StrategyArg::Null => StrategySpec::Null,
            StrategyArg::Private => StrategySpec::PrivateAttack { target_j: j, k },
            StrategyArg::Sz => StrategySpec::SzPremine { target_j: j, k, liveness: self.liveness },
            StrategyArg::Balance => StrategySpec::Balance,
            StrategyArg::Nas => match model {
                Model::Chia => StrategySpec::NasChia { root_j: j, k },
                Model::Ps => StrategySpec::NasPs,
                Model::Pow => {
                    return Err(Error::ModelMismatch(
                        "the nothing-at-stake attack needs --model ps or chia".into(),
                    ))
                }
            },
        };
        let cfg = SimulationConfig::new(lh, la, self.delta, model)
            .with_strategy(strategy)
            .with_horizon(self.horizon.unwrap_or(100.0))
            .with_nodes(self.nodes)
            .with_seed(self.seed)
            .with_k(k);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Liveness window length.
    #[arg(long, default_value_t = 10.0)]
    window: f64,
    /// Include the full trace in JSON output.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    file: PathBuf,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value_t = 10.0)]
    window: f64,
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Parameter to sweep over --grid.
    #[arg(long, value_enum, requires = "grid")]
    sweep: Option<SweepParam>,
    /// Sweep values as start:step:end.
    #[arg(long, requires = "sweep")]
    grid: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NakamotoArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Comma-separated window lengths for the gap estimate.
    #[arg(long, value_delimiter = ',')]
    windows: Vec<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, default_value = "0:0.05:2")]
    grid: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BrwArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda_a: f64,
    /// Comma-separated times at which to record the depth.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    times: Vec<f64>,
    /// Comma-separated levels for first-passage times.
    #[arg(long, value_delimiter = ',')]
    passage: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DominanceArgs {
    /// Mining events per schedule.
    #[arg(long, default_value_t = 10)]
    events: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    schedules: usize,
    /// Adversary to honest rate ratio.
    #[arg(long, default_value_t = 0.8)]
    ratio: f64,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    /// Search states per schedule.
    #[arg(long, default_value_t = 5_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli.command) {
        Ok(()) => {
            eprintln!("done in {:.3}s", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut v = serde_json::to_value(&e).unwrap_or_else(|_| json!({}));
            v["message"] = json!(e.to_string());
            eprintln!("{v}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate(a) => {
            let cfg = a.sim.config()?;
            let trace = run_simulation(&cfg)?;
            emit_trace(&trace, a.window, a.trace, &a.output)
        }
        Command::Replay(a) => {
            let text = std::fs::read_to_string(&a.file)
                .map_err(|e| Error::InvalidArgument(format!("{}: {e}", a.file.display())))?;
            let schedule = parse_replay(&text, a.sim.horizon)?;
            let cfg = a.sim.config()?;
            let trace = replay_simulation(&schedule, &cfg)?;
            emit_trace(&trace, a.window, a.trace, &a.output)
        }
        Command::Attack(a) => attack(a),
        Command::Nakamoto(a) => {
            let cfg = a.sim.config()?;
            let freq = estimate_nakamoto_frequency(&cfg, a.trials)?;
            let gaps = if a.windows.is_empty() {
                None
            } else {
                Some(estimate_window_gaps(&cfg, &a.windows, a.trials)?)
            };
            match a.output.format {
                Format::Json => {
                    let v = json!({ "frequency": freq, "window_gaps": gaps });
                    write(&a.output, &pretty(&v))
                }
                Format::Csv => {
                    let mut s = String::from("quantity,window,estimate,std_error,ci_lo,ci_hi,trials,seed\n");
                    let mut row = |name: &str, w: String, r: &ExperimentResult, key: &str| {
                        if let Some(e) = r.estimate(key) {
                            s.push_str(&format!(
                                "{name},{w},{},{},{},{},{},{}\n",
                                e.mean, e.std_error, e.ci95.0, e.ci95.1, e.trials, cfg.seed
                            ));
                        }
                    };
                    row("frequency", String::new(), &freq, "frequency");
                    if let Some(g) = &gaps {
                        for &w in &a.windows {
                            row("window_gap", w.to_string(), g, &window_key(w));
                        }
                    }
                    write(&a.output, &s)
                }
            }
        }
        Command::Thresholds(a) => {
            let grid = parse_grid(&a.grid)?;
            let points = comparison_curves(&grid);
            match a.output.format {
                Format::Csv => write(&a.output, &curves_csv(&points)),
                Format::Json => {
                    let v = json!({ "grid": a.grid, "points": points });
                    write(&a.output, &pretty(&v))
                }
            }
        }
        Command::Brw(a) => {
            let r = estimate_brw(a.lambda_a, &a.times, &a.passage, a.trials, a.seed)?;
            match a.output.format {
                Format::Json => write(&a.output, &r.to_json()),
                Format::Csv => {
                    let mut s = String::from("quantity,t,level,estimate,std_error,bound,trials,seed\n");
                    for &t in &a.times {
                        if let Some(e) = r.estimate(&depth_key(t)) {
                            s.push_str(&format!(
                                "depth,{t},,{},{},,{},{}\n",
                                e.mean, e.std_error, e.trials, a.seed
                            ));
                        }
                        for m in brw_tail_levels(a.lambda_a, t) {
                            if let Some(e) = r.estimate(&tail_key(t, m)) {
                                let bound = chia_tail_bound(a.lambda_a, t, m)?;
                                s.push_str(&format!(
                                    "tail,{t},{m},{},{},{bound},{},{}\n",
                                    e.mean, e.std_error, e.trials, a.seed
                                ));
                            }
                        }
                    }
                    for &k in &a.passage {
                        if let Some(e) = r.estimate(&passage_key(k)) {
                            s.push_str(&format!(
                                "passage,,{k},{},{},,{},{}\n",
                                e.mean, e.std_error, e.trials, a.seed
                            ));
                        }
                    }
                    write(&a.output, &s)
                }
            }
        }
        Command::Dominance(a) => {
            let modes: &[DominanceMode] = match a.mode {
                ModeArg::Persistence => &[DominanceMode::Persistence],
                ModeArg::Liveness => &[DominanceMode::Liveness],
                ModeArg::Both => &[DominanceMode::Persistence, DominanceMode::Liveness],
            };
            let mut reports = Vec::new();
            for &mode in modes {
                let mut cfg = DominanceConfig::new(a.events, a.k, a.schedules, mode);
                cfg.ratio = a.ratio;
                cfg.budget = a.budget;
                cfg.seed = a.seed;
                reports.push(sz_dominance_check(&cfg)?);
            }
            match a.output.format {
                Format::Json => write(&a.output, &pretty(&json!({ "reports": reports }))),
                Format::Csv => {
                    let mut s = String::from(
                        "mode,events,k,schedules,ratio,seed,without_target,search_successes,sz_successes,counterexamples,max_states\n",
                    );
                    for r in &reports {
                        let c = &r.config;
                        let mode = serde_json::to_value(c.mode).unwrap_or_default();
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{},{},{},{},{}\n",
                            mode.as_str().unwrap_or(""),
                            c.n_events,
                            c.k,
                            c.n_schedules,
                            c.ratio,
                            c.seed,
                            r.without_target,
                            r.search_successes,
                            r.sz_successes,
                            r.counterexamples.len(),
                            r.max_states
                        ));
                    }
                    write(&a.output, &s)
                }
            }
        }
    }
}

fn attack(a: AttackArgs) -> Result<(), Error> {
    let base = a.sim.config()?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let values = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => Vec::new(),
    };
    let configs: Vec<(Vec<f64>, SimulationConfig)> = match a.sweep {
        None => vec![(vec![], base.clone())],
        Some(p) => values
            .iter()
            .map(|&v| {
                let mut args = a.sim.clone();
                match p {
                    SweepParam::Beta => {
                        let lambda = args.lambda.unwrap_or(base.lambda_h + base.lambda_a);
                        args.lambda = Some(lambda);
                        args.beta = Some(v);
                    }
                    SweepParam::K => args.k = v.round() as usize,
                    SweepParam::Delta => args.delta = v,
                    SweepParam::LambdaA => {
                        let (lh, _) = args.rates();
                        args.lambda = None;
                        args.beta = None;
                        args.lambda_h = Some(lh);
                        args.lambda_a = Some(v);
                    }
                }
                Ok((vec![v], args.config()?))
            })
            .collect::<Result<_, Error>>()?,
    };
    for (params, cfg) in configs {
        let r = estimate_attack_success(&cfg, a.trials)?;
        if let Some(e) = r.estimate("success") {
            rows.push((params, *e, cfg.seed));
        }
        results.push(r);
    }
    match a.output.format {
        Format::Json => write(&a.output, &pretty(&json!({ "results": results }))),
        Format::Csv => {
            let name = match a.sweep {
                None => vec![],
                Some(SweepParam::Beta) => vec!["beta"],
                Some(SweepParam::K) => vec!["k"],
                Some(SweepParam::Delta) => vec!["delta"],
                Some(SweepParam::LambdaA) => vec!["lambda_a"],
            };
            write(&a.output, &sweep_csv(&name, &rows))
        }
    }
}

fn emit_trace(trace: &Trace, window: f64, full: bool, output: &Output) -> Result<(), Error> {
    let report = ledger_report(trace, trace.config.k, window);
    match output.format {
        Format::Csv => write(output, &report.violations_csv()),
        Format::Json => {
            let mut v = json!({
                "config": trace.config,
                "summary": {
                    "blocks": trace.tree.len(),
                    "honest_blocks": trace.honest_index.len() - 1,
                    "max_depth": trace.tree.max_depth(),
                    "publications": trace.publications.len(),
                },
                "report": report,
            });
            if full {
                v["trace"] = trace.to_json();
            }
            write(output, &pretty(&v))
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn write(output: &Output, text: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
