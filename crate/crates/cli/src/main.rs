use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bayesrec::harness::verify::{run_suite, Suite};
use bayesrec::harness::{
    load_config, run_experiment, ExperimentConfig, InstanceSpec, PricingSpec, RandomSpec, RegretReport,
};
use bayesrec::hindsight::{solve_bruteforce, solve_threshold, BRUTEFORCE_MAX_STATES};
use bayesrec::lp::{self, query_budget, HalfspaceOracle, KnownRegion, LpQuery};
use bayesrec::model::load_instance;
use bayesrec::policies::{run_policy, PolicyKind};
use bayesrec::reductions::{build_pricing_instance, decompose_binary_support, pricing_ledger, PricingInstance};
use bayesrec::rng::derive_seed;
use bayesrec::Environment;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "bayesrec", version, about = "Online Bayesian recommendation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the hindsight-optimal persuasive scheme of an instance file.
    Solve { instance: PathBuf },
    /// Run a policy for one horizon over many seeds.
    Simulate(RunArgs),
    /// Run a policy over a list of horizons.
    RegretCurve(RunArgs),
    /// Run a property suite (model, oracle, checkpersu, decompose, solver, lemmas or all).
    Verify {
        suite: String,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
    },
    /// Split a distribution file into binary-support components.
    Decompose {
        #[arg(long)]
        dist: PathBuf,
    },
    /// Replay policy transcripts on the pricing instance as posted prices.
    PricingDemo {
        #[arg(long)]
        value: f64,
        #[arg(long)]
        horizon: u64,
        #[arg(long, default_value = "loglog")]
        policy: PolicyKind,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        master_seed: u64,
    },
    /// Maximize a linear objective over {x ∈ [0,1]^d : w·x ≥ b} using only membership queries.
    LpSolve(LpArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file; the flags below fill in or override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    policy: Option<PolicyKind>,
    /// Instance file.
    #[arg(long, conflicts_with_all = ["random_states", "pricing_value"])]
    instance: Option<PathBuf>,
    /// Draw a random instance with this many states.
    #[arg(long)]
    random_states: Option<usize>,
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
    /// Use the pricing instance with this buyer value.
    #[arg(long)]
    pricing_value: Option<f64>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Comma-separated horizons.
    #[arg(long, value_delimiter = ',', conflicts_with = "horizon")]
    horizons: Option<Vec<u64>>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Directory for per_seed.csv and aggregate.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LpArgs {
    /// Constraint normal `w`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    halfspace: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    offset: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    objective: Vec<f64>,
    /// Strictly feasible starting point.
    #[arg(long, value_delimiter = ',', required = true)]
    interior: Vec<f64>,
    #[arg(long)]
    inner_radius: f64,
    #[arg(long, default_value_t = 1e-4)]
    precision: f64,
    #[arg(long, default_value_t = 1e-4)]
    confidence: f64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { instance } => solve(&instance)?,
        Command::Simulate(args) => {
            if args.horizons.is_some() {
                bail!("simulate takes a single --horizon; use regret-curve for several");
            }
            let report = run_experiment(&experiment_config(args)?)?;
            print_aggregates(&report)?;
        }
        Command::RegretCurve(args) => {
            let report = run_experiment(&experiment_config(args)?)?;
            print_aggregates(&report)?;
        }
        Command::Verify { suite, seed } => return verify(&suite, seed),
        Command::Decompose { dist } => decompose(&dist)?,
        Command::PricingDemo {
            value,
            horizon,
            policy,
            seeds,
            master_seed,
        } => return pricing_demo(value, horizon, policy, seeds, master_seed),
        Command::LpSolve(args) => lp_solve(&args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn solve(path: &Path) -> Result<()> {
    let inst = load_instance(path)?;
    let sol = solve_threshold(&inst);
    println!("scheme = {:?}", sol.scheme.probs());
    println!("threshold_state = {}", sol.threshold_state);
    println!("threshold_value = {}", sol.value);
    if inst.num_states() <= BRUTEFORCE_MAX_STATES {
        println!("bruteforce_value = {}", solve_bruteforce(&inst)?.value);
    } else {
        println!("bruteforce_value = skipped (more than {BRUTEFORCE_MAX_STATES} states)");
    }
    Ok(())
}

fn experiment_config(args: RunArgs) -> Result<ExperimentConfig> {
    let instance = if let Some(path) = args.instance {
        Some(InstanceSpec::Path(path))
    } else if let Some(m) = args.random_states {
        Some(InstanceSpec::Random(RandomSpec {
            m,
            seed: args.instance_seed,
            omega_range: None,
            misspecified_belief: false,
            value_range: None,
        }))
    } else {
        args.pricing_value.map(|value| {
            InstanceSpec::Pricing(PricingSpec {
                value,
                horizon: args.horizon.or_else(|| args.horizons.as_ref().and_then(|h| h.last().copied())).unwrap_or(2),
            })
        })
    };
    let horizons = args.horizons.or(args.horizon.map(|t| vec![t]));
    let cfg = match &args.config {
        Some(path) => {
            let mut cfg = load_config(path)?;
            if let Some(policy) = args.policy {
                cfg.policy = policy;
            }
            if let Some(instance) = instance {
                cfg.instance = instance;
                cfg.base_dir = None;
            }
            if let Some(horizons) = horizons {
                cfg.horizons = horizons;
            }
            if let Some(seeds) = args.seeds {
                cfg.seeds = seeds;
            }
            if let Some(master) = args.master_seed {
                cfg.master_seed = master;
            }
            if args.out.is_some() {
                cfg.output_dir = args.out;
            }
            cfg
        }
        None => ExperimentConfig {
            policy: args.policy.context("--policy is required without --config")?,
            horizons: horizons.context("--horizon or --horizons is required without --config")?,
            seeds: args.seeds.unwrap_or(1),
            master_seed: args.master_seed.unwrap_or(0),
            output_dir: args.out,
            instance: instance.context("one of --instance, --random-states or --pricing-value is required")?,
            base_dir: None,
        },
    };
    cfg.validate().map_err(anyhow::Error::msg)?;
    Ok(cfg)
}

fn print_aggregates(report: &RegretReport) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "policy={} oracle_value={}", report.policy, report.rows[0].oracle_value)?;
    writeln!(out, "horizon,runs,mean,std,min,median,max,completed_runs")?;
    for a in &report.aggregates {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            a.horizon, a.runs, a.mean, a.std, a.min, a.median, a.max, a.completed_runs
        )?;
    }
    Ok(())
}

fn verify(name: &str, seed: u64) -> Result<ExitCode> {
    let suites: Vec<Suite> = if name.eq_ignore_ascii_case("all") {
        Suite::ALL.to_vec()
    } else {
        vec![name.parse().map_err(anyhow::Error::msg)?]
    };
    let mut all_passed = true;
    for suite in suites {
        let report = run_suite(suite, seed);
        println!("[{suite}]");
        for result in &report.results {
            println!("  {result}");
        }
        all_passed &= report.passed();
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistFile {
    values: Vec<f64>,
    probs: Vec<f64>,
}

fn decompose(path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let dist: DistFile = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let d = decompose_binary_support(&dist.values, &dist.probs)?;
    println!("mean = {}", d.mean);
    for (c, w) in d.components.iter().zip(&d.weights) {
        println!("weight {w}: values {:?} probs {:?}", c.values, c.probs);
    }
    println!("system_residual = {:e}", d.system_residual);
    println!("verification: mean preservation, binary support and consistency hold within 1e-9");
    Ok(())
}

fn pricing_demo(value: f64, horizon: u64, policy: PolicyKind, seeds: u64, master: u64) -> Result<ExitCode> {
    let p = PricingInstance::new(value, horizon)?;
    let inst = build_pricing_instance(&p)?;
    println!("seed,recommendation_regret,pricing_regret,sales,revenue,bound_holds");
    let mut all_hold = true;
    for s in 0..seeds {
        let mut env = Environment::new(inst.clone(), horizon, derive_seed(master, 0, s))?;
        let run = run_policy(&mut env, policy)?;
        let ledger = pricing_ledger(&p, env.transcript())?;
        let regret = run.trace().regret;
        let holds = ledger.regret <= regret + 1.0;
        all_hold &= holds;
        println!("{s},{regret},{},{},{},{holds}", ledger.regret, ledger.sales, ledger.revenue);
    }
    println!("pricing regret ≤ recommendation regret + 1 on every run: {all_hold}");
    Ok(if all_hold {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn lp_solve(args: &LpArgs) -> Result<()> {
    let d = args.objective.len();
    let query = LpQuery {
        objective: args.objective.clone(),
        known_region: KnownRegion::unit_box(d),
        interior_point: args.interior.clone(),
        inner_radius: args.inner_radius,
        outer_radius: (d as f64).sqrt(),
        precision: args.precision,
        confidence: args.confidence,
    };
    if args.halfspace.len() != d {
        bail!("--halfspace has {} entries but --objective has {d}", args.halfspace.len());
    }
    let mut oracle = HalfspaceOracle {
        normal: args.halfspace.clone(),
        offset: args.offset,
    };
    let res = lp::maximize(&query, &mut oracle)?;
    let budget = query_budget(d, query.outer_radius, query.precision, query.confidence, query.inner_radius);
    println!("status = {:?}", res.status);
    println!("value = {}", res.value);
    println!("upper_bound = {}", res.upper_bound);
    println!("point = {:?}", res.point);
    println!("queries = {}", res.oracle_queries);
    println!("budget = {budget}");
    Ok(())
}
