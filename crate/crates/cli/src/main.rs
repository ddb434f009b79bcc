//! Command-line front end: scenario ingestion, norm bounds, protocol
//! simulation, game runs and parameter sweeps, with reproducible seeded
//! output and exact bit accounting in every record.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use nonlocal_core::bipartite::{ip_operator, operator_schmidt, BipartiteOperator};
use nonlocal_core::error::Error;
use nonlocal_core::estimator::{derive_seed, plan};
use nonlocal_core::games::{oracle_distribution, simulate_game};
use nonlocal_core::harness::{
    equality_protocol, run_smp, run_twoway, simulate_twoway_quantum, twoway_to_smp, yao_compile,
};
use nonlocal_core::jsonio;
use nonlocal_core::matcore::spectral_norm;
use nonlocal_core::norms::{
    balance, diamond_lower, diamond_upper_from, diamond_upper_optimize, standard_witnesses,
};
use nonlocal_core::oracle::{exact_acceptance_twoway, exact_probability};
use nonlocal_core::reduction::build_psi;

#[derive(Parser)]
#[command(
    name = "nonlocal",
    about = "Classical simulation of bipartite quantum measurements with counted communication",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct EstimationArgs {
    /// Target additive error.
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// Failure probability.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    /// Seed (an unsigned integer, or "random" for wall-clock entropy).
    #[arg(long, default_value = "1")]
    seed: String,
}

impl EstimationArgs {
    fn seed_value(&self) -> Result<u64, Error> {
        parse_seed(&self.seed)
    }
}

fn parse_seed(text: &str) -> Result<u64, Error> {
    if text == "random" {
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        return Ok(nanos);
    }
    text.parse::<u64>().map_err(|_| {
        Error::InvalidParameter(format!("seed must be an integer or \"random\", got {text:?}"))
    })
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact acceptance probability of a scenario file.
    Oracle { scenario: PathBuf },
    /// Full pipeline: decompose, balance, build the psi pair, plan, and run
    /// the SMP estimation protocol; emits one CSV record.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        est: EstimationArgs,
        /// Random restarts for the decomposition search (0 keeps the
        /// canonical decomposition).
        #[arg(long, default_value_t = 0)]
        budget: usize,
    },
    /// Diamond-norm bounds of a bipartite operator file.
    Norms {
        /// Operator JSON ({"dimA", "dimB", "matrix"}).
        #[arg(long)]
        op: PathBuf,
        #[arg(long, default_value = "both")]
        method: String,
        #[arg(long, default_value_t = 4)]
        budget: usize,
        #[arg(long, default_value = "1")]
        seed: String,
    },
    /// Simulate a measurement game; emits one CSV row per run.
    Game {
        game: PathBuf,
        #[arg(long = "choiceA", default_value_t = 0)]
        choice_a: usize,
        #[arg(long = "choiceB", default_value_t = 0)]
        choice_b: usize,
        #[command(flatten)]
        est: EstimationArgs,
        #[arg(long, default_value_t = 1)]
        runs: u64,
    },
    /// Convert the built-in n-bit equality protocol to the SMP model and
    /// compare against direct execution.
    Twoway {
        /// Input width in bits (table size grows as 2^bits).
        #[arg(long, default_value_t = 2)]
        bits: usize,
        /// Check one input pair instead of the full table.
        #[arg(long)]
        x: Option<u64>,
        #[arg(long)]
        y: Option<u64>,
    },
    /// Compile an interactive quantum protocol file and compare the
    /// compiled acceptance against direct simulation; optionally run the
    /// classical SMP simulation.
    Compile {
        protocol: PathBuf,
        /// Also run the classical simulation on each input pair.
        #[arg(long)]
        simulate: bool,
        #[command(flatten)]
        est: EstimationArgs,
    },
    /// Built-in benchmarks.
    Bench {
        #[command(subcommand)]
        which: BenchCommand,
    },
    /// Grid of (eps, beta, seed) simulate runs; emits sorted CSV.
    Sweep {
        scenario: PathBuf,
        /// Comma-separated epsilon grid.
        #[arg(long, default_value = "0.05,0.1")]
        eps: String,
        /// Comma-separated beta grid.
        #[arg(long, default_value = "0.01")]
        beta: String,
        /// Number of derived seeds per grid point.
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, default_value = "1")]
        seed: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Norm bounds for the odd-inner-product operator family.
    Ip {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value = "both")]
        method: String,
        #[arg(long, default_value_t = 2)]
        budget: usize,
        #[arg(long, default_value = "1")]
        seed: String,
    },
}

/// 12 significant digits, scientific; the fixed CSV float format.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn read_file(path: &Path) -> Result<(String, String), Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidFormat(format!("{}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    Ok((text, stem))
}

const SIMULATE_CSV_HEADER: &str =
    "scenario,command,epsilon,beta,seed,estimate,oracle,abs_error,bits";

struct RunRecord {
    scenario: String,
    command: &'static str,
    epsilon: f64,
    beta: f64,
    seed: u64,
    estimate: f64,
    oracle: f64,
    bits: u64,
    wall_ms: f64,
}

impl RunRecord {
    fn abs_error(&self) -> f64 {
        (self.estimate - self.oracle).abs()
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.command,
            sig12(self.epsilon),
            sig12(self.beta),
            self.seed,
            sig12(self.estimate),
            sig12(self.oracle),
            sig12(self.abs_error()),
            self.bits
        )
    }
}

fn simulate_once(
    loaded: &jsonio::LoadedScenario,
    command: &'static str,
    eps: f64,
    beta: f64,
    seed: u64,
    budget: usize,
) -> Result<RunRecord, Error> {
    let start = Instant::now();
    let scenario = &loaded.scenario;
    let truth = exact_probability(scenario)?;
    let decomposition = if budget == 0 {
        balance(&operator_schmidt(scenario.q())?)?
    } else {
        diamond_upper_optimize(scenario.q(), budget, derive_seed(seed, 0xDEC0))?.1
    };
    let cap = diamond_upper_from(&decomposition)?.sqrt().max(1.0);
    let p = plan(eps, beta, cap, seed)?;
    let pair = build_psi(&decomposition, scenario.e(), scenario.u(), scenario.v(), 0.0)?;
    let (estimate, ledger) = run_smp(&pair, &p)?;
    Ok(RunRecord {
        scenario: loaded.id.clone(),
        command,
        epsilon: eps,
        beta,
        seed,
        estimate,
        oracle: truth,
        bits: ledger.total_charged(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn cmd_oracle(path: &Path) -> Result<(), Error> {
    let (text, stem) = read_file(path)?;
    let loaded = jsonio::parse_scenario(&text, &stem)?;
    println!("{:.12}", exact_probability(&loaded.scenario)?);
    Ok(())
}

fn cmd_simulate(path: &Path, est: &EstimationArgs, budget: usize) -> Result<(), Error> {
    let (text, stem) = read_file(path)?;
    let loaded = jsonio::parse_scenario(&text, &stem)?;
    let record = simulate_once(&loaded, "simulate", est.eps, est.beta, est.seed_value()?, budget)?;
    println!("{SIMULATE_CSV_HEADER}");
    println!("{}", record.csv_row());
    eprintln!("wall_ms={:.1}", record.wall_ms);
    Ok(())
}

fn cmd_norms(path: &Path, method: &str, budget: usize, seed: u64) -> Result<(), Error> {
    let (text, _) = read_file(path)?;
    let operator: BipartiteOperator =
        serde_json::from_str(&text).map_err(|e| Error::InvalidFormat(e.to_string()))?;
    let mut upper = serde_json::Value::Null;
    let mut lower = serde_json::Value::Null;
    let mut terms = serde_json::Value::Null;
    if method == "upper" || method == "both" {
        let (value, decomposition) = diamond_upper_optimize(&operator, budget, seed)?;
        upper = serde_json::json!(value);
        terms = serde_json::json!(decomposition.len());
    }
    if method == "lower" || method == "both" {
        let witnesses = standard_witnesses(&operator, budget, seed)?;
        let (value, _) = diamond_lower(&operator, &witnesses)?;
        lower = serde_json::json!(value);
    }
    if upper.is_null() && lower.is_null() {
        return Err(Error::InvalidParameter(format!(
            "method must be upper, lower or both, got {method:?}"
        )));
    }
    println!(
        "{}",
        serde_json::json!({ "upper": upper, "lower": lower, "terms": terms })
    );
    Ok(())
}

fn cmd_game(
    path: &Path,
    choice_a: usize,
    choice_b: usize,
    est: &EstimationArgs,
    runs: u64,
) -> Result<(), Error> {
    let (text, stem) = read_file(path)?;
    let loaded = jsonio::parse_game(&text, &stem)?;
    let oracle = oracle_distribution(&loaded.game, choice_a, choice_b)?;
    let base_seed = est.seed_value()?;
    let est_cols: Vec<String> = oracle
        .labels
        .iter()
        .map(|(a, b)| format!("est_{a}_{b}"))
        .collect();
    println!("run,outcome,{},L1_to_oracle,bits", est_cols.join(","));
    for run_idx in 0..runs {
        let run = simulate_game(
            &loaded.game,
            choice_a,
            choice_b,
            est.eps,
            est.beta,
            derive_seed(base_seed, run_idx),
        )?;
        let (la, lb) = &run.labels[run.sampled];
        let dist: Vec<String> = run.cleaned.iter().map(|&p| sig12(p)).collect();
        println!(
            "{},{}:{},{},{},{}",
            run_idx,
            la,
            lb,
            dist.join(","),
            sig12(oracle.l1_distance(&run.cleaned)),
            run.ledger.total_charged()
        );
    }
    Ok(())
}

fn cmd_twoway(bits: usize, x: Option<u64>, y: Option<u64>) -> Result<(), Error> {
    if bits > 4 {
        return Err(Error::SizeLimit("equality demo capped at 4-bit inputs".into()));
    }
    let protocol = equality_protocol(bits)?;
    let pairs: Vec<(u64, u64)> = match (x, y) {
        (Some(x), Some(y)) => vec![(x, y)],
        _ => {
            let d = 1u64 << bits;
            (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).collect()
        }
    };
    println!("x,y,direct,smp,agree,smp_bits");
    let mut all_agree = true;
    for (a, b) in pairs {
        let (_, direct, _) = run_twoway(&protocol, a, b)?;
        let (converted, ledger) = twoway_to_smp(&protocol, a, b)?;
        all_agree &= direct == converted;
        println!(
            "{a},{b},{},{},{},{}",
            direct as u8,
            converted as u8,
            (direct == converted) as u8,
            ledger.total_charged()
        );
    }
    if !all_agree {
        return Err(Error::MalformedProtocol(
            "SMP conversion disagreed with direct execution".into(),
        ));
    }
    Ok(())
}

fn cmd_compile(path: &Path, simulate: bool, est: &EstimationArgs) -> Result<(), Error> {
    let (text, stem) = read_file(path)?;
    let loaded = jsonio::parse_protocol(&text, &stem)?;
    let compiled = yao_compile(&loaded.spec)?;
    let max_norm = compiled
        .terms
        .iter()
        .map(|(a, b)| {
            spectral_norm(a)
                .unwrap_or(f64::NAN)
                .max(spectral_norm(b).unwrap_or(f64::NAN))
        })
        .fold(0.0f64, f64::max);
    let (_, dec) = compiled.measurement_element()?;
    println!(
        "protocol {}: qubits={} terms={} max_term_norm={} expanded_bound={}",
        loaded.id,
        loaded.spec.qubits(),
        compiled.terms.len(),
        sig12(max_norm),
        sig12(diamond_upper_from(&dec)?)
    );
    println!(
        "input,direct,compiled,abs_diff{}",
        if simulate { ",estimate,bits" } else { "" }
    );
    let seed = est.seed_value()?;
    for (idx, inputs) in loaded.inputs.iter().enumerate() {
        let direct = exact_acceptance_twoway(&loaded.spec, inputs)?;
        let phi = inputs.initial_state(&loaded.spec)?;
        let via_terms = compiled.acceptance_probability(&phi)?;
        if simulate {
            let (estimate, ledger) = simulate_twoway_quantum(
                &loaded.spec,
                inputs,
                est.eps,
                est.beta,
                derive_seed(seed, idx as u64),
            )?;
            println!(
                "{idx},{},{},{},{},{}",
                sig12(direct),
                sig12(via_terms),
                sig12((direct - via_terms).abs()),
                sig12(estimate),
                ledger.total_charged()
            );
        } else {
            println!(
                "{idx},{},{},{}",
                sig12(direct),
                sig12(via_terms),
                sig12((direct - via_terms).abs())
            );
        }
    }
    Ok(())
}

fn cmd_bench_ip(n: usize, method: &str, budget: usize, seed: u64) -> Result<(), Error> {
    let start = Instant::now();
    let q = ip_operator(n)?;
    let k = q.side() as f64;
    print!("ip n={n} side={} trivial_cap={}", q.side(), sig12(k * k));
    if method == "upper" || method == "both" {
        let (upper, dec) = diamond_upper_optimize(&q, budget, seed)?;
        print!(" upper={} terms={}", sig12(upper), dec.len());
    }
    if method == "lower" || method == "both" {
        let flat = nonlocal_core::norms::flat_witness(q.dim_a());
        let (lower, _) = diamond_lower(&q, &[flat])?;
        print!(" lower_flat={}", sig12(lower));
    }
    println!(" wall_ms={:.1}", start.elapsed().as_secs_f64() * 1e3);
    Ok(())
}

fn parse_grid(text: &str, what: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad {what} value {s:?}")))
        })
        .collect()
}

fn cmd_sweep(
    path: &Path,
    eps_grid: &str,
    beta_grid: &str,
    seeds: u64,
    base_seed: u64,
    out: Option<&Path>,
) -> Result<(), Error> {
    let (text, stem) = read_file(path)?;
    let loaded = jsonio::parse_scenario(&text, &stem)?;
    let eps_values = parse_grid(eps_grid, "epsilon")?;
    let beta_values = parse_grid(beta_grid, "beta")?;
    let mut records = Vec::new();
    for &eps in &eps_values {
        for &beta in &beta_values {
            for k in 0..seeds {
                let seed = derive_seed(base_seed, (eps.to_bits() ^ beta.to_bits()).wrapping_add(k));
                records.push(simulate_once(&loaded, "sweep", eps, beta, seed, 0)?);
            }
        }
    }
    // Deterministic row order regardless of production schedule.
    records.sort_by(|a, b| {
        (a.scenario.as_str(), a.epsilon, a.beta, a.seed)
            .partial_cmp(&(b.scenario.as_str(), b.epsilon, b.beta, b.seed))
            .unwrap()
    });
    let mut body = String::from(SIMULATE_CSV_HEADER);
    for r in &records {
        body.push('\n');
        body.push_str(&r.csv_row());
    }
    body.push('\n');
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::InvalidFormat(format!("{}: {e}", path.display())))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Oracle { scenario } => cmd_oracle(&scenario),
        Command::Simulate { scenario, est, budget } => cmd_simulate(&scenario, &est, budget),
        Command::Norms { op, method, budget, seed } => {
            cmd_norms(&op, &method, budget, parse_seed(&seed)?)
        }
        Command::Game { game, choice_a, choice_b, est, runs } => {
            cmd_game(&game, choice_a, choice_b, &est, runs)
        }
        Command::Twoway { bits, x, y } => cmd_twoway(bits, x, y),
        Command::Compile { protocol, simulate, est } => cmd_compile(&protocol, simulate, &est),
        Command::Bench { which } => match which {
            BenchCommand::Ip { n, method, budget, seed } => {
                cmd_bench_ip(n, &method, budget, parse_seed(&seed)?)
            }
        },
        Command::Sweep { scenario, eps, beta, seeds, seed, out } => cmd_sweep(
            &scenario,
            &eps,
            &beta,
            seeds,
            parse_seed(&seed)?,
            out.as_deref(),
        ),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::EstimationFailure { .. } | Error::CapExceeded { .. } => 3,
        _ => 2,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems (including unknown commands) exit 1; help and
            // version requests exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
