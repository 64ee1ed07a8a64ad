use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use balroute::experiment::{run_experiment, write_outputs, Method};
use balroute::{dot, format, ExperimentConfig};
use balroute_core::metrics::jain_index;
use balroute_core::{certify, generate_geometric, objective_value, solve, GeometricParams, PenaltySpec, SolverConfig};

#[derive(Parser)]
#[command(name = "balroute", version, about = "Load-balanced routing by min-sum belief propagation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the randomized experiment and write CSV results.
    Run(RunArgs),
    /// Solve one instance file.
    Solve(SolveArgs),
    /// Generate a random geometric instance.
    Gen(GenArgs),
    /// Check a flow for optimality.
    Certify(CertifyArgs),
}

#[derive(Args)]
struct Penalty {
    /// Exponent of the load penalty y^alpha.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Weight of the load penalty; 0 is min-cost routing.
    #[arg(long, default_value_t = 0.5)]
    w: f64,
}

impl Penalty {
    fn spec(&self) -> Result<PenaltySpec> {
        if self.w == 0.0 {
            return Ok(PenaltySpec::min_cost());
        }
        Ok(PenaltySpec::power_law(self.alpha, self.w)?)
    }
}

#[derive(Args)]
struct RunArgs {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated k/n values.
    #[arg(long)]
    fractions: Option<String>,
    /// Comma-separated alpha values.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    capacity: Option<i64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    stability_window: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Check every result with the residual-graph certificate.
    #[arg(long)]
    certify: bool,
    /// Skip the node-splitting baseline.
    #[arg(long)]
    no_split: bool,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    penalty: Penalty,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 5)]
    stability_window: usize,
    #[arg(long)]
    certify: bool,
    /// Write the flow file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a DOT drawing of the routed flow.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Number of sources.
    #[arg(long, default_value_t = 15)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Uniform edge capacity (default: k).
    #[arg(long)]
    capacity: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    instance: PathBuf,
    flow: PathBuf,
    #[command(flatten)]
    penalty: Penalty,
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(a: RunArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::parse(&read(p)?).with_context(|| format!("in {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    fn s<T: ToString>(v: &T) -> String {
        v.to_string()
    }
    let overrides: [(&str, Option<String>); 10] = [
        ("n", a.n.as_ref().map(s)),
        ("m", a.m.as_ref().map(s)),
        ("fractions", a.fractions.clone()),
        ("alpha", a.alpha.clone()),
        ("w", a.w.as_ref().map(s)),
        ("trials", a.trials.as_ref().map(s)),
        ("seed", a.seed.as_ref().map(s)),
        ("capacity", a.capacity.as_ref().map(s)),
        ("max_iters", a.max_iters.as_ref().map(s)),
        ("stability_window", a.stability_window.as_ref().map(s)),
    ];
    for (k, v) in overrides {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    if let Some(d) = a.out_dir {
        cfg.out_dir = d;
    }
    cfg.solver.certificate_check |= a.certify;
    cfg.split &= !a.no_split;
    cfg.validate()?;

    let records = run_experiment(&cfg)?;
    let summary = write_outputs(&cfg, &records, &cfg.out_dir)?;
    println!("{:>6} {:>5} {:>9} {:>9} {:>9} {:>8} {:>8} {:>9}", "k/n", "alpha", "method", "conv", "maxload", "jain", "T*", "dload");
    for r in &summary.rows {
        println!(
            "{:>6} {:>5} {:>9} {:>5}/{:<3} {:>9.3} {:>8.4} {:>8.2} {:>8.1}%",
            r.k_over_n,
            r.alpha,
            r.method,
            r.converged,
            r.trials,
            r.mean_max_load,
            r.mean_jain,
            r.mean_t_star,
            100.0 * r.load_reduction
        );
    }
    let lost: usize = summary.rows.iter().filter(|r| r.method != Method::MinCost).map(|r| r.trials - r.converged).sum();
    if lost > 0 {
        eprintln!("{lost} runs did not converge and are excluded from the means");
    }
    println!("results in {}", cfg.out_dir.display());
    Ok(())
}

fn solve_cmd(a: SolveArgs) -> Result<()> {
    let inst = format::parse_instance(&read(&a.instance)?)?;
    let pen = a.penalty.spec()?;
    let cfg = SolverConfig {
        max_iterations: a.max_iters,
        stability_window: a.stability_window,
        certificate_check: a.certify,
        record_trace: false,
    };
    let res = solve(&inst, &pen, &cfg)?;
    let loads: Vec<f64> = res.flow.loads(&inst).iter().map(|&y| y as f64).collect();
    eprintln!("converged: {} (t* = {}, {} iterations)", res.converged, res.t_star, res.iterations);
    eprintln!("objective: {}", objective_value(&inst, &pen, &res.flow));
    eprintln!("routing cost: {}", res.flow.total_cost(&inst));
    eprintln!("max load: {}", res.flow.max_load(&inst));
    if let Ok(j) = jain_index(&loads) {
        eprintln!("jain index: {j}");
    }
    if let Some(c) = res.certified_optimal {
        eprintln!("certified optimal: {c}");
    }
    write_or_print(a.out.as_ref(), &format::write_flow(&inst, &res.flow))?;
    if let Some(p) = &a.dot {
        fs::write(p, dot::to_dot(&inst, Some(&res.flow)))?;
    }
    Ok(())
}

fn gen(a: GenArgs) -> Result<()> {
    let p = GeometricParams {
        n: a.n,
        m: a.m,
        k: a.k,
        capacity: a.capacity,
        ..GeometricParams::default()
    };
    let inst = generate_geometric(&p, a.seed)?;
    write_or_print(a.out.as_ref(), &format::write_instance(&inst))?;
    if let Some(d) = &a.dot {
        fs::write(d, dot::to_dot(&inst, None))?;
    }
    Ok(())
}

fn certify_cmd(a: CertifyArgs) -> Result<bool> {
    let inst = format::parse_instance(&read(&a.instance)?)?;
    let flow = format::parse_flow(&inst, &read(&a.flow)?)?;
    if !flow.is_feasible(&inst) {
        bail!("flow violates conservation or capacity");
    }
    let ok = certify(&inst, &a.penalty.spec()?, &flow)?;
    println!("{}", if ok { "optimal" } else { "not optimal" });
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::Run(a) => run(a).map(|_| true),
        Cmd::Solve(a) => solve_cmd(a).map(|_| true),
        Cmd::Gen(a) => gen(a).map(|_| true),
        Cmd::Certify(a) => certify_cmd(a),
    };
    match out {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
