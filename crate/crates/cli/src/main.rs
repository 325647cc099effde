use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use einflow::komar::{komar_energy_surface, SphereOrientation};
use einflow::runner::{self, Check, KomarConfig, RunConfig};
use einflow::scenarios::describe_builtins;
use einflow::Error;

#[derive(Parser, Debug)]
#[command(name = "einflow", version, about = "Residual checks for Killing fields on curved spacetimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a set of checks and write report.json / report.csv.
    Verify(VerifyArgs),
    /// List built-in scenarios with their parameters and fields.
    ListScenarios,
    /// Komar energy on a family of spheres, extrapolated to infinity.
    Komar(KomarArgs),
}

#[derive(clap::Args, Debug)]
struct ScenarioArgs {
    #[arg(long, default_value = "minkowski")]
    scenario: String,
    /// Scenario JSON file; overrides --scenario.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// Scenario parameter, e.g. `m=2`.
    #[arg(long = "param", value_parser = parse_key_value)]
    params: Vec<(String, f64)>,
    #[arg(long, default_value = "t")]
    killing: String,
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Full run configuration as JSON; other flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "killing")]
    checks: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Tolerance override, e.g. `killing=1e-6`.
    #[arg(long = "tol", value_parser = parse_key_value)]
    tolerances: Vec<(String, f64)>,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    radii: Vec<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct KomarArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    radii: Vec<f64>,
    #[arg(long, default_value_t = 32)]
    n_theta: usize,
    #[arg(long, default_value_t = 64)]
    n_phi: usize,
    /// Use the outward (+dθ∧dφ) sphere orientation.
    #[arg(long)]
    outward: bool,
}

fn parse_key_value(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad number in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn base_config(args: &ScenarioArgs, checks: Vec<Check>) -> RunConfig {
    let mut cfg = RunConfig::new(&args.scenario, &args.killing, checks);
    cfg.params = args.params.iter().cloned().collect::<BTreeMap<_, _>>();
    cfg.scenario_file = args.scenario_file.clone();
    cfg
}

fn verify(args: VerifyArgs) -> Result<i32, Error> {
    let cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => {
            let checks = args.checks.iter().map(|c| c.parse()).collect::<Result<Vec<Check>, _>>()?;
            let mut cfg = base_config(&args.scenario, checks);
            cfg.sample.seed = args.seed;
            cfg.sample.count = args.samples;
            cfg.tolerances = args.tolerances.iter().cloned().collect();
            cfg.komar.radii = args.radii.clone();
            cfg
        }
    };
    let outcome = runner::run_checks(&cfg)?;
    for r in &outcome.reports {
        println!(
            "{:<8} {:<28} max={:.3e} tol={:.1e}{}",
            format!("{:?}", r.status).to_uppercase(),
            r.check_id,
            r.max_residual,
            r.tolerance,
            r.value.map(|v| format!(" value={v:.10}")).unwrap_or_default()
        );
        for n in &r.notes {
            eprintln!("  note [{}]: {n}", r.check_id);
        }
    }
    runner::write_outputs(&cfg.output, &outcome.reports)?;
    if let Some(dir) = &args.out {
        runner::write_to_dir(dir, &outcome.reports)?;
    }
    Ok(outcome.exit_code)
}

fn komar(args: KomarArgs) -> Result<i32, Error> {
    let cfg = base_config(&args.scenario, vec![Check::KomarEnergy]);
    let s = runner::load_config_scenario(&cfg)?;
    let k = s.killing_field(&cfg.killing)?;
    let q = KomarConfig {
        radii: args.radii,
        n_theta: args.n_theta,
        n_phi: args.n_phi,
        orientation: if args.outward { SphereOrientation::Outward } else { SphereOrientation::Inward },
    }
    .quadrature();
    let e = komar_energy_surface(&s, &k, &q)?;
    println!("# orientation: {}", e.orientation.label());
    println!("{:>14}  {:>24}", "radius", "energy");
    for row in &e.per_radius {
        println!("{:>14.6}  {:>24.16e}", row.radius, row.estimate);
    }
    println!("extrapolated {:.16e}", e.value);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::ListScenarios => {
            for line in describe_builtins() {
                println!("{line}");
            }
            Ok(0)
        }
        Command::Komar(a) => komar(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
