use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use infmax_core::harness::{self, CommandOutput, HarnessError, RunConfig, VerifyKind};
use infmax_core::model::ExportFormat;
use infmax_core::{DiffusionModel, PresolveLevel};

/// Exact influence maximization on sampled live-arc scenarios.
#[derive(Debug, Parser)]
#[command(name = "infmax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample or enumerate scenarios and store them with a manifest.
    Sample(Common),
    /// Report reduction statistics of the presolve pipeline.
    Presolve {
        #[command(flatten)]
        common: Common,
        /// Repetitions with consecutive seeds; adds a shifted-geometric-mean row.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
    /// Solve with Benders decomposition.
    Solve(Common),
    /// Exhaustive seed-set search.
    Oracle(Common),
    /// Run a theory check: theorem1, prop1 or theorem2.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<VerifyKind>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Complete-graph size for theorem2.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Write the reduced model in LP or MPS format.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "lp")]
        format: ExportFormat,
    },
}

/// Run settings. Flags override values from `--config`.
#[derive(Debug, Args)]
struct Common {
    /// TOML or JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge-list file.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Scenario container written by `sample`.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Read every edge in both directions.
    #[arg(long)]
    undirected: bool,
    #[arg(long)]
    model: Option<DiffusionModel>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Number of sampled scenarios.
    #[arg(long)]
    omega: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enumerate all scenarios instead of sampling.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    presolve: Option<PresolveLevel>,
    #[arg(long)]
    max_reac_size: Option<usize>,
    /// Reachability cache budget per scenario, in bytes.
    #[arg(long)]
    mem_limit_per_scen: Option<u64>,
    /// Largest number of seed sets the enumeration master may visit.
    #[arg(long)]
    master_cap: Option<u64>,
    /// Output directory.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, HarnessError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.network {
            c.network = Some(v.clone());
        }
        if let Some(v) = &self.scenarios {
            c.scenarios = Some(v.clone());
        }
        c.undirected |= self.undirected;
        c.exhaustive |= self.exhaustive;
        if let Some(v) = self.model {
            c.model = v;
        }
        c.p = self.p.or(c.p);
        c.k = self.k.unwrap_or(c.k);
        c.omega_count = self.omega.unwrap_or(c.omega_count);
        c.seed = self.seed.or(c.seed);
        c.presolve = self.presolve.unwrap_or(c.presolve);
        c.max_reac_size = self.max_reac_size.or(c.max_reac_size);
        c.mem_limit_per_scen = self.mem_limit_per_scen.or(c.mem_limit_per_scen);
        c.master_cap = self.master_cap.unwrap_or(c.master_cap);
        if let Some(v) = &self.output {
            c.output = Some(v.clone());
        }
        Ok(c)
    }
}

fn execute(command: Command) -> Result<(CommandOutput, RunConfig), HarnessError> {
    match command {
        Command::Sample(common) => {
            let c = common.resolve()?;
            Ok((harness::cmd_sample(&c)?, c))
        }
        Command::Presolve { common, repeats } => {
            let c = common.resolve()?;
            Ok((harness::cmd_presolve(&c, repeats)?, c))
        }
        Command::Solve(common) => {
            let c = common.resolve()?;
            Ok((harness::cmd_solve(&c)?, c))
        }
        Command::Oracle(common) => {
            let c = common.resolve()?;
            Ok((harness::cmd_oracle(&c)?, c))
        }
        Command::Verify { common, kind, instances, trials, n } => {
            let mut c = common.resolve()?;
            c.verify.kind = kind.unwrap_or(c.verify.kind);
            c.verify.instances = instances.unwrap_or(c.verify.instances);
            c.verify.trials = trials.unwrap_or(c.verify.trials);
            c.verify.n = n.unwrap_or(c.verify.n);
            Ok((harness::cmd_verify(&c)?, c))
        }
        Command::Export { common, format } => {
            let c = common.resolve()?;
            Ok((harness::cmd_export(&c, format)?, c))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (output, config) = execute(cli.command)?;
    let dir = config.output.unwrap_or_else(|| PathBuf::from("."));
    let written = output.write_to(&dir).with_context(|| format!("writing outputs to {}", dir.display()))?;
    println!("{}", output.summary.trim_end());
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(output.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
