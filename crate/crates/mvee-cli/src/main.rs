use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use mvee_cli::commands::{self, Ctx};
use mvee_cli::selftest;

/// Minimum-volume circumscribing ellipsoids: solvers, baselines, and the
/// experiment battery.
#[derive(Parser)]
#[command(name = "mvee", version, about)]
struct Cli {
    /// Worker threads for instance-level parallel maps.
    #[arg(long, global = true, default_value_t = 0)]
    parallel: usize,
    /// Multiplier on assertion tolerances (1.0 = as specified).
    #[arg(long, global = true, default_value_t = 1.0)]
    tol: f64,
    /// Output file (or directory for `reach`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one JSON set (polytope or polytope + quadratic rows).
    Mve {
        /// Input JSON: {"S": [[..]], "t": [..]} plus optional "quads".
        input: PathBuf,
        /// cop | smvie | sproc | ktt | exact
        #[arg(long, default_value = "cop")]
        method: String,
    },
    /// Radius comparison over random cut-box polytopes.
    RandomPolytopes {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Chipped-hypercube radius table against the closed forms.
    Chipped {
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
    },
    /// Decision-rule studies.
    Dro {
        #[command(subcommand)]
        what: DroCmd,
    },
    /// Reachable-set covers for the two-state example system.
    Reach {
        #[arg(long, default_value_t = 8)]
        horizon: usize,
        /// Sampled control sequences per step for the containment check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Full invariant battery; exit code 0 iff everything passes.
    Selftest {
        /// Directory overriding the compiled-in golden files.
        #[arg(long)]
        goldens: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DroCmd {
    /// Closed-form bound curves of the two analytic instances.
    Examples,
    /// Risk-averse inventory ablation table.
    Inventory {
        #[arg(long, default_value_t = 3)]
        products: usize,
        #[arg(long, default_value_t = 2)]
        cells: usize,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = if cli.parallel == 0 {
        std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
    } else {
        cli.parallel
    };
    let ctx = Ctx { threads, tol_scale: cli.tol, out: cli.out };
    let outcome = match cli.cmd {
        Cmd::Mve { input, method } => commands::cmd_mve(&ctx, &input, &method),
        Cmd::RandomPolytopes { k, m, count, seed } => {
            commands::cmd_random_polytopes(&ctx, k, m, count, seed)
        }
        Cmd::Chipped { k_min, k_max } => commands::cmd_chipped(&ctx, k_min, k_max),
        Cmd::Dro { what } => match what {
            DroCmd::Examples => commands::cmd_dro_examples(&ctx),
            DroCmd::Inventory { products, cells, seeds, seed } => {
                commands::cmd_dro_inventory(&ctx, products, cells, seeds, seed)
            }
        },
        Cmd::Reach { horizon, samples } => commands::cmd_reach(&ctx, horizon, samples),
        Cmd::Selftest { goldens } => Ok(selftest::run(cli.tol, goldens.as_deref())),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertions failed");
            ExitCode::from(1)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
