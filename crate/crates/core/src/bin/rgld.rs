use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rgld_core::harness::checks::Checker;
use rgld_core::harness::{
    is_preset_name, preset_by_name, run_experiment, ConfigFile, ExperimentSpec, Overrides, SeedList,
};
use rgld_core::measure::build_oracle;
use rgld_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rgld",
    version,
    about = "Reflected gradient Langevin dynamics experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset (gm2d, gm2d-pgld-vs-rgld, gm2d-beta-sweep, gm2d-eta-sweep,
    /// gibbs1d, rosenbrock:D, rastrigin:D) or a TOML config file.
    Run {
        target: String,
        /// Seeds as `a..b` (inclusive) or `a,b,c`.
        #[arg(long)]
        seeds: Option<SeedList>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Export the quadrature Gibbs oracle of a preset as CSV.
    Oracle {
        preset: String,
        #[arg(long, default_value_t = 256)]
        cells: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full invariant suite.
    Check {
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn load_specs(target: &str) -> Result<Vec<ExperimentSpec>> {
    if is_preset_name(target) {
        return preset_by_name(target);
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(Error::config(
            "target",
            format!("`{target}` is neither a preset nor a file"),
        ));
    }
    ConfigFile::parse(&std::fs::read_to_string(path)?)?.into_specs()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            target,
            seeds,
            eta,
            beta,
            steps,
            out,
            workers,
        } => {
            let overrides = Overrides {
                seeds: seeds.map(|s| s.0),
                eta,
                beta,
                steps,
                output: out,
                workers,
            };
            for mut spec in load_specs(&target)? {
                overrides.apply(&mut spec);
                let (sim, files) = run_experiment(&spec)?;
                for method in &spec.methods {
                    let errs = sim.final_errors(*method);
                    eprintln!(
                        "{} {}: median final error {:.6e} over {} seeds",
                        spec.name,
                        method.as_str(),
                        rgld_core::harness::median(&errs),
                        errs.len()
                    );
                }
                if let Some(tv) = &sim.tv_curve {
                    for (p, v) in tv {
                        eprintln!("{} tv after {p} iterates: {v:.6}", spec.name);
                    }
                }
                if sim.total_fallbacks() > 0 {
                    eprintln!(
                        "{}: {} projection fallbacks",
                        spec.name,
                        sim.total_fallbacks()
                    );
                }
                eprintln!(
                    "{}: wrote {} files to {}",
                    spec.name,
                    files.len(),
                    spec.output.display()
                );
            }
            Ok(true)
        }
        Command::Oracle { preset, cells, out } => {
            for spec in preset_by_name(&preset)? {
                let p = spec.prepare()?;
                let oracle = build_oracle(&p.objective, &p.domain, spec.beta, cells)?;
                let dir = out.clone().unwrap_or_else(|| spec.output.clone());
                std::fs::create_dir_all(&dir)?;
                let path = dir.join(format!("{}_oracle.csv", spec.name));
                oracle.write_csv(None, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
                eprintln!(
                    "{}: log Z = {:.6}, E f = {:.6}, wrote {}",
                    spec.name,
                    oracle.log_normalizing_constant(),
                    oracle.mean_f(),
                    path.display()
                );
            }
            Ok(true)
        }
        Command::Check { workers } => {
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let scratch = std::env::temp_dir().join(format!("rgld-check-{}", std::process::id()));
            let outcomes = Checker::new(workers).run_all(&scratch);
            let _ = std::fs::remove_dir_all(&scratch);
            for o in &outcomes {
                println!("{o}");
            }
            Ok(outcomes.iter().all(|o| o.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
