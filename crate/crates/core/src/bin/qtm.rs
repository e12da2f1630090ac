use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qtm_core::config::{parse_values, EngineConfig};
use qtm_core::experiment::{mixed_fuel_table, run_single, run_sweep, therm_table, zeno_table, RESULT_HEADER};
use qtm_core::mixed_fuel::{breakeven_mixedness, classical_stationary_mixedness, stationary_mixedness};
use qtm_core::output::{emit_csv, Table};
use qtm_core::sampling::sample_selective;
use qtm_core::{Error, MachineSpec};

#[derive(Parser)]
#[command(name = "qtm", version, about = "Clock-driven quantum engine: cycle work, sweeps and limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration.
    Run(Common),
    /// Evaluate the cross product of `l_values` and `dt_values`.
    Sweep(Common),
    /// Zeno-limit work for each `l`.
    Zeno(Common),
    /// Ideal work under sub-unit or bosonic thermalisation.
    Therm {
        #[command(flatten)]
        common: Common,
        /// Comma list of sub-unit counts.
        #[arg(long, default_value = "1,2,5,10")]
        n_beta_values: String,
        /// Comma list of equilibration times; `inf` selects instant resets.
        #[arg(long, default_value = "inf")]
        tau_beta_values: String,
    },
    /// Mixed-input statistics and the break-even mixedness.
    MixedFuel {
        #[command(flatten)]
        common: Common,
        /// Comma list or start:stop:step of input mixedness values.
        #[arg(long, default_value = "0,0.3,0.454,0.6,0.666666666667,1")]
        q_values: String,
    },
    /// Monte Carlo sampling of selective trajectories (demonstration only).
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        cycles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// INI file with `key = value` settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    tau_tilde: Option<String>,
    #[arg(long)]
    tau_prime: Option<String>,
    /// selective | unselective | zeno
    #[arg(long)]
    mode: Option<String>,
    /// instant | subunit | bosonic
    #[arg(long)]
    therm_model: Option<String>,
    #[arg(long)]
    n_beta: Option<String>,
    #[arg(long)]
    tau_beta: Option<String>,
    /// nominal | energy-balance
    #[arg(long)]
    flip: Option<String>,
    /// trace-preserving | printed
    #[arg(long)]
    bosonic_form: Option<String>,
    /// Comma list or start:stop:step.
    #[arg(long)]
    l_values: Option<String>,
    /// Comma list or start:stop:step.
    #[arg(long)]
    dt_values: Option<String>,
}

impl Common {
    fn load(&self) -> Result<EngineConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => EngineConfig::from_ini_file(p)?,
            None => EngineConfig::default(),
        };
        let overrides = [
            ("l", &self.l),
            ("dt", &self.dt),
            ("beta", &self.beta),
            ("tau_tilde", &self.tau_tilde),
            ("tau_prime", &self.tau_prime),
            ("mode", &self.mode),
            ("therm_model", &self.therm_model),
            ("n_beta", &self.n_beta),
            ("tau_beta", &self.tau_beta),
            ("flip", &self.flip),
            ("bosonic_form", &self.bosonic_form),
            ("l_values", &self.l_values),
            ("dt_values", &self.dt_values),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }

    fn write(&self, table: &Table) -> Result<(), Error> {
        match &self.out {
            Some(path) => emit_csv(table, path),
            None => table.write_to(std::io::stdout().lock()),
        }
    }
}

fn config_error(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run(common) => {
            let row = run_single(&common.load()?)?;
            let mut table = Table::new(&RESULT_HEADER);
            table.push(row.cells());
            common.write(&table)?;
        }
        Command::Sweep(common) => {
            let cfg = common.load()?;
            let outcome = run_sweep(&cfg);
            common.write(&outcome.table)?;
            if !outcome.failures.is_empty() {
                for (l, dt, e) in &outcome.failures {
                    eprintln!("row l={l} dt={dt} failed: {e}");
                }
                return Ok(ExitCode::from(2));
            }
        }
        Command::Zeno(common) => {
            common.write(&zeno_table(&common.load()?)?)?;
        }
        Command::Therm { common, n_beta_values, tau_beta_values } => {
            let cfg = common.load()?;
            let n_betas = parse_values("n_beta_values", &n_beta_values)?
                .into_iter()
                .map(|x| if x >= 1.0 && x.fract() == 0.0 { Ok(x as usize) } else { Err(Error::InvalidParameter { name: "n_beta_values", reason: format!("{x} is not a positive integer") }) })
                .collect::<Result<Vec<_>, _>>()?;
            let taus = tau_beta_values
                .split(',')
                .map(|s| match s.trim() {
                    "inf" | "instant" => Ok(None),
                    v => v.parse::<f64>().map(Some).map_err(|_| Error::InvalidParameter {
                        name: "tau_beta_values",
                        reason: format!("`{v}` is not a number"),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            common.write(&therm_table(&cfg, &n_betas, &taus)?)?;
        }
        Command::MixedFuel { common, q_values } => {
            let cfg = common.load()?;
            let qs = parse_values("q_values", &q_values)?;
            let spec = MachineSpec::spin(cfg.spin()?);
            let q_star = stationary_mixedness(&spec, &qtm_core::experiment::cycle_params(&cfg))?;
            eprintln!(
                "breakeven q' = {:.6}; stationary q* = {:.6} (classical limit {:.6})",
                breakeven_mixedness(),
                q_star,
                classical_stationary_mixedness()
            );
            common.write(&mixed_fuel_table(&cfg, &qs)?)?;
        }
        Command::Sample { common, cycles, seed } => {
            let cfg = common.load()?;
            cfg.validate()?;
            let spec = MachineSpec::spin(cfg.spin()?);
            let s = sample_selective(&spec, &qtm_core::experiment::cycle_params(&cfg), cycles, seed)?;
            println!(
                "cycles={} mean_work={:.6} std_error={:.6} completed={:.4} exact={:.6}",
                s.cycles, s.mean_work, s.std_error, s.completed_fraction, s.exact_work
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => config_error(e),
    }
}
