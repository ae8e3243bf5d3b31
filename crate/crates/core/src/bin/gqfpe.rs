use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gqfpe::commands::{execute, Command};
use gqfpe::config::{parse_config_as, Format, RunConfig};
use gqfpe::Error;

#[derive(Parser)]
#[command(name = "gqfpe", version, about = "Bath kernels, Dekker coefficients and density-matrix propagation")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Tabulate the eight memory kernels on [0, t_max].
    Kernels(Common),
    /// Coefficient tracks and positivity reports for one or more beta_s.
    Coeffs(Common),
    /// Coefficient tracks for `gamma_s = 0.1`, `beta_s = 0.5, 1, 5` with sign summaries.
    Figure1(Common),
    /// Propagate the reduced density matrix.
    Propagate(Common),
    /// Exact Gaussian dynamics with a discretized bath.
    Oracle(Common),
    /// Propagate and oracle on the same parameters, with difference norms.
    Compare(Common),
    /// Wigner function of a prepared or propagated state.
    Wigner(Common),
}

#[derive(Args)]
struct Common {
    /// TOML or JSON configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Directory for all output files.
    #[arg(long)]
    out_dir: PathBuf,
    /// Override `key=value` in this command's section (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_s: Option<String>,
    /// One value or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    beta_s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    steps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n_basis: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n_modes: Option<String>,
    #[arg(long)]
    method: Option<String>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>, Error> {
        let mut pairs = Vec::new();
        let named = [
            ("gamma_s", &self.gamma_s),
            ("beta_s", &self.beta_s),
            ("t_max", &self.t_max),
            ("t_end", &self.t_end),
            ("steps", &self.steps),
            ("dt", &self.dt),
            ("n_basis", &self.n_basis),
            ("n_modes", &self.n_modes),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                pairs.push((k.to_string(), v.clone()));
            }
        }
        if let Some(m) = &self.method {
            pairs.push(("method".into(), format!("\"{m}\"")));
        }
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config { line: None, message: format!("--set expects KEY=VALUE, got `{s}`") })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(pairs)
    }
}

fn load(common: &Common, command: Command) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config { line: None, message: format!("{}: {e}", path.display()) })?;
            let format = match path.extension().and_then(|e| e.to_str()) {
                Some("json") => Format::Json,
                Some("toml") => Format::Toml,
                _ => Format::detect(&text),
            };
            parse_config_as(&text, format)?
        }
        None => RunConfig::default(),
    };
    cfg.apply_overrides(command.name(), &common.overrides()?)?;
    cfg.validate(None, Format::Toml)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Sub::Kernels(c) => (Command::Kernels, c),
        Sub::Coeffs(c) => (Command::Coeffs, c),
        Sub::Figure1(c) => (Command::Figure1, c),
        Sub::Propagate(c) => (Command::Propagate, c),
        Sub::Oracle(c) => (Command::Oracle, c),
        Sub::Compare(c) => (Command::Compare, c),
        Sub::Wigner(c) => (Command::Wigner, c),
    };
    let result = load(common, command).and_then(|cfg| execute(command, &cfg, &common.out_dir));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gqfpe {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
