#![allow(clippy::result_large_err)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hofer_bounds::cli::{self, CliError, Report, RunConfig};

#[derive(Parser)]
#[command(name = "hofer-bounds", version, about = "Quasi-morphism bounds for Lagrangian Hofer distances on S2 x S2")]
struct Cli {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(multiple = false)]
struct Format {
    /// Emit the JSON report (default).
    #[arg(long, global = true)]
    json: bool,
    /// Emit a human-readable report.
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Potential, critical points, idempotents and the defect bound.
    Defect {
        /// Bulk parameter in (0, 1/2), e.g. 1/4.
        #[arg(long)]
        tau: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q_sign: Option<i8>,
        /// Toric fixture JSON replacing the built-in S2 x S2 fixture.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long)]
        cutoff: Option<String>,
    },
    /// Embedding, torus and containment checks with residuals.
    GeometryCheck {
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        tau: Option<String>,
        /// Torus grid resolution per angle.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Lower bounds for the plateau family at the given heights.
    DiameterTable {
        #[arg(long)]
        delta: Option<String>,
        /// Bulk parameter for the toric defect.
        #[arg(long)]
        tau: Option<String>,
        #[arg(long, num_args = 1.., required = true)]
        h_values: Vec<f64>,
    },
    /// Certificate for the distance between two functions' images.
    PhiBounds {
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
}

fn run(args: Cli) -> Result<Report, CliError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let delta = |d: &Option<String>, config: &RunConfig| d.as_deref().map_or(Ok(config.delta), cli::parse_real);
    match args.command {
        Command::Defect { tau, q_sign, fixture, cutoff } => {
            if let Some(t) = tau {
                config.tau = cli::parse_exact(&t)?;
            }
            if let Some(c) = cutoff {
                config.cutoff = cli::parse_exact(&c)?;
            }
            config.q_sign = q_sign.unwrap_or(config.q_sign);
            config.fixture = fixture.or(config.fixture);
            cli::cmd_defect(&config.tau, config.q_sign, &config)
        }
        Command::GeometryCheck { delta: d, tau, grid } => {
            if let Some(n) = grid {
                config.torus_grid = (n, n);
            }
            let tau = match tau {
                Some(t) => cli::parse_real(&t)?,
                None => hofer_bounds::novikov::Exponent::new(config.tau.clone()).to_f64(),
            };
            cli::cmd_geometry_check(delta(&d, &config)?, tau, &config)
        }
        Command::DiameterTable { delta: d, tau, h_values } => {
            if let Some(t) = tau {
                config.tau = cli::parse_exact(&t)?;
            }
            cli::cmd_diameter_table(delta(&d, &config)?, &h_values, &config)
        }
        Command::PhiBounds { delta: d, f, g } => {
            let (f, g) = (cli::load_sample(&f)?, cli::load_sample(&g)?);
            cli::cmd_phi_bounds(delta(&d, &config)?, &f, &g, &config)
        }
    }
    .and_then(|report| {
        if let Some(path) = &config.output {
            std::fs::write(path, report.to_json()).map_err(|source| CliError::Io { path: path.clone(), source })?;
        }
        Ok(report)
    })
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let text = args.format.text;
    match run(args) {
        Ok(report) => {
            println!("{}", if text { report.to_text() } else { report.to_json() });
            if !report.passed {
                eprintln!("{}", serde_json::json!({ "failures": report.failures }));
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
