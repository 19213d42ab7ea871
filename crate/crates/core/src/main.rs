use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use carnot_core::cli::{self, CliError, Report};
use carnot_core::normalize::Rule;

#[derive(Parser)]
#[command(name = "carnot", version, about = "Canonical connections on sub-Riemannian manifolds with constant symbol")]
struct Args {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an algebra; report g_0, the induced gram and Tanaka rigidity.
    Check { algebra: PathBuf },
    /// Dimensions and identities of the complex in form degree k.
    Complex {
        algebra: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Solve the degree-one normalisation for a reference curvature.
    Normalize {
        algebra: PathBuf,
        kappa: PathBuf,
        #[arg(long, value_enum, default_value_t = RuleArg::Projected)]
        rule: RuleArg,
    },
    /// Canonical connection of a polynomial frame at its base point.
    Frame { frame: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Literal,
    Projected,
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = report.to_json();
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (name, result) = match &args.command {
        Command::Check { algebra } => ("check", cli::cmd_check(algebra)),
        Command::Complex { algebra, k } => ("complex", cli::cmd_complex(algebra, *k)),
        Command::Normalize { algebra, kappa, rule } => {
            let rule = match rule {
                RuleArg::Literal => Rule::Literal,
                RuleArg::Projected => Rule::Projected,
            };
            ("normalize", cli::cmd_normalize(algebra, kappa, rule))
        }
        Command::Frame { frame } => ("frame", cli::cmd_frame(frame)),
    };
    let (report, code) = match result {
        Ok(r) => (r, 0),
        Err(e) => {
            eprintln!("error: {e}");
            (e.report(name), e.exit_code())
        }
    };
    if let Err(e) = emit(&report, args.out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
