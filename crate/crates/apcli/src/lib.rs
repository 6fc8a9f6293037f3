//! Configuration, persistence and experiment runners for `apfb`.

pub mod config;
pub mod fieldio;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_overrides, RunConfig};
pub use fieldio::{read_field, write_field, FieldData, FieldIoError};
pub use run::{run, CliError, Outcome};

/// Parses `args` (without the program name) and runs; returns the exit code.
pub fn main_with(args: &[String]) -> i32 {
    use clap::Parser;
    let cli = match Cli::try_parse_from(std::iter::once("apfb".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { run::EXIT_CONFIG } else { run::EXIT_OK };
        }
    };
    let cfg = parse_overrides(&cli.overrides).and_then(|mut o| {
        if let Some(c) = &cli.command {
            o.insert(0, ("command".to_string(), c.clone()));
        }
        parse_config(cli.config.as_deref(), &o)
    });
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return run::EXIT_CONFIG;
        }
    };
    match run(&cfg) {
        Ok(out) => {
            if !out.converged {
                eprintln!("did not converge; artifacts written to {}", cfg.output.display());
            }
            out.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[derive(clap::Parser, Debug)]
#[command(name = "apfb", version, about = "Alt-Phillips free boundary experiments")]
#[command(after_help = "Commands: params, minimize, ode, weiss, blowup, barrier, linearized, gamma.\nAny config key can be overridden with --key value.")]
struct Cli {
    /// Subcommand; may also be given as `command=` in the config file.
    command: Option<String>,
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// `--key value` overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}
