//! The `sns` command line.
//!
//! Subcommands `landau`, `certify`, `heat` and `solve` each print one CSV
//! table. The table starts with `#` lines giving the program version, a
//! SHA-256 of the effective configuration and the configuration itself.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
//! 3 iteration not converged, 4 smallness condition violated.

pub mod config;
pub mod run;

pub use config::{parse_args, parse_config_text, ArgsError, ConfigError, Locus, RunConfig};
pub use run::{execute, RunError};

/// Parses `args` (without the program name), runs, and returns the exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let cfg = match parse_args(args) {
        Ok(cfg) => cfg,
        Err(ArgsError::Display(text)) => {
            print!("{text}");
            return 0;
        }
        Err(ArgsError::Config(e)) => {
            eprint!("{e}");
            return RunError::Config(e).exit_code();
        }
    };
    let out_given = match &cfg.command {
        config::Command::Landau(a) => a.out.is_some(),
        config::Command::Certify(a) => a.out.is_some(),
        config::Command::Heat(a) => a.out.is_some(),
        config::Command::Solve(a) => a.report.is_some(),
    };
    match execute(&cfg) {
        Ok(text) => {
            if !out_given {
                print!("{text}");
            }
            0
        }
        Err(e) => {
            if let (RunError::NotConverged { csv, .. }, false) = (&e, out_given) {
                print!("{csv}");
            }
            eprintln!("sns: {e}");
            e.exit_code()
        }
    }
}
