//! Library side of the `ncvem` command-line tool: configuration parsing
//! and command execution, kept separate from `main` for testing.

mod config;
mod run;

pub use config::{parse_config, resolve, Command, ConfigError, MeshSource, Options, RunConfig};
pub use run::{run, RunError, RunSummary};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status when solving or writing an artifact failed.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for invalid configuration.
pub const EXIT_CONFIG: i32 = 2;

/// Parses `args`, runs the command and returns the process exit code.
/// The report goes to stdout, diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(ConfigError::Clap(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    log::info!("running {} with {config:?}", config.command.name());
    match run(&config) {
        Ok(summary) => {
            print!("{}", summary.report);
            for a in &summary.artifacts {
                eprintln!("wrote {}", a.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
