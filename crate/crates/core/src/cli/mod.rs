//! Command-line front end: scenario configs in, CSV tables out.
//!
//! Exit codes: 0 success, 1 compute or output failure, 2 config or usage
//! error.

pub mod config;
pub mod runner;
pub mod selftest;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{load_config, parse_config, ConfigError, Scenario, ScenarioKind};
pub use runner::{compute, run_scenario, RunError, RunReport};
pub use table::Table;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qsource", version, about = "Matter waves from quantum sources in uniform fields")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Reserved; nothing in qsource is random.
    #[arg(long, global = true, value_name = "SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scenario described by a TOML config.
    Run { config: PathBuf },
    /// Run the oracle checks and print one JSON line per check.
    Selftest,
    /// List the scenarios; with --defaults also print their default configs.
    ListScenarios {
        #[arg(long)]
        defaults: bool,
    },
}

/// Parses `args` (program name first) and runs the command, writing to the
/// given streams. Returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            let _ = writeln!(stderr, "error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker threads: {e}");
            return EXIT_COMPUTE;
        }
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = pool.install(|| dispatch(&cli, &mut out, &mut err));
    let _ = stdout.write_all(&out);
    let _ = stderr.write_all(&err);
    code
}

fn dispatch(cli: &Cli, stdout: &mut Vec<u8>, stderr: &mut Vec<u8>) -> i32 {
    match &cli.command {
        Command::ListScenarios { defaults } => {
            for kind in ScenarioKind::ALL {
                let _ = writeln!(stdout, "{:<14} {}", kind.name(), kind.summary());
                if *defaults {
                    let _ = writeln!(stdout, "\n{}", kind.default_toml());
                }
            }
            EXIT_OK
        }
        Command::Selftest => {
            let report = selftest::selftest();
            for c in &report {
                let _ = writeln!(stdout, "{}", serde_json::to_string(c).expect("plain struct serializes"));
            }
            let failed = report.iter().filter(|c| !c.pass).count();
            let _ = writeln!(
                stdout,
                "{}",
                serde_json::json!({"summary": "selftest", "passed": report.len() - failed, "failed": failed})
            );
            if failed == 0 {
                EXIT_OK
            } else {
                EXIT_COMPUTE
            }
        }
        Command::Run { config } => {
            let scenario = match load_config(config) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(stderr, "config error in {}: {e}", config.display());
                    return EXIT_CONFIG;
                }
            };
            match run_scenario(&scenario, &cli.out) {
                Ok(report) => {
                    for f in &report.files {
                        let _ = writeln!(stdout, "wrote {}", f.display());
                    }
                    for (k, v) in &report.summary {
                        let _ = writeln!(stdout, "  {k} = {v}");
                    }
                    EXIT_OK
                }
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    EXIT_COMPUTE
                }
            }
        }
    }
}
