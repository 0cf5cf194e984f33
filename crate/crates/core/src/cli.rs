//! Command-line front end: `simulate`, `sweep` and `fixtures`.
//!
//! Human-readable summaries go to stdout; traces, CSV and JSON only to the
//! files named by flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::coding::DEFAULT_PAYLOAD_LEN;
use crate::error::{Error, Result};
use crate::experiment::{self, SweepConfig};
use crate::sim::{self, LossModel, Scheme, SimConfig};
use crate::topology::Topology;

pub const THREADS_ENV: &str = "NCSYNC_THREADS";

/// Stream coordinate for the payload store of a single `simulate` run.
#[derive(Debug, Parser)]
#[command(
    name = "ncsync",
    version,
    about = "All-to-all broadcast synchronization simulator with XOR network coding",
    after_help = "Environment:\n  NCSYNC_THREADS  maximum worker threads for `sweep` (default: all cores)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one synchronization on a topology file and print a summary.
    Simulate {
        /// Topology JSON: {"n", "edges", "positions"}.
        #[arg(long, value_name = "FILE")]
        topology: PathBuf,
        /// u-dbs, c-dbs or c-dbs-ns.
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        /// Per-hop packet error rate in [0, 1].
        #[arg(long, value_name = "FLOAT", value_parser = parse_probability, default_value = "0")]
        pe: f64,
        #[arg(long, value_name = "INT", default_value_t = 0)]
        seed: u64,
        /// per-broadcast (one draw per transmission) or per-receiver.
        #[arg(long, value_name = "MODEL", value_parser = parse_loss, default_value = "per-broadcast")]
        loss: LossModel,
        /// Payload bytes per block.
        #[arg(long, value_name = "BYTES", default_value_t = DEFAULT_PAYLOAD_LEN)]
        payload_len: usize,
        /// Slot budget (default 10 * n^2).
        #[arg(long, value_name = "INT")]
        max_slots: Option<u32>,
        /// Write the per-slot event trace as JSON lines.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Run a Monte Carlo sweep from a TOML or JSON config and write CSV.
    Sweep {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Also write the records as JSON.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Write the built-in fixture topologies and an example sweep config.
    Fixtures {
        #[arg(long, value_name = "PATH", default_value = ".")]
        out: PathBuf,
    },
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("probability must lie in [0, 1], got {v}"))
    }
}

fn parse_loss(s: &str) -> std::result::Result<LossModel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code: 0 on success, 2 on usage errors, 1 otherwise.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(CliError::Run(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

fn write_out(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|e| CliError::Run(Error::io("<stdout>", e)))
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Simulate {
            topology,
            scheme,
            pe,
            seed,
            loss,
            payload_len,
            max_slots,
            trace,
        } => {
            let t = Topology::load(&topology)?;
            let n = t.node_count();
            let mut cfg = SimConfig::new(scheme, n, pe, seed);
            cfg.loss = loss;
            cfg.payload_len = payload_len;
            if let Some(m) = max_slots {
                cfg.max_slots = m;
            }
            let result = sim::run_seeded(&t, cfg)?;
            if let Some(path) = trace {
                write_trace_file(&path, &result.events)?;
            }
            write_out(
                out,
                format_args!("slots={} converged={}", result.slots, result.converged),
            )?;
            write_out(out, format_args!("op_count={}", result.op_count))?;
        }
        Command::Sweep {
            config,
            out: csv,
            json,
        } => {
            let cfg = SweepConfig::load(&config)?;
            let threads = threads_from_env()?;
            let report = experiment::run_sweep(&cfg, threads)?;
            experiment::write_csv(&report.records, &csv)?;
            if let Some(path) = json {
                experiment::write_json(&report.records, path)?;
            }
            write_out(
                out,
                format_args!(
                    "samples={} records={} empty_cells={}",
                    report.samples.len(),
                    report.records.len(),
                    report.empty_cells.len()
                ),
            )?;
        }
        Command::Fixtures { out: dir } => {
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            for (name, t) in fixtures()? {
                let path = dir.join(name);
                t.save(&path)?;
                write_out(out, format_args!("{}", path.display()))?;
            }
            let sweep = dir.join("sweep.toml");
            std::fs::write(&sweep, EXAMPLE_SWEEP).map_err(|e| Error::io(&sweep, e))?;
            write_out(out, format_args!("{}", sweep.display()))?;
        }
    }
    Ok(())
}

fn write_trace_file(path: &Path, events: &[sim::SlotEvent]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    sim::write_trace(events, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Named fixture topologies.
pub fn fixtures() -> Result<Vec<(&'static str, Topology)>> {
    Ok(vec![
        ("path3.json", Topology::path(3)?),
        ("k5.json", Topology::complete(5)?),
        ("star5.json", Topology::star(5)?),
        (
            "disconnected4.json",
            Topology::from_edges(4, &[(0, 1), (2, 3)])?,
        ),
    ])
}

pub const EXAMPLE_SWEEP: &str = "\
node_sizes = [5, 8, 11]
pe_values = [0.0, 0.1, 0.2]
radius_grid = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0, 1.4142135623730951]
samples_per_cell = 1000
root_seed = 1
degree_bucket_width = 0.5
";
