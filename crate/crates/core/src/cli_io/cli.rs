//! Command-line front end. Exit codes: 0 pass, 1 a verdict failed, 2 usage
//! or configuration error, 3 the solver stopped early.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::scenarios::report::{ExperimentReport, Status};
use crate::scenarios::run_experiment;
use crate::scenarios::studies::convergence_suite;

use super::config::{parse_config, print_config, Experiment, RunConfig};
use super::output::{output_dir, write_json, write_outputs};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ch-tails", version, about = "Tail behaviour of Camassa-Holm solutions on the line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a TOML file.
    Run {
        config: PathBuf,
        /// Output directory; overrides the file and $CH_TAILS_OUT.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a configuration without running it.
    Validate {
        config: PathBuf,
        /// Print the configuration with all defaults filled in.
        #[arg(long)]
        print: bool,
    },
    /// List the experiments; with a name, print its reference configuration.
    ListScenarios { name: Option<String> },
    /// Operator checks, order studies, drift and the kernel-weight bound.
    Convergence {
        /// Where to write convergence.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config(&text)
}

pub fn exit_code(report: &ExperimentReport) -> i32 {
    match report.status {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Inconclusive => EXIT_BLOW_UP,
    }
}

fn print_report(out: &mut dyn Write, report: &ExperimentReport) -> std::io::Result<()> {
    writeln!(out, "experiment {}: {:?}", report.name, report.status)?;
    for v in &report.verdicts {
        let mark = if v.pass { "pass" } else { "FAIL" };
        write!(out, "  [{mark}] {} {}: measured {:.3e}, tolerance {:.3e}", v.id, v.name, v.measured, v.tolerance)?;
        if v.detail.is_empty() {
            writeln!(out)?;
        } else {
            writeln!(out, " ({})", v.detail)?;
        }
    }
    if let Some(b) = &report.blow_up {
        writeln!(out, "  stopped early: {b}")?;
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::Io { path: "stdout".into(), message: e.to_string() };
    match cli.command {
        Command::Run { config, out: dir } => {
            let cfg = read(&config)?;
            let report = run_experiment(&cfg)?;
            let dir = output_dir(&cfg, dir.as_deref());
            let written = write_outputs(&report, &cfg, &dir)?;
            print_report(out, &report).map_err(io)?;
            for p in written {
                writeln!(out, "  wrote {}", p.display()).map_err(io)?;
            }
            Ok(exit_code(&report))
        }
        Command::Validate { config, print } => {
            let cfg = read(&config)?;
            if print {
                write!(out, "{}", print_config(&cfg)).map_err(io)?;
            } else {
                writeln!(out, "{}: ok ({})", config.display(), cfg.scenario.experiment.name()).map_err(io)?;
            }
            Ok(EXIT_PASS)
        }
        Command::ListScenarios { name: None } => {
            for e in Experiment::ALL {
                writeln!(out, "{:<20} {}", e.name(), e.summary()).map_err(io)?;
            }
            Ok(EXIT_PASS)
        }
        Command::ListScenarios { name: Some(n) } => {
            let e = Experiment::ALL
                .into_iter()
                .find(|e| e.name() == n)
                .ok_or_else(|| Error::Parameter { key: "experiment".into(), message: format!("unknown experiment `{n}`") })?;
            write!(out, "{}", print_config(&RunConfig::reference(e))).map_err(io)?;
            Ok(EXIT_PASS)
        }
        Command::Convergence { out: dir } => {
            let cfg = RunConfig::reference(Experiment::Persistence);
            let mut time = cfg.time.clone();
            time.checkpoints.clear();
            let rep = convergence_suite(&cfg.grid()?, &time, cfg.tolerances.conservation_tol)?;
            for v in &rep.verdicts {
                let mark = if v.pass { "pass" } else { "FAIL" };
                writeln!(out, "[{mark}] {} {}: measured {:.4e}, tolerance {:.4e}", v.id, v.name, v.measured, v.tolerance)
                    .map_err(io)?;
            }
            let path = dir.unwrap_or_else(|| output_dir(&cfg, None)).join("convergence.json");
            write_json(&rep, &path)?;
            writeln!(out, "wrote {}", path.display()).map_err(io)?;
            Ok(if rep.passed() { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing human
/// output to `out` and errors to `err`. Returns the exit code.
pub fn run_command<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run_command(std::iter::once("ch-tails").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn lists_every_experiment() {
        let (code, out, _) = run(&["list-scenarios"]);
        assert_eq!(code, 0);
        for e in Experiment::ALL {
            assert!(out.contains(e.name()));
        }
    }

    #[test]
    fn reference_config_parses_back() {
        let (code, out, _) = run(&["list-scenarios", "fast_decay"]);
        assert_eq!(code, 0);
        assert_eq!(parse_config(&out).unwrap(), RunConfig::reference(Experiment::FastDecay));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        let (code, _, err) = run(&["validate", "/nonexistent/cfg.toml"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("/nonexistent"), "{err}");
    }

    #[test]
    fn invalid_theta_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[scenario]\nexperiment = \"persistence\"\ntheta = 1.5\n").unwrap();
        let (code, _, err) = run(&["validate", p.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("theta must be in (0,1)"), "{err}");
    }
}
