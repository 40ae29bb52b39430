//! Command front end: `grid`, `verify`, `run`, `tune`.
//!
//! Kept as a library module so the commands are callable from tests; the
//! `mzo` binary is a thin wrapper around [`dispatch`].

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::{run_grid_to_files, run_single_to_file, ExperimentConfig};
use crate::optimizer::{tune_theorem, TuneRequest};
use crate::verify::{render_reports, run_suite, SUITES};
use crate::Feedback;

pub const USAGE: &str = "\
mzo: zeroth-order optimization under Markov noise

USAGE:
    mzo grid <config> [--full]        run an experiment grid, write CSV + SVG
    mzo run <config> [--out <csv>]    single seeded run, write trajectory CSV
    mzo verify <suite> [--out <txt>]  run a verification suite
                                      (chains|estimators|smoothing|mlmc|optimizer|all)
    mzo tune [flags]                  print theorem-tuned parameters
        --dim <d> --tau <tau> --mu <mu> --lips <L-or-G> --epsilon <eps>
        [--b <B>] [--feedback one|two] [--nonsmooth] [--delta <D>]
        [--sigma-sq <s2>] [--seed <n>]

Environment:
    MZ_THREADS    cap the grid worker pool
";

/// Parsed command line.
#[derive(Debug)]
pub enum Command {
    Grid {
        config: PathBuf,
        full: bool,
    },
    Run {
        config: PathBuf,
        out: Option<PathBuf>,
    },
    Verify {
        suite: String,
        out: Option<PathBuf>,
        seed: u64,
    },
    Tune(TuneRequest),
}

fn flag_value<'a>(
    args: &'a [String],
    i: &mut usize,
    name: &str,
) -> Result<&'a str> {
    *i += 1;
    args.get(*i)
        .map(|s| s.as_str())
        .ok_or_else(|| Error::Usage(format!("flag {name} needs a value")))
}

pub fn parse_args(args: &[String]) -> Result<Command> {
    let cmd = args
        .first()
        .ok_or_else(|| Error::Usage("missing subcommand".into()))?;
    match cmd.as_str() {
        "grid" => {
            let mut config = None;
            let mut full = false;
            let mut i = 1;
            while i < args.len() {
                match args[i].as_str() {
                    "--full" => full = true,
                    other if !other.starts_with("--") && config.is_none() => {
                        config = Some(PathBuf::from(other))
                    }
                    other => return Err(Error::Usage(format!("unexpected argument `{other}`"))),
                }
                i += 1;
            }
            Ok(Command::Grid {
                config: config.ok_or_else(|| Error::Usage("grid needs a config path".into()))?,
                full,
            })
        }
        "run" => {
            let mut config = None;
            let mut out = None;
            let mut i = 1;
            while i < args.len() {
                match args[i].as_str() {
                    "--out" => out = Some(PathBuf::from(flag_value(args, &mut i, "--out")?)),
                    other if !other.starts_with("--") && config.is_none() => {
                        config = Some(PathBuf::from(other))
                    }
                    other => return Err(Error::Usage(format!("unexpected argument `{other}`"))),
                }
                i += 1;
            }
            Ok(Command::Run {
                config: config.ok_or_else(|| Error::Usage("run needs a config path".into()))?,
                out,
            })
        }
        "verify" => {
            let mut suite = None;
            let mut out = None;
            let mut seed = 1234u64;
            let mut i = 1;
            while i < args.len() {
                match args[i].as_str() {
                    "--out" => out = Some(PathBuf::from(flag_value(args, &mut i, "--out")?)),
                    "--seed" => {
                        seed = flag_value(args, &mut i, "--seed")?
                            .parse()
                            .map_err(|_| Error::Usage("bad --seed".into()))?
                    }
                    other if !other.starts_with("--") && suite.is_none() => {
                        suite = Some(other.to_string())
                    }
                    other => return Err(Error::Usage(format!("unexpected argument `{other}`"))),
                }
                i += 1;
            }
            let suite = suite.ok_or_else(|| {
                Error::Usage(format!("verify needs a suite name, one of {SUITES:?}"))
            })?;
            Ok(Command::Verify { suite, out, seed })
        }
        "tune" => {
            let mut dim = None;
            let mut tau = 1u64;
            let mut mu = None;
            let mut lips = None;
            let mut epsilon = None;
            let mut b = 1usize;
            let mut feedback = Feedback::TwoPoint;
            let mut smooth = true;
            let mut delta = 0.0;
            let mut sigma_sq = 0.0;
            let mut i = 1;
            while i < args.len() {
                match args[i].as_str() {
                    "--dim" => dim = Some(parse_flag(args, &mut i, "--dim")?),
                    "--tau" => tau = parse_flag(args, &mut i, "--tau")?,
                    "--mu" => mu = Some(parse_flag(args, &mut i, "--mu")?),
                    "--lips" => lips = Some(parse_flag(args, &mut i, "--lips")?),
                    "--epsilon" => epsilon = Some(parse_flag(args, &mut i, "--epsilon")?),
                    "--b" => b = parse_flag(args, &mut i, "--b")?,
                    "--delta" => delta = parse_flag(args, &mut i, "--delta")?,
                    "--sigma-sq" => sigma_sq = parse_flag(args, &mut i, "--sigma-sq")?,
                    "--nonsmooth" => smooth = false,
                    "--feedback" => {
                        feedback = match flag_value(args, &mut i, "--feedback")? {
                            "one" | "one_point" => Feedback::OnePoint,
                            "two" | "two_point" => Feedback::TwoPoint,
                            other => {
                                return Err(Error::Usage(format!("unknown feedback `{other}`")))
                            }
                        }
                    }
                    other => return Err(Error::Usage(format!("unexpected argument `{other}`"))),
                }
                i += 1;
            }
            let mut req = TuneRequest::with_defaults(
                dim.ok_or_else(|| Error::Usage("tune needs --dim".into()))?,
                tau,
                mu.ok_or_else(|| Error::Usage("tune needs --mu".into()))?,
                lips.ok_or_else(|| Error::Usage("tune needs --lips".into()))?,
                epsilon.ok_or_else(|| Error::Usage("tune needs --epsilon".into()))?,
                b,
                feedback,
                smooth,
            );
            req.delta = delta;
            req.sigma_sq = sigma_sq;
            Ok(Command::Tune(req))
        }
        "--help" | "-h" | "help" => Err(Error::Usage(USAGE.into())),
        other => Err(Error::Usage(format!(
            "unknown subcommand `{other}`\n\n{USAGE}"
        ))),
    }
}

fn parse_flag<T: std::str::FromStr>(args: &[String], i: &mut usize, name: &str) -> Result<T> {
    flag_value(args, i, name)?
        .parse::<T>()
        .map_err(|_| Error::Usage(format!("bad value for {name}")))
}

/// Execute a parsed command, writing human output to stdout. Returns the
/// process exit code.
pub fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Grid { config, full } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if full {
                cfg.replications = 10_000;
            }
            let out = run_grid_to_files(&cfg)?;
            println!("wrote {}", out.csv_path.display());
            for p in &out.svg_paths {
                println!("wrote {}", p.display());
            }
            let diverged: usize = out.cells.iter().map(|c| c.diverged).sum();
            if diverged > 0 {
                println!("note: {diverged} replications diverged (cells recorded as nan)");
            }
            Ok(0)
        }
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let path = out.unwrap_or_else(|| cfg.out_dir.join("trajectory.csv"));
            let record = run_single_to_file(&cfg, &path)?;
            println!(
                "wrote {} ({} iterations, final squared error {}, {} oracle calls)",
                path.display(),
                record.iterations_done,
                record.final_err_sq,
                record.total_calls
            );
            Ok(if record.diverged_at.is_some() { 2 } else { 0 })
        }
        Command::Verify { suite, out, seed } => {
            let reports = run_suite(&suite, seed)?;
            let (passed, text) = render_reports(&suite, &reports);
            let path = out.unwrap_or_else(|| PathBuf::from(format!("verify_{suite}.txt")));
            write_report(&path, &text)?;
            print!("{text}");
            println!("report written to {}", path.display());
            Ok(if passed { 0 } else { 1 })
        }
        Command::Tune(req) => {
            let tuned = tune_theorem(&req)?;
            println!("theorem-tuned parameters");
            println!("  gamma           = {}", tuned.gamma);
            println!("  t               = {}", tuned.t);
            println!("  p               = {}", tuned.p);
            println!("  delta_max       = {}", tuned.delta_max);
            println!("  effective L     = {}", tuned.lips_eff);
            println!("  predicted calls = {:.3e}  (constants = 1)", tuned.predicted_calls);
            Ok(0)
        }
    }
}

fn write_report(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Entry point used by the binary: parse, dispatch, map errors to exit codes.
pub fn main_with_args(args: Vec<String>) -> i32 {
    match parse_args(&args) {
        Ok(cmd) => match dispatch(cmd) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                match e {
                    Error::Infeasible(_) => 3,
                    Error::Divergence { .. } => 2,
                    _ => 1,
                }
            }
        },
        Err(e) => {
            eprintln!("{e}");
            64
        }
    }
}
