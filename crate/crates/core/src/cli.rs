//! Command-line front end for [`crate::harness`].

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand};

use crate::config::{RunConfig, KEYS};
use crate::error::Result;
use crate::harness::{cmd_analyze, cmd_degrade, cmd_estimate, cmd_eval, cmd_search, cmd_synth, SearchMode};

/// `--<key> <value>` for every configuration key.
#[derive(Clone, Debug, Default)]
struct Overrides(Vec<(&'static str, String)>);

impl FromArgMatches for Overrides {
    fn from_arg_matches(matches: &ArgMatches) -> std::result::Result<Self, clap::Error> {
        Ok(Overrides(
            KEYS.iter()
                .filter_map(|(key, _)| matches.get_one::<String>(key).map(|v| (*key, v.clone())))
                .collect(),
        ))
    }

    fn update_from_arg_matches(&mut self, matches: &ArgMatches) -> std::result::Result<(), clap::Error> {
        *self = Overrides::from_arg_matches(matches)?;
        Ok(())
    }
}

impl Args for Overrides {
    fn augment_args(cmd: Command) -> Command {
        KEYS.iter().fold(cmd, |cmd, (key, help)| {
            cmd.arg(
                Arg::new(*key)
                    .long(*key)
                    .value_name("VALUE")
                    .help(*help)
                    .global(true)
                    .help_heading("Configuration"),
            )
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Overrides::augment_args(cmd)
    }
}

#[derive(Debug, Parser)]
#[command(name = "mlc", version, about = "Multi-layered cepstrum multi-pitch analysis")]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Write the two-source simulation (x1, x2, x, x_noisy) as WAV files.
    Synth,
    /// Filter and/or add noise and an impulse to WAV files.
    Degrade {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Dump every layer, the fused representation and band salience as CSV.
    Analyze { input: PathBuf },
    /// Write a piano-roll text file per input.
    Estimate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Score a prediction file against a ground-truth annotation.
    Eval { predictions: PathBuf, truth: PathBuf },
    /// Tune the exponents on `dataset_dir`.
    Search {
        #[arg(value_parser = ["brute", "greedy", "sgd"])]
        mode: String,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::read(path)?,
        None => RunConfig::default(),
    };
    for (key, value) in &cli.overrides.0 {
        config.set(key, value)?;
    }
    config.validate()?;
    Ok(config)
}

fn execute(cli: &Cli) -> Result<()> {
    let config = resolve(cli)?;
    let print = |paths: Vec<PathBuf>| paths.iter().for_each(|p| println!("{}", p.display()));
    match &cli.command {
        Cmd::Synth => print(cmd_synth(&config)?),
        Cmd::Degrade { inputs } => print(cmd_degrade(&config, inputs)?),
        Cmd::Analyze { input } => print(cmd_analyze(&config, input)?),
        Cmd::Estimate { inputs } => print(cmd_estimate(&config, inputs)?),
        Cmd::Eval { predictions, truth } => {
            let (counts, scores) = cmd_eval(&config, predictions, truth)?;
            println!("tp {}  fp {}  fn {}", counts.tp, counts.fp, counts.fn_);
            println!("{scores}");
        }
        Cmd::Search { mode } => {
            let mode: SearchMode = mode.parse()?;
            let (report, paths) = cmd_search(&config, mode)?;
            print!("{}", report.summary(mode));
            print(paths);
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::from_default_env().filter_level(level).try_init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}

pub fn main() -> ExitCode {
    run(std::env::args_os())
}
