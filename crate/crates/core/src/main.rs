use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;

use tabproc::codec::TokenMode;
use tabproc::ingest::{ParseOptions, TechniqueDictionary};
use tabproc::model::MAX_FRET;

mod cmd;

#[derive(Parser, Debug)]
#[command(name = "tabproc", version, about = "Guitar tablature parsing, encoding and analysis")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Pitch token layout
    #[arg(long, global = true, default_value = "pitch-octave")]
    mode: TokenMode,
    /// JSON technique dictionary replacing the built-in one
    #[arg(long, global = true, env = "TABPROC_TECH_DICT")]
    technique_dict: Option<PathBuf>,
    /// Merge all guitar parts instead of taking the first
    #[arg(long, global = true)]
    merge_tracks: bool,
    /// Highest fret on the instrument
    #[arg(long, global = true, default_value_t = MAX_FRET, value_parser = clap::value_parser!(u8).range(12..=24))]
    max_fret: u8,
    /// Worker threads for per-file processing
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value = "warn")]
    log_level: LevelFilter,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse MusicXML/MXL into normalized score JSON
    Parse {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Keep voices and ties as written
        #[arg(long)]
        raw: bool,
    },
    /// Encode scores as pitch/time/finger token sequences
    Encode {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Also write the three-line plain-text form
        #[arg(long)]
        text: bool,
    },
    /// Key, chords, melody/bass tags and technique events per score
    Analyze {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Corpus statistics over files and directories
    Stats {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Cut labelled clips out of scores
    Clip(cmd::clip::ClipArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().filter_level(cli.global.log_level).init();

    if let Some(n) = cli.global.workers {
        if !tabproc::par::set_workers(n) {
            log::warn!("--workers {n} ignored");
        }
    }
    let dictionary = match &cli.global.technique_dict {
        Some(path) => match TechniqueDictionary::load(path) {
            Ok(d) => d,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => TechniqueDictionary::default(),
    };
    let ctx = cmd::Context {
        out: cli.global.out,
        mode: cli.global.mode,
        max_fret: cli.global.max_fret,
        options: ParseOptions {
            dictionary,
            merge_tracks: cli.global.merge_tracks,
        },
    };
    if let Err(e) = std::fs::create_dir_all(&ctx.out) {
        eprintln!("error: {}: {e}", ctx.out.display());
        return ExitCode::from(2);
    }

    let outcome = match cli.command {
        Command::Parse { inputs, raw } => cmd::batch::parse(&ctx, &inputs, raw),
        Command::Encode { inputs, text } => cmd::batch::encode(&ctx, &inputs, text),
        Command::Analyze { inputs } => cmd::batch::analyze(&ctx, &inputs),
        Command::Stats { inputs } => cmd::stats::run(&ctx, &inputs),
        Command::Clip(args) => cmd::clip::run(&ctx, &args),
    };
    ExitCode::from(outcome.exit_code())
}
