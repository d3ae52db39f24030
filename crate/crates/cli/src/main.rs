//! `deepmap`: synthesize datasets, featurize, assemble, train, cross-validate
//! and verify.

mod commands;
mod exit;
mod settings;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::exit::CliError;
use crate::settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "deepmap", version, about = "Graph classification with aligned vertex feature maps")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Where graphs come from: a TU directory or the synthetic generator.
#[derive(Args, Debug, Default)]
pub struct DataArgs {
    /// TU dataset directory.
    #[arg(long)]
    pub data: Option<String>,
    /// TU file prefix (default: directory name).
    #[arg(long)]
    pub name: Option<String>,
    /// Generate the dataset instead of reading one.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long)]
    pub synth_graphs: Option<String>,
    #[arg(long)]
    pub synth_classes: Option<String>,
    #[arg(long)]
    pub synth_min_size: Option<String>,
    #[arg(long)]
    pub synth_max_size: Option<String>,
    #[arg(long)]
    pub synth_p: Option<String>,
    #[arg(long)]
    pub synth_seed: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct KindArgs {
    /// wl, sp or gk.
    #[arg(long)]
    pub kind: Option<String>,
    /// WL iterations.
    #[arg(long)]
    pub h: Option<String>,
    /// Graphlet size (3..=5).
    #[arg(long)]
    pub k: Option<String>,
    /// Graphlet samples per vertex.
    #[arg(long)]
    pub q: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct TrainArgs {
    #[arg(long)]
    pub lr: Option<String>,
    /// Learning-rate decay factor on plateau.
    #[arg(long)]
    pub decay: Option<String>,
    #[arg(long)]
    pub patience: Option<String>,
    #[arg(long)]
    pub batch: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic labeled dataset in TU format.
    Synth {
        #[arg(long)]
        graphs: Option<String>,
        #[arg(long)]
        classes: Option<String>,
        #[arg(long)]
        min_size: Option<String>,
        #[arg(long)]
        max_size: Option<String>,
        /// Edge probability.
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// TU file prefix (default: directory name).
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        force: bool,
    },
    /// Per-vertex feature maps plus the column index.
    Featurize {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        kind: KindArgs,
        /// Graphlet sampling seed.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Align featurized graphs into the network input tensor.
    Assemble {
        #[command(flatten)]
        data: DataArgs,
        /// Output directory of `featurize`.
        #[arg(long)]
        features: PathBuf,
        /// Receptive field size.
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Train the network on an assembled tensor.
    Train {
        #[arg(long)]
        tensor: PathBuf,
        /// One class per line (default: labels.txt next to the tensor).
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Stratified k-fold cross-validation.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        /// deepmap or kernel.
        #[arg(long)]
        pipeline: Option<String>,
        #[command(flatten)]
        kind: KindArgs,
        #[arg(long)]
        r: Option<String>,
        #[command(flatten)]
        train: TrainArgs,
        /// Kernel baseline: L2 strength.
        #[arg(long)]
        l2: Option<String>,
        #[arg(long)]
        folds: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Golden-value checks on the worked example graphs.
    Verify {
        /// Run only these checks (centrality, fields, wl, grad).
        #[arg(long)]
        only: Vec<String>,
        /// Write the golden fixture files here and exit.
        #[arg(long)]
        dump_fixtures: Option<PathBuf>,
        /// Read golden values from here instead of the built-in tables.
        #[arg(long)]
        fixture_dir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Argument("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    let mut s = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth {
            graphs,
            classes,
            min_size,
            max_size,
            p,
            seed,
            out,
            name,
            force,
        } => {
            let args = commands::SynthArgs {
                graphs,
                classes,
                min_size,
                max_size,
                p,
                seed,
                name,
            };
            commands::synth(&mut s, &args, &out, force)
        }
        Command::Featurize {
            data,
            kind,
            seed,
            out,
            force,
        } => commands::featurize(&mut s, &data, &kind, seed.as_deref(), &out, force),
        Command::Assemble {
            data,
            features,
            r,
            out,
            force,
        } => commands::assemble(&mut s, &data, &features, r.as_deref(), &out, force),
        Command::Train {
            tensor,
            labels,
            train,
            seed,
            out,
            force,
        } => commands::train(&mut s, &tensor, labels.as_deref(), &train, seed.as_deref(), &out, force),
        Command::Cv {
            data,
            pipeline,
            kind,
            r,
            train,
            l2,
            folds,
            seed,
            out,
            force,
        } => {
            let args = commands::CvArgs {
                pipeline,
                r,
                l2,
                folds,
                seed,
            };
            commands::cv(&mut s, &data, &kind, &train, &args, &out, force)
        }
        Command::Verify {
            only,
            dump_fixtures,
            fixture_dir,
        } => {
            if let Some(dir) = dump_fixtures {
                return verify::Fixtures::builtin().dump(&dir);
            }
            let fixtures = match fixture_dir {
                Some(dir) => verify::Fixtures::load(&dir)?,
                None => verify::Fixtures::builtin(),
            };
            verify::run(&only, &fixtures)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
