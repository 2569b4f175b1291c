//! Command-line front end: one subcommand per pipeline stage, all driven by
//! a single TOML config. Stages talk only through files under the config's
//! output directory, so any stage can be re-run alone once its inputs exist.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use poi_profiler::pipeline::{
    load_config, run_full_pipeline, stage_coldstart, stage_eval, stage_emit_sft, stage_ingest,
    stage_inject, stage_judge, stage_predict, stage_profile, stage_sessionize, stage_split,
    stage_trajsim_bench,
};
use poi_profiler::service::serve_blocking;

#[derive(Parser)]
#[command(
    name = "poi-profiler",
    version,
    about = "Check-in pipeline: natural-language user profiles, SFT prompt datasets, and next-POI evaluation"
)]
struct Cli {
    /// Pipeline TOML config; relative paths resolve against its directory.
    #[arg(short, long, global = true, default_value = "pipeline.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw check-ins into the normalized dataset (optional boundary filter).
    Ingest,
    /// Cut per-user sessions and drop short sessions / low-activity users.
    Sessionize,
    /// Chronological train/validation/test split with train-entity pruning.
    Split,
    /// Generate a natural-language profile per train user.
    Profile,
    /// Score stored profiles with the configured judge backends.
    Judge,
    /// Emit SFT JSONL per split plus the training manifest.
    EmitSft,
    /// Send test examples to the predictor and store raw + parsed answers.
    Predict,
    /// Score a prediction file and print Acc@1.
    Eval {
        /// Score this file instead of the pipeline's own predictions.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Slice prediction accuracy by train-activity groups.
    Coldstart,
    /// Append a short-term category preference to every profile, re-predict,
    /// and report per-category shifts.
    Inject {
        #[arg(long)]
        category: String,
    },
    /// Measure pairwise-DTW cost growth against per-user profile generation.
    TrajsimBench {
        /// Candidate-set sizes, ascending.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        sizes: Vec<usize>,
        /// Points per trajectory.
        #[arg(long, default_value_t = 32)]
        k: usize,
        /// User counts for the profile-generation side.
        #[arg(long, value_delimiter = ',', default_value = "50,100")]
        users: Vec<usize>,
    },
    /// Serve the profile scrutiny REST API over existing artifacts.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// Run ingest through coldstart in order.
    Run,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match load_config(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let result = match cli.command {
        Command::Ingest => stage_ingest(&cfg),
        Command::Sessionize => stage_sessionize(&cfg),
        Command::Split => stage_split(&cfg),
        Command::Profile => stage_profile(&cfg),
        Command::Judge => stage_judge(&cfg),
        Command::EmitSft => stage_emit_sft(&cfg),
        Command::Predict => stage_predict(&cfg),
        Command::Eval { predictions } => stage_eval(&cfg, predictions.as_deref()),
        Command::Coldstart => stage_coldstart(&cfg),
        Command::Inject { category } => stage_inject(&cfg, &category),
        Command::TrajsimBench { sizes, k, users } => {
            stage_trajsim_bench(&cfg, &sizes, k, &users)
        }
        Command::Serve { addr } => serve_blocking(&cfg, addr).map(|()| "server stopped".into()),
        Command::Run => run_full_pipeline(&cfg).map(|lines| lines.join("\n")),
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
