use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use stochascope_cli::{
    cmd_analyze, cmd_compare_partitions, cmd_solve, cmd_synth, load_bundle, read_configs,
    thread_pool, AnalysisRequest, Format, SynthSpec,
};

#[derive(Parser)]
#[command(name = "stochascope", version, about = "Stochastic acceleration analysis and solver benchmarks")]
struct Cli {
    /// Seed for every random draw (overrides the seed in a synth spec).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Report format of analyze and compare-partitions.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Interleaved,
    Random,
    Consecutive,
}

impl SchemeArg {
    fn name(self) -> String {
        match self {
            SchemeArg::Interleaved => "interleaved",
            SchemeArg::Random => "random",
            SchemeArg::Consecutive => "consecutive",
        }
        .into()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem bundle from a JSON spec.
    Synth {
        spec: PathBuf,
    },
    /// SA factor and all bounds for each K and scheme.
    Analyze {
        bundle: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        k_list: Vec<usize>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "interleaved")]
        scheme: Vec<SchemeArg>,
        #[arg(long, value_delimiter = ',', default_values_t = [15.0, 2.0])]
        delta: Vec<f64>,
    },
    /// Rank partition schemes at one K by local coherence.
    ComparePartitions {
        bundle: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "interleaved,random,consecutive")]
        scheme: Vec<SchemeArg>,
    },
    /// Run solver configs and write their traces.
    Solve {
        bundle: PathBuf,
        configs: PathBuf,
    },
}

fn run(cli: Cli) -> Result<bool> {
    let pool = thread_pool()?;
    pool.install(|| match cli.command {
        Command::Synth { spec } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let mut spec: SynthSpec = serde_json::from_str(&text).context("parsing synth spec")?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            cmd_synth(&spec, &cli.out_dir)?;
            Ok(true)
        }
        Command::Analyze { bundle, k_list, scheme, delta } => {
            let b = load_bundle(&bundle)?;
            let req = AnalysisRequest {
                k_list,
                schemes: scheme.into_iter().map(SchemeArg::name).collect(),
                deltas: delta,
                format: cli.format,
                seed: cli.seed.unwrap_or(b.manifest.seed),
            };
            let (path, _) = cmd_analyze(&b, &req, &cli.out_dir)?;
            println!("{}", path.display());
            Ok(true)
        }
        Command::ComparePartitions { bundle, k, scheme } => {
            let b = load_bundle(&bundle)?;
            let schemes: Vec<String> = scheme.into_iter().map(SchemeArg::name).collect();
            let seed = cli.seed.unwrap_or(b.manifest.seed);
            let (path, ranking) = cmd_compare_partitions(&b, k, &schemes, seed, cli.format, &cli.out_dir)?;
            for e in &ranking {
                println!("{} {} alpha_ell={} upsilon={}", e.rank, e.scheme, e.alpha_ell, e.upsilon);
            }
            println!("{}", path.display());
            Ok(true)
        }
        Command::Solve { bundle, configs } => {
            let b = load_bundle(&bundle)?;
            let configs = read_configs(&configs)?;
            let (path, report) = cmd_solve(&b, &configs, &cli.out_dir)?;
            println!("{}", path.display());
            Ok(report.failures() == 0)
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
