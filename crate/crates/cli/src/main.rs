use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use modedse::codec::CodecConfig;
use modedse::media::RawLayout;
use modedse::{Genotype, SyntheticKind};
use modedse_cli::{
    cmd_encode, cmd_train, cmd_validate, inspect_genotype, read_solution, CampaignConfig, SequenceSpec, COMBINED_FILE,
};

/// Multi-objective search for mode-decision configurations.
#[derive(Parser)]
#[command(name = "modedse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the search at every campaign QP and write archives, scatter data
    /// and the combined solution.
    Train {
        /// Campaign config (TOML).
        config: PathBuf,
    },
    /// Compare a solution against the exhaustive baseline on the
    /// validation sequences.
    Validate {
        config: PathBuf,
        /// Combined solution file; defaults to the one `train` wrote.
        #[arg(long, conflicts_with = "genotype")]
        combined: Option<PathBuf>,
        /// A single genotype file applied at every QP.
        #[arg(long)]
        genotype: Option<PathBuf>,
    },
    /// Summarize a genotype or combined solution file.
    Inspect {
        file: PathBuf,
        /// Also print the decision as nested conditionals.
        #[arg(long)]
        unwrapped: bool,
    },
    /// Encode one sequence with one genotype and print the report as JSON.
    Encode {
        /// Genotype file; the exhaustive genotype when absent.
        #[arg(long)]
        genotype: Option<PathBuf>,
        #[arg(long)]
        qp: u8,
        /// Raw video file (headerless or y4m).
        #[arg(long, conflicts_with = "synthetic")]
        input: Option<PathBuf>,
        /// Synthetic content: flat, gradient, moving_block or noise.
        #[arg(long)]
        synthetic: Option<SyntheticKind>,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long, default_value_t = 3)]
        frames: usize,
        /// Raw layout: luma or yuv420.
        #[arg(long, default_value = "yuv420", value_parser = parse_layout)]
        layout: RawLayout,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn parse_layout(s: &str) -> Result<RawLayout, String> {
    match s {
        "luma" => Ok(RawLayout::Luma),
        "yuv420" => Ok(RawLayout::Yuv420),
        other => Err(format!("unknown layout `{other}`, expected luma or yuv420")),
    }
}

fn read_genotype(path: &PathBuf) -> Result<Genotype> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g: Genotype = text.parse().with_context(|| format!("in {}", path.display()))?;
    let v = g.validate();
    if !v.is_empty() {
        let msgs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        bail!("{} is not a valid genotype: {}", path.display(), msgs.join("; "));
    }
    Ok(g)
}

fn run(cli: Cli) -> Result<()> {
    let mut out = std::io::stdout().lock();
    let mut progress = |msg: &str| eprintln!("{msg}");
    match cli.command {
        Command::Train { config } => {
            let cfg = CampaignConfig::load(&config)?;
            let outcome = cmd_train(&cfg, &mut progress)?;
            for f in &outcome.files {
                writeln!(out, "wrote {}", f.display())?;
            }
        }
        Command::Validate { config, combined, genotype } => {
            let cfg = CampaignConfig::load(&config)?;
            let path = genotype.or(combined).unwrap_or_else(|| cfg.output_dir().join(COMBINED_FILE));
            let solution = read_solution(&path)?;
            let (_, report) = cmd_validate(&cfg, &solution, &mut progress)?;
            write!(out, "{}", fs::read_to_string(&report)?)?;
            writeln!(out, "wrote {}", report.display())?;
        }
        Command::Inspect { file, unwrapped } => {
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let sections: Vec<(String, Genotype)> = match text.parse::<Genotype>() {
                Ok(g) => vec![(String::new(), g)],
                Err(single) => match text.parse::<modedse::dse::CombinedSolution>() {
                    Ok(c) if !c.per_qp.is_empty() => c.per_qp.into_iter().map(|(qp, g)| (format!("qp {qp}\n"), g)).collect(),
                    _ => return Err(single).with_context(|| format!("in {}", file.display())),
                },
            };
            for (title, g) in sections {
                write!(out, "{title}")?;
                let v = g.validate();
                for violation in &v {
                    writeln!(out, "invalid: {violation}")?;
                }
                write!(out, "{}", inspect_genotype(&g))?;
                if unwrapped {
                    write!(out, "{}", g.unwrapped_listing())?;
                }
            }
        }
        Command::Encode { genotype, qp, input, synthetic, width, height, frames, layout, seed, output } => {
            let g = match genotype {
                Some(p) => read_genotype(&p)?,
                None => Genotype::exhaustive(),
            };
            let (name, synthetic, path) = match (input, synthetic) {
                (Some(p), None) => (p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(), None, Some(p)),
                (None, Some(k)) => (format!("synthetic_{k:?}").to_lowercase(), Some(k), None),
                _ => bail!("give either --input or --synthetic"),
            };
            let spec = SequenceSpec { name, synthetic, path, width, height, frames, layout, seed };
            let seq = spec.load(std::path::Path::new(""))?;
            let encoded = cmd_encode(&seq, &g, qp, &CodecConfig::default())?;
            let json = serde_json::to_string_pretty(&encoded)?;
            match output {
                Some(p) => fs::write(&p, json).with_context(|| format!("writing {}", p.display()))?,
                None => writeln!(out, "{json}")?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
