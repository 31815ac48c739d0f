use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use softmap::config::RunConfig;
use softmap::pipeline::{inspect, run_evolution, run_map};
use softmap::{Error, Result};

/// Shaded-relief maps of software systems from the vocabulary of their sources.
///
/// Log verbosity is read from SOFTMAP_LOG (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(name = "softmap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw the map of a single snapshot.
    Map {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Draw consistent maps of successive snapshots plus a stability report.
    Evolve {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Summarize a sidecar or report file.
    Inspect { sidecar: PathBuf },
}

/// Flags that take precedence over the config file.
#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    /// Gaussian sigma in pixels.
    #[arg(long)]
    sigma: Option<f64>,
    /// Grid size as WIDTHxHEIGHT.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// svg, png or both.
    #[arg(long)]
    format: Option<String>,
    /// File of `from to [weight]` lines.
    #[arg(long)]
    overlay_edges: Option<PathBuf>,
    /// File of `glyph pattern` lines.
    #[arg(long)]
    overlay_glyphs: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) -> Result<()> {
        let here = Path::new("");
        let mut set = |key: &str, value: Option<String>| match value {
            Some(v) => config.set(key, &v, here),
            None => Ok(()),
        };
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("k", self.k.map(|v| v.to_string()))?;
        set("sigma", self.sigma.map(|v| v.to_string()))?;
        set("grid", self.grid.clone())?;
        set("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        set("format", self.format.clone())?;
        set("overlay_edges", self.overlay_edges.as_ref().map(|p| p.display().to_string()))?;
        set("overlay_glyphs", self.overlay_glyphs.as_ref().map(|p| p.display().to_string()))?;
        Ok(())
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    overrides.apply(&mut config)?;
    Ok(config)
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Map { config, overrides } => {
            let config = load(&config, &overrides)?;
            let report = run_map(&config)?;
            Ok(format!("{}wrote {}\n", report.to_text(), config.out.display()))
        }
        Command::Evolve { config, overrides } => {
            let config = load(&config, &overrides)?;
            let evolution = run_evolution(&config)?;
            let mut out = String::new();
            for t in &evolution.transitions {
                out.push_str(&format!(
                    "{} -> {}: {} shared, {} added, {} removed, median displacement {:.4} of diagonal{}\n",
                    t.from,
                    t.to,
                    t.shared,
                    t.added,
                    t.removed,
                    t.median_ratio(),
                    if t.anchored { "" } else { " (no overlap, unanchored)" }
                ));
            }
            out.push_str(&format!("wrote {}\n", config.out.display()));
            Ok(out)
        }
        Command::Inspect { sidecar } => {
            let text = std::fs::read_to_string(&sidecar)
                .map_err(|e| Error::Validation(format!("cannot read {}: {e}", sidecar.display())))?;
            inspect(&text, &sidecar.display().to_string())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("SOFTMAP_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
