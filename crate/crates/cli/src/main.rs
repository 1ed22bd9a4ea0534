//! `storygrid` command-line tool.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use storygrid_core::analytics::DEFAULT_BREAK_GAP_S;
use storygrid_core::devlog::{parse_log, replay, ReplayConfig, ReplayReport};
use storygrid_core::persist::{load_poster, parse_manifest, save_layout, snapshot_to_json, PosterManifest};
use storygrid_server::http::serve as serve_http;
use storygrid_server::Hub;

#[derive(Parser)]
#[command(name = "storygrid", version, about = "Tangible multimedia poster board engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a token event log onto a poster.
    Replay {
        #[arg(long)]
        poster: PathBuf,
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability that a placement is lost to an antenna dead spot.
        #[arg(long, default_value_t = 0.0)]
        dead_spot_prob: f64,
        /// Gaps between operations at least this long (seconds) are breaks.
        #[arg(long, default_value_t = DEFAULT_BREAK_GAP_S)]
        break_gap: f64,
        /// Write the final layout snapshot here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the usage summary as JSON here.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Write the per-placement signal transcript (JSON-lines) here.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Usage statistics for a log.
    ///
    /// Operations are counted by interpreting the log against its poster:
    /// `--poster`, or `poster.json` next to the log when omitted.
    Stats {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        poster: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BREAK_GAP_S)]
        break_gap: f64,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Check a poster manifest.
    Validate {
        #[arg(long)]
        poster: PathBuf,
    },
    /// Run the session server.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: String,
        /// Posters to preload; more can be uploaded with POST /posters.
        #[arg(long)]
        poster: Vec<PathBuf>,
        /// Directory for saved layouts.
        #[arg(long)]
        layout_dir: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Replay {
            poster,
            log,
            seed,
            dead_spot_prob,
            break_gap,
            out,
            stats,
            transcript,
        } => {
            let config = ReplayConfig {
                seed,
                dead_spot_prob,
                break_gap_s: break_gap,
            };
            let report = run_replay(&poster, &log, &config)?;
            if let Some(path) = out {
                let snapshot = save_layout(&report.board, "final");
                write(&path, &snapshot_to_json(&snapshot))?;
            }
            if let Some(path) = stats {
                write(&path, &(serde_json::to_string_pretty(&report.summary)? + "\n"))?;
            }
            if let Some(path) = transcript {
                write(&path, &report.transcript_jsonl())?;
            }
            println!(
                "replayed {} placements ({} lost to dead spots): {} objects on board, {} off board",
                report.transcript.len() + report.dropped,
                report.dropped,
                report.board.len(),
                report.board.off_board().len()
            );
            print!("{}", report.summary.to_table());
        }
        Command::Stats {
            log,
            poster,
            break_gap,
            json,
        } => {
            let poster = match poster {
                Some(p) => p,
                None => sibling_poster(&log)?,
            };
            let config = ReplayConfig {
                break_gap_s: break_gap,
                ..ReplayConfig::default()
            };
            let report = run_replay(&poster, &log, &config)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report.summary)?);
            } else {
                print!("{}", report.summary.to_table());
            }
        }
        Command::Validate { poster } => {
            let manifest = read_manifest(&poster)?;
            let loaded = load_poster(&manifest);
            loaded
                .board
                .validate()
                .context("poster loads into an inconsistent board")?;
            println!(
                "ok: poster `{}` \"{}\" with {} objects",
                manifest.poster_id,
                manifest.title,
                manifest.objects.len()
            );
            match &manifest.initial_layout {
                Some(layout) => println!(
                    "initial layout `{}` places {} objects",
                    layout.name,
                    layout.entries.len()
                ),
                None => println!("no initial layout; objects are auto-placed"),
            }
            if !loaded.off_board.is_empty() {
                println!("{} objects start off-board", loaded.off_board.len());
            }
        }
        Command::Serve {
            addr,
            poster,
            layout_dir,
        } => serve(&addr, &poster, layout_dir)?,
    }
    Ok(())
}

fn read_manifest(path: &Path) -> Result<PosterManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_manifest(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run_replay(poster: &Path, log: &Path, config: &ReplayConfig) -> Result<ReplayReport> {
    let manifest = read_manifest(poster)?;
    let text = fs::read_to_string(log).with_context(|| format!("reading {}", log.display()))?;
    let events = parse_log(&text).with_context(|| format!("parsing {}", log.display()))?;
    Ok(replay(&manifest, &events, config)?)
}

fn sibling_poster(log: &Path) -> Result<PathBuf> {
    let candidate = log.parent().unwrap_or(Path::new(".")).join("poster.json");
    if !candidate.exists() {
        bail!(
            "no --poster given and {} does not exist; operations can only be counted against a poster",
            candidate.display()
        );
    }
    Ok(candidate)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn serve(addr: &str, posters: &[PathBuf], layout_dir: Option<PathBuf>) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let hub = match layout_dir {
        Some(dir) => Hub::with_layout_dir(dir),
        None => Hub::new(),
    };
    for path in posters {
        let id = hub.add_poster(read_manifest(path)?);
        println!("loaded poster `{id}` from {}", path.display());
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        println!("listening on http://{}", listener.local_addr()?);
        serve_http(listener, Arc::new(hub)).await?;
        Ok(())
    })
}
