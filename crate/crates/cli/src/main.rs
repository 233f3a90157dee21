use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pvseg::config::{parse_kv, resolve, RunConfig};
use pvseg::{pipeline, serve, CliError};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pvseg",
    version,
    about = "Segment presentation videos and build browsable timelines"
)]
struct Cli {
    /// Worker threads for parallel stages (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage whose inputs are given, then build the timeline.
    Analyze(RunArgs),
    /// MFCC features, speaker change points and the audio activity graph.
    SegmentAudio(RunArgs),
    /// Frame histograms, shot boundaries, activity graph and keyframes.
    SegmentVideo(RunArgs),
    /// Match theme and slide phrases against a transcript.
    IndexText(RunArgs),
    /// Group audio segments into speakers.
    Cluster(RunArgs),
    /// Build timeline.json and timeline.svg from stage outputs, or render an existing document.
    Render {
        #[command(flatten)]
        run: RunArgs,
        /// Render this timeline document instead of building one.
        #[arg(long)]
        doc: Option<PathBuf>,
        /// Where to write the SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Serve an output directory over HTTP for the timeline browser (GET only).
    Serve {
        #[arg(long, default_value = "out")]
        dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    /// WAV file (PCM or float, mono or stereo).
    #[arg(long)]
    audio: Option<String>,
    /// Directory of PGM/PPM frames or a Y4M file.
    #[arg(long)]
    frames: Option<String>,
    /// Histogram cache written by an earlier run.
    #[arg(long)]
    histograms: Option<String>,
    /// Timed CSV (word,t_start,t_end) or plain text transcript.
    #[arg(long)]
    transcript: Option<String>,
    /// Theme phrase list, one per line.
    #[arg(long)]
    themes: Option<String>,
    /// Slide text; each line becomes a topic phrase.
    #[arg(long)]
    slides: Option<String>,
    #[arg(long)]
    fps: Option<f64>,
    #[arg(long)]
    video_id: Option<String>,
    #[arg(long)]
    frames_per_pixel: Option<f64>,
    /// Any config key, e.g. --set bic.lambda=1.0 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn resolve(&self, threads: Option<usize>) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => parse_kv(
                &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            )
            .with_context(|| format!("parsing {}", p.display()))?,
            None => BTreeMap::new(),
        };
        let mut flags = BTreeMap::new();
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got '{kv}'");
            };
            flags.insert(k.trim().to_string(), v.trim().to_string());
        }
        let named = [
            ("out", self.out.clone()),
            ("audio", self.audio.clone()),
            ("frames", self.frames.clone()),
            ("histograms", self.histograms.clone()),
            ("transcript", self.transcript.clone()),
            ("themes", self.themes.clone()),
            ("slides", self.slides.clone()),
            ("fps", self.fps.map(|v| v.to_string())),
            ("video_id", self.video_id.clone()),
            (
                "timeline.frames_per_pixel",
                self.frames_per_pixel.map(|v| v.to_string()),
            ),
            ("threads", threads.map(|v| v.to_string())),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                flags.insert(k.to_string(), v);
            }
        }
        RunConfig::from_map(resolve(&file, &flags)?)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let usage = |e: anyhow::Error| CliError::Usage(format!("{e:#}"));
    let cfg = match &cli.command {
        Command::Analyze(a)
        | Command::SegmentAudio(a)
        | Command::SegmentVideo(a)
        | Command::IndexText(a)
        | Command::Cluster(a)
        | Command::Render { run: a, .. } => Some(a.resolve(cli.threads).map_err(usage)?),
        Command::Serve { .. } => None,
    };
    let threads = cfg.as_ref().map_or(cli.threads.unwrap_or(0), |c| c.threads);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }

    match (cli.command, cfg) {
        (Command::Analyze(_), Some(cfg)) => {
            let s = pipeline::analyze(&cfg)?;
            if let Some(a) = &s.audio {
                println!(
                    "audio: {:.1} s, {} speaker changes",
                    a.duration_s, a.boundaries
                );
            }
            if let Some(v) = &s.video {
                println!(
                    "video: {} frames, {} shot boundaries",
                    v.frames, v.boundaries
                );
            }
            if let Some(h) = s.hits {
                println!("text: {h} phrase hits");
            }
            if let Some(c) = s.clusters {
                println!("speakers: {c} clusters");
            }
            println!("timeline: {}", s.timeline.display());
        }
        (Command::SegmentAudio(_), Some(cfg)) => {
            let a = pipeline::segment_audio(&cfg)?;
            println!(
                "audio: {:.1} s, {} speaker changes",
                a.duration_s, a.boundaries
            );
        }
        (Command::SegmentVideo(_), Some(cfg)) => {
            let v = pipeline::segment_video(&cfg)?;
            println!(
                "video: {} frames, {} shot boundaries",
                v.frames, v.boundaries
            );
        }
        (Command::IndexText(_), Some(cfg)) => {
            println!("text: {} phrase hits", pipeline::index_text(&cfg)?);
        }
        (Command::Cluster(_), Some(cfg)) => {
            println!("speakers: {} clusters", pipeline::cluster(&cfg)?.len());
        }
        (Command::Render { doc, svg, .. }, Some(cfg)) => {
            let out = pipeline::render(&cfg, doc.as_deref(), svg.as_deref())?;
            println!("timeline: {}", out.display());
        }
        (Command::Serve { dir, host, port }, _) => {
            let stage = |e: std::io::Error| CliError::Stage {
                stage: "serve",
                source: e.into(),
            };
            let server = serve::bind(&format!("{host}:{port}")).map_err(stage)?;
            println!(
                "serving {} on http://{}",
                dir.display(),
                server.server_addr()
            );
            serve::run(&server, &dir).map_err(stage)?;
        }
        (_, None) => unreachable!("run commands always resolve a config"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
