mod config;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use singit_core::data::{self, Manifest, SeparatorAdapter, UtteranceKind, ACCOMPANIMENT_STEM, VOCALS_STEM};
use singit_core::dsp::{log_spectrogram, SAMPLE_RATE};
use singit_core::model::Checkpoint;
use singit_core::pipeline::{self, EncoderEmbedding, TransferOptions};
use singit_core::speaker::{embed_speaker, embed_utterance, SpeakerEmbedding};
use singit_core::stats::{parse_ratings, survey_stats};
use singit_core::training::{train_loop, TrainOutput, TrainingItem};

use config::{flag, process_env, Settings};

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Zero-shot speech-to-singing style transfer.
#[derive(Debug, Parser)]
#[command(name = "singit", version)]
struct Cli {
    /// TOML config file; falls back to $SINGIT_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a manifest from a speaker-per-directory tree.
    Ingest(IngestArgs),
    /// Split a song into vocals.wav and accompaniment.wav via the external separator.
    Separate(SeparateArgs),
    /// Compute a speaker embedding from one or more utterances.
    Embed(EmbedArgs),
    /// Train the autoencoder by self-reconstruction.
    Train(TrainArgs),
    /// Re-sing vocals in the voice of a target speaker.
    Transfer(TransferArgs),
    /// Resynthesize audio from its own log-spectrogram with Griffin-Lim.
    Vocode(VocodeArgs),
    /// Mean and 95% confidence half-width of 1-5 ratings.
    ///
    /// The interval is Student-t: t(0.975, n-1) * s / sqrt(n) with the sample
    /// standard deviation s. A single rating reports a zero half-width.
    /// Ratings are read one integer per line from --file or standard input.
    SurveyStats(SurveyArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Directory with one subdirectory per speaker.
    #[arg(long)]
    root: PathBuf,
    /// Manifest to write.
    #[arg(long)]
    out: PathBuf,
    /// Kind for directories without a .kind tag file.
    #[arg(long, default_value = "speech", value_parser = parse_kind)]
    kind: UtteranceKind,
}

#[derive(Debug, Args)]
struct SeparateArgs {
    #[arg(long)]
    song: PathBuf,
    /// Directory receiving the two stems.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// Utterances of one speaker.
    #[arg(long, required = true, num_args = 1..)]
    speech: Vec<PathBuf>,
    /// Embedding file to write (256 little-endian f32 values).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "baseline")]
    backend: String,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Receives loss.csv, periodic checkpoints and final.ckpt.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    crop_frames: Option<usize>,
    #[arg(long)]
    lambda3: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    checkpoint_every: Option<u64>,
}

#[derive(Debug, Args)]
struct TransferArgs {
    /// Full song; separated, converted and remixed.
    #[arg(long, conflicts_with = "vocals", required_unless_present = "vocals")]
    song: Option<PathBuf>,
    /// Already isolated vocals; converted only.
    #[arg(long)]
    vocals: Option<PathBuf>,
    /// Utterances of the target speaker.
    #[arg(long, num_args = 1.., required_unless_present = "embedding")]
    speech: Vec<PathBuf>,
    /// Precomputed target embedding instead of --speech.
    #[arg(long, conflicts_with = "speech")]
    embedding: Option<PathBuf>,
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Condition the encoder on the singer's own embedding instead of the target's.
    #[arg(long)]
    source_embedding: bool,
    #[arg(long)]
    gl_iters: Option<usize>,
    #[arg(long)]
    gl_seed: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    vocal_gain: f64,
}

#[derive(Debug, Args)]
struct VocodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    gl_iters: Option<usize>,
    #[arg(long)]
    gl_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SurveyArgs {
    /// Ratings file; standard input when absent.
    #[arg(long)]
    file: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<UtteranceKind, String> {
    s.parse().map_err(|e: singit_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
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
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let settings = Settings::load(cli.config.as_deref(), &process_env)?;
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Separate(a) => separate(a, &settings),
        Command::Embed(a) => embed(a),
        Command::Train(a) => train(a, settings),
        Command::Transfer(a) => transfer(a, settings),
        Command::Vocode(a) => vocode(a, settings),
        Command::SurveyStats(a) => survey(a),
    }
}

fn ingest(a: IngestArgs) -> Result<()> {
    let report = data::ingest(&a.root, a.kind)?;
    report.manifest.write(&a.out)?;
    println!(
        "{} entries written to {} ({} non-audio files skipped)",
        report.manifest.len(),
        a.out.display(),
        report.skipped
    );
    Ok(())
}

fn adapter(settings: &Settings) -> Result<SeparatorAdapter> {
    match &settings.separator_cmd {
        Some(cmd) => Ok(SeparatorAdapter::new(cmd.clone())?),
        None => Ok(SeparatorAdapter::from_env()?),
    }
}

fn separate(a: SeparateArgs, settings: &Settings) -> Result<()> {
    let stems = adapter(settings)?.separate_into(&a.song, &a.out_dir)?;
    println!(
        "{} and {} written to {} ({} / {} samples)",
        VOCALS_STEM,
        ACCOMPANIMENT_STEM,
        a.out_dir.display(),
        stems.vocals.len(),
        stems.instrumental.len()
    );
    Ok(())
}

fn embed(a: EmbedArgs) -> Result<()> {
    let waves = pipeline::load_all(&a.speech)?;
    let e = embed_speaker(&waves, &a.backend)?;
    e.write(&a.out)?;
    println!("embedding of {} utterances written to {}", waves.len(), a.out.display());
    Ok(())
}

fn train(a: TrainArgs, mut s: Settings) -> Result<()> {
    let t = &mut s.train;
    flag(&mut t.max_steps, a.max_steps);
    flag(&mut t.lr, a.lr);
    flag(&mut t.batch_size, a.batch_size);
    flag(&mut t.crop_frames, a.crop_frames);
    flag(&mut t.lambda3, a.lambda3);
    flag(&mut t.seed, a.seed);
    flag(&mut t.checkpoint_every, a.checkpoint_every);
    s.model.validate()?;
    s.stft.validate()?;
    if s.stft.sample_rate != SAMPLE_RATE {
        bail!("stft.sample_rate must be {SAMPLE_RATE}; audio is resampled to it on load");
    }
    if s.stft.freq_bins() != s.model.freq_bins {
        bail!(
            "stft yields {} bins but model.freq_bins is {}",
            s.stft.freq_bins(),
            s.model.freq_bins
        );
    }

    let manifest = Manifest::read(&a.manifest)?;
    manifest.validate()?;
    let mut items = Vec::new();
    for entry in &manifest.entries {
        if !matches!(entry.kind, UtteranceKind::Speech | UtteranceKind::Singing) {
            continue;
        }
        let w = data::load_audio(&entry.path)?;
        let embedding = embed_utterance(&w, "baseline")
            .with_context(|| format!("embedding {}", entry.path.display()))?;
        if embedding.dim() != s.model.emb_dim {
            bail!("embeddings have {} values but model.emb_dim is {}", embedding.dim(), s.model.emb_dim);
        }
        items.push(TrainingItem {
            spectrogram: log_spectrogram(&w, &s.stft)?.into_values(),
            embedding,
            kind: entry.kind,
        });
    }
    if items.is_empty() {
        bail!("manifest {} has no speech or singing entries", a.manifest.display());
    }
    info!("training on {} utterances", items.len());
    let out = TrainOutput {
        dir: a.out_dir.clone(),
        stft: s.stft,
    };
    let outcome = train_loop(&items, &s.model, &s.train, Some(&out))?;
    let final_path = a.out_dir.join("final.ckpt");
    Checkpoint::new(outcome.params, s.train.max_steps, s.stft).save(&final_path)?;
    if let Some(last) = outcome.curve.last() {
        println!(
            "{} steps, final total loss {:.6}; checkpoint {}",
            outcome.curve.len(),
            last.total,
            final_path.display()
        );
    } else {
        println!("0 steps; initial checkpoint {}", final_path.display());
    }
    Ok(())
}

fn transfer(a: TransferArgs, mut s: Settings) -> Result<()> {
    flag(&mut s.griffin_lim.iters, a.gl_iters);
    flag(&mut s.griffin_lim.seed, a.gl_seed);
    let opts = TransferOptions {
        griffin_lim: s.griffin_lim,
        encoder_embedding: if a.source_embedding {
            EncoderEmbedding::Source
        } else {
            EncoderEmbedding::Target
        },
        vocal_gain: a.vocal_gain,
        ..TransferOptions::default()
    };
    // resolve the separator before loading anything heavy
    let sep = match &a.song {
        Some(_) => Some(adapter(&s)?),
        None => None,
    };
    let ckpt = Checkpoint::load(&a.ckpt)?;
    let target = match &a.embedding {
        Some(p) => SpeakerEmbedding::read(p)?,
        None => embed_speaker(&pipeline::load_all(&a.speech)?, &opts.embedding_backend)?,
    };
    let out = match (a.song.as_deref(), sep) {
        (Some(song), Some(sep)) => {
            let stems = sep.separate(song)?;
            let converted = pipeline::transfer_with_embedding(&stems.vocals, &target, &ckpt, &opts)?;
            data::remix(&converted.waveform, &stems.instrumental, opts.vocal_gain)?
        }
        _ => {
            let vocals = data::load_audio(a.vocals.as_deref().expect("clap enforces --song or --vocals"))?;
            pipeline::transfer_with_embedding(&vocals, &target, &ckpt, &opts)?.waveform
        }
    };
    write_output(&a.out, &out)
}

fn vocode(a: VocodeArgs, mut s: Settings) -> Result<()> {
    flag(&mut s.griffin_lim.iters, a.gl_iters);
    flag(&mut s.griffin_lim.seed, a.gl_seed);
    let w = data::load_audio(&a.input)?;
    let out = pipeline::vocode(&w, &s.stft, &s.griffin_lim)?;
    write_output(&a.out, &out)
}

fn write_output(path: &Path, w: &singit_core::Waveform) -> Result<()> {
    data::write_wav(path, w)?;
    println!("{:.2} s written to {}", w.duration_secs(), path.display());
    Ok(())
}

fn survey(a: SurveyArgs) -> Result<()> {
    let text = match &a.file {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    let stats = survey_stats(&parse_ratings(&text)?)?;
    println!("{stats}");
    if stats.degenerate {
        eprintln!("note: a single rating has no confidence interval");
    }
    Ok(())
}
