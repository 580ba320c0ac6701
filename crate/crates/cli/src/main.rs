use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};

use cvc_core::bitstream::{compute_bpp, compute_rate, read_stream, RateParams};
use cvc_core::fixtures::FixtureSpec;
use cvc_core::flow::{decode_flow_grid, quantize_grid, render_flow_arrows, sample_flow_grid};
use cvc_core::io::{read_flo, read_joints_jsonl, read_label_map};
use cvc_core::model::{level_preset, Modality, VideoMeta};
use cvc_core::motion::{decode_motion_frame, quantize_frame, render_motion_frame};
use cvc_core::pipeline::{decode_video, encode_video, write_decoded, DropoutConfig, EncodeManifest, ImageFormat};
use cvc_core::seg::{decode_seg_block, encode_seg_frame_with, render_seg_frame, DEFAULT_ORDER};
use cvc_core::{Error, Result};

#[derive(Parser)]
#[command(name = "cvc", version, about = "Conditional video coding: encode, decode and inspect condition streams")]
struct Cli {
    /// More log output (repeatable). CVC_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode extractor outputs described by a manifest into a .cvc stream.
    Encode(EncodeArgs),
    /// Decode a .cvc stream into condition frames and a manifest.
    Decode(DecodeArgs),
    /// Closed-form bitrate and bits per pixel.
    Rate(RateArgs),
    /// Print headers, flags and sizes of a .cvc stream.
    Inspect(InspectArgs),
    /// Rasterize a single condition file.
    Render(RenderArgs),
    /// Write the synthetic test corpus.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output stream.
    #[arg(long)]
    out: PathBuf,
    /// JSON rate report; defaults to <out>.report.json.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=3))]
    level: Option<u8>,
    /// Maximum keyframe interval in frames.
    #[arg(long)]
    interval: Option<u32>,
    /// Bézier order for segmentation contours.
    #[arg(long)]
    order: Option<u8>,
    #[arg(long, requires = "dropout_ratio")]
    dropout_seed: Option<u64>,
    #[arg(long, requires = "dropout_seed")]
    dropout_ratio: Option<f64>,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "png")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Png,
    Ppm,
}

impl From<Format> for ImageFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Png => ImageFormat::Png,
            Format::Ppm => ImageFormat::Ppm,
        }
    }
}

#[derive(Args)]
struct RateArgs {
    /// Keyframes plus caption, in KB.
    #[arg(long = "q-kb")]
    q_kb: f64,
    /// Clip length in frames.
    #[arg(long)]
    frames: u32,
    #[arg(long)]
    fps: u16,
    #[arg(long, default_value_t = 0)]
    persons: u32,
    #[arg(long)]
    width: u32,
    #[arg(long)]
    height: u32,
    /// Preset supplying stride and contour count.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=3))]
    level: Option<u8>,
    #[arg(long)]
    stride: Option<u32>,
    #[arg(long)]
    contours: Option<u32>,
    #[arg(long, default_value_t = u32::from(DEFAULT_ORDER))]
    order: u32,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct InspectArgs {
    input: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderModality {
    Seg,
    Motion,
    Flow,
}

#[derive(Args)]
struct RenderArgs {
    /// Raw condition block (.bin) or extractor output: label map (.png/.pgm),
    /// flow (.flo) or joints (.jsonl, first line).
    input: PathBuf,
    #[arg(long, value_enum)]
    modality: RenderModality,
    #[arg(long)]
    width: u32,
    #[arg(long)]
    height: u32,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), default_value_t = 1)]
    level: u8,
    #[arg(long)]
    stride: Option<u16>,
    #[arg(long)]
    contours: Option<u16>,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: u8,
    /// Output image; .ppm writes PPM, anything else PNG.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 192)]
    width: u32,
    #[arg(long, default_value_t = 128)]
    height: u32,
    #[arg(long, default_value_t = 16)]
    fps: u16,
    #[arg(long, default_value_t = 40)]
    frames: u32,
    /// Frame with a shot cut; 0 for none.
    #[arg(long, default_value_t = 20)]
    shot_at: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CVC_LOG", default)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.offset() {
                Some(off) => eprintln!("error code={} offset={off}: {e}", e.code()),
                None => eprintln!("error code={}: {e}", e.code()),
            }
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Rate(a) => rate(a),
        Command::Inspect(a) => inspect(a),
        Command::Render(a) => render(a),
        Command::Fixture(a) => fixture(a),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::from(e).in_file(path))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

fn encode(a: EncodeArgs) -> Result<()> {
    let manifest = EncodeManifest::load(&a.manifest)?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let inputs = manifest.load_inputs(base)?;
    let mut settings = manifest.settings();
    if let Some(l) = a.level {
        settings.level = l;
    }
    if let Some(w) = a.interval {
        settings.interval = w;
    }
    if let Some(n) = a.order {
        settings.order = n;
    }
    if let (Some(seed), Some(ratio)) = (a.dropout_seed, a.dropout_ratio) {
        settings.dropout = Some(DropoutConfig { seed, ratio });
    }
    debug!("settings {settings:?}");
    let encoded = encode_video(&inputs, &settings)?;
    write(&a.out, &encoded.stream)?;
    let report_path = a.report.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".report.json");
        PathBuf::from(p)
    });
    write(&report_path, &serde_json::to_vec_pretty(&encoded.report)?)?;
    info!(
        "{} clips, {} bytes -> {}",
        encoded.packages.len(),
        encoded.stream.len(),
        a.out.display()
    );
    println!(
        "clips={} bytes={} out={} report={}",
        encoded.packages.len(),
        encoded.stream.len(),
        a.out.display(),
        report_path.display()
    );
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let stream = read(&a.input)?;
    let clips = decode_video(&stream).map_err(|e| e.in_file(&a.input))?;
    let manifest = write_decoded(&a.out, &clips, a.format.into())?;
    let frames: usize = manifest.clips.iter().map(|c| c.frames.len()).sum();
    println!(
        "clips={} frames={} out={}",
        manifest.clips.len(),
        frames,
        a.out.join("manifest.json").display()
    );
    Ok(())
}

fn rate(a: RateArgs) -> Result<()> {
    let (mut stride, mut contours) = (None, 0);
    if let Some(id) = a.level {
        let lv = level_preset(id)?;
        stride = lv.flow_stride.map(u32::from);
        contours = lv.n_contours.map_or(0, u32::from);
    }
    if a.stride.is_some() {
        stride = a.stride;
    }
    if let Some(n) = a.contours {
        contours = n;
    }
    let params = RateParams {
        q_kb: a.q_kb,
        clip_frames: a.frames,
        fps: a.fps,
        persons: a.persons,
        height: a.height,
        width: a.width,
        stride,
        n_contours: contours,
        order: a.order,
    };
    let r = compute_rate(&params)?;
    let meta = VideoMeta::new(a.width, a.height, a.fps, a.frames.max(2))?;
    let bpp = compute_bpp(r, &meta);
    if a.json {
        let v = serde_json::json!({ "params": params, "rate_kbps": r, "bpp": bpp });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("R = {r:.4} KBps");
        println!("bpp = {bpp:.6}");
    }
    Ok(())
}

fn inspect(a: InspectArgs) -> Result<()> {
    let stream = read(&a.input)?;
    let packages = read_stream(&stream).map_err(|e| e.in_file(&a.input))?;
    if a.json {
        let clips: Vec<_> = packages
            .iter()
            .map(|p| {
                serde_json::json!({
                    "width": p.width,
                    "height": p.height,
                    "fps": p.fps,
                    "start": p.clip.start,
                    "end": p.clip.end,
                    "level": p.level_id,
                    "flags": p.flags,
                    "flags_byte": p.flags.to_byte(),
                    "stride": p.stride,
                    "n_contours": p.n_contours,
                    "order": p.order,
                    "first_kf_bytes": p.first_kf.len(),
                    "last_kf_bytes": p.last_kf.len(),
                    "caption": p.caption,
                    "condition_bytes": p.condition_payload_bytes(),
                    "overhead_bytes": p.container_overhead_bytes(),
                    "q_kb": p.q_kb(),
                })
            })
            .collect();
        let v = serde_json::json!({ "stream_bytes": stream.len(), "clips": clips });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(());
    }
    println!("stream {} bytes, {} clips", stream.len(), packages.len());
    for (i, p) in packages.iter().enumerate() {
        let roles: Vec<String> = Modality::ALL
            .iter()
            .map(|&m| format!("{}={:?}", m.name(), p.flags.get(m)))
            .collect();
        println!(
            "clip {i}: frames [{}, {}] {}x{}@{} level={} flags=0x{:02x} ({}) stride={} N={} n={} kf={}+{} B caption={:?} conditions={} B overhead={} B",
            p.clip.start,
            p.clip.end,
            p.width,
            p.height,
            p.fps,
            p.level_id,
            p.flags.to_byte(),
            roles.join(" "),
            p.stride,
            p.n_contours,
            p.order,
            p.first_kf.len(),
            p.last_kf.len(),
            p.caption,
            p.condition_payload_bytes(),
            p.container_overhead_bytes(),
        );
    }
    Ok(())
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

fn render(a: RenderArgs) -> Result<()> {
    let meta = VideoMeta::new(a.width, a.height, 1, 2)?;
    let level = level_preset(a.level)?;
    let ext = extension(&a.input);
    let img = match a.modality {
        RenderModality::Seg => {
            let n = a.contours.or(level.n_contours).unwrap_or(1);
            let code = if ext == "png" || ext == "pgm" {
                encode_seg_frame_with(&read_label_map(&a.input)?, n, a.order)?
            } else {
                decode_seg_block(&read(&a.input)?, n, a.order).map_err(|e| e.in_file(&a.input))?
            };
            render_seg_frame(&code, &meta)
        }
        RenderModality::Motion => {
            let frame = if ext == "jsonl" {
                let frames = read_joints_jsonl(&a.input)?;
                let first = frames
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::InvalidArgument("joints file has no lines".into()))?;
                quantize_frame(&first)?
            } else {
                decode_motion_frame(&read(&a.input)?).map_err(|e| e.in_file(&a.input))?
            };
            render_motion_frame(&frame, &meta)
        }
        RenderModality::Flow => {
            let stride = a.stride.or(level.flow_stride).unwrap_or(1);
            let grid = if ext == "flo" {
                quantize_grid(&sample_flow_grid(&read_flo(&a.input)?, stride)?)?
            } else {
                decode_flow_grid(&read(&a.input)?, &meta, stride).map_err(|e| e.in_file(&a.input))?
            };
            render_flow_arrows(&grid, &meta)
        }
    };
    let format = if extension(&a.out) == "ppm" { ImageFormat::Ppm } else { ImageFormat::Png };
    format.write(&img, &a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn fixture(a: FixtureArgs) -> Result<()> {
    let spec = FixtureSpec {
        width: a.width,
        height: a.height,
        fps: a.fps,
        frame_count: a.frames,
        shot_at: (a.shot_at > 0).then_some(a.shot_at),
    };
    fs::create_dir_all(&a.out).map_err(|e| Error::from(e).in_file(&a.out))?;
    let manifest = spec.write(&a.out)?;
    println!("manifest={}", manifest.display());
    Ok(())
}
