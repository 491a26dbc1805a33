//! `octseg` — segment speckled grayscale B-scans with a marker-controlled
//! watershed, or compare it against the plain watershed baseline.
//!
//! Exit codes: 0 success, 1 usage error (bad flags, missing input),
//! 2 processing error (unreadable image, degenerate configuration).
//! All file outputs are byte-identical across reruns with the same
//! arguments; timing appears only on stdout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use octseg_core::contour::ChanVeseParams;
use octseg_core::io::{
    read_gray, write_gray_pgm, write_gray_png, write_label_pgm, write_label_png, write_mask_png,
};
use octseg_core::octsim::{
    reconstruct_ascan, synth_interferogram, synth_phantom, SpectralScan, WindowKind,
};
use octseg_core::pipeline::{
    run_baseline, run_modified, FloodSource, ObjectPolarity, PipelineConfig, SegmentationReport,
};
use octseg_core::{Connectivity, GrayImage};

#[derive(Parser)]
#[command(
    name = "octseg",
    version,
    about = "Watershed segmentation of speckled B-scan images",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Marker-controlled watershed segmentation.
    ///
    /// Writes labels.pgm (16-bit), labels.png (colorized), and stats.csv
    /// to the output directory; with --dump-intermediates also binary.png,
    /// gradient.png, and lines.png. Prints one JSON metrics line.
    Segment(SegmentArgs),
    /// Plain watershed over the same relief: no markers, no preprocessing.
    ///
    /// Writes labels.pgm, labels.png, and stats.csv; with
    /// --dump-intermediates also gradient.png and lines.png. Prints one
    /// JSON metrics line.
    Baseline(SegmentArgs),
    /// Generate a synthetic sac phantom.
    ///
    /// Writes phantom.pgm, phantom.png, truth.pgm (16-bit labels), and
    /// truth.png to the output directory.
    Synth(SynthArgs),
    /// Reconstruct a depth profile from a synthetic interferogram.
    ///
    /// Writes ascan.csv (`bin,magnitude` rows) to the output directory.
    Ascan(AscanArgs),
    /// Run both segmenters on the same input and report both metrics.
    ///
    /// Writes modified.labels.pgm/.png, modified.stats.csv,
    /// baseline.labels.pgm/.png, and baseline.stats.csv. Prints one JSON
    /// metrics line per segmenter plus a summary line with the timing
    /// ratio.
    Compare(SegmentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ConnArg {
    Four,
    Eight,
}

#[derive(Clone, Copy, ValueEnum)]
enum FloodArg {
    Gradient,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectsArg {
    Dark,
    Bright,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    None,
    Hann,
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(0.0..=255.0).contains(&v) {
        return Err(format!("threshold must be in [0, 255], got {v}"));
    }
    Ok(v)
}

#[derive(Args)]
struct SegmentArgs {
    /// Input image (PGM or grayscale PNG).
    #[arg(short, long, required_unless_present = "volume", conflicts_with = "volume")]
    input: Option<PathBuf>,
    /// Directory of B-scan images, each segmented independently; outputs
    /// are prefixed with the source file stem.
    #[arg(long, value_name = "DIR")]
    volume: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(short, long)]
    outdir: PathBuf,
    /// Binary-extraction threshold in [0, 255].
    #[arg(long, default_value_t = 245.0, value_parser = parse_threshold)]
    threshold: f64,
    /// Pixel adjacency for flooding and component analysis.
    #[arg(long, value_enum, default_value_t = ConnArg::Four)]
    conn: ConnArg,
    /// Relief to flood: the Sobel gradient magnitude or raw intensities.
    #[arg(long, value_enum, default_value_t = FloodArg::Gradient)]
    flood_on: FloodArg,
    /// Whether objects are dark on bright ground or the reverse.
    #[arg(long, value_enum, default_value_t = ObjectsArg::Dark)]
    objects: ObjectsArg,
    /// Multiply the image by a 2D raised-cosine taper first.
    #[arg(long)]
    hann_taper: bool,
    /// Marker-stage smoothing disk radius (default scales with image size).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    fg_se_radius: Option<u32>,
    /// Active-contour length penalty.
    #[arg(long, default_value_t = 0.25)]
    cv_mu: f64,
    /// Active-contour iteration cap.
    #[arg(long, default_value_t = 200)]
    cv_iters: usize,
    /// Active-contour convergence tolerance (fraction of pixels).
    #[arg(long, default_value_t = 1e-3)]
    cv_tol: f64,
    /// Also write the stage images next to the labels.
    #[arg(long)]
    dump_intermediates: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of sacs to place.
    #[arg(long, default_value_t = 12)]
    sacs: u32,
    /// Generator seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Image size as WIDTHxHEIGHT, e.g. 512x512.
    #[arg(long, default_value = "512x512", value_parser = parse_size)]
    size: (u32, u32),
    /// Multiplicative speckle sigma (0 disables noise).
    #[arg(long, default_value_t = 0.25)]
    speckle: f64,
    /// Output directory (created if missing).
    #[arg(short, long)]
    outdir: PathBuf,
}

#[derive(Args)]
struct AscanArgs {
    /// Number of spectral samples.
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Reflector as DEPTH_BIN:AMPLITUDE; repeat for multiple reflectors.
    #[arg(long = "reflector", value_parser = parse_reflector, required = true)]
    reflectors: Vec<(usize, f64)>,
    /// Spectral window applied before the transform.
    #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
    window: WindowArg,
    /// Output directory (created if missing).
    #[arg(short, long)]
    outdir: PathBuf,
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{s}` is not WIDTHxHEIGHT"))?;
    let w: u32 = w.parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h: u32 = h.parse().map_err(|_| format!("bad height in `{s}`"))?;
    if w == 0 || h == 0 {
        return Err("size must be positive".into());
    }
    Ok((w, h))
}

fn parse_reflector(s: &str) -> Result<(usize, f64), String> {
    let (bin, amp) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not DEPTH_BIN:AMPLITUDE"))?;
    let bin: usize = bin.parse().map_err(|_| format!("bad depth bin in `{s}`"))?;
    let amp: f64 = amp.parse().map_err(|_| format!("bad amplitude in `{s}`"))?;
    Ok((bin, amp))
}

/// Failures after argument parsing: input that is missing entirely is a
/// usage error; everything downstream is a processing error.
enum RunError {
    Usage(String),
    Processing(String),
}

impl From<octseg_core::Error> for RunError {
    fn from(e: octseg_core::Error) -> Self {
        RunError::Processing(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Processing(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Processing(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<(), RunError> {
    match cmd {
        Command::Segment(args) => run_segmenters(&args, Mode::Modified),
        Command::Baseline(args) => run_segmenters(&args, Mode::Baseline),
        Command::Compare(args) => run_segmenters(&args, Mode::Compare),
        Command::Synth(args) => run_synth(&args),
        Command::Ascan(args) => run_ascan(&args),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Modified,
    Baseline,
    Compare,
}

fn config_from(args: &SegmentArgs) -> PipelineConfig {
    PipelineConfig {
        threshold: args.threshold,
        conn: match args.conn {
            ConnArg::Four => Connectivity::Four,
            ConnArg::Eight => Connectivity::Eight,
        },
        flood_on: match args.flood_on {
            FloodArg::Gradient => FloodSource::Gradient,
            FloodArg::Raw => FloodSource::Raw,
        },
        objects: match args.objects {
            ObjectsArg::Dark => ObjectPolarity::Dark,
            ObjectsArg::Bright => ObjectPolarity::Bright,
        },
        hann_taper: args.hann_taper,
        fg_se_radius: args.fg_se_radius,
        chan_vese: ChanVeseParams {
            mu: args.cv_mu,
            max_iters: args.cv_iters,
            tol: args.cv_tol,
            ..ChanVeseParams::default()
        },
        ..PipelineConfig::default()
    }
}

fn run_segmenters(args: &SegmentArgs, mode: Mode) -> Result<(), RunError> {
    let cfg = config_from(args);
    std::fs::create_dir_all(&args.outdir)?;
    let inputs = collect_inputs(args)?;
    for (path, prefix) in &inputs {
        let img = read_gray(path)?;
        let input_name = path.display().to_string();
        match mode {
            Mode::Modified => {
                let report = run_modified(&img, &cfg)?;
                write_outputs(&args.outdir, prefix, "", &report, args.dump_intermediates)?;
                println!("{}", metrics_line("segment", &input_name, &report));
            }
            Mode::Baseline => {
                let report = run_baseline(&img, &cfg)?;
                write_outputs(&args.outdir, prefix, "", &report, args.dump_intermediates)?;
                println!("{}", metrics_line("baseline", &input_name, &report));
            }
            Mode::Compare => {
                let modified = run_modified(&img, &cfg)?;
                let baseline = run_baseline(&img, &cfg)?;
                write_outputs(&args.outdir, prefix, "modified.", &modified, false)?;
                write_outputs(&args.outdir, prefix, "baseline.", &baseline, false)?;
                println!("{}", metrics_line("modified", &input_name, &modified));
                println!("{}", metrics_line("baseline", &input_name, &baseline));
                println!(
                    "{{\"mode\":\"compare\",\"input\":\"{}\",\"region_ratio_baseline_over_modified\":{},\"timing_ratio_modified_over_baseline\":{}}}",
                    json_escape(&input_name),
                    baseline.n_regions as f64 / modified.n_regions as f64,
                    modified.elapsed_ms / baseline.elapsed_ms,
                );
            }
        }
    }
    Ok(())
}

/// Resolves -i/--volume into (path, output-prefix) pairs. Volume mode
/// sorts by file name so runs are reproducible, and prefixes outputs with
/// each source stem.
fn collect_inputs(args: &SegmentArgs) -> Result<Vec<(PathBuf, String)>, RunError> {
    if let Some(input) = &args.input {
        if !input.is_file() {
            return Err(RunError::Usage(format!(
                "input file not found: {}",
                input.display()
            )));
        }
        return Ok(vec![(input.clone(), String::new())]);
    }
    let dir = args.volume.as_ref().expect("clap enforces input xor volume");
    if !dir.is_dir() {
        return Err(RunError::Usage(format!(
            "volume directory not found: {}",
            dir.display()
        )));
    }
    let mut slices = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_image = path.is_file()
            && path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pgm" | "png"));
        if is_image {
            slices.push(path);
        }
    }
    slices.sort();
    if slices.is_empty() {
        return Err(RunError::Processing(format!(
            "no .pgm or .png images in {}",
            dir.display()
        )));
    }
    Ok(slices
        .into_iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let prefix = format!("{stem}.");
            (p, prefix)
        })
        .collect())
}

fn write_outputs(
    outdir: &Path,
    prefix: &str,
    kind: &str,
    report: &SegmentationReport,
    dump: bool,
) -> Result<(), RunError> {
    let file = |name: &str| outdir.join(format!("{prefix}{kind}{name}"));
    write_label_pgm(&report.labels, file("labels.pgm"))?;
    write_label_png(&report.labels, file("labels.png"))?;
    write_stats_csv(&file("stats.csv"), report)?;
    if dump {
        if let Some(inter) = &report.intermediates {
            if let Some(binary) = &inter.binary {
                write_mask_png(binary, file("binary.png"))?;
            }
            if let Some(gradient) = &inter.gradient {
                // The Sobel magnitude overshoots 8 bits; rescale for viewing.
                let (_, hi) = gradient.min_max();
                let scale = if hi > 0.0 { 255.0 / hi } else { 1.0 };
                write_gray_png(&gradient.map(|v| v * scale), file("gradient.png"))?;
            }
            write_mask_png(&inter.watershed_lines, file("lines.png"))?;
        }
    }
    Ok(())
}

fn write_stats_csv(path: &Path, report: &SegmentationReport) -> Result<(), RunError> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "label,area_px,cx,cy,x0,y0,x1,y1")?;
    for s in &report.region_stats {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.label, s.area_px, s.cx, s.cy, s.x0, s.y0, s.x1, s.y1
        )?;
    }
    Ok(())
}

fn metrics_line(mode: &str, input: &str, report: &SegmentationReport) -> String {
    format!(
        "{{\"mode\":\"{}\",\"input\":\"{}\",\"n_regions\":{},\"watershed_pixels\":{},\"elapsed_ms\":{}}}",
        mode,
        json_escape(input),
        report.n_regions,
        report.watershed_pixels,
        report.elapsed_ms,
    )
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn run_synth(args: &SynthArgs) -> Result<(), RunError> {
    let (width, height) = args.size;
    std::fs::create_dir_all(&args.outdir)?;
    let ph = synth_phantom(width, height, args.sacs, 220.0, 40.0, args.speckle, args.seed)?;
    write_gray_pgm(&ph.image, args.outdir.join("phantom.pgm"))?;
    write_gray_png(&ph.image, args.outdir.join("phantom.png"))?;
    write_label_pgm(&ph.truth, args.outdir.join("truth.pgm"))?;
    write_label_png(&ph.truth, args.outdir.join("truth.png"))?;
    println!(
        "{{\"mode\":\"synth\",\"seed\":{},\"n_sacs\":{},\"width\":{},\"height\":{},\"speckle\":{}}}",
        args.seed, ph.n_sacs, width, height, args.speckle,
    );
    Ok(())
}

fn run_ascan(args: &AscanArgs) -> Result<(), RunError> {
    use std::io::Write;
    std::fs::create_dir_all(&args.outdir)?;
    let scan = synth_interferogram(&args.reflectors, args.n, 0.0, 0)?;
    // The interferogram rides on a unit background; remove it so its
    // leakage under the window cannot outweigh a genuine shallow
    // reflector.
    let mean = scan.samples().iter().sum::<f64>() / scan.len() as f64;
    let centered: Vec<f64> = scan.samples().iter().map(|v| v - mean).collect();
    let scan = SpectralScan::new(centered)?;
    let window = match args.window {
        WindowArg::None => WindowKind::None,
        WindowArg::Hann => WindowKind::Hann,
    };
    let profile = reconstruct_ascan(&scan, window)?;
    let path = args.outdir.join("ascan.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "bin,magnitude").map_err(RunError::from)?;
    for (bin, mag) in profile.magnitudes().iter().enumerate() {
        writeln!(out, "{bin},{mag}").map_err(RunError::from)?;
    }
    drop(out);
    let peak = profile.peak_bin().unwrap_or(0);
    println!(
        "{{\"mode\":\"ascan\",\"n\":{},\"window\":\"{}\",\"peak_bin\":{}}}",
        args.n,
        match args.window {
            WindowArg::None => "none",
            WindowArg::Hann => "hann",
        },
        peak,
    );
    Ok(())
}
