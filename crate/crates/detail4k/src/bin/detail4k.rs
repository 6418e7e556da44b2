use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use detail4k::corpus::write_corpus;
use detail4k::ratings::{correlate, join, read_metrics, read_ratings, Metric};
use detail4k::scan::list_images;
use detail4k::{decode_file, encode_png, exit, scan_and_score, write_report, Format, ScanConfig};
use detail4k_core::conv::check::{dilation_suite, tiled_suite};
use detail4k_core::detail::{GlcmConfig, PoolMode};
use detail4k_core::flow::{train, Objective, SyntheticDataset, TrainConfig};
use detail4k_core::image::{to_grayscale, ImageU8};
use detail4k_core::jpeg::EncoderConfig;
use detail4k_core::stats::DatasetStats;
use detail4k_core::wavelet::{dwt_haar, Band, BandWeights};
use detail4k_core::Tensor;
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "detail4k",
    version,
    about = "Fine-detail image metrics and wavelet training tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    PerOffset,
    Accumulated,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Velocity,
    Noise,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    GlcmRaw,
    GlcmNormalized,
    CompressionRatio,
}

#[derive(Subcommand)]
enum Command {
    /// Score every PNG/JPEG under a directory.
    Score {
        dir: PathBuf,
        #[arg(long, default_value_t = 64)]
        patch_size: usize,
        #[arg(long, default_value_t = 64)]
        levels: usize,
        #[arg(long)]
        symmetric: bool,
        #[arg(long, value_enum, default_value = "per-offset")]
        pool_mode: PoolArg,
        /// JPEG quality for the compression ratio.
        #[arg(long, default_value_t = 95)]
        quality: u8,
        /// Worker threads (default: logical cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave elapsed_ms empty so identical inputs give identical reports.
        #[arg(long)]
        no_timing: bool,
    },
    /// Height/width statistics of the images under a directory.
    Stats {
        dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// SRCC and PLCC between a score CSV and a `path,rating` CSV.
    Correlate {
        metrics: PathBuf,
        ratings: PathBuf,
        /// Correlate 1/compression_ratio instead of the ratio.
        #[arg(long)]
        reciprocal: bool,
        /// Restrict to one metric column.
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
    },
    /// Write the four Haar sub-bands of an image's luma as PNGs.
    Dwt {
        image: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train the toy denoiser on synthetic textures and write a JSON report.
    Train {
        #[arg(long, value_enum, default_value = "velocity")]
        objective: ObjectiveArg,
        /// Band weights as ll,lh,hl,hh.
        #[arg(long, default_value = "1,1,1,1")]
        weights: String,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-2)]
        lr: f64,
        #[arg(long, default_value_t = 16)]
        size: usize,
        #[arg(long, default_value_t = 2)]
        channels: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write the trained parameters as a binary blob.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Run the tiled and dilation equivalence suites.
    ConvCheck {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the eight-image synthetic corpus for a seed.
    Corpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

type CmdResult = Result<(), Failure>;

fn io_err(context: impl std::fmt::Display) -> impl FnOnce(io::Error) -> Failure {
    move |e| Failure {
        code: exit::IO,
        message: format!("{context}: {e}"),
    }
}

fn contract(message: impl Into<String>) -> Failure {
    Failure {
        code: exit::CONTRACT,
        message: message.into(),
    }
}

fn core_err(e: detail4k_core::Error) -> Failure {
    let code = match e {
        detail4k_core::Error::Decode { .. } | detail4k_core::Error::Unsupported(_) => exit::IO,
        _ => exit::CONTRACT,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CmdResult {
    match out {
        Some(path) => {
            let mut file = io::BufWriter::new(File::create(path).map_err(io_err(path.display()))?);
            f(&mut file).map_err(io_err(path.display()))
        }
        None => f(&mut io::stdout().lock()).map_err(io_err("stdout")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score {
            dir,
            patch_size,
            levels,
            symmetric,
            pool_mode,
            quality,
            jobs,
            format,
            out,
            no_timing,
        } => score(
            &dir,
            ScanConfig {
                glcm: GlcmConfig {
                    levels,
                    patch_size,
                    symmetric,
                    pool: match pool_mode {
                        PoolArg::PerOffset => PoolMode::PerOffset,
                        PoolArg::Accumulated => PoolMode::Accumulated,
                    },
                    ..Default::default()
                },
                jpeg: EncoderConfig::with_quality(quality),
                jobs,
                timing: !no_timing,
            },
            match format {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            },
            out.as_deref(),
        ),
        Command::Stats { dir, jobs } => stats(&dir, jobs),
        Command::Correlate {
            metrics,
            ratings,
            reciprocal,
            metric,
        } => correlate_cmd(&metrics, &ratings, reciprocal, metric),
        Command::Dwt { image, out_dir } => dwt(&image, &out_dir),
        Command::Train {
            objective,
            weights,
            steps,
            seed,
            lr,
            size,
            channels,
            out,
            params,
        } => train_cmd(
            objective,
            &weights,
            steps,
            seed,
            lr,
            size,
            channels,
            &out,
            params.as_deref(),
        ),
        Command::ConvCheck { cases, seed } => conv_check(cases, seed),
        Command::Corpus { dir, seed } => write_corpus(&dir, seed).map_err(io_err(dir.display())),
    };
    match result {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}

fn score(dir: &Path, cfg: ScanConfig, format: Format, out: Option<&Path>) -> CmdResult {
    cfg.glcm.validate().map_err(core_err)?;
    if !(1..=100).contains(&cfg.jpeg.quality) {
        return Err(contract("quality must be in 1..=100"));
    }
    let report = scan_and_score(dir, &cfg).map_err(|e| Failure {
        code: exit::IO,
        message: e.to_string(),
    })?;
    let failed = report.records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!("{failed} of {} files could not be scored", report.records.len());
    }
    with_output(out, |w| write_report(&report, format, w).map_err(io::Error::other))
}

fn stats(dir: &Path, jobs: usize) -> CmdResult {
    let files = list_images(dir).map_err(|e| Failure {
        code: exit::IO,
        message: e.to_string(),
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| contract(e.to_string()))?;
    let dims: Vec<(u32, u32)> = pool.install(|| {
        files
            .par_iter()
            .filter_map(|(rel, path)| match decode_file(path) {
                Ok(img) => Some((img.width() as u32, img.height() as u32)),
                Err(e) => {
                    eprintln!("skipping {rel}: {e}");
                    None
                }
            })
            .collect()
    });
    let stats = DatasetStats::from_dims(&dims);
    with_output(None, |w| {
        serde_json::to_writer_pretty(&mut *w, &stats).map_err(io::Error::other)?;
        writeln!(w)
    })
}

fn correlate_cmd(metrics: &Path, ratings: &Path, reciprocal: bool, only: Option<MetricArg>) -> CmdResult {
    let open = |p: &Path| File::open(p).map(BufReader::new).map_err(io_err(p.display()));
    let bad_csv = |e: detail4k::ratings::RatingsError| Failure {
        code: exit::IO,
        message: e.to_string(),
    };
    let m = read_metrics(open(metrics)?).map_err(bad_csv)?;
    let r = read_ratings(open(ratings)?).map_err(bad_csv)?;
    let selected: Vec<Metric> = match only {
        None => Metric::ALL.to_vec(),
        Some(MetricArg::GlcmRaw) => vec![Metric::GlcmRaw],
        Some(MetricArg::GlcmNormalized) => vec![Metric::GlcmNormalized],
        Some(MetricArg::CompressionRatio) => vec![Metric::CompressionRatio],
    };
    println!("metric,n,srcc,plcc");
    for metric in selected {
        let recip = reciprocal && metric == Metric::CompressionRatio;
        let name = if recip { "1/compression_ratio" } else { metric.name() };
        let c = join(&m, &r, metric, recip)
            .and_then(|s| correlate(&s))
            .map_err(|e| contract(format!("{name}: {e}")))?;
        println!("{name},{},{:.6},{:.6}", c.n, c.srcc, c.plcc);
    }
    Ok(())
}

fn band_image(t: &Tensor<f64>, band: Band) -> ImageU8 {
    let (_, h, w) = t.shape();
    ImageU8::from_fn(w, h, 1, |x, y, _| {
        let v = t[(0, y, x)];
        let mapped = if band == Band::Ll { v / 2.0 } else { 128.0 + v / 2.0 };
        mapped.round().clamp(0.0, 255.0) as u8
    })
    .expect("valid dims")
}

fn dwt(image: &Path, out_dir: &Path) -> CmdResult {
    let img = decode_file(image).map_err(|e| Failure {
        code: exit::IO,
        message: format!("{}: {e}", image.display()),
    })?;
    let gray = to_grayscale(&img);
    let (w, h) = (gray.width() & !1, gray.height() & !1);
    if w == 0 || h == 0 {
        return Err(contract("image needs at least 2x2 pixels"));
    }
    let x = Tensor::from_fn((1, h, w), |_, y, xx| gray.pixel(xx, y)[0] as f64);
    let bands = dwt_haar(&x).map_err(core_err)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir.display()))?;
    for band in Band::ALL {
        let png = encode_png(&band_image(bands.band(band), band)).map_err(|e| Failure {
            code: exit::IO,
            message: e.to_string(),
        })?;
        let path = out_dir.join(format!("{}.png", band.name()));
        std::fs::write(&path, png).map_err(io_err(path.display()))?;
    }
    let e = bands.energies();
    println!("band,energy");
    for (band, energy) in Band::ALL.iter().zip(e) {
        println!("{},{energy}", band.name());
    }
    Ok(())
}

fn parse_weights(s: &str) -> Result<BandWeights, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| contract(format!("band weights {s:?}: {e}")))?;
    if v.len() != 4 {
        return Err(contract("band weights need four values: ll,lh,hl,hh"));
    }
    BandWeights::new(v[0], v[1], v[2], v[3]).map_err(core_err)
}

#[allow(clippy::too_many_arguments)]
fn train_cmd(
    objective: ObjectiveArg,
    weights: &str,
    steps: usize,
    seed: u64,
    lr: f64,
    size: usize,
    channels: usize,
    out: &Path,
    params: Option<&Path>,
) -> CmdResult {
    let cfg = TrainConfig {
        objective: match objective {
            ObjectiveArg::Velocity => Objective::Velocity,
            ObjectiveArg::Noise => Objective::Noise,
        },
        band_weights: parse_weights(weights)?,
        steps,
        seed,
        lr,
        ..Default::default()
    };
    let data = SyntheticDataset::new(channels, size, size).map_err(core_err)?;
    let report = train(&cfg, &data).map_err(core_err)?;
    with_output(Some(out), |w| {
        serde_json::to_writer_pretty(&mut *w, &report).map_err(io::Error::other)?;
        writeln!(w)
    })?;
    if let Some(path) = params {
        let blob = report.model().map_err(core_err)?.to_blob();
        std::fs::write(path, blob.to_bytes()).map_err(io_err(path.display()))?;
    }
    eprintln!(
        "loss {:.6} -> {:.6} over {steps} steps",
        report.initial_loss(),
        report.final_loss()
    );
    Ok(())
}

fn conv_check(cases: usize, seed: u64) -> CmdResult {
    let reports = [tiled_suite(cases, seed), dilation_suite(cases, seed)];
    let mut ok = true;
    for r in &reports {
        println!(
            "{}: {} cases, max-abs f32 {:.3e}, f64 {:.3e}: {}",
            r.name,
            r.cases,
            r.max_abs_f32,
            r.max_abs_f64,
            if r.passed() { "pass" } else { "FAIL" }
        );
        for f in &r.failures {
            println!("  {f}");
        }
        ok &= r.passed();
    }
    if ok {
        Ok(())
    } else {
        Err(Failure {
            code: exit::EQUIVALENCE,
            message: "equivalence check failed".into(),
        })
    }
}
