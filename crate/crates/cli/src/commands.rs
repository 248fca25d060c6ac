use clap::{Args, Parser, Subcommand};
use phasekit::apps::{self, PredictionConfig, TemporalBand, TransferConfig};
use phasekit::config::Config;
use phasekit::io::{self, BitDepth, Precision};
use phasekit::loss::{optimize_transfer, LossWeights};
use phasekit::motion::{phase_delta, smooth_deltas, FlowParams};
use phasekit::pyramid::{decompose_with_bank, reconstruct, FilterBank, PyramidSpec};
use phasekit::synth::{self, Motion, SynthSpec, Texture};
use phasekit::{split_channels, Error, Frame};
use std::fmt;
use std::path::PathBuf;

/// Error surface of the CLI: everything is either a usage problem (exit 1)
/// or a data/format problem (exit 2).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Usage(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(
    name = "phasekit",
    version,
    about = "Phase-based motion analysis: steerable-pyramid decomposition, flow, prediction, magnification, and motion transfer"
)]
pub struct Cli {
    /// Config file (key = value under `[section]` headers); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for internal parallelism (0 = machine parallelism).
    /// Outputs are bit-identical regardless of this setting.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct PyramidArgs {
    /// Pyramid scale count.
    #[arg(long)]
    scales: Option<usize>,
    /// Orientation band count.
    #[arg(long)]
    orients: Option<usize>,
    /// Smallest allowed oriented-subband side, px.
    #[arg(long)]
    min_band: Option<usize>,
}

impl PyramidArgs {
    fn spec(&self, cfg: &Config) -> Result<PyramidSpec, CliError> {
        Ok(PyramidSpec::new(
            self.scales.unwrap_or(cfg.pyramid.scales),
            self.orients.unwrap_or(cfg.pyramid.orientations),
            self.min_band.unwrap_or(cfg.pyramid.min_band),
        )?)
    }
}

#[derive(Args, Clone, Copy)]
struct TransferArgs {
    /// Motion gain (1 = faithful, >1 magnifies, negative inverts).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Zero deltas below this fraction of the per-band max source amplitude.
    #[arg(long)]
    gate: Option<f64>,
    /// Temporal smoothing strength for injected deltas.
    #[arg(long)]
    lambda_t: Option<f64>,
    /// Pyramid scale feeding the appearance-correlation map.
    #[arg(long)]
    corr_layer: Option<usize>,
    /// Weight injected deltas by target/source appearance correlation.
    #[arg(long)]
    corr_weighting: bool,
}

impl TransferArgs {
    fn config(&self, cfg: &Config, spec: &PyramidSpec) -> TransferConfig {
        TransferConfig {
            alpha: self.alpha.unwrap_or(cfg.transfer.alpha),
            amplitude_gate: self.gate.unwrap_or(cfg.transfer.amplitude_gate),
            lambda_t: self.lambda_t.unwrap_or(cfg.transfer.lambda_t),
            correlation_layer: self
                .corr_layer
                .or(cfg.transfer.correlation_layer)
                .unwrap_or(spec.scales - 1),
            use_correlation_weighting: self.corr_weighting
                || cfg.transfer.use_correlation_weighting,
        }
    }
}

fn parse_depth(s: &str) -> Result<BitDepth, String> {
    match s {
        "8" => Ok(BitDepth::Eight),
        "16" => Ok(BitDepth::Sixteen),
        other => Err(format!("output depth must be 8 or 16, got {other}")),
    }
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    match s {
        "f64" => Ok(Precision::F64),
        "f32" => Ok(Precision::F32),
        other => Err(format!("precision must be f32 or f64, got {other}")),
    }
}

fn parse_affine(s: &str) -> Result<[f64; 6], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("affine matrix must be six comma-separated numbers: {e}"))?;
    if parts.len() != 6 {
        return Err(format!(
            "affine matrix needs 6 entries, got {}",
            parts.len()
        ));
    }
    Ok([parts[0], parts[1], parts[2], parts[3], parts[4], parts[5]])
}

#[derive(Subcommand)]
enum Command {
    /// Decompose an image into a complex steerable pyramid dump (PHPYR1).
    Decompose {
        #[arg(long, value_name = "IMAGE")]
        r#in: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[command(flatten)]
        pyramid: PyramidArgs,
        /// Sample storage width in the dump.
        #[arg(long, value_parser = parse_precision)]
        precision: Option<Precision>,
    },
    /// Reconstruct an image from a pyramid dump.
    Reconstruct {
        #[arg(long, value_name = "FILE")]
        r#in: PathBuf,
        #[arg(long, value_name = "IMAGE")]
        out: PathBuf,
        /// Output bit depth (8 or 16).
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        out_depth: BitDepth,
    },
    /// Estimate dense flow between two images from pyramid phase deltas.
    Flow {
        #[arg(long, value_name = "IMAGE")]
        prev: PathBuf,
        #[arg(long, value_name = "IMAGE")]
        next: PathBuf,
        /// Flow output (PHFLO1).
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Optional false-color rendering.
        #[arg(long, value_name = "IMAGE")]
        png: Option<PathBuf>,
        #[command(flatten)]
        pyramid: PyramidArgs,
        /// Validity floor as a fraction of the max total weight.
        #[arg(long)]
        eps_amp: Option<f64>,
        /// Condition-number ceiling for the per-pixel normal matrix.
        #[arg(long)]
        kappa_max: Option<f64>,
        /// Amplitude-weighted Gaussian sigma for delta smoothing (0 = off).
        #[arg(long)]
        smoothing_radius: Option<f64>,
    },
    /// Extrapolate future frames from the last two frames of a sequence.
    Predict {
        #[arg(long, value_name = "DIR")]
        frames: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Number of frames to extrapolate.
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Largest per-band phase step, radians.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        clamp: f64,
        /// Delta smoothing sigma (0 = off).
        #[arg(long)]
        smoothing_radius: Option<f64>,
        #[command(flatten)]
        pyramid: PyramidArgs,
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        out_depth: BitDepth,
    },
    /// Magnify motion relative to the first frame.
    Magnify {
        #[arg(long, value_name = "DIR")]
        frames: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Magnification gain.
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Temporal passband low edge, cycles/frame.
        #[arg(long)]
        band_lo: Option<f64>,
        /// Temporal passband high edge, cycles/frame.
        #[arg(long)]
        band_hi: Option<f64>,
        #[command(flatten)]
        pyramid: PyramidArgs,
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        out_depth: BitDepth,
    },
    /// Animate a still image with the motion of a source sequence.
    TransferImage {
        #[arg(long, value_name = "IMAGE")]
        target: PathBuf,
        #[arg(long, value_name = "DIR")]
        source: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        transfer: TransferArgs,
        #[command(flatten)]
        pyramid: PyramidArgs,
        /// Affine pre-alignment of the source (a,b,tx,c,d,ty).
        #[arg(long, value_parser = parse_affine)]
        align: Option<[f64; 6]>,
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        out_depth: BitDepth,
    },
    /// Blend a source sequence's motion into a target sequence.
    TransferVideo {
        #[arg(long, value_name = "DIR")]
        target: PathBuf,
        #[arg(long, value_name = "DIR")]
        source: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        transfer: TransferArgs,
        #[command(flatten)]
        pyramid: PyramidArgs,
        #[arg(long, value_parser = parse_affine)]
        align: Option<[f64; 6]>,
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        out_depth: BitDepth,
    },
    /// Iterative transfer optimization over pyramid-phase features.
    Loss {
        /// Starting image (plays the previous-frame role for the temporal term).
        #[arg(long, value_name = "IMAGE")]
        init: PathBuf,
        /// Video frame supplying the style and content targets.
        #[arg(long, value_name = "IMAGE")]
        video_frame: PathBuf,
        /// Optimized output image.
        #[arg(long, value_name = "IMAGE")]
        out: PathBuf,
        /// Loss trajectory CSV (iter,style,content,temporal,total).
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        style_weight: Option<f64>,
        #[arg(long)]
        content_weight: Option<f64>,
        #[arg(long)]
        temporal_weight: Option<f64>,
        #[command(flatten)]
        pyramid: PyramidArgs,
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        out_depth: BitDepth,
    },
    /// Generate a deterministic synthetic sequence with ground-truth flow.
    Synth {
        /// Motion kind: static, translate, oscillate, rotate.
        #[arg(long)]
        kind: String,
        /// Texture: noise, sinusoid, checker.
        #[arg(long, default_value = "noise")]
        texture: String,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Directory for per-step ground-truth flow (PHFLO1).
        #[arg(long, value_name = "DIR")]
        gt_flow: Option<PathBuf>,
        #[arg(long, default_value_t = 128)]
        width: usize,
        #[arg(long, default_value_t = 128)]
        height: usize,
        #[arg(long, default_value_t = 5)]
        frames: usize,
        /// Noise seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Translation, px/frame.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        vx: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        vy: f64,
        /// Oscillation amplitude, px.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        ax: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        ay: f64,
        /// Oscillation period, frames.
        #[arg(long, default_value_t = 8.0)]
        period: f64,
        /// Rotation, degrees/frame.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        deg: f64,
        /// Sinusoid frequencies, radians/px.
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        wx: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        wy: f64,
        /// Checker block side, px.
        #[arg(long, default_value_t = 8)]
        checker_size: usize,
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        out_depth: BitDepth,
    },
    /// Compare images or flow fields; prints one JSON object.
    Metrics {
        #[command(subcommand)]
        which: MetricsCommand,
    },
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Peak signal-to-noise ratio and mean absolute error over the interior.
    Psnr {
        #[arg(long, value_name = "IMAGE")]
        a: PathBuf,
        #[arg(long, value_name = "IMAGE")]
        b: PathBuf,
        /// Interior margin skipped on every side, px.
        #[arg(long, default_value_t = 8)]
        margin: usize,
    },
    /// Endpoint error statistics between two PHFLO1 files.
    Flow {
        #[arg(long, value_name = "FILE")]
        est: PathBuf,
        #[arg(long, value_name = "FILE")]
        gt: PathBuf,
        #[arg(long, default_value_t = 0)]
        margin: usize,
    },
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    match &cli.config {
        Some(path) => Ok(Config::load(path)?),
        None => Ok(Config::default()),
    }
}

pub fn run(cli: Cli) -> CliResult {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    let cfg = load_config(&cli)?;

    match &cli.command {
        Command::Decompose {
            r#in,
            out,
            pyramid,
            precision,
        } => {
            let spec = pyramid.spec(&cfg)?;
            let frame = io::read_frame(r#in)?;
            let bank = FilterBank::new(&spec, frame.width(), frame.height())?;
            let (_, planes) = split_channels(&frame)?;
            let pyramids = planes
                .iter()
                .map(|p| decompose_with_bank(p, &bank, &spec))
                .collect::<Result<Vec<_>, _>>()?;
            io::write_pyramids(out, &pyramids, precision.unwrap_or(cfg.io.precision))?;
            Ok(())
        }
        Command::Reconstruct {
            r#in,
            out,
            out_depth,
        } => {
            let (pyramids, _) = io::read_pyramids(r#in)?;
            let planes = pyramids
                .iter()
                .map(reconstruct)
                .collect::<Result<Vec<_>, _>>()?;
            let mut frame = phasekit::merge_channels(&planes)?;
            frame.clip_unit();
            io::write_frame(out, &frame, *out_depth)?;
            Ok(())
        }
        Command::Flow {
            prev,
            next,
            out,
            png,
            pyramid,
            eps_amp,
            kappa_max,
            smoothing_radius,
        } => {
            let spec = pyramid.spec(&cfg)?;
            let a = io::read_frame(prev)?;
            let b = io::read_frame(next)?;
            if a.dims() != b.dims() {
                return Err(CliError::Data(format!(
                    "frame dims differ: {}x{} vs {}x{}",
                    a.width(),
                    a.height(),
                    b.width(),
                    b.height()
                )));
            }
            let (la, _) = split_channels(&a)?;
            let (lb, _) = split_channels(&b)?;
            let bank = FilterBank::new(&spec, a.width(), a.height())?;
            let pa = decompose_with_bank(&la, &bank, &spec)?;
            let pb = decompose_with_bank(&lb, &bank, &spec)?;
            let mut deltas = phase_delta(&pa, &pb)?;
            let sigma = smoothing_radius.unwrap_or(cfg.motion.smoothing_radius);
            smooth_deltas(&mut deltas, sigma);
            let params = FlowParams {
                eps_amp: eps_amp.unwrap_or(cfg.motion.eps_amp),
                kappa_max: kappa_max.unwrap_or(cfg.motion.kappa_max),
            };
            let flow = phasekit::motion::flow_from_phase_with_bank(&deltas, &bank, &params);
            io::write_flow(out, &flow)?;
            if let Some(png_path) = png {
                io::write_flow_png(png_path, &flow)?;
            }
            Ok(())
        }
        Command::Predict {
            frames,
            out,
            steps,
            clamp,
            smoothing_radius,
            pyramid,
            out_depth,
        } => {
            let spec = pyramid.spec(&cfg)?;
            let seq = io::read_frames(frames)?;
            if seq.len() < 2 {
                return Err(CliError::Usage(
                    "prediction needs at least 2 input frames".into(),
                ));
            }
            let cfg_p = PredictionConfig {
                steps: *steps,
                clamp: *clamp,
                delta_smoothing_radius: smoothing_radius.unwrap_or(cfg.motion.smoothing_radius),
            };
            let prev = &seq[seq.len() - 2];
            let current = &seq[seq.len() - 1];
            let predicted = apps::predict_rollout(prev, current, &cfg_p, &spec)?;
            io::write_frames(out, &predicted, *out_depth)?;
            Ok(())
        }
        Command::Magnify {
            frames,
            out,
            alpha,
            band_lo,
            band_hi,
            pyramid,
            out_depth,
        } => {
            let spec = pyramid.spec(&cfg)?;
            let seq = io::read_frames(frames)?;
            let band = match (band_lo, band_hi) {
                (Some(lo), Some(hi)) => Some(TemporalBand {
                    low: *lo,
                    high: *hi,
                }),
                (None, None) => None,
                _ => {
                    return Err(CliError::Usage(
                        "--band-lo and --band-hi must be given together".into(),
                    ))
                }
            };
            let outputs = apps::magnify(&seq, *alpha, band, &spec)?;
            io::write_frames(out, &outputs, *out_depth)?;
            Ok(())
        }
        Command::TransferImage {
            target,
            source,
            out,
            transfer,
            pyramid,
            align,
            out_depth,
        } => {
            let spec = pyramid.spec(&cfg)?;
            let target = io::read_frame(target)?;
            let mut source = io::read_frames(source)?;
            if let Some(m) = align {
                for f in source.iter_mut() {
                    *f = f.warp_affine(*m);
                }
            }
            let tc = transfer.config(&cfg, &spec);
            let outputs = apps::transfer_to_image(&target, &source, &tc, &spec)?;
            io::write_frames(out, &outputs, *out_depth)?;
            Ok(())
        }
        Command::TransferVideo {
            target,
            source,
            out,
            transfer,
            pyramid,
            align,
            out_depth,
        } => {
            let spec = pyramid.spec(&cfg)?;
            let target = io::read_frames(target)?;
            let mut source = io::read_frames(source)?;
            if let Some(m) = align {
                for f in source.iter_mut() {
                    *f = f.warp_affine(*m);
                }
            }
            let tc = transfer.config(&cfg, &spec);
            let outputs = apps::transfer_to_video(&target, &source, &tc, &spec)?;
            io::write_frames(out, &outputs, *out_depth)?;
            Ok(())
        }
        Command::Loss {
            init,
            video_frame,
            out,
            csv,
            iters,
            step,
            style_weight,
            content_weight,
            temporal_weight,
            pyramid,
            out_depth,
        } => {
            let spec = pyramid.spec(&cfg)?;
            let init_f = io::read_frame(init)?;
            let video_f = io::read_frame(video_frame)?;
            let weights = LossWeights {
                style: style_weight.unwrap_or(cfg.optimize.style_weight),
                content: content_weight.unwrap_or(cfg.optimize.content_weight),
                temporal: temporal_weight.unwrap_or(cfg.optimize.temporal_weight),
            };
            let result = optimize_transfer(
                &init_f,
                &video_f,
                &weights,
                iters.unwrap_or(cfg.optimize.iters),
                step.unwrap_or(cfg.optimize.step),
                &spec,
            )?;
            if let Some(csv_path) = csv {
                let mut text = String::from("iter,style,content,temporal,total\n");
                for row in &result.trace {
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        row.iter, row.style, row.content, row.temporal, row.total
                    ));
                }
                std::fs::write(csv_path, text).map_err(|e| CliError::Data(e.to_string()))?;
            }
            let last = result.trace.last().expect("trace has the initial row");
            println!(
                "{{\"style\":{},\"content\":{},\"temporal\":{},\"total\":{}}}",
                json_num(last.style),
                json_num(last.content),
                json_num(last.temporal),
                json_num(last.total)
            );
            io::write_frame(out, &result.frame, *out_depth)?;
            Ok(())
        }
        Command::Synth {
            kind,
            texture,
            out,
            gt_flow,
            width,
            height,
            frames,
            seed,
            vx,
            vy,
            ax,
            ay,
            period,
            deg,
            wx,
            wy,
            checker_size,
            out_depth,
        } => {
            let motion = match kind.as_str() {
                "static" => Motion::Static,
                "translate" => Motion::Translate { vx: *vx, vy: *vy },
                "oscillate" => Motion::Oscillate {
                    ax: *ax,
                    ay: *ay,
                    period: *period,
                },
                "rotate" => Motion::Rotate {
                    deg_per_frame: *deg,
                },
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown motion kind '{other}' (static, translate, oscillate, rotate)"
                    )))
                }
            };
            let texture = match texture.as_str() {
                "noise" => Texture::Noise { seed: *seed },
                "sinusoid" => Texture::Sinusoid { wx: *wx, wy: *wy },
                "checker" => Texture::Checker {
                    size: *checker_size,
                },
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown texture '{other}' (noise, sinusoid, checker)"
                    )))
                }
            };
            let synth_spec = SynthSpec {
                motion,
                texture,
                width: *width,
                height: *height,
                frames: *frames,
            };
            let (frames_out, flows) = synth::generate(&synth_spec)?;
            io::write_frames(out, &frames_out, *out_depth)?;
            if let Some(dir) = gt_flow {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Data(e.to_string()))?;
                for (i, flow) in flows.iter().enumerate() {
                    io::write_flow(&dir.join(format!("{i:06}.phflo")), flow)?;
                }
            }
            Ok(())
        }
        Command::Metrics { which } => match which {
            MetricsCommand::Psnr { a, b, margin } => {
                let fa = io::read_frame(a)?;
                let fb = io::read_frame(b)?;
                let psnr = synth::psnr(&fa, &fb, *margin)?;
                let mae = mean_abs_error(&fa, &fb, *margin);
                println!(
                    "{{\"psnr_db\":{},\"mae\":{},\"margin\":{margin}}}",
                    json_num(psnr),
                    json_num(mae)
                );
                Ok(())
            }
            MetricsCommand::Flow { est, gt, margin } => {
                let fe = io::read_flow(est)?;
                let fg = io::read_flow(gt)?;
                let stats = synth::flow_error_interior(&fe, &fg, *margin)?;
                println!(
                    "{{\"epe\":{},\"mae\":{},\"valid_fraction\":{},\"margin\":{margin}}}",
                    json_num(stats.epe),
                    json_num(stats.mae),
                    json_num(stats.valid_fraction)
                );
                Ok(())
            }
        },
    }
}

/// JSON has no Infinity; the sentinel string "inf" stands in.
fn json_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

fn mean_abs_error(a: &Frame, b: &Frame, margin: usize) -> f64 {
    let (w, h) = a.dims();
    let mut sum = 0.0;
    let mut n = 0usize;
    for c in 0..a.channels() {
        let pa = a.plane(c);
        let pb = b.plane(c);
        for y in margin..h - margin {
            for x in margin..w - margin {
                sum += (pa[y * w + x] - pb[y * w + x]).abs();
                n += 1;
            }
        }
    }
    sum / n as f64
}
