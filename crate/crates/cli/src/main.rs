use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ppsdepth::geometry::pps_from_depth;
use ppsdepth::grid::{Grid, Mask};
use ppsdepth::io::{
    export_pointcloud, false_color, read_depth, read_pfm, read_rgb, to_f32, write_depth, write_gray, write_pfm,
    write_rgb, BitDepth, PipelineConfig, PlyFormat,
};
use ppsdepth::losses::{depth_metrics, Alignment};
use ppsdepth::photometrics::{generate_scene, luminance, render, specular_mask, ImageGray, ImageRgb, SPECULAR_THRESHOLD};
use ppsdepth::refine::refine_depth;
use ppsdepth::selfcheck;

#[derive(Parser)]
#[command(name = "ppsdepth", version, about = "Near-field shading fields, photometric losses and depth refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic scene: image, ground-truth depth and albedo.
    Render {
        config: PathBuf,
        /// Output directory (defaults to `paths.output_dir`, then `.`).
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Shading field of a depth map as PFM plus a false-colour PNG.
    Pps {
        depth: PathBuf,
        config: PathBuf,
        #[arg(short, long, default_value = "pps.pfm")]
        out: PathBuf,
        #[arg(long, default_value = "pps.png")]
        preview: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Specular mask (white = usable pixel).
    Mask {
        image: PathBuf,
        #[arg(long, default_value_t = SPECULAR_THRESHOLD)]
        threshold: f64,
        #[arg(short, long, default_value = "mask.png")]
        out: PathBuf,
    },
    /// Refine a depth map against an image.
    Refine {
        init: PathBuf,
        image: PathBuf,
        config: PathBuf,
        #[arg(short, long, default_value = "refined.pfm")]
        out: PathBuf,
        #[arg(long, default_value = "trace.csv")]
        trace: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Depth metrics of a prediction against ground truth.
    Eval {
        pred: PathBuf,
        gt: PathBuf,
        #[arg(long, value_enum, default_value_t = Align::None)]
        align: Align,
        /// Also write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Export a point cloud: `cloud <depth> [image] <config>`.
    Cloud {
        #[arg(num_args = 2..=3, value_names = ["DEPTH", "IMAGE", "CONFIG"], required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long, default_value = "cloud.ply")]
        out: PathBuf,
        #[arg(long)]
        ascii: bool,
        /// Skip specular pixels of the image.
        #[arg(long)]
        masked: bool,
    },
    /// Run the analytic invariant suite.
    Selfcheck,
}

#[derive(Clone, Copy, ValueEnum)]
enum Align {
    None,
    Ssi,
}

/// Flags that take precedence over the config file.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    weight_smooth: Option<f64>,
    #[arg(long)]
    sobolev_lambda: Option<f64>,
}

fn load_config(path: &Path, o: &Overrides) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(v) = o.gamma {
        cfg.render.gamma = v;
    }
    if let Some(v) = o.sigma0 {
        cfg.render.sigma0 = v;
    }
    if let Some(v) = o.mu {
        cfg.light.mu = v;
    }
    if let Some(v) = o.threshold {
        cfg.mask.threshold = v;
    }
    if let Some(v) = o.max_iters {
        cfg.refine.max_iters = v;
    }
    if let Some(v) = o.step_size {
        cfg.refine.step_size = v;
    }
    if let Some(v) = o.weight_smooth {
        cfg.refine.weight_smooth = v;
    }
    if let Some(v) = o.sobolev_lambda {
        cfg.refine.sobolev_lambda = v;
    }
    cfg.validate().with_context(|| format!("{} after flag overrides", path.display()))?;
    Ok(cfg)
}

fn mask_image(mask: &Mask) -> ImageGray<f64> {
    ImageGray::new(mask.map(|&m| if m { 1.0 } else { 0.0 })).expect("mask values lie in [0, 1]")
}

fn read_image(path: &Path) -> Result<ImageRgb<f64>> {
    read_rgb(path).with_context(|| format!("reading image {}", path.display()))
}

fn read_depth_map(path: &Path) -> Result<ppsdepth::DepthMap64> {
    read_depth(path).with_context(|| format!("reading depth {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Render { config, out, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            let k = cfg.camera::<f64>()?;
            let scene = generate_scene::<f64>(cfg.scene()?, &k)?;
            let output = render(&scene.depth, &k, &cfg.light()?, &scene.albedo, &cfg.render_model()?)?;
            let dir = out.or(cfg.paths.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            write_rgb(dir.join("image.png"), &output.image, BitDepth::Sixteen)?;
            write_depth(dir.join("depth.pfm"), &scene.depth)?;
            write_rgb(dir.join("albedo.png"), &ImageRgb::new(scene.albedo.grid().clone())?, BitDepth::Sixteen)?;
            let clamped = output.clamped.count_valid();
            if clamped > 0 {
                eprintln!("warning: {clamped} pixels clipped at 1");
            }
            println!("wrote image.png, depth.pfm, albedo.png to {}", dir.display());
        }
        Command::Pps { depth, config, out, preview, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            let depth = read_depth_map(&depth)?;
            let field = pps_from_depth(&depth, &cfg.camera()?, &cfg.light()?)?;
            write_pfm(&out, &to_f32(&field.pps))?;
            write_rgb(&preview, &false_color(&field.pps, Some(&field.valid)), BitDepth::Eight)?;
            println!("wrote {} and {}", out.display(), preview.display());
        }
        Command::Mask { image, threshold, out } => {
            let img = read_image(&image)?;
            let mask = specular_mask(&luminance(&img), threshold)?;
            let valid = mask.count_valid();
            if valid == 0 {
                eprintln!("warning: mask is empty, every pixel is at or above {threshold}");
            }
            write_gray(&out, &mask_image(&mask), BitDepth::Eight)?;
            println!("{valid} of {} pixels valid; wrote {}", mask.len(), out.display());
        }
        Command::Refine { init, image, config, out, trace, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            let init = read_depth_map(&init)?;
            let img = read_image(&image)?;
            let mask = specular_mask(&luminance(&img), cfg.mask.threshold)?;
            let result = refine_depth(&init, &img, &cfg.camera()?, &cfg.light()?, &mask, &cfg.refine)?;
            write_depth(&out, &result.refined)?;
            std::fs::write(&trace, result.trace_csv()).with_context(|| format!("writing {}", trace.display()))?;
            println!(
                "{} iterations, loss {:e} -> {:e}{}; wrote {} and {}",
                result.iterations_used,
                result.loss_trace[0],
                result.loss_trace.last().copied().unwrap_or(f64::NAN),
                if result.converged { " (converged)" } else { "" },
                out.display(),
                trace.display()
            );
        }
        Command::Eval { pred, gt, align, json } => {
            let p = read_pfm(&pred).with_context(|| format!("reading {}", pred.display()))?;
            let g = read_pfm(&gt).with_context(|| format!("reading {}", gt.display()))?;
            let to64 = |x: &Grid<f32>| x.map(|&v| f64::from(v));
            let (p, g) = (to64(&p), to64(&g));
            let mask = Mask::full(g.width(), g.height());
            let align = match align {
                Align::None => Alignment::None,
                Align::Ssi => Alignment::Ssi,
            };
            let report = depth_metrics(&p, &g, &mask, align)?;
            print!("{}", report.to_text());
            println!("{}", report.to_json());
            if let Some(path) = json {
                std::fs::write(&path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Cloud { inputs, out, ascii, masked } => {
            let (depth_path, image_path, config_path) = match inputs.as_slice() {
                [d, c] => (d, None, c),
                [d, i, c] => (d, Some(i), c),
                _ => bail!("expected <depth> [image] <config>"),
            };
            let cfg = load_config(config_path, &Overrides::default())?;
            let depth = read_depth_map(depth_path)?;
            let image = image_path.map(|p| read_image(p)).transpose()?;
            let mask = match (&image, masked) {
                (Some(img), true) => specular_mask(&luminance(img), cfg.mask.threshold)?,
                _ => Mask::full(depth.width(), depth.height()),
            };
            let format = if ascii { PlyFormat::Ascii } else { PlyFormat::BinaryLittleEndian };
            let cloud = export_pointcloud(&depth, &cfg.camera()?, &mask, image.as_ref(), &out, format)?;
            println!("wrote {} vertices to {}", cloud.len(), out.display());
        }
        Command::Selfcheck => {
            let outcomes = selfcheck::run_all();
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.iter().any(|o| !o.passed) {
                eprintln!("selfcheck failed");
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
