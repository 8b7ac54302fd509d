//! Command-line entry point.
//!
//! Exit status is 0 on success, 2 for unusable input (bad flags, unreadable
//! or malformed files, inputs the engine rejects) and 1 for internal
//! failures such as an unwritable output path.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use growcut_core::metrics::{evaluate, HausdorffMode};
use growcut_core::phantom::{auto_seeds, generate};
use growcut_core::{voxelize_contours, BinaryMask, Connectivity, Dims, GrowCutConfig, Spacing};

use crate::io;
use crate::job::{apply_morph, timed_run, EngineOverrides, MorphOp};
use crate::report::{self, read_cases, summarize_cases, write_cases, CaseRow};

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Internal(m) => m,
        }
    }
}

fn input(e: impl ToString) -> CliError {
    CliError::Input(e.to_string())
}

fn internal(e: impl ToString) -> CliError {
    CliError::Internal(e.to_string())
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "growcut", version, about = "Seeded cellular-automaton segmentation of 3D volumes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a volume from foreground and background seeds.
    Segment(SegmentArgs),
    /// Dilate, erode or keep the largest component of a mask.
    Morph(MorphArgs),
    /// Compare a mask against a reference, or summarize a batch of cases.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic volume, its ground truth and seeds.
    Phantom(PhantomArgs),
    /// Fill closed per-slice contours into a mask.
    Voxelize(VoxelizeArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    FullSet,
    Boundary,
}

impl From<ModeArg> for HausdorffMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FullSet => HausdorffMode::FullSet,
            ModeArg::Boundary => HausdorffMode::Boundary,
        }
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Intensity volume (.nrrd, .nhdr or .vhdr).
    pub volume: PathBuf,
    /// Seeds document (JSON).
    pub seeds: PathBuf,
    /// Output mask path.
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 26, value_parser = clap::builder::PossibleValuesParser::new(["6", "18", "26"]).map(|s| s.parse::<u32>().unwrap()))]
    pub connectivity: u32,
    /// ROI margin as a fraction of the seed bounding-box extent per axis.
    #[arg(long, default_value_t = 0.05)]
    pub margin: f64,
    /// Sweep limit (default: twice the ROI extent sum).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Worker threads (default: available parallelism). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub distance_cache: OnOff,
    /// Also write the run summary to this JSON file.
    #[arg(long)]
    pub result: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MorphArgs {
    pub mask: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub op: MorphOp,
    #[arg(long, default_value_t = 26, value_parser = clap::builder::PossibleValuesParser::new(["6", "18", "26"]).map(|s| s.parse::<u32>().unwrap()))]
    pub connectivity: u32,
    /// Number of unit-element iterations (dilate and erode only).
    #[arg(long, default_value_t = 1)]
    pub radius: u32,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Evaluated mask `A`.
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    pub mask_a: Option<PathBuf>,
    /// Reference mask `R`.
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    pub mask_r: Option<PathBuf>,
    /// CSV listing either `mask_a,mask_r[,time_min]` or precomputed case
    /// columns (`volume_manual_mm3,volume_tool_mm3,hausdorff_voxel,dsc_percent,time_min`).
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// Voxel spacing `sx,sy,sz` in mm (default: read from mask A).
    #[arg(long, value_parser = parse_triple::<f64>)]
    pub spacing: Option<[f64; 3]>,
    #[arg(long, value_enum, default_value_t = ModeArg::FullSet)]
    pub mode: ModeArg,
    /// Write the report (single pair) or the summary (batch) as JSON.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Batch only: write the per-case table.
    #[arg(long)]
    pub cases: Option<PathBuf>,
    /// Batch only: write minimum/maximum/mean/sample_std rows.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// Phantom specification (JSON).
    pub spec: PathBuf,
    #[arg(long)]
    pub volume: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub seeds: PathBuf,
    /// Overrides the specification's rng_seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 2)]
    pub inner_margin: u32,
    #[arg(long, default_value_t = 2)]
    pub outer_margin: u32,
}

#[derive(Debug, Args)]
pub struct VoxelizeArgs {
    /// Contours document (JSON).
    pub contours: PathBuf,
    /// Grid size `nx,ny,nz`.
    #[arg(long, value_parser = parse_triple::<usize>)]
    pub dims: [usize; 3],
    /// Voxel spacing `sx,sy,sz` in mm recorded in the mask (default 1,1,1).
    #[arg(long, value_parser = parse_triple::<f64>)]
    pub spacing: Option<[f64; 3]>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "GROWCUT_BIND", default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Persist sessions under this directory and restore them on start.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

/// `a,b,c`
fn parse_triple<T: std::str::FromStr>(s: &str) -> Result<[T; 3], String> {
    let parts: Vec<T> = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| format!("'{p}' is not a valid number")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| format!("expected three comma-separated values, got '{s}'"))
}

fn spacing_arg(v: &Option<[f64; 3]>) -> CliResult<Option<Spacing>> {
    v.map(|s| Spacing::new(s).map_err(input)).transpose()
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn cmd_segment(a: &SegmentArgs) -> CliResult<()> {
    let (volume, _) = io::read_volume(&a.volume).map_err(input)?;
    let seeds = io::read_seeds(&a.seeds).map_err(input)?;
    let overrides = EngineOverrides {
        connectivity: Some(a.connectivity),
        margin: Some(a.margin),
        max_iterations: a.max_iters,
        threads: Some(a.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))),
        distance_cache: Some(a.distance_cache == OnOff::On),
        tile_size: None,
    };
    let config = overrides.apply(&GrowCutConfig::default()).map_err(input)?;
    let (seg, stats) = timed_run(&volume, &seeds, &config).map_err(input)?;
    io::write_mask(&a.out, &seg.mask, volume.spacing()).map_err(internal)?;
    let warning = (!stats.converged).then(|| {
        format!(
            "did not converge within {} sweeps; the mask reflects the last sweep",
            stats.iterations
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
        eprintln!("warning: {w}");
    }
    let mut result = serde_json::to_value(&stats).expect("stats serialize");
    result["mask"] = json!(a.out);
    result["warning"] = json!(warning);
    if let Some(p) = &a.result {
        write_text(p, &serde_json::to_string_pretty(&result).expect("json value serializes"))?;
    }
    print_json(&result);
    Ok(())
}

fn cmd_morph(a: &MorphArgs) -> CliResult<()> {
    let (mask, spacing) = io::read_mask(&a.mask).map_err(input)?;
    let conn = Connectivity::from_count(a.connectivity).map_err(input)?;
    let out = apply_morph(&mask, a.op, conn, a.radius).map_err(input)?;
    io::write_mask(&a.out, &out, spacing).map_err(internal)?;
    print_json(&json!({
        "mask": a.out,
        "foreground_voxels_before": mask.count(),
        "foreground_voxels": out.count(),
    }));
    Ok(())
}

fn load_pair(a: &Path, r: &Path, spacing: Option<Spacing>) -> CliResult<(BinaryMask, BinaryMask, Spacing)> {
    let (ma, sa) = io::read_mask(a).map_err(input)?;
    let (mr, sr) = io::read_mask(r).map_err(input)?;
    let spacing = match spacing {
        Some(s) => s,
        None if sa == sr => sa,
        None => {
            return Err(input(format!(
                "{} and {} record different spacings; pass --spacing",
                a.display(),
                r.display()
            )))
        }
    };
    Ok((ma, mr, spacing))
}

fn cmd_evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let mode: HausdorffMode = a.mode.into();
    let spacing = spacing_arg(&a.spacing)?;
    if let Some(batch) = &a.batch {
        return cmd_evaluate_batch(batch, a, mode, spacing);
    }
    if a.cases.is_some() || a.summary.is_some() {
        return Err(input("--cases and --summary apply to --batch only"));
    }
    let (pa, pr) = (a.mask_a.as_ref().expect("clap"), a.mask_r.as_ref().expect("clap"));
    let (ma, mr, spacing) = load_pair(pa, pr, spacing)?;
    let rep = evaluate(&ma, &mr, spacing, mode).map_err(input)?;
    let text = report::report_json(&rep, mode);
    if let Some(out) = &a.out {
        write_text(out, &text)?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_evaluate_batch(batch: &Path, a: &EvaluateArgs, mode: HausdorffMode, spacing: Option<Spacing>) -> CliResult<()> {
    let text = std::fs::read_to_string(batch).map_err(|e| input(format!("{}: {e}", batch.display())))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(input)?.clone();
    let has = |c: &str| headers.iter().any(|h| h == c);
    let rows: Vec<CaseRow> = if has("mask_a") && has("mask_r") {
        let base = batch.parent().unwrap_or(Path::new("."));
        let time_col = headers.iter().position(|h| h == "time_min");
        let (ia, ir) = (
            headers.iter().position(|h| h == "mask_a").expect("checked"),
            headers.iter().position(|h| h == "mask_r").expect("checked"),
        );
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(input)?;
            let (pa, pr) = (base.join(&rec[ia]), base.join(&rec[ir]));
            let time = match time_col.map(|i| &rec[i]) {
                None | Some("") => None,
                Some(t) => Some(
                    t.parse::<f64>()
                        .map_err(|_| input(format!("row {}: bad time_min '{t}'", line + 1)))?,
                ),
            };
            let (ma, mr, sp) = load_pair(&pa, &pr, spacing)?;
            let rep = evaluate(&ma, &mr, sp, mode).map_err(|e| input(format!("row {}: {e}", line + 1)))?;
            rows.push(CaseRow::from_report(&rep, time));
        }
        rows
    } else {
        read_cases(text.as_bytes()).map_err(|e| input(format!("{}: {e}", batch.display())))?
    };
    let summary = summarize_cases(&rows).map_err(|e| input(format!("{}: {e}", batch.display())))?;
    if let Some(p) = &a.cases {
        let mut buf = Vec::new();
        write_cases(&mut buf, &rows).map_err(internal)?;
        write_text(p, &String::from_utf8(buf).expect("csv is utf-8"))?;
    }
    if let Some(p) = &a.summary {
        let mut buf = Vec::new();
        summary.write_csv(&mut buf).map_err(internal)?;
        write_text(p, &String::from_utf8(buf).expect("csv is utf-8"))?;
    }
    let doc = json!({"cases": rows.len(), "hausdorff_mode": report::mode_name(mode), "summary": summary.to_json()});
    if let Some(p) = &a.out {
        write_text(p, &serde_json::to_string_pretty(&doc).expect("json value serializes"))?;
    }
    for line in summary.display_lines() {
        println!("{line}");
    }
    Ok(())
}

fn cmd_phantom(a: &PhantomArgs) -> CliResult<()> {
    let mut spec = io::read_phantom_spec(&a.spec).map_err(input)?;
    if let Some(s) = a.seed {
        spec.rng_seed = s;
    }
    let (volume, truth) = generate(&spec).map_err(input)?;
    let seeds = auto_seeds(&truth, a.inner_margin, a.outer_margin).map_err(input)?;
    io::write_volume(&a.volume, &volume, spec.sample_type).map_err(internal)?;
    io::write_mask(&a.truth, &truth, spec.spacing).map_err(internal)?;
    io::write_seeds(&a.seeds, &seeds).map_err(internal)?;
    print_json(&json!({
        "volume": a.volume,
        "truth": a.truth,
        "seeds": a.seeds,
        "rng_seed": spec.rng_seed,
        "truth_voxels": truth.count(),
        "foreground_seeds": seeds.count(growcut_core::Label::Foreground),
        "background_seeds": seeds.count(growcut_core::Label::Background),
    }));
    Ok(())
}

fn cmd_voxelize(a: &VoxelizeArgs) -> CliResult<()> {
    let contours = io::read_contours(&a.contours).map_err(input)?;
    let dims = Dims::new(a.dims[0], a.dims[1], a.dims[2]);
    let spacing = spacing_arg(&a.spacing)?.unwrap_or(Spacing::UNIT);
    let mask = voxelize_contours(&contours, dims).map_err(input)?;
    io::write_mask(&a.out, &mask, spacing).map_err(internal)?;
    print_json(&json!({"mask": a.out, "foreground_voxels": mask.count()}));
    Ok(())
}

fn cmd_serve(a: &ServeArgs) -> CliResult<()> {
    let rt = tokio::runtime::Runtime::new().map_err(internal)?;
    rt.block_on(async {
        let app = crate::service::AppState::new(a.data_dir.clone()).map_err(internal)?;
        let listener = tokio::net::TcpListener::bind(&a.bind)
            .await
            .map_err(|e| input(format!("cannot bind {}: {e}", a.bind)))?;
        let addr = listener.local_addr().map_err(internal)?;
        log::info!("listening on http://{addr}");
        eprintln!("listening on http://{addr}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        crate::service::serve(listener, std::sync::Arc::new(app), shutdown)
            .await
            .map_err(internal)
    })
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Segment(a) => cmd_segment(a),
        Command::Morph(a) => cmd_morph(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Phantom(a) => cmd_phantom(a),
        Command::Voxelize(a) => cmd_voxelize(a),
        Command::Serve(a) => cmd_serve(a),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
