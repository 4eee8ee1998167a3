//! Command-line front end: lay out one set system, sample benchmark
//! sub-systems, or collect metric tables over many inputs.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use metrosets::metrics::MetricReport;
use metrosets::model::parse_set_system;
use metrosets::pipeline::{
    run_pipeline, InsertionMethod, LayoutMethod, PipelineConfig, Preset, SchematizationMethod, SupportMethod,
};
use metrosets::render::write_document;
use metrosets::sample::subsample;
use metrosets::{InputFormat, SetSystem};

const STAGES: [&str; 8] = [
    "preprocess",
    "support",
    "insertion",
    "layout",
    "schematization",
    "line-ordering",
    "labeling",
    "metrics",
];

#[derive(Parser)]
#[command(name = "metrosets", version, about = "Metro-map drawings of set systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lay out one input and write SVG, JSON document or a metric table.
    Layout(LayoutArgs),
    /// Draw connected sub-systems of a base system with given sizes.
    Sample(SampleArgs),
    /// Run the pipeline over many inputs and print one CSV row per input.
    Batch(BatchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// CSV input starts with a header row.
    #[arg(long)]
    csv_header: bool,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    #[arg(long, default_value = "balanced")]
    preset: Preset,
    #[arg(long)]
    support: Option<SupportMethod>,
    #[arg(long)]
    insertion: Option<InsertionMethod>,
    #[arg(long)]
    layout: Option<LayoutMethod>,
    #[arg(long)]
    schematization: Option<SchematizationMethod>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ConfigArgs {
    fn config(&self) -> PipelineConfig {
        let mut c = PipelineConfig::preset(self.preset).with_seed(self.seed);
        let overridden = self.support.is_some()
            || self.insertion.is_some()
            || self.layout.is_some()
            || self.schematization.is_some();
        c.support = self.support.unwrap_or(c.support);
        c.insertion = self.insertion.unwrap_or(c.insertion);
        c.layout = self.layout.unwrap_or(c.layout);
        c.schematization = self.schematization.unwrap_or(c.schematization);
        if overridden && PipelineConfig::preset(self.preset).with_seed(self.seed) != c {
            c.preset = None;
        }
        c
    }
}

#[derive(Args)]
struct LayoutArgs {
    input: PathBuf,
    #[command(flatten)]
    input_args: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Print the metrics as key=value lines and write nothing else.
    #[arg(long)]
    metrics_only: bool,
    /// Record wall-clock stage timings (makes the document run-dependent).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct SampleArgs {
    base: PathBuf,
    #[command(flatten)]
    input_args: InputArgs,
    /// Vertex counts: a number or an inclusive range `lo-hi/step`.
    #[arg(long)]
    vertices: Grid,
    /// Set counts: a number or an inclusive range `lo-hi/step`.
    #[arg(long)]
    sets: Grid,
    /// Samples per (vertices, sets) pair.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Swap attempts per sample; defaults to ten times the set count.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
    /// List the planned samples without writing them.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    input_args: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Inclusive arithmetic range of sizes.
#[derive(Clone, Debug)]
struct Grid(Vec<usize>);

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected N or LO-HI/STEP, got {s:?}");
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let (range, step) = match s.split_once('/') {
            Some((r, st)) => (r, num(st)?),
            None => (s, 1),
        };
        let (lo, hi) = match range.split_once('-') {
            Some((a, b)) => (num(a)?, num(b)?),
            None => {
                let v = num(range)?;
                (v, v)
            }
        };
        if step == 0 || lo > hi {
            return Err(bad());
        }
        Ok(Grid((lo..=hi).step_by(step).collect()))
    }
}

#[derive(Debug)]
enum Failure {
    Input { path: String, message: String },
    Stage { path: String, stage: String, message: String },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input { .. } => 2,
            Failure::Stage { .. } => 3,
        }
    }

    fn stage(&self) -> &str {
        match self {
            Failure::Input { .. } => "input",
            Failure::Stage { stage, .. } => stage,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input { path, message } => write!(f, "stage input failed for {path}: {message}"),
            Failure::Stage { path, stage, message } => write!(f, "stage {stage} failed for {path}: {message}"),
        }
    }
}

fn input_failure(path: &Path, message: impl fmt::Display) -> Failure {
    Failure::Input {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

fn output_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Stage {
        path: path.display().to_string(),
        stage: "output".into(),
        message: e.to_string(),
    }
}

fn read_system(path: &Path, args: &InputArgs) -> Result<SetSystem, Failure> {
    let bytes = fs::read(path).map_err(|e| input_failure(path, e))?;
    let is_csv = match args.format {
        Some(Format::Csv) => true,
        Some(Format::Json) => false,
        None => path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv")),
    };
    let format = if is_csv {
        InputFormat::Csv {
            has_header: args.csv_header,
        }
    } else {
        InputFormat::Json
    };
    parse_set_system(&bytes, format).map_err(|e| input_failure(path, e))
}

fn metric_table(m: &MetricReport) -> String {
    let mut out = String::new();
    for (k, v) in MetricReport::FIELDS.iter().zip(m.values()) {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    }
    out
}

fn layout(args: &LayoutArgs) -> Result<(), Failure> {
    let system = read_system(&args.input, &args.input_args)?;
    let mut config = args.config.config();
    config.record_timings = args.timings;
    let out = run_pipeline(&system, &config).map_err(|e| Failure::Stage {
        path: args.input.display().to_string(),
        stage: e.stage.to_string(),
        message: e.source.to_string(),
    })?;
    let stdout = io::stdout();
    if args.metrics_only {
        let _ = stdout.lock().write_all(metric_table(&out.document.metrics).as_bytes());
        return Ok(());
    }
    if let Some(p) = &args.out_svg {
        fs::write(p, &out.svg).map_err(|e| output_failure(p, e))?;
    }
    if let Some(p) = &args.out_json {
        fs::write(p, write_document(&out.document)).map_err(|e| output_failure(p, e))?;
    }
    if args.out_svg.is_none() && args.out_json.is_none() {
        let _ = stdout.lock().write_all(&out.svg);
    }
    Ok(())
}

fn sample(args: &SampleArgs) -> Result<(), Failure> {
    let cells: Vec<(usize, usize)> = args
        .vertices
        .0
        .iter()
        .flat_map(|&n| args.sets.0.iter().map(move |&h| (n, h)))
        .collect();
    let total = cells.len() * args.count;
    if args.dry_run {
        println!("{total} samples over {} (vertices, sets) pairs", cells.len());
        return Ok(());
    }
    let base = read_system(&args.base, &args.input_args)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| output_failure(&args.out_dir, e))?;
    let mut stdout = io::stdout().lock();
    for (i, &(n, h)) in cells.iter().enumerate() {
        // every cell gets its own stream
        let seed = args.seed.wrapping_add(i as u64);
        let samples = subsample(&base, n, h, args.count, seed, args.budget).map_err(|e| Failure::Stage {
            path: args.base.display().to_string(),
            stage: "sample".into(),
            message: e.to_string(),
        })?;
        for (k, s) in samples.iter().enumerate() {
            let name = format!("sample_n{n}_h{h}_{k:02}.json");
            let path = args.out_dir.join(&name);
            fs::write(&path, s.system.to_json()).map_err(|e| output_failure(&path, e))?;
            let _ = writeln!(
                stdout,
                "{name}\t{}\t{}\t{}",
                s.system.element_count(),
                s.system.set_count(),
                if s.exact { "exact" } else { "inexact" }
            );
        }
    }
    Ok(())
}

struct Row {
    input: String,
    result: Result<(MetricReport, Vec<f64>), Failure>,
}

fn batch_row(path: &Path, input_args: &InputArgs, config: &PipelineConfig) -> Row {
    let result = read_system(path, input_args).and_then(|system| {
        let out = run_pipeline(&system, config).map_err(|e| Failure::Stage {
            path: path.display().to_string(),
            stage: e.stage.to_string(),
            message: e.source.to_string(),
        })?;
        let metrics = out.document.metrics;
        let times = STAGES
            .iter()
            .map(|s| {
                metrics
                    .running_time
                    .as_ref()
                    .and_then(|t| t.stages.iter().find(|x| x.stage == *s))
                    .map_or(0.0, |x| x.seconds)
            })
            .collect();
        Ok((metrics, times))
    });
    Row {
        input: path.display().to_string(),
        result,
    }
}

fn batch(args: &BatchArgs) -> Result<(), Failure> {
    let mut config = args.config.config();
    config.record_timings = true;
    let run = || -> Vec<Row> {
        args.inputs
            .par_iter()
            .map(|p| batch_row(p, &args.input_args, &config))
            .collect()
    };
    let rows = match args.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Failure::Stage {
                path: "-".into(),
                stage: "batch".into(),
                message: e.to_string(),
            })?
            .install(run),
        None => run(),
    };
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| output_failure(p, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = ["input", "preset", "support", "insertion", "layout", "schematization", "seed", "status", "stage", "error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(MetricReport::FIELDS.iter().map(|s| s.to_string()));
    header.extend(STAGES.iter().map(|s| format!("time_{s}")));
    let csv_failure = |e: csv::Error| Failure::Stage {
        path: args.out.as_ref().map_or("-".into(), |p| p.display().to_string()),
        stage: "output".into(),
        message: e.to_string(),
    };
    w.write_record(&header).map_err(csv_failure)?;
    let width = MetricReport::FIELDS.len() + STAGES.len();
    for row in rows {
        let mut rec = vec![
            row.input,
            config.preset.map_or(String::new(), |p| p.to_string()),
            config.support.to_string(),
            config.insertion.to_string(),
            config.layout.to_string(),
            config.schematization.to_string(),
            config.seed.to_string(),
        ];
        match row.result {
            Ok((m, times)) => {
                rec.extend(["ok".to_string(), String::new(), String::new()]);
                rec.extend(m.values());
                rec.extend(times.iter().map(|t| t.to_string()));
            }
            Err(f) => {
                rec.extend(["failed".to_string(), f.stage().to_string(), f.to_string()]);
                rec.extend(std::iter::repeat_n(String::new(), width));
            }
        }
        w.write_record(&rec).map_err(csv_failure)?;
    }
    w.flush().map_err(|e| csv_failure(e.into()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Layout(a) => layout(a),
        Command::Sample(a) => sample(a),
        Command::Batch(a) => batch(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
