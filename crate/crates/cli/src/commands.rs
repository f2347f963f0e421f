use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use chrono::{DateTime, SecondsFormat};
use hsf_core::coding::{aliasing_check, phase_gradients};
use hsf_core::gateway::{rerun, DEFAULT_CREATED};
use hsf_core::metrics::{burst_stats, destination_matrix, injection_rate, sweep_diff, sweep_grid, RateMode};
use hsf_core::scenario::OutputsSection;
use hsf_core::trace_io::{
    export_heatmap, parse_trace_header, read_trace, write_report, write_trace, HeatmapFormat,
};
use hsf_core::{Angles, CaseId, Error, ScenarioConfig, TrafficTrace};

const DEFAULT_TRACE_PATH: &str = "trace.jsonl";

/// Exit status 2 for bad input, 3 for I/O trouble.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn in_file(path: &Path, e: Error) -> CliError {
    match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
    }
}

fn created_stamp() -> Result<String, CliError> {
    let Ok(raw) = std::env::var("SOURCE_DATE_EPOCH") else {
        return Ok(DEFAULT_CREATED.to_owned());
    };
    let secs: i64 = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("SOURCE_DATE_EPOCH {raw:?} is not an integer")))?;
    let stamp = DateTime::from_timestamp(secs, 0)
        .ok_or_else(|| CliError::Validation(format!("SOURCE_DATE_EPOCH {secs} is out of range")))?;
    Ok(stamp.to_rfc3339_opts(SecondsFormat::Secs, true))
}

/// Reads either a scenario config or, when the file starts with a trace
/// header, the scenario recorded in that header and its creation stamp.
fn load_config(path: Option<&Path>) -> Result<(ScenarioConfig, Option<String>), CliError> {
    let Some(path) = path else {
        return Ok((ScenarioConfig::default(), None));
    };
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let first_line = text.lines().next().unwrap_or_default();
    if let Ok(header) = parse_trace_header(first_line) {
        let cfg = ScenarioConfig::from_meta(&header.meta, OutputsSection::default());
        return Ok((cfg, Some(header.created)));
    }
    let cfg = ScenarioConfig::from_json_str(&text).map_err(|e| in_file(path, e))?;
    Ok((cfg, None))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

fn write_metrics(
    trace: &TrafficTrace,
    report_path: &Path,
    heatmap: Option<(&Path, HeatmapFormat)>,
) -> Result<hsf_core::WorkloadReport, CliError> {
    let report = burst_stats(trace);
    write_report(trace, &report, create(report_path)?).map_err(|e| in_file(report_path, e))?;
    if let Some((path, format)) = heatmap {
        export_heatmap(&destination_matrix(trace), format, create(path)?).map_err(|e| in_file(path, e))?;
    }
    Ok(report)
}

fn heatmap_format(raw: &str) -> Result<HeatmapFormat, CliError> {
    raw.parse().map_err(CliError::from)
}

pub fn simulate(
    config: Option<&Path>,
    seed: Option<u64>,
    out: Option<&Path>,
    overrides: &[String],
) -> Result<(), CliError> {
    let (mut cfg, recorded_created) = load_config(config)?;
    if let Some(seed) = seed {
        cfg.apply_override(&format!("scenario.rng_seed={seed}"))?;
    }
    for assignment in overrides {
        cfg.apply_override(assignment)?;
    }
    if let Some(out) = out {
        cfg.outputs.trace = Some(out.display().to_string());
    }
    let meta = cfg.build()?;
    let mut trace = rerun(&meta)?;
    trace.created = match recorded_created {
        Some(stamp) => stamp,
        None => created_stamp()?,
    };

    let aliased = trace
        .events
        .iter()
        .filter(|e| {
            phase_gradients(meta.incident, e.reflected, &meta.surface)
                .map(|g| aliasing_check(g, &meta.surface).is_some())
                .unwrap_or(false)
        })
        .count();
    if aliased > 0 {
        eprintln!(
            "warning: {aliased} of {} events steer beyond the per-cell aliasing limit",
            trace.events.len()
        );
    }

    let trace_path = cfg
        .outputs
        .trace
        .clone()
        .unwrap_or_else(|| DEFAULT_TRACE_PATH.to_owned());
    let trace_path = Path::new(&trace_path);
    write_trace(&trace, create(trace_path)?).map_err(|e| in_file(trace_path, e))?;

    if let Some(report) = cfg.outputs.report.as_deref() {
        let heatmap = match cfg.outputs.heatmap.as_deref() {
            Some(p) => Some((
                Path::new(p),
                heatmap_format(cfg.outputs.heatmap_format.as_deref().unwrap_or("csv"))?,
            )),
            None => None,
        };
        write_metrics(&trace, Path::new(report), heatmap)?;
    }

    println!(
        "events={} packets={} duration={:?} trace={}",
        trace.events.len(),
        trace.total_packets(),
        meta.trajectory.duration(),
        trace_path.display()
    );
    Ok(())
}

pub fn metrics(
    trace_path: &Path,
    report: &Path,
    heatmap: Option<&Path>,
    format: &str,
) -> Result<(), CliError> {
    let format = heatmap_format(format)?;
    let file = File::open(trace_path).map_err(|e| io_err(trace_path, e))?;
    let trace = read_trace(BufReader::new(file)).map_err(|e| in_file(trace_path, e))?;
    let summary = write_metrics(&trace, report, heatmap.map(|p| (p, format)))?;
    let peak = injection_rate(&trace, RateMode::PerBurst)?
        .peak()
        .map_or(0.0, |(_, rate)| rate);
    println!(
        "events={} packets={} spatial_cv={:?} peak_rate={:?}",
        trace.events.len(),
        summary.total_packets,
        summary.spatial_cv,
        peak
    );
    Ok(())
}

pub struct SweepArgs {
    pub from_theta: Option<f64>,
    pub to_theta: Option<f64>,
    pub from_phi: f64,
    pub to_phi: f64,
    pub grid: Option<f64>,
}

pub fn sweep(args: SweepArgs, config: Option<&Path>) -> Result<(), CliError> {
    let (cfg, _) = load_config(config)?;
    let meta = cfg.build()?;
    if let Some(step) = args.grid {
        let start = args.from_theta.unwrap_or(85.0);
        for (from, to, fraction) in sweep_grid(start, step, args.from_phi, &meta.surface, meta.incident)? {
            println!(
                "from_theta={from:?} to_theta={to:?} phi={:?} fraction={fraction:?}",
                args.from_phi
            );
        }
        return Ok(());
    }
    let (Some(from_theta), Some(to_theta)) = (args.from_theta, args.to_theta) else {
        return Err(CliError::Validation(
            "sweep needs --from-theta and --to-theta unless --grid is given".into(),
        ));
    };
    let from = Angles::new(from_theta, args.from_phi).map_err(CliError::from)?;
    let to = Angles::new(to_theta, args.to_phi).map_err(CliError::from)?;
    let fraction = sweep_diff(from, to, &meta.surface, meta.incident)?;
    println!(
        "from_theta={:?} from_phi={:?} to_theta={:?} to_phi={:?} fraction={fraction:?}",
        from.theta, from.phi, to.theta, to.phi
    );
    Ok(())
}

pub fn defaults(case: &str) -> Result<(), CliError> {
    let case: CaseId = case.parse()?;
    println!("{}", ScenarioConfig::for_case(case).to_json_pretty());
    Ok(())
}
