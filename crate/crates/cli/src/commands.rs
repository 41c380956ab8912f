use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pedtrack_core::calibration::{
    apply_calibration, fit_calibration, read_control_points, Calibration, TrapConfig,
};
use pedtrack_core::detection::{
    build_descriptor_database, read_descriptor_database, write_descriptor_database,
    DetectionError, FeatureRow,
};
use pedtrack_core::imaging::{load_image_sequence, median_background, read_netpbm, ImageStack};
use pedtrack_core::metrics::{build_tracks, flow_report, write_report, write_series, Interval};
use pedtrack_core::synth::{parse_scenario, read_truth, render_scenario, score_tracking, write_render};
use pedtrack_core::tracking::{read_ntxy, trace_database, write_ntxy, TrackingError};

use crate::config::{read_text, BackgroundSource, PipelineConfig};
use crate::CliError;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn open_input(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Creates `path` and hands a buffered writer to `write`.
fn write_output(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Failure(format!("{}: {e}", path.display()));
    let mut out = BufWriter::new(File::create(path).map_err(fail)?);
    write(&mut out).map_err(fail)
}

fn is_frame_file(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "ppm" | "pgm"))
}

/// Expands a lone directory argument into its PPM/PGM files sorted by name.
fn frame_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let no_frames = || CliError::Usage("no input frames".into());
    let paths = match inputs {
        [dir] if dir.is_dir() => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|_| no_frames())?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_frame_file(p))
                .collect();
            files.sort();
            files
        }
        [single] if !single.exists() => return Err(no_frames()),
        _ => inputs.to_vec(),
    };
    if paths.is_empty() {
        return Err(no_frames());
    }
    Ok(paths)
}

fn run_detection(frames: &[PathBuf], cfg: &PipelineConfig) -> Result<(ImageStack, Vec<FeatureRow>), CliError> {
    let stack = load_image_sequence(&frame_paths(frames)?, cfg.frame_interval).map_err(usage)?;
    let background = match &cfg.background {
        BackgroundSource::Median => median_background(&stack).map_err(usage)?,
        BackgroundSource::File(p) => read_netpbm(p).map_err(usage)?,
    };
    let db = build_descriptor_database(&stack, &background, &cfg.detection_params()).map_err(|e| match e {
        DetectionError::Imaging(e) => usage(e),
        other => CliError::Failure(other.to_string()),
    })?;
    Ok((stack, db))
}

pub fn detect(frames: &[PathBuf], output: &Path, cfg: &PipelineConfig) -> Result<(), CliError> {
    let (stack, db) = run_detection(frames, cfg)?;
    write_output(output, |out| write_descriptor_database(out, &[cfg.comment_line()], &db))?;
    let mut counts = vec![0usize; stack.len()];
    for row in &db {
        counts[row.slice_number as usize - 1] += 1;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for (i, n) in counts.iter().enumerate() {
        let _ = writeln!(lock, "slice {}: {n} objects", i + 1);
    }
    Ok(())
}

fn load_calibration(path: &Path) -> Result<Calibration, CliError> {
    let points = read_control_points(open_input(path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    fit_calibration(&points).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn track(
    database: Option<&Path>,
    frames: &[PathBuf],
    output: &Path,
    cfg: &PipelineConfig,
) -> Result<(), CliError> {
    let params = cfg.vote_params()?;
    let (db, slices) = match database {
        Some(path) => {
            let db = read_descriptor_database(open_input(path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let slices = db.iter().map(|r| r.slice_number).max().unwrap_or(0) as usize;
            (db, slices)
        }
        None => {
            let (stack, db) = run_detection(frames, cfg)?;
            (db, stack.len())
        }
    };
    let traced = trace_database(&db, &params).map_err(|e| match e {
        TrackingError::InvalidParams(_) | TrackingError::Ordering { .. } => usage(e),
        other => CliError::Failure(other.to_string()),
    })?;
    let mut records = traced.records;
    if let Some(path) = &cfg.calibration {
        records = apply_calibration(&load_calibration(path)?, &records);
    }
    write_output(output, |out| write_ntxy(out, &[cfg.comment_line()], &records))?;
    let mut peds: Vec<u32> = records.iter().map(|r| r.pedestrian_number).collect();
    peds.dedup();
    println!("pedestrians found: {}, slices processed: {slices}", peds.len());
    Ok(())
}

fn parse_interval(text: &str) -> Result<Interval, CliError> {
    let bad = || CliError::Usage(format!("interval `{text}` must be T1,T2"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    let t1 = a.trim().parse().map_err(|_| bad())?;
    let t2 = b.trim().parse().map_err(|_| bad())?;
    Interval::new(t1, t2).map_err(usage)
}

pub fn metrics(
    ntxy: &Path,
    interval: &str,
    output: &Path,
    series: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<(), CliError> {
    let interval = parse_interval(interval)?;
    let rect = cfg
        .trap
        .ok_or_else(|| CliError::Usage("trap is required for metrics".into()))?;
    let trap = TrapConfig::new(rect).map_err(usage)?;
    let records = read_ntxy(open_input(ntxy)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", ntxy.display())))?;
    let tracks = build_tracks(&records, &trap, cfg.frame_interval).map_err(usage)?;
    let report = flow_report(&tracks, &trap, interval, cfg.frame_interval)
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let comments = [cfg.comment_line()];
    write_output(output, |out| write_report(out, &comments, &report))?;
    if let Some(path) = series {
        write_output(path, |out| write_series(out, &comments, &tracks))?;
    }
    println!(
        "pedestrians: {}, flow rate: {} per second",
        report.kappa, report.flow_rate
    );
    Ok(())
}

pub fn synth(scenario: &Path, output: &Path) -> Result<(), CliError> {
    let s = parse_scenario(&read_text(scenario)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", scenario.display())))?;
    let (stack, truth) = render_scenario(&s).map_err(usage)?;
    write_render(output, &stack, &s.background_image(), &truth)
        .map_err(|e| CliError::Failure(e.to_string()))?;
    println!("rendered {} frames to {}", stack.len(), output.display());
    Ok(())
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_output(path, |out| out.write_all(text.as_bytes())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn score(ntxy: &Path, truth: &Path, match_radius: f64, output: Option<&Path>) -> Result<(), CliError> {
    if !(match_radius.is_finite() && match_radius > 0.0) {
        return Err(CliError::Usage(format!("match_radius must be positive, got {match_radius}")));
    }
    let records = read_ntxy(open_input(ntxy)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", ntxy.display())))?;
    let truth = read_truth(open_input(truth)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", truth.display())))?;
    let s = score_tracking(&records, &truth, match_radius);
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| v.to_string());
    let mut text = format!(
        "Quantity,Value\nIdentityRate,{}\nRmsError,{}\nFalsePositives,{}\nFalseNegatives,{}\nIdentitySwitches,{}\n\nActor,PedNum\n",
        opt(s.identity_rate),
        opt(s.rms_error),
        s.false_positives,
        s.false_negatives,
        s.identity_switches,
    );
    for (actor, ped) in &s.matches {
        text.push_str(&format!("{actor},{ped}\n"));
    }
    emit(output, &text)
}

pub fn calibrate(control_points: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let c = load_calibration(control_points)?;
    let text = format!(
        "Coefficient,Value\nu,{}\nv,{}\nw,{}\nx0,{}\ny0,{}\nz0,{}\nresidual,{}\n",
        c.u, c.v, c.w, c.x0, c.y0, c.z0, c.fit_residual
    );
    emit(output, &text)
}
