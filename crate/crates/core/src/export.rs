//! CSV and JSON writers. Floats use Rust's shortest round-trip formatting,
//! so exported numbers parse back to the identical `f64`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::run::{SpectrumRun, SweepResult, TransitionSet};
use crate::spectrum::SpectrumTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn write_trace_csv<W: Write>(mut w: W, trace: &SpectrumTrace) -> io::Result<()> {
    writeln!(w, "omega_rel_ueV,intensity")?;
    for (x, v) in trace.omega_rel.iter().zip(&trace.values) {
        writeln!(w, "{x},{v}")?;
    }
    Ok(())
}

/// Long-form table; failed sweep points contribute no rows.
pub fn write_sweep_csv<W: Write>(mut w: W, sweep: &SweepResult) -> io::Result<()> {
    writeln!(w, "axis_value,omega_rel_ueV,intensity")?;
    for point in &sweep.points {
        if let Some(trace) = &point.trace {
            for (x, v) in trace.omega_rel.iter().zip(&trace.values) {
                writeln!(w, "{},{x},{v}", point.axis_value)?;
            }
        }
    }
    Ok(())
}

/// Transition table; the axis column is written only when every set has an
/// axis value.
pub fn write_transitions_csv<W: Write>(mut w: W, sets: &[TransitionSet]) -> io::Result<()> {
    let with_axis = !sets.is_empty() && sets.iter().all(|s| s.axis_value.is_some());
    if with_axis {
        writeln!(w, "axis_value,transition_ueV")?;
    } else {
        writeln!(w, "transition_ueV")?;
    }
    for set in sets {
        for t in &set.transitions {
            match set.axis_value.filter(|_| with_axis) {
                Some(a) => writeln!(w, "{a},{t}")?,
                None => writeln!(w, "{t}")?,
            }
        }
    }
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

fn create(dir: &Path, name: &str) -> io::Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn overlay_sets(run_overlay: &Option<Vec<f64>>, axis_value: Option<f64>) -> Option<TransitionSet> {
    run_overlay.as_ref().map(|t| TransitionSet {
        axis_value,
        transitions: t.clone(),
    })
}

/// Writes `spectrum.{csv,json}` (plus `overlay.csv`) into `dir`.
pub fn export_spectrum(run: &SpectrumRun, format: Format, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            let (path, mut w) = create(dir, "spectrum.csv")?;
            write_trace_csv(&mut w, &run.trace)?;
            w.flush()?;
            written.push(path);
            if let Some(set) = overlay_sets(&run.overlay, None) {
                let (path, mut w) = create(dir, "overlay.csv")?;
                write_transitions_csv(&mut w, &[set])?;
                w.flush()?;
                written.push(path);
            }
        }
        Format::Json => {
            let (path, mut w) = create(dir, "spectrum.json")?;
            write_json(&mut w, run)?;
            w.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes `sweep.{csv,json}` (plus `overlay.csv`) into `dir`.
pub fn export_sweep(sweep: &SweepResult, format: Format, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            let (path, mut w) = create(dir, "sweep.csv")?;
            write_sweep_csv(&mut w, sweep)?;
            w.flush()?;
            written.push(path);
            let sets: Vec<TransitionSet> = sweep
                .points
                .iter()
                .filter_map(|p| overlay_sets(&p.overlay, Some(p.axis_value)))
                .collect();
            if !sets.is_empty() {
                let (path, mut w) = create(dir, "overlay.csv")?;
                write_transitions_csv(&mut w, &sets)?;
                w.flush()?;
                written.push(path);
            }
        }
        Format::Json => {
            let (path, mut w) = create(dir, "sweep.json")?;
            write_json(&mut w, sweep)?;
            w.flush()?;
            written.push(path);
        }
    }
    Ok(written)
}
