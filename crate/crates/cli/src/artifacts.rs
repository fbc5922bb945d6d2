//! Reading and writing the files of each stage.

use std::fs;
use std::path::{Path, PathBuf};

use scatter_core::io::{
    fmt_f64, mask_from_csv, mask_to_csv, measurements_from_csv, measurements_to_csv, real_field_from_csv,
    real_field_to_csv,
};
use scatter_core::{IndexField, MeasurementSet, Peak, RealField};

use crate::error::{HarnessError, Result, StageExt};
use crate::pipeline::{ForwardOutput, Inversion, SamplingOutput};
use crate::report::ReconReport;

pub const MEASUREMENTS: &str = "measurements.csv";
pub const ETA_TRUE: &str = "eta_true.csv";
pub const PHI: &str = "phi.csv";
pub const SUPPORT: &str = "support.csv";
pub const INITIAL: &str = "initial.csv";
pub const PEAKS: &str = "peaks.csv";
pub const ETA: &str = "eta.csv";
pub const SSN: &str = "ssn.csv";
pub const METRICS: &str = "metrics.csv";
pub const REPORT: &str = "report.txt";

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.display().to_string(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| HarnessError::Io { path: path.display().to_string(), source })
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|source| HarnessError::Io { path: path.display().to_string(), source })
}

fn wave_file(i: usize) -> String {
    format!("phi_wave{i}.csv")
}

pub fn write_forward(dir: &Path, f: &ForwardOutput) -> Result<()> {
    write(dir, ETA_TRUE, &real_field_to_csv(&f.eta_true))?;
    write(dir, MEASUREMENTS, &measurements_to_csv(&f.data))
}

pub fn read_measurements(dir: &Path) -> Result<MeasurementSet> {
    measurements_from_csv(&read(dir, MEASUREMENTS)?).stage("reading measurements")
}

pub fn peaks_to_csv(peaks: &[Peak]) -> String {
    let mut s = String::from("x,y,z,value\n");
    for p in peaks {
        let l = p.location;
        s.push_str(&format!("{},{},{},{}\n", fmt_f64(l[0]), fmt_f64(l[1]), fmt_f64(l[2]), fmt_f64(p.value)));
    }
    s
}

pub fn peaks_from_csv(text: &str) -> Result<Vec<Peak>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "x,y,z,value")) => {}
        _ => return Err(HarnessError::Parse { line: 1, msg: "expected header `x,y,z,value`".into() }),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| HarnessError::Parse { line: n + 1, msg: e.to_string() })?;
            if v.len() != 4 {
                return Err(HarnessError::Parse { line: n + 1, msg: "expected 4 columns".into() });
            }
            Ok(Peak { location: [v[0], v[1], v[2]], value: v[3] })
        })
        .collect()
}

pub fn write_sampling(dir: &Path, s: &SamplingOutput) -> Result<()> {
    write(dir, PHI, &real_field_to_csv(&s.index.phi))?;
    if s.index.components.len() > 1 {
        for (i, c) in s.index.components.iter().enumerate() {
            write(dir, &wave_file(i), &real_field_to_csv(c))?;
        }
    }
    write(dir, SUPPORT, &mask_to_csv(&s.support))?;
    write(dir, INITIAL, &real_field_to_csv(&s.initial))?;
    write(dir, PEAKS, &peaks_to_csv(&s.peaks))
}

pub fn read_sampling(dir: &Path) -> Result<SamplingOutput> {
    let field = |name: &str| -> Result<RealField> { real_field_from_csv(&read(dir, name)?).stage("reading index") };
    let phi = field(PHI)?;
    let mut components = Vec::new();
    while dir.join(wave_file(components.len())).exists() {
        components.push(field(&wave_file(components.len()))?);
    }
    if components.is_empty() {
        components.push(phi.clone());
    }
    let support = mask_from_csv(&read(dir, SUPPORT)?).stage("reading support")?;
    let initial = field(INITIAL)?;
    let peaks = peaks_from_csv(&read(dir, PEAKS)?)?;
    Ok(SamplingOutput { index: IndexField { phi, components }, support, initial, peaks })
}

pub fn write_inversion(dir: &Path, inv: &Inversion, report: &ReconReport) -> Result<()> {
    write(dir, ETA, &real_field_to_csv(&inv.eta))?;
    write(dir, SSN, &inv.result.diagnostics.to_csv())?;
    write(dir, METRICS, &inv.metrics.to_csv())?;
    write(dir, REPORT, &report.to_text())
}

/// Files written by a full run, in a fixed order.
pub fn pipeline_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = [MEASUREMENTS, ETA_TRUE, PHI, SUPPORT, INITIAL, PEAKS, ETA, SSN, METRICS, REPORT]
        .iter()
        .map(|n| dir.join(n))
        .collect();
    let mut i = 0;
    while dir.join(wave_file(i)).exists() {
        v.push(dir.join(wave_file(i)));
        i += 1;
    }
    v
}
