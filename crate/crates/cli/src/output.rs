//! CSV rendering and atomic file output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cascade_lcr::figures::Metric;
use cascade_lcr::{SecondOrderCurve, ThresholdGrid};

use crate::CliError;

pub const CURVE_HEADER: &str =
    "threshold_db,threshold_lin,lcr_normalized,afd_normalized,method,lcr_se,afd_se";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per (threshold, method), thresholds outermost. LCR is divided by
/// `fm_ref` and AFD multiplied by it; an undefined AFD is an empty field.
pub fn curve_csv(grid: &ThresholdGrid, fm_ref: f64, curves: &[SecondOrderCurve]) -> String {
    let mut out = String::new();
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for (j, &y) in grid.values().iter().enumerate() {
        for c in curves {
            let p = &c.points[j];
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                grid.to_db(y),
                y,
                p.lcr / fm_ref,
                opt(p.afd.map(|a| a * fm_ref)),
                c.method,
                opt(p.lcr_se.map(|s| s / fm_ref)),
                opt(p.afd_se.map(|s| s * fm_ref)),
            );
        }
    }
    out
}

pub fn figure_header(metric: Metric) -> String {
    let m = metric.as_str();
    format!("threshold_db,threshold_lin,{m}_normalized,{m}_se,method")
}

/// Figure rows for one tap: the chosen metric from every curve given.
pub fn figure_csv(
    grid: &ThresholdGrid,
    fm_ref: f64,
    metric: Metric,
    curves: &[&SecondOrderCurve],
) -> String {
    let mut out = figure_header(metric);
    out.push('\n');
    for (j, &y) in grid.values().iter().enumerate() {
        for c in curves {
            let p = &c.points[j];
            let (v, se) = match metric {
                Metric::Lcr => (Some(p.lcr / fm_ref), p.lcr_se.map(|s| s / fm_ref)),
                Metric::Afd => (p.afd.map(|a| a * fm_ref), p.afd_se.map(|s| s * fm_ref)),
            };
            let _ = writeln!(out, "{},{},{},{},{}", grid.to_db(y), y, opt(v), opt(se), c.method);
        }
    }
    out
}

pub fn cdf_csv(grid: &ThresholdGrid, cdf: &[f64]) -> String {
    let mut out = String::from("threshold_db,threshold_lin,cdf\n");
    for (&y, f) in grid.values().iter().zip(cdf) {
        let _ = writeln!(out, "{},{},{}", grid.to_db(y), y, f);
    }
    out
}

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory and a rename, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io(&target)(e));
    }
    Ok(target)
}
