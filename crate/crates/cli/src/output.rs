//! Report files: one JSON summary per scenario and one CSV per ladder.
//!
//! Everything is rendered in memory first, then written to temporary files
//! in the target directory and renamed into place, so a failed run leaves
//! no half-written reports behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::run::Report;

pub const OUT_ENV: &str = "QAKIT_OUT";
pub const DEFAULT_OUT: &str = "qakit-out";
pub const CSV_HEADER: &str = "scale,ratio,predicted,abs_err,rel_err";

/// `--out` wins over `QAKIT_OUT`, which wins over the default.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

pub fn report_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// The JSON report with the wall-clock field removed; equal for equal inputs.
pub fn deterministic_json(report: &Report) -> String {
    let mut v = serde_json::to_value(report).expect("report serializes");
    if let Some(obj) = v.as_object_mut() {
        obj.remove("wall_clock_s");
    }
    serde_json::to_string_pretty(&v).expect("value serializes")
}

pub fn ladder_csv(rows: &[[f64; 5]]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{:?},{:?},{:?},{:?},{:?}", r[0], r[1], r[2], r[3], r[4]);
    }
    s
}

/// File names and contents for a report, in write order.
pub fn render(report: &Report) -> Vec<(String, String)> {
    let name = &report.scenario.name;
    let mut files = vec![(format!("{name}.json"), report_json(report))];
    for item in &report.items {
        if let Some(rows) = &item.ladder {
            files.push((format!("{name}.{}.csv", item.label), ladder_csv(rows)));
        }
    }
    files
}

/// Writes every file of `report` into `dir` atomically and returns the paths.
pub fn write_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let files = render(report);
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(files.len());
    let result = (|| -> Result<()> {
        for (name, body) in &files {
            let target = dir.join(name);
            let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
            let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
            staged.push((tmp.clone(), target));
            f.write_all(body.as_bytes())
                .and_then(|_| f.sync_all())
                .with_context(|| format!("writing {}", tmp.display()))?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e);
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, target) in staged {
        fs::rename(&tmp, &target).with_context(|| format!("moving report into {}", target.display()))?;
        written.push(target);
    }
    Ok(written)
}
