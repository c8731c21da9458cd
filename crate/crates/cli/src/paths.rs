//! Input checks and small readers shared by the subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use primlib::io::{read_demonstration, read_trajectory_csv, DEMO_META_FILE};
use primlib::Demonstration;

use crate::exit::{CliError, Context};

pub fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::input(format!("{} is not a readable file", path.display())))
    }
}

pub fn require_dir(path: &Path) -> Result<(), CliError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::input(format!("{} is not a directory", path.display())))
    }
}

/// Creates the output directory (and parents).
pub fn out_dir(path: &Path) -> Result<(), CliError> {
    if path.exists() && !path.is_dir() {
        return Err(CliError::input(format!(
            "{} exists and is not a directory",
            path.display()
        )));
    }
    fs::create_dir_all(path).context(path.display())
}

/// Creates the parent directory of an output file.
pub fn out_file(path: &Path) -> Result<(), CliError> {
    if path.is_dir() {
        return Err(CliError::input(format!("{} is a directory", path.display())));
    }
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).context(p.display()),
        _ => Ok(()),
    }
}

/// A demonstration directory, or a single CSV file read as a one-stream
/// demonstration named after the file.
pub fn load_demo(path: &Path) -> Result<Demonstration, CliError> {
    if path.is_dir() {
        if !path.join(DEMO_META_FILE).is_file() {
            return Err(CliError::input(format!("{} has no {DEMO_META_FILE}", path.display())));
        }
        return read_demonstration(path).context(path.display());
    }
    require_file(path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::input(format!("{} has no usable file name", path.display())))?;
    let traj = read_trajectory_csv(path).context(path.display())?;
    let name: String = stem
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    Ok(Demonstration::single(name.clone(), name, traj))
}

/// `id,label` CSV.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    require_file(path)?;
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        if row.len() != 2 {
            return Err(CliError::input(format!(
                "{}: line {} needs exactly `id,label`",
                path.display(),
                i + 2
            )));
        }
        if out.insert(row[0].to_string(), row[1].to_string()).is_some() {
            return Err(CliError::input(format!(
                "{}: duplicate id `{}`",
                path.display(),
                &row[0]
            )));
        }
    }
    Ok(out)
}

pub fn write_labels(path: &Path, labels: &[(String, String)]) -> Result<(), CliError> {
    let mut text = String::from("id,label\n");
    for (id, label) in labels {
        text.push_str(&format!("{id},{label}\n"));
    }
    primlib::io::write_atomic(path, text.as_bytes()).context(path.display())
}

pub fn sibling(path: &Path, name: &str) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.join(name),
        _ => PathBuf::from(name),
    }
}
