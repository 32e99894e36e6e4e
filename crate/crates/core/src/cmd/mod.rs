//! Subcommand plumbing shared by the binary.

pub mod batch;
pub mod clip;
pub mod stats;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use tabproc::codec::TokenMode;
use tabproc::ingest::{read_tab, ParseOptions, ParseReport};
use tabproc::model::Score;

pub struct Context {
    pub out: PathBuf,
    pub mode: TokenMode,
    pub max_fret: u8,
    pub options: ParseOptions,
}

/// Per-file success/failure tally; maps onto the exit code.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub ok: usize,
    pub failed: usize,
    /// Set when the run could not start at all.
    pub fatal: bool,
}

impl Outcome {
    pub fn fatal() -> Self {
        Outcome {
            fatal: true,
            ..Default::default()
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.fatal || (self.ok == 0 && self.failed > 0) {
            2
        } else if self.failed > 0 {
            1
        } else {
            0
        }
    }

    /// Print per-file errors in input order and the summary line.
    pub fn from_results(inputs: &[PathBuf], results: Vec<Result<(), String>>) -> Self {
        let mut o = Outcome::default();
        for (path, r) in inputs.iter().zip(results) {
            match r {
                Ok(()) => o.ok += 1,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    o.failed += 1;
                }
            }
        }
        if o.failed > 0 {
            eprintln!("{} of {} inputs failed", o.failed, o.ok + o.failed);
        }
        log::info!("{} inputs processed, {} failed", o.ok + o.failed, o.failed);
        o
    }
}

const SCORE_JSON_SUFFIX: &str = ".score.json";
const SCORE_EXTENSIONS: [&str; 3] = ["musicxml", "xml", "mxl"];

fn is_score_file(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    name.ends_with(SCORE_JSON_SUFFIX)
        || path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| SCORE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            walk(&p, out)?;
        } else if is_score_file(&p) {
            out.push(p);
        }
    }
    Ok(())
}

/// Replace directories by the score files under them, sorted by path.
/// Plain file arguments are kept as given, existing or not.
pub fn expand_inputs(inputs: &[PathBuf]) -> Vec<PathBuf> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found = Vec::new();
            if let Err(e) = walk(p, &mut found) {
                log::warn!("{}: {e}", p.display());
            }
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    files
}

/// Output file stem: the file name without `.score.json` or its extension.
pub fn stem(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("score");
    match name.strip_suffix(SCORE_JSON_SUFFIX) {
        Some(s) => s.to_string(),
        None => path.file_stem().and_then(|s| s.to_str()).unwrap_or("score").to_string(),
    }
}

/// Read a MusicXML/MXL file (normalized) or a score JSON written by `parse`.
pub fn load_score(path: &Path, options: &ParseOptions) -> Result<(Score, ParseReport), String> {
    if !path.exists() {
        return Err("no such file".to_string());
    }
    if path.to_string_lossy().ends_with(SCORE_JSON_SUFFIX) {
        let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
        let score: Score = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        score.validate().map_err(|e| e.to_string())?;
        return Ok((score, ParseReport::default()));
    }
    read_tab(path, options).map_err(|e| e.to_string())
}

pub fn log_report(path: &Path, report: &ParseReport) {
    for w in &report.warnings {
        log::warn!("{}: bar {}: {}", path.display(), w.bar, w.message);
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))
}
