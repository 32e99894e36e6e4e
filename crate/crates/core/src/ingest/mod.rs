//! GuitarPro-flavoured MusicXML ingest and score normalization.

mod dictionary;
mod mxl;
mod normalize;
mod parse;
mod report;

pub use dictionary::{RuleTarget, TechniqueDictionary};
pub use mxl::{extract_root_document, is_mxl};
pub use normalize::{clean_ties, merge_voices, normalize_capo, slice_clip};
pub use parse::{parse_score, parse_str, ParseOptions};
pub use report::{ParseReport, Warning};

use std::path::Path;

use crate::error::Result;
use crate::model::Score;

/// Parse a file and normalize it: voices merged, ties cleaned.
pub fn read_tab(path: &Path, options: &ParseOptions) -> Result<(Score, ParseReport)> {
    let bytes = std::fs::read(path)?;
    read_tab_bytes(&bytes, options)
}

pub fn read_tab_bytes(bytes: &[u8], options: &ParseOptions) -> Result<(Score, ParseReport)> {
    let (score, mut report) = parse_score(bytes, options)?;
    let merged = merge_voices(&score, &mut report);
    let cleaned = clean_ties(&merged, &mut report)?;
    Ok((cleaned, report))
}
