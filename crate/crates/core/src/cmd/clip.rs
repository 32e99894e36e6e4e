use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;

use tabproc::codec::encode_clip;
use tabproc::ingest::slice_clip;
use tabproc::model::{ClipAnnotation, Structure};

use super::{expand_inputs, load_score, log_report, stem, write_json, Context, Outcome};

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["annotations", "start"]))]
pub struct ClipArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// First bar of the clip (1-based)
    #[arg(long, requires_all = ["end", "label"])]
    pub start: Option<u32>,
    /// Last bar of the clip, inclusive
    #[arg(long, requires = "start")]
    pub end: Option<u32>,
    /// Structure label: intro, verse, chorus or bridge
    #[arg(long, requires = "start")]
    pub label: Option<Structure>,
    /// CSV with columns sourceId,structure,startBar,endBar
    #[arg(long, conflicts_with = "start")]
    pub annotations: Option<PathBuf>,
    /// Also write the token encoding of each clip
    #[arg(long)]
    pub encode: bool,
}

fn read_annotations(path: &Path) -> Result<Vec<ClipAnnotation>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| e.to_string())?;
    reader.deserialize().map(|r| r.map_err(|e| e.to_string())).collect()
}

fn write_clip(ctx: &Context, path: &Path, annotation: &ClipAnnotation, encode: bool) -> Result<(), String> {
    let (score, mut report) = load_score(path, &ctx.options)?;
    let clip = slice_clip(&score, annotation, &mut report).map_err(|e| e.to_string())?;
    log_report(path, &report);
    let name = format!(
        "{}.{}-{}-{}",
        annotation.source_id, annotation.structure, annotation.start_bar, annotation.end_bar
    );
    write_json(&ctx.out.join(format!("{name}.score.json")), &clip)?;
    write_json(&ctx.out.join(format!("{name}.report.json")), &report)?;
    if encode {
        let mut tokens = encode_clip(&clip, ctx.mode).map_err(|e| e.to_string())?;
        tokens.annotation = Some(annotation.clone());
        let json = tokens.to_json().map_err(|e| e.to_string())?;
        fs::write(ctx.out.join(format!("{name}.antab.json")), json).map_err(|e| e.to_string())?;
    }
    Ok(())
}

pub fn run(ctx: &Context, args: &ClipArgs) -> Outcome {
    let files = expand_inputs(&args.inputs);
    if files.is_empty() {
        eprintln!("error: no input files");
        return Outcome::fatal();
    }
    let mut jobs: Vec<(PathBuf, ClipAnnotation)> = Vec::new();
    let mut outcome = Outcome::default();
    match (&args.annotations, args.start, args.end, args.label) {
        (Some(csv_path), ..) => {
            let rows = match read_annotations(csv_path) {
                Ok(rows) => rows,
                Err(e) => {
                    eprintln!("error: {}: {e}", csv_path.display());
                    return Outcome::fatal();
                }
            };
            let by_stem: BTreeMap<String, &PathBuf> = files.iter().map(|p| (stem(p), p)).collect();
            for row in rows {
                match by_stem.get(&row.source_id) {
                    Some(p) => jobs.push(((*p).clone(), row)),
                    None => {
                        eprintln!("error: annotation for '{}' matches no input", row.source_id);
                        outcome.failed += 1;
                    }
                }
            }
        }
        (None, Some(start), Some(end), Some(label)) => {
            for p in &files {
                match ClipAnnotation::new(stem(p), label, start, end) {
                    Ok(a) => jobs.push((p.clone(), a)),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return Outcome::fatal();
                    }
                }
            }
        }
        _ => {
            eprintln!("error: give --annotations or --start/--end/--label");
            return Outcome::fatal();
        }
    }
    let paths: Vec<PathBuf> = jobs.iter().map(|(p, _)| p.clone()).collect();
    let results = tabproc::par::map(&jobs, |(p, a)| write_clip(ctx, p, a, args.encode));
    let done = Outcome::from_results(&paths, results);
    outcome.ok += done.ok;
    outcome.failed += done.failed;
    outcome
}
