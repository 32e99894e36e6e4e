//! Per-file subcommands: parse, encode, analyze.

use std::fs;
use std::path::{Path, PathBuf};

use tabproc::analysis::analyze as analyze_score;
use tabproc::codec::encode_clip;
use tabproc::ingest::parse_score;
use tabproc::par;

use super::{expand_inputs, load_score, log_report, stem, write_json, Context, Outcome};

fn for_each_file(inputs: &[PathBuf], f: impl Fn(&Path) -> Result<(), String> + Sync + Send) -> Outcome {
    let files = expand_inputs(inputs);
    if files.is_empty() {
        eprintln!("error: no input files");
        return Outcome::fatal();
    }
    let results = par::map(&files, |p| f(p));
    Outcome::from_results(&files, results)
}

pub fn parse(ctx: &Context, inputs: &[PathBuf], raw: bool) -> Outcome {
    for_each_file(inputs, |path| {
        let (score, report) = if raw {
            if !path.exists() {
                return Err("no such file".to_string());
            }
            let bytes = fs::read(path).map_err(|e| e.to_string())?;
            parse_score(&bytes, &ctx.options).map_err(|e| e.to_string())?
        } else {
            load_score(path, &ctx.options)?
        };
        log_report(path, &report);
        let name = stem(path);
        write_json(&ctx.out.join(format!("{name}.score.json")), &score)?;
        write_json(&ctx.out.join(format!("{name}.report.json")), &report)
    })
}

pub fn encode(ctx: &Context, inputs: &[PathBuf], text: bool) -> Outcome {
    for_each_file(inputs, |path| {
        let (score, report) = load_score(path, &ctx.options)?;
        log_report(path, &report);
        let clip = encode_clip(&score, ctx.mode).map_err(|e| e.to_string())?;
        let name = stem(path);
        let json = clip.to_json().map_err(|e| e.to_string())?;
        fs::write(ctx.out.join(format!("{name}.antab.json")), json).map_err(|e| e.to_string())?;
        if text {
            fs::write(ctx.out.join(format!("{name}.antab.txt")), clip.to_text()).map_err(|e| e.to_string())?;
        }
        Ok(())
    })
}

pub fn analyze(ctx: &Context, inputs: &[PathBuf]) -> Outcome {
    for_each_file(inputs, |path| {
        let (score, report) = load_score(path, &ctx.options)?;
        log_report(path, &report);
        let analysis = analyze_score(&score).map_err(|e| e.to_string())?;
        write_json(&ctx.out.join(format!("{}.analysis.json", stem(path))), &analysis)
    })
}
