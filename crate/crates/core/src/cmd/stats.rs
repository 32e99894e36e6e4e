use std::path::PathBuf;

use tabproc::model::Score;
use tabproc::par;
use tabproc::stats::{aggregate, CorpusStats};

use super::{expand_inputs, load_score, log_report, Context, Outcome};

pub fn run(ctx: &Context, inputs: &[PathBuf]) -> Outcome {
    let files = expand_inputs(inputs);
    if files.is_empty() {
        eprintln!("error: empty corpus");
        return Outcome::fatal();
    }
    let loaded = par::map(&files, |p| load_score(p, &ctx.options));
    let mut scores: Vec<Score> = Vec::new();
    let mut results = Vec::new();
    for (path, r) in files.iter().zip(loaded) {
        results.push(r.map(|(score, report)| {
            log_report(path, &report);
            scores.push(score);
        }));
    }
    let mut outcome = Outcome::from_results(&files, results);
    if scores.is_empty() {
        eprintln!("error: empty corpus");
        outcome.fatal = true;
        return outcome;
    }
    let written = aggregate(&scores)
        .and_then(|counts| CorpusStats::from_counts(&counts, ctx.max_fret))
        .and_then(|stats| stats.write_to(&ctx.out));
    match written {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            outcome.fatal = true;
        }
    }
    outcome
}
