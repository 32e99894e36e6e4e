//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{
    b, computed_tag_rows, diatonic_score, fixture, measure, note, per_pitch_durations, random_normalized_score,
    random_raw_score, read_tag_rows,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use tabproc::analysis::{detect_key, midi_to_positions, position_to_midi, recognize_chord};
use tabproc::codec::{decode_clip, encode_clip, EncodedClip, TokenMode};
use tabproc::ingest::{clean_ties, merge_voices, read_tab, ParseOptions, ParseReport};
use tabproc::model::{
    Beats, ChordQuality, ChordRoot, Cluster, Mode, PitchClass, Score, TimeSignature, Tuning, MAX_FRET,
};
use tabproc::stats::{aggregate, grid_slot, CorpusStats};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

// Chord tones above the root, one entry per supported voicing.
const CHORD_TONES: &[(ChordQuality, &[i32])] = &[
    (ChordQuality::Maj, &[0, 4, 7]),
    (ChordQuality::Maj, &[0, 7]),
    (ChordQuality::Maj, &[0, 4]),
    (ChordQuality::Min, &[0, 3, 7]),
    (ChordQuality::Min, &[0, 3]),
    (ChordQuality::Maj7, &[0, 4, 7, 11]),
    (ChordQuality::Maj7, &[0, 4, 11]),
    (ChordQuality::Maj7, &[0, 7, 11]),
    (ChordQuality::Min7, &[0, 3, 7, 10]),
    (ChordQuality::Min7, &[0, 3, 10]),
    (ChordQuality::Min7, &[0, 7, 10]),
    (ChordQuality::Dom7, &[0, 4, 7, 10]),
    (ChordQuality::Dom7, &[0, 4, 10]),
    (ChordQuality::Aug, &[0, 4, 8]),
    (ChordQuality::Dim, &[0, 3, 6]),
];

const STANDARD_OPEN: [i32; 6] = [64, 59, 55, 50, 45, 40];

/// Stack pitch classes upwards from string 6, one string each.
fn voice_low_strings(pcs: &[i32]) -> Option<Cluster> {
    let t = Tuning::STANDARD;
    let mut previous = 0;
    let mut events = Vec::new();
    for (&pc, string) in pcs.iter().zip([6u8, 5, 4, 3]) {
        let open = STANDARD_OPEN[usize::from(string) - 1];
        let floor = open.max(previous + 1);
        let midi = floor + (pc - floor).rem_euclid(12);
        let fret = u8::try_from(midi - open).ok().filter(|&f| f <= MAX_FRET)?;
        events.push(note(Beats::ZERO, b(1, 1), string, fret, &t, 0));
        previous = midi;
    }
    Some(Cluster::new(Beats::ZERO, events))
}

fn criterion_chords() -> Check {
    let start = Instant::now();
    let mut checked = 0;
    for &(quality, tones) in CHORD_TONES {
        for root in 0..12 {
            let pcs: Vec<i32> = tones.iter().map(|t| (root + t) % 12).collect();
            for inversion in 0..pcs.len() {
                let mut order = pcs.clone();
                order.rotate_left(inversion);
                let cluster = voice_low_strings(&order).ok_or(format!("{quality:?} root {root} unvoiceable"))?;
                let got = recognize_chord(&cluster, &Tuning::STANDARD, 0);
                let want_root = if quality == ChordQuality::Aug {
                    ChordRoot::Ambiguous
                } else {
                    ChordRoot::Pitch(PitchClass::from_midi(root))
                };
                ensure(
                    got.as_ref()
                        .is_some_and(|r| r.quality == quality && r.root == want_root),
                    || format!("{quality:?} root {root} inversion {inversion}: got {got:?}"),
                )?;
                checked += 1;
            }
        }
    }
    let sus: Vec<Vec<i32>> = [0, 2, 4, 7]
        .iter()
        .flat_map(|&r| [vec![r, (r + 2) % 12, (r + 7) % 12], vec![r, (r + 5) % 12, (r + 7) % 12]])
        .collect();
    for pcs in &sus {
        let cluster = voice_low_strings(pcs).ok_or("sus unvoiceable")?;
        let got = recognize_chord(&cluster, &Tuning::STANDARD, 0);
        ensure(got.is_none(), || format!("sus cluster {pcs:?} matched {got:?}"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1), "chord oracle")?;
    Ok(format!(
        "{checked} voicings correct, {} sus clusters unmatched, {elapsed:.2?}",
        sus.len()
    ))
}

fn criterion_keys() -> Check {
    let mut rng = StdRng::seed_from_u64(0x6b6579);
    let mut cases = Vec::new();
    for tonic in 0..12u8 {
        for i in 0..10 {
            let mode = if i < 5 { Mode::Major } else { Mode::Minor };
            cases.push((tonic, mode, diatonic_score(&mut rng, tonic, mode)));
        }
    }
    let (mut tonic_ok, mut mode_ok) = (0, 0);
    let mut spent = Duration::ZERO;
    for (tonic, mode, score) in &cases {
        let start = Instant::now();
        let k = detect_key(score).map_err(|e| e.to_string())?;
        spent += start.elapsed();
        tonic_ok += usize::from(k.tonic.value() == *tonic);
        mode_ok += usize::from(k.mode == *mode);
    }
    let n = cases.len();
    let mean = spent / n as u32;
    ensure(tonic_ok == n && mode_ok == n, || {
        format!("tonic {tonic_ok}/{n}, mode {mode_ok}/{n}")
    })?;
    within(mean, Duration::from_millis(1), "mean key detection")?;
    Ok(format!("tonic {tonic_ok}/{n}, mode {mode_ok}/{n}, mean {mean:.2?}"))
}

fn criterion_voices() -> Check {
    let score = read_tab(&fixture("melody-bass-20.musicxml"), &ParseOptions::default())
        .map_err(|e| e.to_string())?
        .0;
    let expected = read_tag_rows("melody-bass-20.tags.csv");
    let got = computed_tag_rows(&score);
    ensure(score.measures.len() == 20, || format!("{} bars", score.measures.len()))?;
    let agree = got.iter().filter(|g| expected.contains(g)).count();
    ensure(agree == expected.len() && got.len() == expected.len(), || {
        let diff: Vec<_> = got.iter().filter(|g| !expected.contains(g)).take(3).collect();
        format!("{agree}/{} rows agree, first differences {diff:?}", expected.len())
    })?;
    Ok(format!("{agree}/{} tags agree", expected.len()))
}

fn criterion_codec() -> Check {
    let mut rng = StdRng::seed_from_u64(0x636f646563);
    let scores: Vec<Score> = (0..500).map(|_| random_normalized_score(&mut rng)).collect();
    let start = Instant::now();
    let mut tokens = 0;
    for (i, score) in scores.iter().enumerate() {
        let mode = if i % 2 == 0 {
            TokenMode::PitchOctave
        } else {
            TokenMode::OctavePitch
        };
        let first = encode_clip(score, mode).map_err(|e| format!("score {i}: {e}"))?;
        let json = first.to_json().map_err(|e| e.to_string())?;
        ensure(
            first.time.len() == first.len() && first.finger.len() == first.len(),
            || format!("score {i}: list lengths differ"),
        )?;
        for (p, f) in first.pitch.iter().zip(&first.finger) {
            let fingers: Vec<&str> = f.split(' ').collect();
            ensure(p.split(' ').count() == fingers.len(), || {
                format!("score {i}: '{p}' vs '{f}'")
            })?;
            let midi: Vec<i32> = fingers
                .iter()
                .filter(|&&f| f != "(R,R)")
                .map(|f| {
                    let (s, fr) = f.trim_matches(|c| c == '(' || c == ')').split_once(',').unwrap();
                    position_to_midi(s.parse().unwrap(), fr.parse().unwrap(), &first.tuning, first.capo).unwrap()
                })
                .collect();
            ensure(midi.windows(2).all(|w| w[0] >= w[1]), || {
                format!("score {i}: '{p}' not high to low")
            })?;
            tokens += 1;
        }
        let decoded = decode_clip(&EncodedClip::from_json(&json).map_err(|e| e.to_string())?)
            .map_err(|e| format!("score {i}: {e}"))?;
        let again = encode_clip(&decoded.score, mode)
            .and_then(|c| c.to_json())
            .map_err(|e| format!("score {i}: {e}"))?;
        ensure(again == json, || format!("score {i}: re-encoding differs"))?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5), "500 round trips")?;
    Ok(format!("500 scores, {tokens} tokens, {elapsed:.2?}"))
}

fn criterion_normalization() -> Check {
    let mut rng = StdRng::seed_from_u64(0x6e6f726d);
    let mut ties = 0;
    for i in 0..200 {
        let raw = random_raw_score(&mut rng);
        ties += raw.events().filter(|e| e.tie_start || e.tie_stop).count();
        let mut report = ParseReport::default();
        let merged = merge_voices(&raw, &mut report);
        let clean = clean_ties(&merged, &mut report).map_err(|e| format!("score {i}: {e}"))?;
        ensure(per_pitch_durations(&raw) == per_pitch_durations(&clean), || {
            format!("score {i}: per-pitch durations changed")
        })?;
        ensure(clean.events().all(|e| !e.tie_start && !e.tie_stop), || {
            format!("score {i}: tie flags remain")
        })?;
    }
    Ok(format!("200 scores, {ties} tie flags resolved, durations conserved"))
}

fn criterion_conversion() -> Check {
    let setups: [(&str, [i32; 6], Tuning, u8); 5] = [
        ("standard", [0; 6], Tuning::STANDARD, 0),
        ("drop D", [0, 0, 0, 0, 0, -2], Tuning::DROP_D, 0),
        ("open D", [-2, -2, -1, 0, 0, -2], Tuning::OPEN_D, 0),
        ("capo 2", [0; 6], Tuning::STANDARD, 2),
        ("capo 5", [0; 6], Tuning::STANDARD, 5),
    ];
    let start = Instant::now();
    let mut pairs = 0;
    for (name, offsets, tuning, capo) in setups {
        for midi in 28..=88 {
            let mut oracle = BTreeSet::new();
            for s in 1..=6u8 {
                let open = STANDARD_OPEN[usize::from(s) - 1] + offsets[usize::from(s) - 1] + i32::from(capo);
                let fret = midi - open;
                if (0..=i32::from(MAX_FRET - capo)).contains(&fret) {
                    oracle.insert((s, fret as u8));
                }
            }
            let got: BTreeSet<(u8, u8)> = match midi_to_positions(midi, &tuning, capo, MAX_FRET) {
                Ok(ps) => ps.iter().map(|p| (p.string(), p.fret())).collect(),
                Err(_) => BTreeSet::new(),
            };
            ensure(got == oracle, || format!("{name} MIDI {midi}: {got:?} vs {oracle:?}"))?;
            for &(s, f) in &got {
                let back = position_to_midi(s, f, &tuning, capo).map_err(|e| e.to_string())?;
                ensure(back == midi, || format!("{name} ({s},{f}) maps to {back}, not {midi}"))?;
                pairs += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1), "conversion sweep")?;
    Ok(format!("{pairs} positions checked over 5 setups, {elapsed:.2?}"))
}

/// Tonic triads on each beat of four bars of 4/4.
fn beat_chord_score() -> Score {
    let t = Tuning::STANDARD;
    let measures = (1..=4)
        .map(|bar| {
            let clusters = (0..4)
                .map(|q| {
                    let on = Beats::from_integer(q);
                    Cluster::new(
                        on,
                        vec![
                            note(on, b(1, 1), 5, 3, &t, 0),
                            note(on, b(1, 1), 4, 2, &t, 0),
                            note(on, b(1, 1), 3, 0, &t, 0),
                        ],
                    )
                })
                .collect();
            measure(bar, TimeSignature::COMMON, clusters)
        })
        .collect();
    Score {
        title: "beats".into(),
        measures,
        ..Score::default()
    }
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn sums_to_one(name: &str, values: impl IntoIterator<Item = f64>) -> Result<(), String> {
    let total: f64 = values.into_iter().sum();
    ensure((total - 1.0).abs() <= 1e-9, || format!("{name} sums to {total}"))
}

fn criterion_stats() -> Check {
    let mut rng = StdRng::seed_from_u64(0x7374617473);
    let mut corpus = vec![beat_chord_score()];
    corpus.push(diatonic_score(&mut rng, 7, Mode::Major));
    corpus.push(diatonic_score(&mut rng, 9, Mode::Minor));
    while corpus.len() < 10 {
        corpus.push(random_normalized_score(&mut rng));
    }
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let files: Vec<PathBuf> = corpus
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let p = tmp.path().join(format!("song{i:02}.score.json"));
            std::fs::write(&p, serde_json::to_string(s).unwrap()).unwrap();
            p
        })
        .collect();

    ensure(
        [0, 1, 2, 3].map(|q| grid_slot(Beats::from_integer(q)) + 1) == [1, 5, 9, 13],
        || "beat onsets not on slots 1/5/9/13".into(),
    )?;
    let beat_stats = CorpusStats::from_counts_default(&aggregate(&[beat_chord_score()]).unwrap()).unwrap();
    let occupied: Vec<usize> = (0..16)
        .filter(|&s| beat_stats.chord_grid.degree["I"][s] > 0.0)
        .map(|s| s + 1)
        .collect();
    ensure(occupied == [1, 5, 9, 13], || {
        format!("beat chords land on slots {occupied:?}")
    })?;

    let load = |paths: &[PathBuf]| -> Vec<Score> {
        paths
            .iter()
            .map(|p| serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap())
            .collect()
    };
    let stats = CorpusStats::from_counts_default(&aggregate(&load(&files)).unwrap()).map_err(|e| e.to_string())?;
    let grid = &stats.chord_grid;
    ensure(grid.chords > 0, || "no chords in corpus".into())?;
    sums_to_one("degree grid", grid.degree.values().flatten().copied())?;
    sums_to_one("function grid", grid.function.values().flatten().copied())?;
    sums_to_one("keys", stats.keys.iter().map(|s| s.probability))?;
    sums_to_one("pitches", stats.pitches.iter().map(|s| s.probability))?;
    sums_to_one("intervals", stats.intervals.iter().map(|s| s.probability))?;
    sums_to_one("durations", stats.durations.iter().map(|s| s.probability))?;
    sums_to_one("fingerboard", stats.fingerboard.cells.iter().flatten().copied())?;

    let reference = tmp.path().join("reference");
    stats.write_to(&reference).map_err(|e| e.to_string())?;
    let expected = read_tree(&reference);
    for round in 0..5 {
        let mut shuffled = files.clone();
        shuffled.shuffle(&mut rng);
        let dir = tmp.path().join(format!("shuffled{round}"));
        CorpusStats::from_counts_default(&aggregate(&load(&shuffled)).unwrap())
            .and_then(|s| s.write_to(&dir))
            .map_err(|e| e.to_string())?;
        ensure(read_tree(&dir) == expected, || {
            format!("shuffle {round}: outputs differ")
        })?;

        let cli_dir = tmp.path().join(format!("cli{round}"));
        let status = Command::new(env!("CARGO_BIN_EXE_tabproc"))
            .arg("--out")
            .arg(&cli_dir)
            .arg("stats")
            .args(&shuffled)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("stats exited with {status}"))?;
        ensure(read_tree(&cli_dir) == expected, || {
            format!("shuffle {round}: CLI outputs differ")
        })?;
    }
    Ok(format!(
        "10 scores, {} chords, all tables sum to 1, 5 shuffles identical",
        grid.chords
    ))
}

fn run_pipeline(out: &Path) -> Result<(), String> {
    let bin = env!("CARGO_BIN_EXE_tabproc");
    let corpus = fixture("corpus");
    let parsed = out.join("parse");
    let steps: [(&str, &Path, PathBuf); 4] = [
        ("parse", &corpus, parsed.clone()),
        ("encode", &parsed, out.join("encode")),
        ("analyze", &parsed, out.join("analyze")),
        ("stats", &parsed, out.join("stats")),
    ];
    for (cmd, input, dest) in steps {
        let status = Command::new(bin)
            .arg("--out")
            .arg(&dest)
            .arg(cmd)
            .arg(input)
            .env_remove("TABPROC_TECH_DICT")
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("{cmd} exited with {status}"))?;
    }
    Ok(())
}

fn criterion_cli() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_pipeline(a.path())?;
    run_pipeline(b.path())?;
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    ensure(ta.len() > 20, || format!("only {} files written", ta.len()))?;
    ensure(ta.keys().eq(tb.keys()), || "file sets differ".into())?;
    for (p, bytes) in &ta {
        ensure(tb[p] == *bytes, || format!("{} differs", p.display()))?;
    }
    Ok(format!("{} files identical across two runs", ta.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("chord recognizer oracle", criterion_chords),
        ("key detection", criterion_keys),
        ("melody/bassline extraction", criterion_voices),
        ("token codec round trip", criterion_codec),
        ("normalization conservation", criterion_normalization),
        ("conversion duality", criterion_conversion),
        ("stats pipeline", criterion_stats),
        ("CLI determinism", criterion_cli),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
