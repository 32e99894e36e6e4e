#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use tabproc::analysis::{midi_to_positions, position_to_midi};
use tabproc::model::{Beats, Cluster, Measure, Mode, NoteEvent, PitchSpec, Position, Score, TimeSignature, Tuning};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn b(n: i64, d: i64) -> Beats {
    Beats::new(n, d)
}

pub fn note(onset: Beats, duration: Beats, string: u8, fret: u8, tuning: &Tuning, capo: u8) -> NoteEvent {
    let midi = position_to_midi(string, fret, tuning, capo).unwrap();
    NoteEvent::pitched(
        onset,
        duration,
        PitchSpec::from_midi(midi, false).unwrap(),
        Position::new(string, fret).unwrap(),
    )
}

pub fn measure(index: u32, time_signature: TimeSignature, clusters: Vec<Cluster>) -> Measure {
    Measure {
        index,
        divisions: 12,
        time_signature,
        clusters,
    }
}

/// Sum of sounding time per MIDI pitch.
pub fn per_pitch_durations(score: &Score) -> BTreeMap<u8, Beats> {
    let mut out: BTreeMap<u8, Beats> = BTreeMap::new();
    for e in score.pitched_events() {
        *out.entry(e.midi().unwrap()).or_default() += e.duration;
    }
    out
}

const TUNINGS: [Tuning; 3] = [Tuning::STANDARD, Tuning::DROP_D, Tuning::OPEN_D];
const SIGNATURES: [(u32, u32); 4] = [(4, 4), (3, 4), (2, 4), (6, 8)];

fn step(rng: &mut StdRng) -> Beats {
    *[b(1, 4), b(1, 2), b(1, 1), b(1, 3), b(2, 3), b(3, 2)]
        .choose(rng)
        .unwrap()
}

/// A voice-merged score with random rhythm (including triplets), chords of
/// one to four notes on distinct strings, rests, notes ringing across
/// barlines and occasional time-signature changes.
pub fn random_normalized_score(rng: &mut StdRng) -> Score {
    let tuning = *TUNINGS.choose(rng).unwrap();
    let capo = rng.gen_range(0..=5);
    let mut sig = SIGNATURES[rng.gen_range(0..SIGNATURES.len())];
    let bars = rng.gen_range(1..=5);
    let mut measures = Vec::new();
    for bar in 1..=bars {
        if rng.gen_bool(0.2) {
            sig = SIGNATURES[rng.gen_range(0..SIGNATURES.len())];
        }
        let ts = TimeSignature::new(sig.0, sig.1).unwrap();
        let len = ts.length().unwrap();
        let mut clusters = Vec::new();
        let mut t = Beats::ZERO;
        while t < len {
            let s = step(rng);
            if rng.gen_bool(0.15) {
                clusters.push(Cluster::new(t, vec![NoteEvent::rest(t, s)]));
            } else {
                let mut strings: Vec<u8> = (1..=6).collect();
                strings.shuffle(rng);
                let k = rng.gen_range(1..=4);
                let events = strings[..k]
                    .iter()
                    .map(|&string| {
                        let d = if rng.gen_bool(0.6) { s } else { step(rng) + step(rng) };
                        let mut e = note(t, d, string, rng.gen_range(0..=12), &tuning, capo);
                        let midi = e.midi().unwrap();
                        e.content = tabproc::model::NoteContent::Pitch(
                            PitchSpec::from_midi(i32::from(midi), rng.gen()).unwrap(),
                        );
                        e
                    })
                    .collect();
                clusters.push(Cluster::new(t, events));
            }
            t += s;
        }
        measures.push(measure(bar, ts, clusters));
    }
    Score {
        title: "random".into(),
        artist: String::new(),
        tuning,
        capo,
        measures,
    }
}

/// A score as it comes out of the parser: two voices on separate string
/// groups, tie chains split at barlines and at random points, orphan tie
/// flags, and rests in each voice.
pub fn random_raw_score(rng: &mut StdRng) -> Score {
    let tuning = Tuning::STANDARD;
    let bars = rng.gen_range(2..=5);
    let bar_len = b(4, 1);
    let total = bar_len * bars as i64;
    let mut pieces: Vec<(Beats, NoteEvent)> = Vec::new();

    for (voice, strings) in [(1u8, [1u8, 2, 3]), (2u8, [4u8, 5, 6])] {
        let mut t = Beats::ZERO;
        while t < total {
            let len = (step(rng)
                + if rng.gen_bool(0.4) {
                    step(rng) + step(rng)
                } else {
                    Beats::ZERO
                })
            .min(total - t);
            if rng.gen_bool(0.15) {
                pieces.push((t, NoteEvent::rest(Beats::ZERO, len).with_voice(voice)));
                t += len;
                continue;
            }
            let k = rng.gen_range(1..=2);
            let mut chosen = strings.to_vec();
            chosen.shuffle(rng);
            for &string in &chosen[..k] {
                let fret = rng.gen_range(0..=9);
                // Cut points: every barline inside the note plus a random split.
                let mut cuts: Vec<Beats> = Vec::new();
                let mut bl = bar_len;
                while bl < total {
                    if bl > t && bl < t + len {
                        cuts.push(bl);
                    }
                    bl += bar_len;
                }
                if rng.gen_bool(0.3) {
                    let mid = t + Beats::new(len.numer(), len.denom() * 2);
                    if !cuts.contains(&mid) {
                        cuts.push(mid);
                    }
                }
                cuts.sort();
                let mut edges = vec![t];
                edges.extend(cuts);
                edges.push(t + len);
                let n = edges.len() - 1;
                for i in 0..n {
                    let mut e = note(Beats::ZERO, edges[i + 1] - edges[i], string, fret, &tuning, 0).with_voice(voice);
                    e.tie_start = i + 1 < n;
                    e.tie_stop = i > 0;
                    pieces.push((edges[i], e));
                }
                // Occasional dangling flags.
                if rng.gen_bool(0.05) {
                    let last = pieces.last_mut().unwrap();
                    last.1.tie_start = true;
                }
            }
            t += len;
        }
    }

    let mut measures: Vec<Measure> = (1..=bars)
        .map(|i| measure(i as u32, TimeSignature::COMMON, Vec::new()))
        .collect();
    let mut grouped: BTreeMap<(usize, Beats, u8), Vec<NoteEvent>> = BTreeMap::new();
    for (abs, mut e) in pieces {
        let bar = (abs.ratio() / bar_len.ratio()).floor().to_integer() as usize;
        let onset = abs - bar_len * bar as i64;
        e.onset = onset;
        grouped.entry((bar, onset, e.voice)).or_default().push(e);
    }
    for ((bar, onset, _), events) in grouped {
        measures[bar].clusters.push(Cluster::new(onset, events));
    }
    Score {
        title: "raw".into(),
        artist: String::new(),
        tuning,
        capo: 0,
        measures,
    }
}

/// Semitone offsets of the major scale.
pub const MAJOR: [i32; 7] = [0, 2, 4, 5, 7, 9, 11];

/// Random note counts over the diatonic set of `tonic`/`mode`, every scale
/// degree present at least once, and the fifth of the relative major
/// outnumbering its sixth for major keys (the other way round for minor).
pub fn diatonic_score(rng: &mut StdRng, tonic: u8, mode: Mode) -> Score {
    let major_tonic = match mode {
        Mode::Major => i32::from(tonic),
        Mode::Minor => i32::from(tonic) + 3,
    };
    let mut counts: Vec<u32> = (0..7).map(|_| rng.gen_range(1..=6)).collect();
    let (hi, lo) = match mode {
        Mode::Major => (4, 5),
        Mode::Minor => (5, 4),
    };
    if counts[hi] <= counts[lo] {
        counts[hi] = counts[lo] + rng.gen_range(1..=3);
    }
    let mut pcs: Vec<i32> = Vec::new();
    for (deg, &n) in counts.iter().enumerate() {
        pcs.extend(std::iter::repeat_n(
            (major_tonic + MAJOR[deg]).rem_euclid(12),
            n as usize,
        ));
    }
    pcs.shuffle(rng);
    let tuning = Tuning::STANDARD;
    let mut measures = Vec::new();
    for (i, chunk) in pcs.chunks(4).enumerate() {
        let clusters = chunk
            .iter()
            .enumerate()
            .map(|(j, &pc)| {
                let midi = 48 + pc + 12 * rng.gen_range(0..=1);
                let pos = midi_to_positions(midi, &tuning, 0, 24).unwrap()[0];
                let onset = Beats::from_integer(j as i64);
                Cluster::new(
                    onset,
                    vec![note(
                        onset,
                        Beats::from_integer(1),
                        pos.string(),
                        pos.fret(),
                        &tuning,
                        0,
                    )],
                )
            })
            .collect();
        measures.push(measure(i as u32 + 1, TimeSignature::COMMON, clusters));
    }
    Score {
        title: "diatonic".into(),
        artist: String::new(),
        tuning,
        capo: 0,
        measures,
    }
}

/// One row of the hand-made melody/bass annotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TagRow {
    pub bar: u32,
    pub onset: Beats,
    pub string: u8,
    pub fret: u8,
    pub tag: String,
}

pub fn read_tag_rows(name: &str) -> Vec<TagRow> {
    let mut reader = csv::Reader::from_path(fixture(name)).unwrap();
    let mut rows: Vec<TagRow> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            TagRow {
                bar: r[0].parse().unwrap(),
                onset: r[1].parse().unwrap(),
                string: r[2].parse().unwrap(),
                fret: r[3].parse().unwrap(),
                tag: r[4].to_string(),
            }
        })
        .collect();
    rows.sort();
    rows
}

/// The extractor's tags in the same row form.
pub fn computed_tag_rows(score: &Score) -> Vec<TagRow> {
    let mut rows: Vec<TagRow> = tabproc::analysis::classify_voices(score)
        .into_iter()
        .map(|(r, tag)| {
            let e = r.get(score).unwrap();
            TagRow {
                bar: score.measures[r.measure].index,
                onset: e.onset,
                string: e.string().unwrap(),
                fret: e.fret().unwrap(),
                tag: serde_json::to_value(tag).unwrap().as_str().unwrap().to_string(),
            }
        })
        .collect();
    rows.sort();
    rows
}
