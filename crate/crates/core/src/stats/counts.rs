use std::collections::BTreeMap;

use crate::analysis::{detect_key, recognize_chord};
use crate::error::Result;
use crate::ingest::normalize_capo;
use crate::model::{Beats, ChordRoot, Mode, Score, TechniqueKind, TimeSignature};
use crate::par;
use num_rational::Ratio;
use num_traits::ToPrimitive;

pub const GRID_SLOTS: usize = 16;
/// Degree columns I..VII, then the bucket for roots outside the key.
pub const DEGREE_LABELS: [&str; 8] = ["I", "II", "III", "IV", "V", "VI", "VII", "other"];
pub const OTHER_DEGREE: usize = 7;
pub const FUNCTION_LABELS: [&str; 4] = ["T", "S", "D", "other"];

const MAJOR_DEGREES: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];
const MINOR_DEGREES: [u8; 7] = [0, 2, 3, 5, 7, 8, 10];

/// Functional group column for a degree column.
pub fn function_of(degree: usize) -> usize {
    match degree {
        0 | 2 | 5 => 0,
        1 | 3 => 1,
        4 | 6 => 2,
        _ => 3,
    }
}

/// Degree column of a chord root relative to a key.
pub fn degree_of(root: ChordRoot, tonic: u8, mode: Mode) -> usize {
    let ChordRoot::Pitch(pc) = root else {
        return OTHER_DEGREE;
    };
    let rel = (pc.value() + 12 - tonic) % 12;
    let table = match mode {
        Mode::Major => &MAJOR_DEGREES,
        Mode::Minor => &MINOR_DEGREES,
    };
    table.iter().position(|&d| d == rel).unwrap_or(OTHER_DEGREE)
}

/// 0-based sixteenth slot of an onset in a 4/4 bar: nearest slot, halfway
/// cases to the earlier one, clamped to the bar.
pub fn grid_slot(onset: Beats) -> usize {
    let x = onset.ratio() * Ratio::from_integer(4) - Ratio::new(1, 2);
    x.ceil().to_integer().clamp(0, GRID_SLOTS as i64 - 1) as usize
}

/// Exact per-corpus tallies. Merging is associative and commutative.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CorpusCounts {
    pub scores: u64,
    /// Scores without a sounding note; they have no key.
    pub keyless_scores: u64,
    /// Measures left out of the chord grid because they are not in 4/4.
    pub skipped_measures: u64,
    pub chord_grid: [[u64; 8]; GRID_SLOTS],
    /// (tonic pitch class, mode) per score.
    pub keys: BTreeMap<(u8, Mode), u64>,
    pub pitches: BTreeMap<u8, u64>,
    pub intervals: [u64; 12],
    pub durations: BTreeMap<Beats, u64>,
    /// (string, fret) of every sounding note.
    pub positions: BTreeMap<(u8, u8), u64>,
    pub harmonics: BTreeMap<(u8, u8), u64>,
    /// (string, from fret, to fret) of every slide with a known target.
    pub slides: BTreeMap<(u8, u8, u8), u64>,
}

fn add_map<K: Ord>(into: &mut BTreeMap<K, u64>, from: BTreeMap<K, u64>) {
    for (k, v) in from {
        *into.entry(k).or_default() += v;
    }
}

impl CorpusCounts {
    /// Tally one score after moving it to capo 0.
    pub fn of_score(score: &Score) -> Result<Self> {
        let score = normalize_capo(score)?;
        let mut c = CorpusCounts {
            scores: 1,
            ..Default::default()
        };
        let key = match detect_key(&score) {
            Ok(k) => {
                *c.keys.entry((k.tonic.value(), k.mode)).or_default() += 1;
                Some(k)
            }
            Err(_) => {
                c.keyless_scores = 1;
                None
            }
        };
        for m in &score.measures {
            let in_grid = m.time_signature == TimeSignature::COMMON;
            if !in_grid {
                c.skipped_measures += 1;
            }
            for cl in &m.clusters {
                if let (true, Some(k)) = (in_grid, key) {
                    if let Some(chord) = recognize_chord(cl, &score.tuning, score.capo) {
                        let degree = degree_of(chord.root, k.tonic.value(), k.mode);
                        c.chord_grid[grid_slot(cl.onset)][degree] += 1;
                    }
                }
                let mut midis: Vec<u8> = cl.pitched().filter_map(|e| e.midi()).collect();
                midis.sort_unstable();
                for w in midis.windows(2) {
                    c.intervals[usize::from((w[1] - w[0]) % 12)] += 1;
                }
                for e in cl.pitched() {
                    if let Some(midi) = e.midi() {
                        *c.pitches.entry(midi).or_default() += 1;
                    }
                    *c.durations.entry(e.duration).or_default() += 1;
                    let Some(pos) = e.position else { continue };
                    *c.positions.entry((pos.string(), pos.fret())).or_default() += 1;
                    for t in &e.techniques {
                        match (t.kind(), t.detail()) {
                            (TechniqueKind::NaturalHarmonic, _) => {
                                *c.harmonics.entry((pos.string(), pos.fret())).or_default() += 1;
                            }
                            (TechniqueKind::SlideOut, Some(to)) => {
                                *c.slides.entry((pos.string(), pos.fret(), to)).or_default() += 1;
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn merge(mut self, other: CorpusCounts) -> CorpusCounts {
        self.scores += other.scores;
        self.keyless_scores += other.keyless_scores;
        self.skipped_measures += other.skipped_measures;
        for (row, o) in self.chord_grid.iter_mut().zip(other.chord_grid) {
            for (a, b) in row.iter_mut().zip(o) {
                *a += b;
            }
        }
        for (a, b) in self.intervals.iter_mut().zip(other.intervals) {
            *a += b;
        }
        add_map(&mut self.keys, other.keys);
        add_map(&mut self.pitches, other.pitches);
        add_map(&mut self.durations, other.durations);
        add_map(&mut self.positions, other.positions);
        add_map(&mut self.harmonics, other.harmonics);
        add_map(&mut self.slides, other.slides);
        self
    }

    pub fn note_count(&self) -> u64 {
        self.pitches.values().sum()
    }

    pub fn chord_count(&self) -> u64 {
        self.chord_grid.iter().flatten().sum()
    }
}

fn merge_results(a: Result<CorpusCounts>, b: Result<CorpusCounts>) -> Result<CorpusCounts> {
    Ok(a?.merge(b?))
}

/// Tally a corpus, in parallel when the crate is built with `parallel`.
pub fn aggregate(scores: &[Score]) -> Result<CorpusCounts> {
    par::map_reduce(
        scores,
        || Ok(CorpusCounts::default()),
        CorpusCounts::of_score,
        merge_results,
    )
}

/// Tally a corpus on the calling thread.
pub fn aggregate_sequential(scores: &[Score]) -> Result<CorpusCounts> {
    par::sequential::map_reduce(
        scores,
        || Ok(CorpusCounts::default()),
        CorpusCounts::of_score,
        merge_results,
    )
}

/// Share of `count` in `total` (0 when the total is 0).
pub fn probability(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        Ratio::new(count, total).to_f64().unwrap_or(0.0)
    }
}
