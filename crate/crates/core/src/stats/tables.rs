use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::counts::{function_of, probability, CorpusCounts, DEGREE_LABELS, FUNCTION_LABELS, GRID_SLOTS};
use crate::error::{Error, Result};
use crate::model::{Beats, KeyResult, Mode, PitchClass, MAX_FRET};

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct GridHistogram {
    pub slots: usize,
    pub chords: u64,
    /// Degree label (I..VII, other) to one probability per slot.
    pub degree: BTreeMap<String, Vec<f64>>,
    /// Function label (T, S, D, other) to one probability per slot.
    pub function: BTreeMap<String, Vec<f64>>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Share<K> {
    pub value: K,
    pub count: u64,
    pub probability: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlideDirection {
    Up,
    Down,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HarmonicPoint {
    pub string: u8,
    pub fret: u8,
    pub count: u64,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SlideArc {
    pub string: u8,
    pub from_fret: u8,
    pub to_fret: u8,
    pub direction: SlideDirection,
    pub count: u64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct FingerboardMap {
    pub max_fret: u8,
    /// `cells[string - 1][fret]`; column 0 is the open string.
    pub cells: Vec<Vec<f64>>,
    pub counts: Vec<Vec<u64>>,
    pub harmonics: Vec<HarmonicPoint>,
    pub slides: Vec<SlideArc>,
}

/// Normalized corpus statistics, ready to emit.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CorpusStats {
    pub scores: u64,
    pub keyless_scores: u64,
    pub skipped_measures: u64,
    pub chord_grid: GridHistogram,
    pub keys: Vec<Share<String>>,
    pub pitches: Vec<Share<u8>>,
    pub intervals: Vec<Share<u8>>,
    pub durations: Vec<Share<Beats>>,
    pub fingerboard: FingerboardMap,
}

pub fn chord_grid(c: &CorpusCounts) -> GridHistogram {
    let total = c.chord_count();
    let mut degree: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut function_counts = [[0u64; 4]; GRID_SLOTS];
    for (slot, row) in c.chord_grid.iter().enumerate() {
        for (d, &n) in row.iter().enumerate() {
            function_counts[slot][function_of(d)] += n;
        }
    }
    for (d, label) in DEGREE_LABELS.iter().enumerate() {
        let series = c.chord_grid.iter().map(|row| probability(row[d], total)).collect();
        degree.insert(label.to_string(), series);
    }
    let function = FUNCTION_LABELS
        .iter()
        .enumerate()
        .map(|(f, label)| {
            (
                label.to_string(),
                function_counts.iter().map(|row| probability(row[f], total)).collect(),
            )
        })
        .collect();
    GridHistogram {
        slots: GRID_SLOTS,
        chords: total,
        degree,
        function,
    }
}

fn key_label(tonic: u8, mode: Mode) -> String {
    KeyResult {
        tonic: PitchClass::from_midi(i32::from(tonic)),
        mode,
        score: 0,
    }
    .name()
}

/// All 24 keys, C major first, in pitch-class order.
pub fn key_histogram(c: &CorpusCounts) -> Vec<Share<String>> {
    let total: u64 = c.keys.values().sum();
    (0..12u8)
        .flat_map(|t| [Mode::Major, Mode::Minor].map(|m| (t, m)))
        .map(|k| {
            let count = c.keys.get(&k).copied().unwrap_or(0);
            Share {
                value: key_label(k.0, k.1),
                count,
                probability: probability(count, total),
            }
        })
        .collect()
}

fn shares<K: Clone>(counts: impl IntoIterator<Item = (K, u64)>) -> Vec<Share<K>> {
    let counts: Vec<(K, u64)> = counts.into_iter().collect();
    let total = counts.iter().map(|(_, n)| n).sum();
    counts
        .into_iter()
        .map(|(value, count)| Share {
            value,
            count,
            probability: probability(count, total),
        })
        .collect()
}

pub fn pitch_histogram(c: &CorpusCounts) -> Vec<Share<u8>> {
    shares(c.pitches.iter().map(|(&k, &v)| (k, v)))
}

/// Every interval class 0..11, including empty ones.
pub fn interval_histogram(c: &CorpusCounts) -> Vec<Share<u8>> {
    shares((0u8..12).map(|i| (i, c.intervals[usize::from(i)])))
}

pub fn duration_histogram(c: &CorpusCounts) -> Vec<Share<Beats>> {
    shares(c.durations.iter().map(|(&k, &v)| (k, v)))
}

/// Six strings by `max_fret + 1` columns; widened if a note sits higher.
pub fn fingerboard_map(c: &CorpusCounts, max_fret: u8) -> FingerboardMap {
    let width = c.positions.keys().map(|&(_, f)| f).max().unwrap_or(0).max(max_fret);
    let mut counts = vec![vec![0u64; usize::from(width) + 1]; 6];
    for (&(s, f), &n) in &c.positions {
        counts[usize::from(s) - 1][usize::from(f)] += n;
    }
    let total: u64 = c.positions.values().sum();
    let cells = counts
        .iter()
        .map(|row| row.iter().map(|&n| probability(n, total)).collect())
        .collect();
    let harmonics = c
        .harmonics
        .iter()
        .map(|(&(string, fret), &count)| HarmonicPoint { string, fret, count })
        .collect();
    let slides = c
        .slides
        .iter()
        .map(|(&(string, from_fret, to_fret), &count)| SlideArc {
            string,
            from_fret,
            to_fret,
            direction: if to_fret > from_fret {
                SlideDirection::Up
            } else {
                SlideDirection::Down
            },
            count,
        })
        .collect();
    FingerboardMap {
        max_fret: width,
        cells,
        counts,
        harmonics,
        slides,
    }
}

impl CorpusStats {
    /// Normalize the tallies. Fails when the corpus holds no sounding note.
    pub fn from_counts(c: &CorpusCounts, max_fret: u8) -> Result<Self> {
        if c.scores == 0 || c.note_count() == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(CorpusStats {
            scores: c.scores,
            keyless_scores: c.keyless_scores,
            skipped_measures: c.skipped_measures,
            chord_grid: chord_grid(c),
            keys: key_histogram(c),
            pitches: pitch_histogram(c),
            intervals: interval_histogram(c),
            durations: duration_histogram(c),
            fingerboard: fingerboard_map(c, max_fret),
        })
    }

    pub fn from_counts_default(c: &CorpusCounts) -> Result<Self> {
        Self::from_counts(c, MAX_FRET)
    }

    /// Write every table as CSV plus `report.json` into `dir`; returns the
    /// paths written, in a fixed order.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut emit = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<()> {
            let path = dir.join(name);
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
            written.push(path);
            Ok(())
        };

        let slot_rows = |series: &BTreeMap<String, Vec<f64>>, labels: &[&str]| -> Vec<Vec<String>> {
            (0..GRID_SLOTS)
                .map(|s| {
                    std::iter::once((s + 1).to_string())
                        .chain(labels.iter().map(|l| series[*l][s].to_string()))
                        .collect()
                })
                .collect()
        };
        let mut header = vec!["slot"];
        header.extend(DEGREE_LABELS);
        emit(
            "chord_grid_degree.csv",
            &header,
            slot_rows(&self.chord_grid.degree, &DEGREE_LABELS),
        )?;
        let mut header = vec!["slot"];
        header.extend(FUNCTION_LABELS);
        emit(
            "chord_grid_function.csv",
            &header,
            slot_rows(&self.chord_grid.function, &FUNCTION_LABELS),
        )?;

        let share_rows =
            |v: Vec<(String, Vec<String>)>| v.into_iter().map(|(a, rest)| [vec![a], rest].concat()).collect();
        emit(
            "keys.csv",
            &["key", "count", "probability"],
            share_rows(
                self.keys
                    .iter()
                    .map(|s| (s.value.clone(), vec![s.count.to_string(), s.probability.to_string()]))
                    .collect(),
            ),
        )?;
        emit(
            "pitches.csv",
            &["midi", "name", "count", "probability"],
            share_rows(
                self.pitches
                    .iter()
                    .map(|s| {
                        (
                            s.value.to_string(),
                            vec![pitch_name(s.value), s.count.to_string(), s.probability.to_string()],
                        )
                    })
                    .collect(),
            ),
        )?;
        emit(
            "intervals.csv",
            &["semitones", "count", "probability"],
            share_rows(
                self.intervals
                    .iter()
                    .map(|s| {
                        (
                            s.value.to_string(),
                            vec![s.count.to_string(), s.probability.to_string()],
                        )
                    })
                    .collect(),
            ),
        )?;
        emit(
            "durations.csv",
            &["duration", "beats", "count", "probability"],
            share_rows(
                self.durations
                    .iter()
                    .map(|s| {
                        (
                            s.value.to_string(),
                            vec![
                                s.value.to_f64().to_string(),
                                s.count.to_string(),
                                s.probability.to_string(),
                            ],
                        )
                    })
                    .collect(),
            ),
        )?;

        let fb = &self.fingerboard;
        let mut cells = Vec::new();
        for (si, row) in fb.cells.iter().enumerate() {
            for (fret, p) in row.iter().enumerate() {
                cells.push(vec![
                    (si + 1).to_string(),
                    fret.to_string(),
                    fb.counts[si][fret].to_string(),
                    p.to_string(),
                ]);
            }
        }
        emit("fingerboard.csv", &["string", "fret", "count", "probability"], cells)?;
        emit(
            "harmonics.csv",
            &["string", "fret", "count"],
            fb.harmonics
                .iter()
                .map(|h| vec![h.string.to_string(), h.fret.to_string(), h.count.to_string()])
                .collect(),
        )?;
        emit(
            "slides.csv",
            &["string", "from_fret", "to_fret", "direction", "count"],
            fb.slides
                .iter()
                .map(|a| {
                    let dir = match a.direction {
                        SlideDirection::Up => "up",
                        SlideDirection::Down => "down",
                    };
                    vec![
                        a.string.to_string(),
                        a.from_fret.to_string(),
                        a.to_fret.to_string(),
                        dir.to_string(),
                        a.count.to_string(),
                    ]
                })
                .collect(),
        )?;

        let report = dir.join("report.json");
        fs::write(&report, serde_json::to_string_pretty(self)? + "\n")?;
        written.push(report);
        Ok(written)
    }
}

/// Sharp spelling with octave, middle C = C4.
pub fn pitch_name(midi: u8) -> String {
    format!(
        "{}{}",
        PitchClass::from_midi(i32::from(midi)).sharp_name(),
        i32::from(midi) / 12 - 1
    )
}
